"""Simulation experiments: the heavy-tailed main setting, benchmarks B1-B3, figure tables.

In the main setting a pair of uniforms ``(U, V)`` drawn from a copula drives two
Pareto parameters ``theta = Q(U)`` and ``theta' = Q'(V)``. Both go through the
log-linear payoff transform, giving the payoff ``Y`` (from ``theta``) and the
actual loss ``X`` (from ``theta'``).
"""
from dataclasses import asdict, dataclass, field, replace
import math
import warnings

import numpy as np
import pandas as pd
from scipy import optimize

from ._rng import derive_seed, make_rng
from .copulas import CopulaSpec, Family, sample_copula
from .errors import DomainError
from .gaussian_oracle import (
    GaussianPairSpec,
    cond_mean_diff_asymptotic,
    cond_mean_diff_exact,
    cond_sq_diff_asymptotic,
    cond_sq_diff_exact,
    sample_bivariate_gaussian,
)
from .margins import ParetoSpec, PayoffTransform, TransformedParetoSpec
from .tail_metrics import DEFAULT_LEVELS, PairedSample, excess_curve

__all__ = [
    "MainSettingConfig",
    "BenchmarkConfig",
    "run_main_setting",
    "matched_noise_variance",
    "benchmark_gaussian_spec",
    "run_benchmark",
    "ratio_curves",
    "curve_table",
    "figure_suite",
    "gaussian_check",
    "FIGURES",
    "FIG_FAMILIES",
    "TAUS",
]

TAUS = (0.3, 0.5, 0.7)
FIG_FAMILIES = (Family.FRANK, Family.GUMBEL, Family.CLAYTON_SURVIVAL)
FIGURES = {
    "fig1": None,
    "fig2": Family.CLAYTON_SURVIVAL,
    "fig3": Family.GUMBEL,
    "fig4": Family.FRANK,
}
_BENCHMARKS = ("B1", "B2", "B3")


@dataclass(frozen=True)
class MainSettingConfig:
    """Parameters of the cyber-inspired main setting.

    ``theta_shape`` and ``theta_prime_shape`` are the Pareto shapes of the
    payoff parameter and of the loss parameter. ``alpha_prime`` and
    ``beta_prime`` default to ``alpha`` and ``beta``.
    """

    u: float = 7e4
    theta_shape: float = 1.4
    alpha: float = 9.59
    beta: float = 0.5
    theta_prime_shape: float = 1.3
    alpha_prime: float = None
    beta_prime: float = None
    family: str = "frank"
    tau: float = 0.3
    n: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family).value)
        if self.alpha_prime is None:
            object.__setattr__(self, "alpha_prime", self.alpha)
        if self.beta_prime is None:
            object.__setattr__(self, "beta_prime", self.beta)
        if not 0 < self.tau < 1:
            raise DomainError(f"tau must lie in (0, 1), got {self.tau}")
        if self.n < 1000:
            raise DomainError(f"n must be at least 1000, got {self.n}")
        if self.seed < 0:
            raise DomainError("seed must be non-negative")
        if self.gamma_x <= self.gamma_y:
            warnings.warn(
                f"loss tail index {self.gamma_x:.3f} does not exceed payoff tail index "
                f"{self.gamma_y:.3f}; the heavy-tail gap results assume it does",
                stacklevel=3,
            )

    @property
    def y_spec(self):
        return TransformedParetoSpec(
            ParetoSpec(self.u, self.theta_shape), PayoffTransform(self.alpha, self.beta)
        )

    @property
    def x_spec(self):
        return TransformedParetoSpec(
            ParetoSpec(self.u, self.theta_prime_shape),
            PayoffTransform(self.alpha_prime, self.beta_prime),
        )

    @property
    def gamma_x(self):
        return self.beta_prime / self.theta_prime_shape

    @property
    def gamma_y(self):
        return self.beta / self.theta_shape

    @property
    def copula(self):
        return CopulaSpec.from_tau(self.family, self.tau)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class BenchmarkConfig:
    """A benchmark setting; ``noise_var`` overrides the variance-matched value."""

    setting: str
    rho: float = None
    n: int = 1_000_000
    seed: int = 0
    noise_var: float = None

    def __post_init__(self):
        if self.setting not in _BENCHMARKS:
            raise DomainError(f"benchmark setting must be one of {_BENCHMARKS}, got {self.setting!r}")
        if self.setting == "B3" and (self.rho is None or not -1 < self.rho < 1):
            raise DomainError("B3 needs a correlation rho in (-1, 1)")
        if self.noise_var is not None and self.noise_var < 0:
            raise DomainError("noise variance must be non-negative")
        if self.n < 1:
            raise DomainError("n must be positive")

    def to_dict(self):
        return asdict(self)


def _from_survival(sv, spec):
    p = spec.as_pareto()
    return p.u * sv ** (-1.0 / p.b)


def run_main_setting(cfg):
    """Sample ``(X, Y)`` for the main setting."""
    uv = sample_copula(cfg.copula, cfg.n, derive_seed(cfg.seed, "main"))
    # the payoff draws on the first coordinate, the loss on the second
    y = _from_survival(1.0 - uv[:, 0], cfg.y_spec)
    x = _from_survival(1.0 - uv[:, 1], cfg.x_spec)
    del uv
    label = f"main:{cfg.family}:tau={cfg.tau:g}"
    return PairedSample(x=x, y=y, seed=cfg.seed, label=label)


def _target_variance(base):
    var_x = base.x_spec.variance()
    if math.isinf(var_x):
        raise DomainError(
            f"main-setting Var(X) is infinite for theta_prime_shape={base.theta_prime_shape}, "
            f"beta_prime={base.beta_prime}; benchmarks need a finite variance to match"
        )
    return var_x


def matched_noise_variance(setting, base, tol=1e-10):
    """Noise variance making ``Var(X)`` in B1/B2 equal the main-setting ``Var(X)``.

    B1 adds ``N(0, s2)`` to ``Y``: ``s2 = Var(X_main) - Var(Y)``. B2 multiplies
    ``Y`` by ``exp(N(0, s2))``, so ``Var(X) = E[Y^2] e^{2 s2} - E[Y]^2 e^{s2}``,
    solved for ``s2`` by bisection on ``(0, 10]``.
    """
    target = _target_variance(base)
    y = base.y_spec
    m1, m2 = y.moment(1), y.moment(2)
    if math.isinf(m2):
        raise DomainError(
            f"{setting}: Var(Y) is infinite for theta_shape={base.theta_shape}, beta={base.beta}; "
            "no noise variance can match the finite main-setting Var(X)"
        )
    var_y = m2 - m1 * m1
    if target < var_y:
        raise DomainError(f"{setting}: target Var(X)={target:.6g} is below Var(Y)={var_y:.6g}")
    if setting == "B1":
        return target - var_y
    if setting != "B2":
        raise DomainError(f"noise variance is only defined for B1 and B2, not {setting}")

    def g(s2):
        # relative mismatch keeps the bisection scale-free
        return (m2 * math.exp(2.0 * s2) - m1 * m1 * math.exp(s2)) / target - 1.0

    if g(10.0) < 0:
        raise DomainError("B2: no noise variance in (0, 10] matches Var(X)")
    if g(0.0) >= 0:
        return 0.0
    return optimize.bisect(g, 0.0, 10.0, xtol=tol, maxiter=500)


def benchmark_gaussian_spec(base, rho):
    """Gaussian pair with the main setting's means and variances."""
    vx, vy = _target_variance(base), base.y_spec.variance()
    if math.isinf(vy):
        raise DomainError("B3: Var(Y) is infinite in the main setting")
    return GaussianPairSpec(
        mu_x=base.x_spec.moment(1),
        mu_y=base.y_spec.moment(1),
        sigma_x=math.sqrt(vx),
        sigma_y=math.sqrt(vy),
        rho=rho,
    )


def run_benchmark(cfg, base):
    """Sample ``(X, Y)`` for benchmark B1, B2 or B3 around ``base``."""
    label = f"bench:{cfg.setting}" + (f":rho={cfg.rho:g}" if cfg.setting == "B3" else "")
    if cfg.setting == "B3":
        spec = benchmark_gaussian_spec(base, cfg.rho)
        s = sample_bivariate_gaussian(spec, cfg.n, derive_seed(cfg.seed, "bench", "B3", f"{cfg.rho!r}"))
        return PairedSample(x=s.x, y=s.y, seed=cfg.seed, label=label)
    s2 = matched_noise_variance(cfg.setting, base) if cfg.noise_var is None else cfg.noise_var
    y = base.y_spec.sample(cfg.n, derive_seed(cfg.seed, "bench", cfg.setting, "y"))
    eps = math.sqrt(s2) * make_rng(cfg.seed, "bench", cfg.setting, "noise").standard_normal(cfg.n)
    x = y + eps if cfg.setting == "B1" else y * np.exp(eps)
    return PairedSample(x=x, y=y, seed=cfg.seed, label=label)


def ratio_curves(model, benchmark):
    """Pointwise ``model / benchmark`` on a shared quantile grid.

    Points where the benchmark estimate is zero, non-finite or flagged are
    returned as NaN (missing) rather than 0 or inf.
    """
    qm, qb = model.quantiles, benchmark.quantiles
    if len(model) != len(benchmark) or not np.allclose(qm, qb, equal_nan=True):
        raise DomainError("model and benchmark curves are on different quantile grids")
    rows = []
    for pm, pb in zip(model.points, benchmark.points):
        bad = pb.flagged or not np.isfinite(pb.estimate) or pb.estimate == 0 or not np.isfinite(pm.estimate)
        rows.append(
            {
                "quantile": pm.quantile,
                "s": pm.s,
                "s_benchmark": pb.s,
                "model_estimate": pm.estimate,
                "benchmark_estimate": pb.estimate,
                "ratio": math.nan if bad else pm.estimate / pb.estimate,
            }
        )
    return pd.DataFrame(rows)


def curve_table(curve, **labels):
    df = pd.DataFrame(
        {
            "quantile": curve.quantiles,
            "s": curve.s,
            "estimate": curve.estimates,
            "std_error": curve.std_errors,
            "n_exceed": curve.n_exceed,
        }
    )
    for i, (k, v) in enumerate(labels.items()):
        df.insert(i, k, v)
    return df


def _main_curves(base, family, tau, levels):
    cfg = replace(base, family=Family(family).value, tau=tau)
    sample = run_main_setting(cfg)
    return {m: excess_curve(sample, metric=m, levels=levels) for m in ("mean", "square")}


def _bench_curves(base, setting, rho, levels):
    bc = BenchmarkConfig(setting=setting, rho=rho, n=base.n, seed=base.seed)
    sample = run_benchmark(bc, base)
    return {m: excess_curve(sample, metric=m, levels=levels) for m in ("mean", "square")}


def figure_suite(which, n=1_000_000, seed=0, base=None, levels=DEFAULT_LEVELS):
    """Tidy tables behind one figure.

    ``fig1`` gives one table per metric (``mean``, ``square``) with a series for
    every family and tau. ``fig2``/``fig3``/``fig4`` give ratio tables of the
    survival Clayton, Gumbel and Frank models against B1, B2 and B3
    (``mean_ratio``, ``square_ratio``); B3 uses ``rho`` equal to the model tau.
    """
    if which not in FIGURES:
        raise DomainError(f"unknown figure {which!r}; valid ids: {', '.join(FIGURES)}")
    base = MainSettingConfig(n=n, seed=seed) if base is None else replace(base, n=n, seed=seed)
    if which == "fig1":
        tables = {"mean": [], "square": []}
        for fam in FIG_FAMILIES:
            for tau in TAUS:
                curves = _main_curves(base, fam, tau, levels)
                for metric, curve in curves.items():
                    tables[metric].append(curve_table(curve, family=fam.value, tau_or_rho=tau))
        return {k: pd.concat(v, ignore_index=True) for k, v in tables.items()}

    fam = FIGURES[which]
    bench = {("B1", None): _bench_curves(base, "B1", None, levels), ("B2", None): _bench_curves(base, "B2", None, levels)}
    for tau in TAUS:
        bench[("B3", tau)] = _bench_curves(base, "B3", tau, levels)
    tables = {"mean_ratio": [], "square_ratio": []}
    for tau in TAUS:
        model = _main_curves(base, fam, tau, levels)
        for setting, rho in (("B1", None), ("B2", None), ("B3", tau)):
            for metric in ("mean", "square"):
                df = ratio_curves(model[metric], bench[(setting, rho)][metric])
                df.insert(0, "benchmark_rho", math.nan if rho is None else rho)
                df.insert(0, "benchmark", setting)
                df.insert(0, "tau", tau)
                df.insert(0, "family", fam.value)
                tables[f"{metric}_ratio"].append(df)
    return {k: pd.concat(v, ignore_index=True) for k, v in tables.items()}


def gaussian_check(spec, n=1_000_000, seed=0, s_grid=None):
    """Monte Carlo gap measures against the exact and asymptotic Gaussian values.

    Returns one row per ``(metric, s)`` with the z-score of the Monte Carlo
    estimate against the exact value.
    """
    if s_grid is None:
        s_grid = spec.mu_x + spec.sigma_x * np.array([0.0, 1.0, 2.0])
    sample = sample_bivariate_gaussian(spec, n, seed)
    rows = []
    for metric, exact_f, asym_f in (
        ("mean", cond_mean_diff_exact, cond_mean_diff_asymptotic),
        ("square", cond_sq_diff_exact, cond_sq_diff_asymptotic),
    ):
        curve = excess_curve(sample, grid=np.asarray(s_grid, dtype=float), metric=metric)
        for p in curve.points:
            exact = float(exact_f(spec, p.s))
            z = (p.estimate - exact) / p.std_error if p.std_error > 0 else math.nan
            rows.append(
                {
                    "metric": metric,
                    "s": p.s,
                    "mc": p.estimate,
                    "std_error": p.std_error,
                    "n_exceed": p.n_exceed,
                    "exact": exact,
                    "asymptotic": float(asym_f(spec, p.s)),
                    "z": z,
                }
            )
    return pd.DataFrame(rows)
