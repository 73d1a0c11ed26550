"""Peaks-over-threshold: generalized Pareto fitting and diagnostics."""
from dataclasses import dataclass
import math

import numpy as np

from ._rng import make_rng
from .errors import DomainError, FitError

__all__ = [
    "GpdFit",
    "MIN_EXCESS",
    "gpd_survival",
    "gpd_loglik",
    "sample_gpd",
    "fit_gpd",
    "pot_fit",
    "qq_exponential",
    "tail_index_of_difference",
]

MIN_EXCESS = 30
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_SERIES_BELOW = 1e-6


@dataclass(frozen=True)
class GpdFit:
    threshold: float
    gamma: float
    sigma: float
    n_excess: int
    log_likelihood: float
    std_errors: tuple
    iterations: int = 0

    @property
    def support_bound(self):
        """Upper end point of the fitted law in the original units (``inf`` if gamma >= 0)."""
        if self.gamma >= 0:
            return math.inf
        return self.threshold - self.sigma / self.gamma

    def survival(self, x):
        """Conditional survival ``P(V > x | V > threshold)`` under the fit."""
        return gpd_survival(np.asarray(x, dtype=float) - self.threshold, self.gamma, self.sigma)

    def to_dict(self):
        return {
            "threshold": self.threshold,
            "gamma": self.gamma,
            "sigma": self.sigma,
            "n_excess": self.n_excess,
            "log_likelihood": self.log_likelihood,
            "se_gamma": self.std_errors[0],
            "se_sigma": self.std_errors[1],
            "iterations": self.iterations,
        }


def _log1p_ratio(g, x):
    """``log1p(g x) / g`` with the ``g -> 0`` limit ``x`` taken continuously."""
    x = np.asarray(x, dtype=float)
    if g == 0:
        return x.copy()
    gx = g * x
    if np.max(np.abs(gx)) < _SERIES_BELOW:
        return x * (1.0 - gx / 2.0 + gx * gx / 3.0)
    return np.log1p(gx) / g


def gpd_survival(x, gamma, sigma):
    """``(1 + gamma x / sigma) ** (-1 / gamma)``, or ``exp(-x / sigma)`` at ``gamma = 0``."""
    x = np.asarray(x, dtype=float)
    if not sigma > 0:
        raise DomainError(f"GPD scale must be positive, got {sigma}")
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise DomainError("GPD survival is defined for excesses x >= 0")
    if gamma < 0 and np.any(x > -sigma / gamma):
        raise DomainError(f"x exceeds the GPD end point {-sigma / gamma}")
    with np.errstate(divide="ignore"):
        out = np.exp(-_log1p_ratio(gamma, x / sigma))
    return float(out) if out.ndim == 0 else out


def gpd_loglik(excesses, gamma, sigma):
    """Log-likelihood of excesses under ``GPD(gamma, sigma)``; ``-inf`` off-support."""
    x = np.asarray(excesses, dtype=float)
    if sigma <= 0:
        return -math.inf
    a = x / sigma
    if np.any(1.0 + gamma * a <= 0):
        return -math.inf
    r = _log1p_ratio(gamma, a)
    # sum log1p(g a) = g * sum(r)
    return float(-x.size * math.log(sigma) - (gamma + 1.0) * r.sum())


def sample_gpd(n, gamma, sigma, seed):
    """Inverse-transform draws from ``GPD(gamma, sigma)``."""
    if n <= 0 or not sigma > 0:
        raise DomainError("need n > 0 and sigma > 0")
    e = make_rng(seed).standard_exponential(int(n))
    if gamma == 0:
        return sigma * e
    return sigma * np.expm1(gamma * e) / gamma


def _profile(theta, y):
    """Profile log-likelihood per observation at slope ``theta`` for mean-one data ``y``.

    For fixed ``theta = gamma / sigma`` the likelihood is maximised by
    ``gamma = mean(log1p(theta y))``, leaving ``-(log sigma + gamma + 1)``.
    """
    r = _log1p_ratio(theta, y)
    sig = r.mean()
    gam = theta * sig
    return -(math.log(sig) + gam + 1.0), gam, sig


def _golden_max(f, a, b, c, tol, max_iter):
    # maximise f on [a, c]; b is an interior point with f(b) >= f(a), f(c)
    fb = f(b)
    it = 0
    while abs(c - a) > tol * max(1.0, abs(b)) and it < max_iter:
        it += 1
        if (c - b) > (b - a):
            x = b + (1.0 - _GOLDEN) * (c - b)
            fx = f(x)
            if fx > fb:
                a, b, fb = b, x, fx
            else:
                c = x
        else:
            x = b - (1.0 - _GOLDEN) * (b - a)
            fx = f(x)
            if fx > fb:
                c, b, fb = b, x, fx
            else:
                a = x
    return b, it


def _bracket(f, lower, step=0.1, max_iter=200, upper=1e10):
    """Expand from zero until an interior maximum of ``f`` on ``(lower, inf)`` is bracketed."""
    a, b = 0.0, step
    fa, fb = f(a), f(b)
    diag = {"lower": lower}
    if fb > fa:
        for _ in range(max_iter):
            c = b + 2.0 * (b - a)
            fc = f(c)
            if fc < fb:
                return a, b, c
            a, b, fb = b, c, fc
            if c > upper:
                break
        diag["last"] = b
        raise FitError("profile likelihood keeps increasing; no finite maximum", diag)
    c, b, fb = b, a, fa
    a = max(-step, 0.5 * lower)
    for _ in range(max_iter):
        fa = f(a)
        if fa < fb:
            return a, b, c
        c, b, fb = b, a, fa
        a = lower + 0.5 * (a - lower)
        if a - lower <= 1e-12 * abs(lower):
            break
    diag["last"] = b
    raise FitError("likelihood maximum sits on the support boundary (gamma <= -1)", diag)


def _observed_info_se(x, gamma, sigma):
    # numerical Hessian of the log-likelihood in (gamma, log sigma), then delta method
    def ll(p):
        return gpd_loglik(x, p[0], math.exp(p[1]))

    p0 = np.array([gamma, math.log(sigma)])
    h = np.array([1e-4 * max(1.0, abs(gamma)), 1e-4])
    hess = np.empty((2, 2))
    f0 = ll(p0)
    for i in range(2):
        e_i = np.zeros(2)
        e_i[i] = h[i]
        hess[i, i] = (ll(p0 + e_i) - 2.0 * f0 + ll(p0 - e_i)) / h[i] ** 2
        for j in range(i + 1, 2):
            e_j = np.zeros(2)
            e_j[j] = h[j]
            hess[i, j] = hess[j, i] = (
                ll(p0 + e_i + e_j) - ll(p0 + e_i - e_j) - ll(p0 - e_i + e_j) + ll(p0 - e_i - e_j)
            ) / (4.0 * h[i] * h[j])
    try:
        cov = np.linalg.inv(-hess)
    except np.linalg.LinAlgError:
        return (math.nan, math.nan)
    jac = np.diag([1.0, sigma])
    cov = jac @ cov @ jac
    d = np.diag(cov)
    if np.any(d < 0) or not np.all(np.isfinite(d)):
        return (math.nan, math.nan)
    return (float(math.sqrt(d[0])), float(math.sqrt(d[1])))


def fit_gpd(excesses, threshold=0.0, tol=1e-10, max_iter=500):
    """Maximum-likelihood GPD fit to threshold excesses.

    Parameters
    ----------
    excesses : array_like
        Non-negative excesses over ``threshold``; at least ``MIN_EXCESS`` of them.
    threshold : float
        Recorded in the result only.
    tol : float
        Relative tolerance of the golden-section search in the profile variable.
    max_iter : int
        Iteration cap of the golden-section search.

    Returns
    -------
    GpdFit
        Estimates with observed-information standard errors.

    Raises
    ------
    DomainError
        Too few or invalid excesses.
    FitError
        Constant data, a likelihood without interior maximum, or no convergence.
    """
    x = np.asarray(excesses, dtype=float).ravel()
    if x.size < MIN_EXCESS:
        raise DomainError(f"need at least {MIN_EXCESS} excesses to fit a GPD, got {x.size}")
    if np.any(~np.isfinite(x)) or np.any(x < 0):
        raise DomainError("excesses must be finite and non-negative")
    xbar = x.mean()
    xmax = x.max()
    if xmax == x.min():
        raise FitError("all excesses are equal; the GPD fit is degenerate", {"value": float(xmax)})
    y = x / xbar
    lower = -1.0 / y.max()

    def f(t):
        if t <= lower:
            return -math.inf
        return _profile(t, y)[0]

    a, b, c = _bracket(f, lower)
    theta, it = _golden_max(f, a, b, c, tol, max_iter)
    if it >= max_iter:
        raise FitError("golden-section search did not converge", {"bracket": (a, c), "theta": theta})
    _, gamma, sig = _profile(theta, y)
    sigma = sig * xbar
    ll = gpd_loglik(x, gamma, sigma)
    return GpdFit(
        threshold=float(threshold),
        gamma=float(gamma),
        sigma=float(sigma),
        n_excess=int(x.size),
        log_likelihood=ll,
        std_errors=_observed_info_se(x, gamma, sigma),
        iterations=it,
    )


def pot_fit(values, quantile_level=0.8):
    """Fit a GPD to the excesses over the empirical ``quantile_level`` quantile."""
    if not 0.5 < quantile_level < 1:
        raise DomainError(f"quantile level must lie in (0.5, 1), got {quantile_level}")
    v = np.asarray(values, dtype=float)
    u = float(np.quantile(v, quantile_level))
    exc = v[v > u] - u
    return fit_gpd(exc, threshold=u)


def qq_exponential(excesses):
    """Exponential QQ data: columns ``(theoretical, empirical)``.

    Theoretical quantiles are ``-log(1 - i/(n+1))`` scaled by the sample mean, so
    exponential data fall on the diagonal and heavier tails bend above it.
    """
    x = np.sort(np.asarray(excesses, dtype=float).ravel())
    n = x.size
    if n < 2:
        raise DomainError("need at least two excesses for a QQ plot")
    p = np.arange(1, n + 1) / (n + 1.0)
    theo = -np.log1p(-p) * x.mean()
    return np.column_stack([theo, x])


def tail_index_of_difference(sample, quantile_level=0.95):
    """POT estimate of the tail index of ``Z = X - Y``.

    The threshold is the empirical quantile of ``Z``, floored at zero so that
    only the positive part of ``Z`` enters the excesses.
    """
    z = sample.x - sample.y
    u = max(float(np.quantile(z, quantile_level)), 0.0)
    fit = fit_gpd(z[z > u] - u, threshold=u)
    return fit.gamma
