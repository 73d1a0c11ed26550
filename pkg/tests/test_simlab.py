import math
import warnings

import numpy as np
import pandas as pd
import pytest

from basisrisk import simlab
from basisrisk.errors import DomainError
from basisrisk.simlab import BenchmarkConfig, MainSettingConfig
from basisrisk.tail_metrics import ExcessCurve, ExcessEstimate, excess_curve, kendall_tau

LEVELS = (0.5, 0.9, 0.99)


def test_defaults_and_tail_indices():
    cfg = MainSettingConfig()
    assert cfg.gamma_x == pytest.approx(0.3846, abs=1e-4)
    assert cfg.gamma_y == pytest.approx(0.3571, abs=1e-4)
    assert cfg.alpha_prime == cfg.alpha and cfg.beta_prime == cfg.beta
    assert math.isfinite(cfg.x_spec.variance())


def test_validation_names_field():
    with pytest.raises(DomainError, match="tau"):
        MainSettingConfig(tau=1.2)
    with pytest.raises(DomainError, match="n "):
        MainSettingConfig(n=10)
    with pytest.raises(ValueError):
        MainSettingConfig(family="student")


def test_tail_order_warning():
    with pytest.warns(UserWarning, match="tail index"):
        MainSettingConfig(theta_shape=0.7)


@pytest.mark.parametrize("family", ["frank", "gumbel", "clayton_survival"])
def test_main_setting_margins_and_tau(family):
    cfg = MainSettingConfig(family=family, tau=0.5, n=100_000, seed=3)
    s = simlab.run_main_setting(cfg)
    # monotone transforms keep Kendall's tau
    assert kendall_tau(s) == pytest.approx(0.5, abs=0.01)
    for spec, v in ((cfg.y_spec, s.y), (cfg.x_spec, s.x)):
        t = spec.quantile(0.9)
        assert np.mean(v > t) == pytest.approx(0.1, abs=0.005)
        assert v.min() >= spec.as_pareto().u


def test_comonotone_identical_transforms_give_equal_pair():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        cfg = MainSettingConfig(family="comonotone", theta_prime_shape=1.4, n=5000)
    s = simlab.run_main_setting(cfg)
    np.testing.assert_array_equal(s.x, s.y)
    curve = excess_curve(s, metric="square", levels=LEVELS)
    assert np.all(curve.estimates == 0)


def test_main_setting_reproducible():
    cfg = MainSettingConfig(n=2000, seed=9)
    a, b = simlab.run_main_setting(cfg), simlab.run_main_setting(cfg)
    np.testing.assert_array_equal(a.x, b.x)


def test_variance_matching():
    base = MainSettingConfig()
    var_x = base.x_spec.variance()
    y = base.y_spec
    s1 = simlab.matched_noise_variance("B1", base)
    assert s1 + y.variance() == pytest.approx(var_x, rel=1e-12)
    s2 = simlab.matched_noise_variance("B2", base)
    got = y.moment(2) * math.exp(2 * s2) - y.moment(1) ** 2 * math.exp(s2)
    assert got == pytest.approx(var_x, rel=1e-8)
    g = simlab.benchmark_gaussian_spec(base, 0.5)
    assert g.sigma_x**2 == pytest.approx(var_x)
    assert g.mu_y == pytest.approx(y.moment(1))


def test_variance_matching_errors():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        heavy = MainSettingConfig(theta_shape=0.7)
    with pytest.raises(DomainError, match="infinite"):
        simlab.matched_noise_variance("B1", heavy)
    with pytest.raises(DomainError, match="infinite"):
        simlab.run_benchmark(BenchmarkConfig("B3", rho=0.5, n=100), heavy)
    infinite_x = MainSettingConfig(theta_prime_shape=0.9)
    with pytest.raises(DomainError, match="Var\\(X\\)"):
        simlab.matched_noise_variance("B2", infinite_x)


def test_benchmark_zero_noise_is_identity():
    base = MainSettingConfig(n=2000)
    s = simlab.run_benchmark(BenchmarkConfig("B1", n=2000, noise_var=0.0), base)
    np.testing.assert_array_equal(s.x, s.y)
    s = simlab.run_benchmark(BenchmarkConfig("B2", n=2000, noise_var=0.0), base)
    np.testing.assert_array_equal(s.x, s.y)


def test_benchmark_config_validation():
    with pytest.raises(DomainError):
        BenchmarkConfig("B4")
    with pytest.raises(DomainError):
        BenchmarkConfig("B3")
    with pytest.raises(DomainError):
        BenchmarkConfig("B1", noise_var=-1.0)


def test_b2_log_noise_variance():
    base = MainSettingConfig(n=50_000)
    s = simlab.run_benchmark(BenchmarkConfig("B2", n=50_000, seed=1), base)
    assert np.var(np.log(s.x / s.y)) == pytest.approx(simlab.matched_noise_variance("B2", base), rel=0.03)


def _curve(vals, flags=None):
    pts = []
    for i, v in enumerate(vals):
        n = 10 if flags and flags[i] else 1000
        pts.append(ExcessEstimate(float(i + 1), v, 0.1, n, quantile=0.5 + 0.1 * i))
    return ExcessCurve(points=pts, grid_rule="test", metric="mean")


def test_ratio_curves_missing_values():
    r = simlab.ratio_curves(_curve([2.0, 3.0, 4.0, 5.0]), _curve([1.0, 0.0, 2.0, 5.0], flags=[0, 0, 0, 1]))
    assert r["ratio"].iloc[0] == 2.0 and r["ratio"].iloc[2] == 2.0
    assert r["ratio"].iloc[[1, 3]].isna().all()


def test_ratio_curves_grid_mismatch():
    with pytest.raises(DomainError):
        simlab.ratio_curves(_curve([1.0, 2.0]), _curve([1.0, 2.0, 3.0]))


def test_fig1_structure():
    tabs = simlab.figure_suite("fig1", n=20_000, seed=1)
    assert set(tabs) == {"mean", "square"}
    for df in tabs.values():
        assert list(df.columns) == ["family", "tau_or_rho", "quantile", "s", "estimate", "std_error", "n_exceed"]
        assert df.groupby(["family", "tau_or_rho"]).ngroups == 9
        assert len(df) == 9 * 11


def test_ratio_figure_structure():
    tabs = simlab.figure_suite("fig3", n=20_000, seed=1)
    assert set(tabs) == {"mean_ratio", "square_ratio"}
    df = tabs["mean_ratio"]
    assert set(df["family"]) == {"gumbel"}
    assert df.groupby(["tau", "benchmark"]).ngroups == 9
    b3 = df[df["benchmark"] == "B3"]
    assert (b3["benchmark_rho"] == b3["tau"]).all()


def test_figure_suite_deterministic():
    a = simlab.figure_suite("fig1", n=5000, seed=2)
    b = simlab.figure_suite("fig1", n=5000, seed=2)
    c = simlab.figure_suite("fig1", n=5000, seed=3)
    pd.testing.assert_frame_equal(a["mean"], b["mean"])
    assert not a["mean"]["estimate"].equals(c["mean"]["estimate"])


def test_unknown_figure():
    with pytest.raises(DomainError, match="fig1, fig2, fig3, fig4"):
        simlab.figure_suite("fig7", n=1000)


def test_gaussian_check_table():
    from basisrisk.gaussian_oracle import GaussianPairSpec

    tab = simlab.gaussian_check(GaussianPairSpec(1.0, 0.5, 2.0, 1.0, 0.3), n=100_000, seed=0)
    assert len(tab) == 6
    assert (tab["z"].abs() <= 4).all()
