import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from basisrisk.errors import DomainError
from basisrisk.gaussian_oracle import (
    GaussianPairSpec,
    cond_mean_diff_asymptotic,
    cond_mean_diff_exact,
    cond_sq_diff_asymptotic,
    cond_sq_diff_exact,
    gaussian_hazard,
    inverse_mills,
    sample_bivariate_gaussian,
    truncated_moments,
)
from basisrisk.tail_metrics import conditional_mean_diff, conditional_sq_diff

specs = st.builds(
    GaussianPairSpec,
    mu_x=st.floats(-5, 5),
    mu_y=st.floats(-5, 5),
    sigma_x=st.floats(0.2, 5),
    sigma_y=st.floats(0.2, 5),
    rho=st.floats(-0.95, 0.95),
)


def test_inverse_mills_reference():
    assert inverse_mills(0.0) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-14)
    z = np.array([-3.0, 1.0, 5.0])
    ref = stats.norm.pdf(z) / stats.norm.sf(z)
    np.testing.assert_allclose(inverse_mills(z), ref, rtol=1e-12)


def test_inverse_mills_continuous_at_switch():
    z = np.array([7.999, 8.0, 8.001])
    vals = inverse_mills(z)
    # lambda'(z) = lambda (lambda - z); both sides of the switch must agree with it
    slope = vals[1] * (vals[1] - 8.0)
    np.testing.assert_allclose(np.diff(vals) / 0.001, slope, rtol=1e-4)
    assert inverse_mills(40.0) == pytest.approx(40.0 + 1 / 40.0, rel=1e-5)


def test_hazard_rejects_bad_variance():
    with pytest.raises(DomainError):
        gaussian_hazard(0.0, 0.0, 0.0)


def test_rho_validation():
    with pytest.raises(DomainError):
        GaussianPairSpec(0, 0, 1, 1, 1.5)
    with pytest.raises(DomainError):
        GaussianPairSpec(0, 0, 0, 1, 0.5)


def test_independent_standard_case():
    spec = GaussianPairSpec(0.0, 0.0, 1.0, 1.0, 0.0)
    # E[X | X >= 0] = sqrt(2/pi); E[(X - Y)^2 | X >= 0] = E[X^2 | X >= 0] + 1 = 2
    assert cond_mean_diff_exact(spec, 0.0) == pytest.approx(math.sqrt(2 / math.pi))
    assert cond_sq_diff_exact(spec, 0.0) == pytest.approx(2.0)


def test_degenerate_case_is_zero():
    spec = GaussianPairSpec(1.0, 1.0, 2.0, 2.0, 1.0)
    s = np.array([0.0, 1.0, 5.0, 20.0])
    np.testing.assert_array_equal(cond_mean_diff_exact(spec, s), 0.0)
    np.testing.assert_array_equal(cond_sq_diff_exact(spec, s), 0.0)
    np.testing.assert_array_equal(cond_mean_diff_asymptotic(spec, s), 0.0)


def test_truncated_moments_by_quadrature():
    mu, sig, s = 1.0, 2.0, 2.5
    dens = stats.norm(mu, sig)
    tail = dens.sf(s)
    m1 = integrate.quad(lambda x: x * dens.pdf(x), s, np.inf)[0] / tail
    m2 = integrate.quad(lambda x: x * x * dens.pdf(x), s, np.inf)[0] / tail
    got = truncated_moments(s, mu, sig)
    assert got[0] == pytest.approx(m1, rel=1e-9)
    assert got[1] == pytest.approx(m2, rel=1e-9)


def test_sq_exact_by_double_quadrature():
    spec = GaussianPairSpec(0.5, -0.3, 1.5, 0.8, 0.4)
    s = 1.0
    k, c = spec.slope, spec.intercept
    v = spec.sigma_y**2 * (1 - spec.rho**2)
    fx = stats.norm(spec.mu_x, spec.sigma_x)

    def inner(x):
        # E[(x - Y)^2 | X = x]
        return (x - c - k * x) ** 2 + v

    num = integrate.quad(lambda x: inner(x) * fx.pdf(x), s, np.inf)[0]
    assert cond_sq_diff_exact(spec, s) == pytest.approx(num / fx.sf(s), rel=1e-9)


def test_monte_carlo_agreement():
    spec = GaussianPairSpec(2.0, 1.0, 1.5, 1.0, 0.3)
    sample = sample_bivariate_gaussian(spec, 400_000, 17)
    for s in (2.0, 3.5, 5.0):
        m = conditional_mean_diff(sample, s)
        q = conditional_sq_diff(sample, s)
        assert abs(m.estimate - cond_mean_diff_exact(spec, s)) < 4 * m.std_error
        assert abs(q.estimate - cond_sq_diff_exact(spec, s)) < 4 * q.std_error


def test_asymptotic_mean_ratio():
    spec = GaussianPairSpec(0.0, 0.0, 1.0, 1.0, 0.5)
    s = np.array([10.0, 30.0, 100.0])
    ratio = cond_mean_diff_exact(spec, s) / cond_mean_diff_asymptotic(spec, s)
    assert np.all(np.abs(ratio - 1) < 0.02)
    assert np.all(np.diff(np.abs(ratio - 1)) < 0)


def test_asymptotic_sq_ratio_tends_to_one():
    spec = GaussianPairSpec(0.0, 0.0, 1.0, 1.0, 0.0)
    s = np.array([6.0, 30.0, 300.0])
    ratio = cond_sq_diff_exact(spec, s) / cond_sq_diff_asymptotic(spec, s)
    assert ratio[-1] == pytest.approx(1.0, abs=1e-4)
    assert np.all(np.diff(ratio) < 0)


@settings(max_examples=80, deadline=None)
@given(spec=specs, z=st.floats(-3, 6))
def test_sq_at_least_squared_mean(spec, z):
    s = spec.mu_x + z * spec.sigma_x
    m = cond_mean_diff_exact(spec, s)
    assert cond_sq_diff_exact(spec, s) >= m * m * (1 - 1e-9) - 1e-12


@settings(max_examples=80, deadline=None)
@given(spec=specs, z=st.floats(-3, 6))
def test_mean_moves_with_hazard(spec, z):
    # d/ds of sigma^2 h(s) is positive, so the gap grows in s exactly when k < 1
    s = spec.mu_x + z * spec.sigma_x
    a = cond_mean_diff_exact(spec, s)
    b = cond_mean_diff_exact(spec, s + 0.5 * spec.sigma_x)
    if spec.slope < 1:
        assert b >= a - 1e-12
    elif spec.slope > 1:
        assert b <= a + 1e-12
