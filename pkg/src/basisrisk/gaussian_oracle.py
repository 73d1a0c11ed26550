"""Exact and asymptotic gap measures for a bivariate Gaussian ``(X, Y)``.

Everything is built from the conditional law of ``Y`` given ``X``::

    E[Y | X] = c + k X,   k = rho sigma_Y / sigma_X,   c = mu_Y - k mu_X
    Var(Y | X) = sigma_Y**2 (1 - rho**2)

and from the first two truncated moments of ``X`` above ``s``, which depend on
the Gaussian hazard rate.
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy import special

from ._rng import make_rng
from .errors import DomainError
from .tail_metrics import PairedSample

__all__ = [
    "GaussianPairSpec",
    "inverse_mills",
    "gaussian_hazard",
    "truncated_moments",
    "cond_mean_diff_exact",
    "cond_mean_diff_asymptotic",
    "cond_sq_diff_exact",
    "cond_sq_diff_asymptotic",
    "sample_bivariate_gaussian",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_ASYMPTOTIC_FROM = 8.0


@dataclass(frozen=True)
class GaussianPairSpec:
    mu_x: float
    mu_y: float
    sigma_x: float
    sigma_y: float
    rho: float

    def __post_init__(self):
        if not (self.sigma_x > 0 and self.sigma_y > 0):
            raise DomainError("standard deviations must be positive")
        # rho = +-1 is kept for the degenerate X = Y checks
        if not -1 <= self.rho <= 1:
            raise DomainError(f"rho must lie in [-1, 1], got {self.rho}")

    @property
    def slope(self):
        """``k = rho sigma_Y / sigma_X``, the regression slope of Y on X."""
        return self.rho * self.sigma_y / self.sigma_x

    @property
    def intercept(self):
        return self.mu_y - self.slope * self.mu_x


def _mills_continued_fraction(z, depth=80):
    # Laplace: Phi-bar(z) / phi(z) = 1 / (z + 1 / (z + 2 / (z + 3 / (z + ...))))
    t = np.array(z, dtype=float, copy=True)
    for k in range(depth, 0, -1):
        t = z + k / t
    return t


def inverse_mills(z):
    """``phi(z) / Phi-bar(z)`` for a standard normal, stable for large ``z``."""
    z = np.asarray(z, dtype=float)
    direct = np.exp(-0.5 * z * z - special.log_ndtr(-z)) / _SQRT_2PI
    tail = _mills_continued_fraction(np.where(z > _ASYMPTOTIC_FROM, z, _ASYMPTOTIC_FROM + 1.0))
    out = np.where(z > _ASYMPTOTIC_FROM, tail, direct)
    return float(out) if out.ndim == 0 else out


def gaussian_hazard(s, mu, sigma2):
    """Hazard rate ``phi((s-mu)/sigma) / (sigma Phi-bar((s-mu)/sigma))``."""
    if not sigma2 > 0:
        raise DomainError("variance must be positive")
    sigma = math.sqrt(sigma2)
    return inverse_mills((np.asarray(s, dtype=float) - mu) / sigma) / sigma


def truncated_moments(s, mu, sigma):
    """``(E[X | X >= s], E[X**2 | X >= s])`` for ``X ~ N(mu, sigma**2)``."""
    lam = inverse_mills((np.asarray(s, dtype=float) - mu) / sigma)
    m1 = mu + sigma * lam
    m2 = mu * mu + sigma * sigma + sigma * lam * (mu + np.asarray(s, dtype=float))
    return m1, m2


def cond_mean_diff_exact(spec, s):
    """Exact ``E[X - Y | X >= s] = (mu_X - mu_Y) + (1 - k) sigma_X**2 h(s)``."""
    h = gaussian_hazard(s, spec.mu_x, spec.sigma_x**2)
    return (spec.mu_x - spec.mu_y) + (1.0 - spec.slope) * spec.sigma_x**2 * h


def cond_mean_diff_asymptotic(spec, s):
    """Leading behaviour ``(mu_X - mu_Y) + (1 - k)(s - mu_X)`` as ``s`` grows."""
    return (spec.mu_x - spec.mu_y) + (1.0 - spec.slope) * (np.asarray(s, dtype=float) - spec.mu_x)


def cond_sq_diff_exact(spec, s):
    """Exact ``E[(X - Y)**2 | X >= s]`` assembled from its three components.

    ``E[X^2 | .] + E[Y^2 | .] - 2 E[XY | .]`` where, with ``m1, m2`` the
    truncated moments of ``X``,

    * ``E[XY | X >= s] = c m1 + k m2``
    * ``E[Y^2 | X >= s] = sigma_Y^2 (1 - rho^2) + c^2 + 2 c k m1 + k^2 m2``
    """
    m1, m2 = truncated_moments(s, spec.mu_x, spec.sigma_x)
    k, c = spec.slope, spec.intercept
    exy = c * m1 + k * m2
    ey2 = spec.sigma_y**2 * (1.0 - spec.rho**2) + c * c + 2.0 * c * k * m1 + k * k * m2
    out = m2 + ey2 - 2.0 * exy
    # cancellation can leave tiny negatives in the X = Y case
    return np.maximum(out, 0.0) if np.ndim(out) else max(float(out), 0.0)


def cond_sq_diff_asymptotic(spec, s):
    """Leading term ``(1 - k)**2 s**2``."""
    return (1.0 - spec.slope) ** 2 * np.asarray(s, dtype=float) ** 2


def sample_bivariate_gaussian(spec, n, seed, label="gaussian"):
    """Draw ``n`` pairs through the lower-triangular factor of the covariance."""
    if n <= 0:
        raise DomainError(f"sample size must be positive, got {n}")
    z = make_rng(seed).standard_normal((2, int(n)))
    x = spec.mu_x + spec.sigma_x * z[0]
    y = spec.mu_y + spec.sigma_y * (spec.rho * z[0] + math.sqrt(1.0 - spec.rho**2) * z[1])
    return PairedSample(x=x, y=y, seed=seed, label=label)
