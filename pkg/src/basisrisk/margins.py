"""Univariate margins: Pareto parameters and the log-linear payoff transform.

A parameter ``theta ~ Pareto(u, b)`` has survival ``(u / t) ** b`` on ``[u, inf)``.
Passing it through ``Y = exp(alpha) * theta ** beta`` gives another exact Pareto
variable with shape ``b / beta`` and scale ``u ** beta * exp(alpha)``, so its tail
index is ``beta / b``.
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy import stats

from ._rng import make_rng
from .errors import DomainError

__all__ = [
    "ParetoSpec",
    "PayoffTransform",
    "TransformedParetoSpec",
    "GaussianMargin",
    "pareto_survival",
    "pareto_quantile",
    "sample_pareto",
    "payoff_transform",
    "transformed_moment",
]


@dataclass(frozen=True)
class ParetoSpec:
    """Pareto law with lower bound ``u`` (scale) and shape ``b``."""

    u: float
    b: float

    def __post_init__(self):
        if not (self.u > 0 and self.b > 0):
            raise DomainError(f"Pareto needs u > 0 and b > 0, got u={self.u}, b={self.b}")

    @property
    def tail_index(self):
        return 1.0 / self.b

    def survival(self, t):
        return pareto_survival(t, self)

    def cdf(self, t):
        return 1.0 - pareto_survival(t, self)

    def quantile(self, p):
        return pareto_quantile(p, self)

    def moment(self, k):
        """Raw moment of order ``k``; ``inf`` when ``k >= b``."""
        if self.b <= k:
            return math.inf
        return self.b * self.u**k / (self.b - k)

    def sample(self, n, seed):
        return sample_pareto(n, self, seed)


@dataclass(frozen=True)
class PayoffTransform:
    """``log Y = alpha + beta * log(theta)``."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise DomainError(f"payoff exponent beta must be positive, got {self.beta}")

    def __call__(self, theta):
        return payoff_transform(theta, self)


@dataclass(frozen=True)
class TransformedParetoSpec:
    base: ParetoSpec
    transform: PayoffTransform

    def as_pareto(self):
        """The equivalent exact Pareto law of the transformed variable."""
        t = self.transform
        return ParetoSpec(u=self.base.u**t.beta * math.exp(t.alpha), b=self.base.b / t.beta)

    @property
    def tail_index(self):
        return self.transform.beta / self.base.b

    def survival(self, t):
        return self.as_pareto().survival(t)

    def cdf(self, t):
        return self.as_pareto().cdf(t)

    def quantile(self, p):
        return payoff_transform(pareto_quantile(p, self.base), self.transform)

    def moment(self, k):
        return transformed_moment(self, k)

    def variance(self):
        m1, m2 = self.moment(1), self.moment(2)
        if math.isinf(m2):
            return math.inf
        return m2 - m1 * m1

    def sample(self, n, seed):
        return payoff_transform(sample_pareto(n, self.base, seed), self.transform)


@dataclass(frozen=True)
class GaussianMargin:
    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")

    def survival(self, t):
        return stats.norm.sf(t, loc=self.mu, scale=self.sigma)

    def cdf(self, t):
        return stats.norm.cdf(t, loc=self.mu, scale=self.sigma)

    def quantile(self, p):
        return stats.norm.ppf(p, loc=self.mu, scale=self.sigma)

    def sample(self, n, seed):
        return self.mu + self.sigma * make_rng(seed).standard_normal(n)


def pareto_survival(t, spec):
    """Return ``P(theta >= t) = (u / t) ** b`` for ``t >= u``.

    Raises
    ------
    DomainError
        If any ``t`` lies below the scale ``u``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < spec.u) or np.any(np.isnan(t)):
        raise DomainError(f"Pareto survival is defined for t >= u={spec.u}")
    out = (spec.u / t) ** spec.b
    return float(out) if out.ndim == 0 else out


def pareto_quantile(p, spec):
    """Lower-tail quantile ``u * (1 - p) ** (-1 / b)`` for ``0 <= p < 1``."""
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or np.any(p >= 1) or np.any(np.isnan(p)):
        raise DomainError("Pareto quantile needs 0 <= p < 1")
    out = spec.u * (1.0 - p) ** (-1.0 / spec.b)
    return float(out) if out.ndim == 0 else out


def _pareto_from_survival(sv, spec):
    # sv in (0, 1]; inverse transform written on the survival scale
    return spec.u * sv ** (-1.0 / spec.b)


def sample_pareto(n, spec, seed):
    """Draw ``n`` i.i.d. Pareto values by inverse transform of a seeded stream."""
    if n <= 0:
        raise DomainError(f"sample size must be positive, got {n}")
    # 1 - random() lies in (0, 1], so the draw is always finite
    sv = 1.0 - make_rng(seed).random(int(n))
    return _pareto_from_survival(sv, spec)


def payoff_transform(theta, t):
    """Dollar payoff ``exp(alpha) * theta ** beta``."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0) or np.any(np.isnan(theta)):
        raise DomainError("payoff transform needs theta > 0")
    out = math.exp(t.alpha) * theta**t.beta
    return float(out) if out.ndim == 0 else out


def transformed_moment(spec, k):
    """``E[Y**k]`` for ``Y = exp(alpha) * theta ** beta``, ``theta ~ Pareto(u, b)``.

    Equals ``exp(k alpha) b u**(k beta) / (b - k beta)`` when ``b > k beta``;
    returns ``math.inf`` otherwise.
    """
    if k < 1:
        raise DomainError(f"moment order must be >= 1, got {k}")
    b, u = spec.base.b, spec.base.u
    a, beta = spec.transform.alpha, spec.transform.beta
    if b <= k * beta:
        return math.inf
    return math.exp(k * a) * b * u ** (k * beta) / (b - k * beta)
