"""Bivariate copulas for the pair (theta, theta').

Families: survival Clayton, Gumbel, Frank, Gaussian, independence and the
comonotone (upper Frechet) copula. Each family provides its joint CDF, a sampler,
the Kendall tau link and the upper tail-dependence coefficient.
"""
from dataclasses import dataclass
from enum import Enum
import math

import numpy as np
from scipy import integrate, optimize, special

from ._rng import make_rng
from .errors import DomainError

__all__ = [
    "Family",
    "CopulaSpec",
    "copula_value",
    "survival_copula_value",
    "sample_copula",
    "debye1",
    "tau_to_param",
    "param_to_tau",
    "upper_tail_dependence",
    "pi_plus_analytic",
    "pi_minus_analytic",
]

_ONE_MINUS = np.nextafter(1.0, 0.0)
_FRANK_BRACKET = (1e-6, 50.0)


class Family(str, Enum):
    CLAYTON_SURVIVAL = "clayton_survival"
    GUMBEL = "gumbel"
    FRANK = "frank"
    GAUSSIAN = "gaussian"
    INDEPENDENCE = "independence"
    COMONOTONE = "comonotone"


def _family(family):
    try:
        return Family(family)
    except ValueError:
        valid = ", ".join(f.value for f in Family)
        raise DomainError(f"unknown copula family {family!r}; expected one of {valid}") from None


@dataclass(frozen=True)
class CopulaSpec:
    """Family plus its parameter (``delta``, or ``rho`` for the Gaussian family)."""

    family: Family
    param: float = None

    def __post_init__(self):
        fam = _family(self.family)
        object.__setattr__(self, "family", fam)
        p = self.param
        if fam in (Family.INDEPENDENCE, Family.COMONOTONE):
            if p is not None:
                raise DomainError(f"{fam.value} copula takes no parameter")
            return
        if p is None or not np.isfinite(p):
            raise DomainError(f"{fam.value} copula needs a finite parameter")
        if fam is Family.CLAYTON_SURVIVAL and (p < -1 or p == 0):
            raise DomainError(f"Clayton parameter must satisfy delta >= -1, delta != 0; got {p}")
        if fam is Family.GUMBEL and p < 1:
            raise DomainError(f"Gumbel parameter must satisfy delta >= 1; got {p}")
        if fam is Family.FRANK and p == 0:
            raise DomainError("Frank parameter must be non-zero")
        if fam is Family.GAUSSIAN and not -1 < p < 1:
            raise DomainError(f"Gaussian correlation must lie in (-1, 1); got {p}")

    @classmethod
    def from_tau(cls, family, tau):
        fam = _family(family)
        if fam in (Family.INDEPENDENCE, Family.COMONOTONE):
            return cls(fam)
        return cls(fam, tau_to_param(fam, tau))

    @property
    def tau(self):
        return param_to_tau(self.family, self.param)


def _check_unit(*arrays):
    for a in arrays:
        if np.any(a < 0) or np.any(a > 1) or np.any(np.isnan(a)):
            raise DomainError("copula arguments must lie in [0, 1]")


# Gauss-Legendre nodes on [0, 1] for the Gaussian CDF integral over the correlation
_GL_X, _GL_W = np.polynomial.legendre.leggauss(96)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


def _gaussian_cdf(v, w, rho):
    # Phi2(h, k; rho) = Phi(h) Phi(k) + (1/2pi) int_0^rho exp(-(h^2 - 2rhk + k^2) / (2(1-r^2))) / sqrt(1-r^2) dr
    with np.errstate(divide="ignore"):
        h = special.ndtri(v)
        k = special.ndtri(w)
    hf = np.where(np.isfinite(h), h, 0.0)[..., None]
    kf = np.where(np.isfinite(k), k, 0.0)[..., None]
    r = rho * _GL_X
    one_m = 1.0 - r * r
    integrand = np.exp(-(hf * hf - 2.0 * r * hf * kf + kf * kf) / (2.0 * one_m)) / np.sqrt(one_m)
    val = v * w + rho * (integrand @ _GL_W) / (2.0 * math.pi)
    # margins are exact on the boundary
    val = np.where((v == 0) | (w == 0), 0.0, val)
    val = np.where(v == 1, w, val)
    val = np.where(w == 1, v, val)
    return np.clip(val, np.maximum(v + w - 1.0, 0.0), np.minimum(v, w))


def _clayton_cdf(v, w, delta):
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        inner = v ** (-delta) + w ** (-delta) - 1.0
        val = np.maximum(inner, 0.0) ** (-1.0 / delta)
    if delta > 0:
        val = np.where((v == 0) | (w == 0), 0.0, val)
    return np.where(np.isnan(val), 0.0, val)


def copula_value(spec, v, w):
    """Joint CDF ``C(v, w)`` of the copula described by ``spec``."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    _check_unit(v, w)
    fam, d = spec.family, spec.param
    if fam is Family.INDEPENDENCE:
        out = v * w
    elif fam is Family.COMONOTONE:
        out = np.minimum(v, w)
    elif fam is Family.CLAYTON_SURVIVAL:
        out = v + w - 1.0 + _clayton_cdf(1.0 - v, 1.0 - w, d)
    elif fam is Family.GUMBEL:
        with np.errstate(divide="ignore"):
            a = (-np.log(v)) ** d + (-np.log(w)) ** d
            out = np.exp(-(a ** (1.0 / d)))
    elif fam is Family.FRANK:
        num = np.expm1(-d * v) * np.expm1(-d * w)
        out = -np.log1p(num / np.expm1(-d)) / d
    else:
        out = _gaussian_cdf(v, w, d)
    out = np.clip(out, np.maximum(v + w - 1.0, 0.0), np.minimum(v, w))
    return float(out) if out.ndim == 0 else out


def survival_copula_value(spec, v, w):
    """``C*(v, w) = v + w - 1 + C(1 - v, 1 - w)``, i.e. ``P(U >= 1-v, W >= 1-w)``."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    _check_unit(v, w)
    out = v + w - 1.0 + np.asarray(copula_value(spec, 1.0 - v, 1.0 - w))
    out = np.clip(out, np.maximum(v + w - 1.0, 0.0), np.minimum(v, w))
    return float(out) if out.ndim == 0 else out


def _positive_stable(rng, alpha, n):
    # Kanter's representation: Laplace transform exp(-t**alpha), 0 < alpha < 1
    theta = np.pi * rng.random(n)
    e = rng.standard_exponential(n)
    return (
        np.sin(alpha * theta) / np.sin(theta) ** (1.0 / alpha)
        * (np.sin((1.0 - alpha) * theta) / e) ** ((1.0 - alpha) / alpha)
    )


def sample_copula(spec, n, seed):
    """Draw ``n`` pairs of dependent uniforms, returned as an ``(n, 2)`` array.

    Frank uses conditional inversion, Gumbel the Marshall-Olkin frailty with a
    positive-stable mixing variable, survival Clayton a gamma frailty followed by
    the flip ``(u, v) -> (1 - u, 1 - v)``, and the Gaussian family a correlated
    normal pair mapped through the normal CDF.
    """
    n = int(n)
    if n <= 0:
        raise DomainError(f"sample size must be positive, got {n}")
    rng = make_rng(seed)
    fam, d = spec.family, spec.param
    if fam is Family.INDEPENDENCE:
        uv = rng.random((n, 2))
    elif fam is Family.COMONOTONE:
        u = rng.random(n)
        uv = np.column_stack([u, u])
    elif fam is Family.FRANK:
        u = rng.random(n)
        t = rng.random(n)
        v = -np.log1p(t * np.expm1(-d) / (t + (1.0 - t) * np.exp(-d * u))) / d
        uv = np.column_stack([u, v])
    elif fam is Family.GUMBEL:
        e = rng.standard_exponential((n, 2))
        if d == 1.0:
            uv = np.exp(-e)
        else:
            s = _positive_stable(rng, 1.0 / d, n)
            uv = np.exp(-((e / s[:, None]) ** (1.0 / d)))
    elif fam is Family.CLAYTON_SURVIVAL:
        if d > 0:
            frailty = rng.standard_gamma(1.0 / d, n)
            e = rng.standard_exponential((n, 2))
            # 1 - (1 + e/V)^(-1/d), written to keep precision near 0
            uv = -np.expm1(-np.log1p(e / frailty[:, None]) / d)
        else:
            u = rng.random(n)
            t = rng.random(n)
            if d == -1.0:
                v = 1.0 - u
            else:
                v = ((t ** (-d / (1.0 + d)) - 1.0) * u ** (-d) + 1.0) ** (-1.0 / d)
            uv = 1.0 - np.column_stack([u, v])
    else:
        z = rng.standard_normal((n, 2))
        z2 = d * z[:, 0] + math.sqrt(1.0 - d * d) * z[:, 1]
        uv = special.ndtr(np.column_stack([z[:, 0], z2]))
    return np.clip(uv, 0.0, _ONE_MINUS)


def debye1(x):
    """First Debye function ``(1/x) int_0^x t / (e^t - 1) dt`` by adaptive quadrature."""
    if x == 0:
        return 1.0

    def f(t):
        return 1.0 if t == 0 else t / math.expm1(t)

    val, _ = integrate.quad(f, 0.0, x, epsabs=1e-12, epsrel=1e-12, limit=200)
    return val / x


def _frank_tau(d):
    return 1.0 - 4.0 / d * (1.0 - debye1(d))


def param_to_tau(family, param):
    """Kendall's tau of the copula with the given parameter."""
    fam = _family(family)
    if fam is Family.INDEPENDENCE:
        return 0.0
    if fam is Family.COMONOTONE:
        return 1.0
    CopulaSpec(fam, param)
    if fam is Family.CLAYTON_SURVIVAL:
        return param / (param + 2.0)
    if fam is Family.GUMBEL:
        return (param - 1.0) / param
    if fam is Family.FRANK:
        return _frank_tau(param)
    return 2.0 / math.pi * math.asin(param)


def tau_to_param(family, tau):
    """Copula parameter matching a target Kendall's tau.

    Frank has no closed form: the root of ``tau(delta) = tau`` is bracketed in
    ``[1e-6, 50]`` (widened if needed) and solved with Brent's method.
    """
    fam = _family(family)
    if not np.isfinite(tau):
        raise DomainError("tau must be finite")
    if fam is Family.CLAYTON_SURVIVAL:
        if not 0 < tau < 1:
            raise DomainError(f"Clayton tau must lie in (0, 1), got {tau}")
        return 2.0 * tau / (1.0 - tau)
    if fam is Family.GUMBEL:
        if not 0 < tau < 1:
            raise DomainError(f"Gumbel tau must lie in (0, 1), got {tau}")
        return 1.0 / (1.0 - tau)
    if fam is Family.GAUSSIAN:
        if not -1 < tau < 1:
            raise DomainError(f"Gaussian tau must lie in (-1, 1), got {tau}")
        return math.sin(math.pi * tau / 2.0)
    if fam is Family.FRANK:
        if not -1 < tau < 1 or tau == 0:
            raise DomainError(f"Frank tau must lie in (-1, 1) without 0, got {tau}")
        sign = 1.0 if tau > 0 else -1.0
        lo, hi = _FRANK_BRACKET

        def g(d):
            return _frank_tau(sign * d) - tau

        while sign * g(hi) < 0:
            hi *= 2.0
            if hi > 1e4:
                raise DomainError(f"Frank parameter for tau={tau} is beyond the solvable range")
        root = optimize.brentq(g, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)
        return sign * root
    raise DomainError(f"{fam.value} copula has no free parameter to match tau")


def upper_tail_dependence(spec):
    """Closed-form ``lambda_U = lim_{u -> 0} C*(u, u) / u``."""
    fam, d = spec.family, spec.param
    if fam is Family.COMONOTONE:
        return 1.0
    if fam is Family.GUMBEL:
        return 2.0 - 2.0 ** (1.0 / d)
    if fam is Family.CLAYTON_SURVIVAL:
        return 2.0 ** (-1.0 / d) if d > 0 else 0.0
    return 0.0


def pi_plus_analytic(spec, margin_theta, margin_x, t0, x0):
    """``P(theta >= t0 | X >= x0) = C*(S_theta(t0), S_X(x0)) / S_X(x0)``."""
    s_theta = float(margin_theta.survival(t0))
    s_x = float(margin_x.survival(x0))
    if s_x <= 0:
        raise DomainError("S_X(x0) = 0: conditioning event has probability zero")
    return survival_copula_value(spec, s_theta, s_x) / s_x


def pi_minus_analytic(spec, margin_theta, margin_x, t0, x0, complement=False):
    """``(S_theta(t0) - S(t0, x0)) / F_X(x0)`` with ``S(t0, x0) = C*(S_theta, S_X)``.

    This quantity is ``P(theta >= t0 | X < x0)``, the chance of paying on a small
    loss. With ``complement=True`` the function returns ``P(theta < t0 | X < x0)``
    instead, the chance of correctly not paying.
    """
    s_theta = float(margin_theta.survival(t0))
    s_x = float(margin_x.survival(x0))
    f_x = 1.0 - s_x
    if f_x <= 0:
        raise DomainError("F_X(x0) = 0: conditioning event has probability zero")
    val = (s_theta - survival_copula_value(spec, s_theta, s_x)) / f_x
    return 1.0 - val if complement else val
