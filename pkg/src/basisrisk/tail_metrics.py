"""Empirical estimators of the gap between a loss ``X`` and a payoff ``Y``.

All estimators take a :class:`PairedSample` and condition on the loss exceeding a
threshold ``s``. Standard errors are i.i.d. plug-in values; estimates built on
fewer than ``FLAG_BELOW`` exceedances are flagged rather than dropped.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DomainError, EmptyEstimateError

__all__ = [
    "PairedSample",
    "ExcessEstimate",
    "ExcessCurve",
    "TailDependenceEstimate",
    "BinnedRegression",
    "FLAG_BELOW",
    "DEFAULT_LEVELS",
    "conditional_mean_diff",
    "conditional_sq_diff",
    "excess_curve",
    "quantile_grid",
    "kendall_tau",
    "kendall_tau_bruteforce",
    "pi_plus_empirical",
    "pi_minus_empirical",
    "upper_tail_dep_empirical",
    "conditional_mean_regression",
]

FLAG_BELOW = 100
DEFAULT_LEVELS = tuple(np.round(np.append(np.arange(0.50, 0.951, 0.05), 0.99), 2))
_METRICS = ("mean", "square")


@dataclass(frozen=True)
class PairedSample:
    """``n`` draws of the actual loss ``x`` and the payoff ``y``."""

    x: np.ndarray
    y: np.ndarray
    seed: int = None
    label: str = ""

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape:
            raise DomainError(f"x and y must be 1-d of equal length, got {x.shape} and {y.shape}")
        if x.size < 1:
            raise DomainError("a paired sample needs at least one point")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DomainError("paired sample contains non-finite entries")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return self.x.size

    @property
    def z(self):
        return self.x - self.y


@dataclass(frozen=True)
class ExcessEstimate:
    s: float
    estimate: float
    std_error: float
    n_exceed: int
    quantile: float = None

    @property
    def flagged(self):
        """True when the estimate rests on too few exceedances to trust."""
        return self.n_exceed < FLAG_BELOW or not np.isfinite(self.std_error)


@dataclass(frozen=True)
class ExcessCurve:
    points: list
    grid_rule: str
    metric: str = "mean"

    def __post_init__(self):
        s = [p.s for p in self.points]
        if any(b <= a for a, b in zip(s, s[1:])):
            raise DomainError("curve thresholds must be strictly increasing")

    def __len__(self):
        return len(self.points)

    @property
    def s(self):
        return np.array([p.s for p in self.points])

    @property
    def estimates(self):
        return np.array([p.estimate for p in self.points])

    @property
    def std_errors(self):
        return np.array([p.std_error for p in self.points])

    @property
    def quantiles(self):
        return np.array([np.nan if p.quantile is None else p.quantile for p in self.points])

    @property
    def n_exceed(self):
        return np.array([p.n_exceed for p in self.points])


@dataclass(frozen=True)
class TailDependenceEstimate:
    value: float
    u: float
    n_joint: int
    flagged: bool

    @property
    def std_error(self):
        # binomial count over n*u trials
        n_tail = self.n_joint / self.value if self.value > 0 else math.nan
        if not np.isfinite(n_tail) or n_tail <= 0:
            return math.nan
        return math.sqrt(self.value * max(1.0 - self.value, 0.0) / n_tail)


def _summarise(d, s, quantile=None):
    n = d.size
    if n == 0:
        raise EmptyEstimateError(f"no sample point has x >= {s}")
    est = float(d.mean())
    se = float(d.std(ddof=1) / math.sqrt(n)) if n >= 2 else math.nan
    return ExcessEstimate(s=float(s), estimate=est, std_error=se, n_exceed=int(n), quantile=quantile)


def conditional_mean_diff(sample, s):
    """Estimate ``E[X - Y | X >= s]`` with its plug-in standard error."""
    m = sample.x >= s
    return _summarise(sample.x[m] - sample.y[m], s)


def conditional_sq_diff(sample, s):
    """Estimate ``E[(X - Y)**2 | X >= s]`` with its plug-in standard error."""
    m = sample.x >= s
    d = sample.x[m] - sample.y[m]
    return _summarise(d * d, s)


def quantile_grid(x, levels=DEFAULT_LEVELS):
    """Dollar thresholds at empirical quantile ``levels`` of ``x``."""
    levels = np.asarray(levels, dtype=float)
    return np.quantile(np.asarray(x, dtype=float), levels)


def excess_curve(sample, grid=None, metric="mean", levels=None):
    """Evaluate a gap metric at each threshold of an increasing grid.

    Parameters
    ----------
    sample : PairedSample
    grid : array_like, optional
        Dollar thresholds. When omitted, the empirical quantiles of ``x`` at
        ``levels`` (default ``DEFAULT_LEVELS``) are used.
    metric : {"mean", "square"}
        ``E[X - Y | X >= s]`` or ``E[(X - Y)**2 | X >= s]``.

    Points without exceedances are kept with a NaN estimate and
    ``n_exceed = 0`` so the curve stays aligned with its grid.
    """
    if metric not in _METRICS:
        raise DomainError(f"metric must be one of {_METRICS}, got {metric!r}")
    if grid is None:
        levels = DEFAULT_LEVELS if levels is None else levels
        levels = np.asarray(levels, dtype=float)
        grid = quantile_grid(sample.x, levels)
        rule = "empirical quantiles of x at levels " + ",".join(f"{q:g}" for q in levels)
    else:
        grid = np.atleast_1d(np.asarray(grid, dtype=float))
        rule = "explicit thresholds"
        levels = None if levels is None else np.asarray(levels, dtype=float)
    if grid.size == 0:
        raise DomainError("threshold grid is empty")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("threshold grid must be strictly increasing")

    order = np.argsort(sample.x, kind="stable")
    xs = sample.x[order]
    d = xs - sample.y[order]
    if metric == "square":
        d = d * d
    starts = np.searchsorted(xs, grid, side="left")
    points = []
    for i, (s, k) in enumerate(zip(grid, starts)):
        q = None if levels is None else float(levels[i])
        tail = d[k:]
        if tail.size == 0:
            points.append(ExcessEstimate(float(s), math.nan, math.nan, 0, q))
            continue
        points.append(_summarise(tail, s, q))
    return ExcessCurve(points=points, grid_rule=rule, metric=metric)


def _count_inversions(a):
    """Number of pairs ``i < j`` with ``a[i] > a[j]`` (bottom-up merge sort).

    Each level merges adjacent sorted blocks. Cross-block inversions are counted
    with one ``searchsorted`` over block-offset keys, and a stable sort of a row
    made of two sorted runs is a linear merge.
    """
    a = np.asarray(a)
    n = a.size
    if n < 2:
        return 0
    # dense ranks keep values small enough to offset by block index
    _, ranks = np.unique(a, return_inverse=True)
    ranks = ranks.astype(np.int64)
    size = 1 << (n - 1).bit_length()
    pad = ranks.max() + 1
    work = np.full(size, pad, dtype=np.int64)
    work[:n] = ranks
    span = pad + 1
    total = 0
    width = 1
    while width < size:
        blocks = work.reshape(-1, 2 * width)
        left = blocks[:, :width]
        right = blocks[:, width:]
        offs = (np.arange(blocks.shape[0], dtype=np.int64) * span)[:, None]
        lk = (left + offs).ravel()
        rk = (right + offs).ravel()
        pos = np.searchsorted(lk, rk, side="right")
        ends = np.repeat((np.arange(blocks.shape[0], dtype=np.int64) + 1) * width, width)
        total += int((ends - pos).sum())
        work = np.sort(blocks, axis=1, kind="stable").ravel()
        width *= 2
    return total


def _tie_pairs(values):
    _, counts = np.unique(values, return_counts=True)
    counts = counts.astype(np.int64)
    return int((counts * (counts - 1) // 2).sum())


def kendall_tau(sample):
    """Kendall's tau-b in ``O(n log n)`` (Knight's algorithm).

    Accepts a :class:`PairedSample` or an ``(x, y)`` tuple.
    """
    x, y = _xy(sample)
    n = x.size
    if n < 2:
        raise DomainError("Kendall's tau needs at least two points")
    order = np.lexsort((y, x))
    xs, ys = x[order], y[order]
    n0 = n * (n - 1) // 2
    n1 = _tie_pairs(xs)
    n2 = _tie_pairs(ys)
    _, joint = np.unique(np.column_stack([xs, ys]), axis=0, return_counts=True)
    joint = joint.astype(np.int64)
    n3 = int((joint * (joint - 1) // 2).sum())
    swaps = _count_inversions(ys)
    numer = n0 - n1 - n2 + n3 - 2 * swaps
    denom = math.sqrt(float(n0 - n1) * float(n0 - n2))
    if denom == 0:
        return math.nan
    return numer / denom


def kendall_tau_bruteforce(sample):
    """Tau-b by enumerating all pairs; ``O(n**2)`` reference implementation."""
    x, y = _xy(sample)
    n = x.size
    if n < 2:
        raise DomainError("Kendall's tau needs at least two points")
    i, j = np.triu_indices(n, k=1)
    sx = np.sign(x[i] - x[j])
    sy = np.sign(y[i] - y[j])
    s = int((sx * sy).sum())
    nx = int(np.count_nonzero(sx))
    ny = int(np.count_nonzero(sy))
    if nx == 0 or ny == 0:
        return math.nan
    return s / math.sqrt(nx * ny)


def _xy(sample):
    if isinstance(sample, PairedSample):
        return sample.x, sample.y
    x, y = sample
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float)


def _binomial(hits, n):
    if n == 0:
        raise EmptyEstimateError("conditioning event is empty")
    p = hits / n
    return p, math.sqrt(p * (1.0 - p) / n)


def pi_plus_empirical(sample, t0, x0, theta=None):
    """Relative frequency of ``theta >= t0`` among points with ``x >= x0``.

    ``theta`` defaults to ``sample.y``; the trigger event is unchanged by any
    strictly increasing payoff, so thresholds on ``y`` work equally well.
    Returns ``(probability, standard_error)``.
    """
    par = sample.y if theta is None else np.asarray(theta, dtype=float)
    cond = sample.x >= x0
    return _binomial(int(np.count_nonzero(par[cond] >= t0)), int(np.count_nonzero(cond)))


def pi_minus_empirical(sample, t0, x0, theta=None):
    """Relative frequency of ``theta < t0`` among points with ``x < x0``."""
    par = sample.y if theta is None else np.asarray(theta, dtype=float)
    cond = sample.x < x0
    return _binomial(int(np.count_nonzero(par[cond] < t0)), int(np.count_nonzero(cond)))


def upper_tail_dep_empirical(sample, u, min_points=50):
    """``#{x > q_x(1-u), y > q_y(1-u)} / (n u)``.

    Estimates with ``n * u < min_points`` are returned with ``flagged=True``.
    """
    if not 0 < u <= 0.5:
        raise DomainError(f"tail level u must lie in (0, 0.5], got {u}")
    x, y = sample.x, sample.y
    n = x.size
    qx = np.quantile(x, 1.0 - u)
    qy = np.quantile(y, 1.0 - u)
    joint = int(np.count_nonzero((x > qx) & (y > qy)))
    return TailDependenceEstimate(
        value=joint / (n * u), u=float(u), n_joint=joint, flagged=n * u < min_points
    )


@dataclass(frozen=True)
class BinnedRegression:
    """Piecewise-constant estimate of ``psi(x) = E[Y | X = x]``."""

    edges: np.ndarray
    centers: np.ndarray
    means: np.ndarray
    std_errors: np.ndarray
    counts: np.ndarray = field(repr=False)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, self.means.size - 1)
        return self.means[idx]


def conditional_mean_regression(sample, n_bins):
    """Bin ``x`` into equal-count quantile bins and average ``y`` in each.

    Bin centers are the within-bin means of ``x``. A bin holding fewer than two
    points is merged into its neighbour.
    """
    if n_bins < 2:
        raise DomainError("need at least two bins")
    x, y = sample.x, sample.y
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    bounds = list(np.unique(np.linspace(0, xs.size, n_bins + 1).round().astype(int)))
    # merge undersized bins into their left neighbour (right neighbour for the first)
    i = 1
    while i < len(bounds):
        if bounds[i] - bounds[i - 1] < 2 and len(bounds) > 2:
            del bounds[i if i < len(bounds) - 1 else i - 1]
            i = 1
            continue
        i += 1
    centers, means, ses, counts, edges = [], [], [], [], []
    for lo, hi in zip(bounds, bounds[1:]):
        bx, by = xs[lo:hi], ys[lo:hi]
        centers.append(bx.mean())
        means.append(by.mean())
        ses.append(by.std(ddof=1) / math.sqrt(by.size) if by.size > 1 else math.nan)
        counts.append(by.size)
        edges.append(bx[0])
    edges.append(xs[-1])
    return BinnedRegression(
        edges=np.array(edges),
        centers=np.array(centers),
        means=np.array(means),
        std_errors=np.array(ses),
        counts=np.array(counts),
    )
