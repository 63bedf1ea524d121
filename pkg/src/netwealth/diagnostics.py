"""Empirical summaries of weighted wealth samples.

Summary statistics, Lorenz curve, Gini ratio, top shares, mean-excess and
Zipf series, and index numbers. Every function is invariant to a uniform
rescaling of the weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IndexBaseError, InsufficientDataError, MeanSignError, ZeroVarianceError, DomainError

__all__ = [
    "SummaryStats",
    "SeriesTable",
    "summary_stats",
    "empirical_lorenz",
    "empirical_gini",
    "top_share",
    "mean_excess_series",
    "zipf_series",
    "index_numbers",
]


@dataclass(frozen=True)
class SummaryStats:
    n_obs: int
    mean: float
    median: float
    skewness: float
    kurtosis: float
    gini: float
    share_negative: float
    share_zero: float
    share_positive: float
    gini_normalized: bool = False

    def as_dict(self):
        return dict(self.__dict__)


@dataclass(frozen=True, eq=False)
class SeriesTable:
    """Labelled ``(x, y)`` points with strictly increasing ``x``."""

    label: str
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if x.shape != y.shape:
            raise DomainError("x and y must have equal length")
        if x.size > 1 and not np.all(np.diff(x) > 0):
            raise DomainError("x must be strictly increasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def points(self):
        return list(zip(self.x.tolist(), self.y.tolist()))

    def __len__(self):
        return self.x.size

    def to_text(self, delimiter="\t"):
        lines = [f"# {self.label}", f"x{delimiter}y"]
        lines += [f"{a:.17g}{delimiter}{b:.17g}" for a, b in self.points]
        return "\n".join(lines) + "\n"

    def write(self, path, delimiter="\t"):
        Path(path).write_text(self.to_text(delimiter))

    @classmethod
    def from_text(cls, text, delimiter="\t"):
        label, xs, ys = "", [], []
        for line in text.splitlines():
            if line.startswith("#"):
                label = label or line[1:].strip()
            elif line.strip() and not line.startswith("x"):
                a, b = line.split(delimiter)
                xs.append(float(a))
                ys.append(float(b))
        return cls(label, np.array(xs), np.array(ys))


def _positive_mean(sample):
    mu = sample.weighted_mean()
    if not mu > 0:
        raise MeanSignError(f"weighted mean must be positive, got {mu!r}")
    return mu


def _lorenz_knots(sample):
    """Cumulative population share ``H`` and wealth share ``L`` at every observation, starting at (0, 0)."""
    mu = _positive_mean(sample)
    p = sample.probabilities
    H = np.concatenate([[0.0], np.cumsum(p)])
    L = np.concatenate([[0.0], np.cumsum(p * sample.values) / mu])
    H[-1], L[-1] = 1.0, 1.0
    return H, L


def empirical_lorenz(sample, grid=None):
    """Weighted empirical Lorenz curve, linear between observations.

    The curve dips below zero while negative wealth accumulates. ``grid``
    defaults to 101 equally spaced points on [0, 1].
    """
    u = np.linspace(0.0, 1.0, 101) if grid is None else np.asarray(grid, dtype=float)
    if np.any((u < 0) | (u > 1)):
        raise DomainError("grid points must lie in [0, 1]")
    H, L = _lorenz_knots(sample)
    return SeriesTable("empirical Lorenz curve", u, np.interp(u, H, L))


def empirical_gini(sample, normalized=False):
    """Weighted Gini ratio ``2 cov(w, F_mid) / mu`` with midpoint ranks.

    With ``normalized=True`` the ratio is divided by ``1 - rho L(theta1)``
    where ``rho`` is the share of nonpositive wealth and ``L(theta1)`` the
    Lorenz ordinate after all negative holdings; this is the convention used
    for model Gini ratios when wealth can be negative.
    """
    mu = _positive_mean(sample)
    p = sample.probabilities
    w = sample.values
    f_mid = np.cumsum(p) - 0.5 * p
    g = 2.0 * float(np.dot(p, (w - mu) * (f_mid - 0.5))) / mu
    if normalized:
        rho = float(p[w <= 0].sum())
        l_theta1 = float(np.dot(p[w < 0], w[w < 0])) / mu
        g /= 1.0 - rho * l_theta1
    return g


def summary_stats(sample, normalized_gini=False):
    p = sample.probabilities
    w = sample.values
    mu = float(np.dot(p, w))
    d = w - mu
    var = float(np.dot(p, d * d))
    if not var > 0:
        raise ZeroVarianceError("sample has zero variance")
    sd = np.sqrt(var)
    skew = float(np.dot(p, d**3)) / sd**3
    kurt = float(np.dot(p, d**4)) / var**2
    neg = float(p[w < 0].sum())
    zero = float(p[w == 0].sum())
    return SummaryStats(
        n_obs=sample.n,
        mean=mu,
        median=float(sample.median()),
        skewness=skew,
        kurtosis=kurt,
        gini=empirical_gini(sample, normalized_gini),
        share_negative=neg,
        share_zero=zero,
        share_positive=1.0 - neg - zero,
        gini_normalized=normalized_gini,
    )


def top_share(sample, fraction=0.2):
    """Share of total wealth held by the richest ``fraction`` of the weighted population."""
    if not 0 < fraction < 1:
        raise DomainError("fraction must lie in (0, 1)")
    H, L = _lorenz_knots(sample)
    return float(1.0 - np.interp(1.0 - fraction, H, L))


def _distinct_positive(sample):
    pos = sample.positives()
    if pos.n < 2:
        raise InsufficientDataError("at least 2 positive observations are needed")
    v, first = np.unique(pos.values, return_index=True)
    wsum = np.add.reduceat(pos.weights, first)
    vsum = np.add.reduceat(pos.weights * pos.values, first)
    return v, wsum / pos.total_weight, vsum / pos.total_weight


def mean_excess_series(sample, trim=0.01):
    """Weighted mean excess ``e(v) = E[W - v | W > v]`` over the positive observations.

    Thresholds run over the distinct positive values except the largest;
    those whose upper tail holds less than ``trim`` of the positive weight
    are dropped, since a handful of extreme points make them erratic.
    """
    if not 0 <= trim < 1:
        raise DomainError("trim must lie in [0, 1)")
    v, pw, pv = _distinct_positive(sample)
    # weight and weighted sum strictly above each threshold
    tail_w = np.concatenate([np.cumsum(pw[::-1])[::-1][1:], [0.0]])
    tail_v = np.concatenate([np.cumsum(pv[::-1])[::-1][1:], [0.0]])
    keep = tail_w > trim
    keep[-1] = False
    x = v[keep]
    e = tail_v[keep] / tail_w[keep] - x
    return SeriesTable("mean excess", x, e)


def zipf_series(sample):
    """Points ``(ln w, ln S(w))`` with ``S`` the weighted share of positives at or above ``w``."""
    v, pw, _ = _distinct_positive(sample)
    surv = np.cumsum(pw[::-1])[::-1]
    return SeriesTable("zipf", np.log(v), np.log(np.minimum(surv, 1.0)))


def index_numbers(series, base_x, tol=1e-9):
    """Rescale ``series`` so the point at ``base_x`` equals 100."""
    hit = np.flatnonzero(np.abs(series.x - base_x) <= tol * max(1.0, abs(base_x)))
    if hit.size == 0:
        raise IndexBaseError(f"base {base_x!r} is not in the series")
    y0 = series.y[hit[0]]
    if y0 == 0:
        raise IndexBaseError(f"series is zero at base {base_x!r}")
    return SeriesTable(f"{series.label} (index, base {base_x:g} = 100)", series.x, 100.0 * series.y / y0)
