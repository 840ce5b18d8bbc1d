"""Pearson correlation, histogram mutual information and distance matrices.

Mutual information uses equal-width bins over each series' own [min, max]
within the window.  The same edges feed the marginal and joint histograms so
that ``I = H(X) + H(Y) - H(X, Y)`` is consistent and normalizes into [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, InsufficientDataError, ValidationError

MEASURES = ("pearson", "mutual-information")
_MEASURE_ALIASES = {"pearson": "pearson", "mi": "mutual-information", "mutual-information": "mutual-information"}


def canonical_measure(measure):
    try:
        return _MEASURE_ALIASES[measure]
    except KeyError:
        raise ValidationError(f"unknown measure {measure!r}") from None


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("pearson needs two 1-D series of equal length")
    if x.size < 2:
        raise InsufficientDataError("pearson needs at least 2 observations")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateInputError("pearson correlation undefined for a constant series")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def pearson_matrix(data, tickers=None) -> np.ndarray:
    """Correlation matrix of the rows of ``data``; raises on a constant row."""
    data = np.asarray(data, dtype=float)
    centered = data - data.mean(axis=1, keepdims=True)
    ss = np.einsum("ij,ij->i", centered, centered)
    zero = np.flatnonzero(ss == 0.0)
    if zero.size:
        name = tickers[zero[0]] if tickers is not None else f"series {zero[0]}"
        raise DegenerateInputError(
            f"pearson correlation undefined: {name} is constant in this window",
            ticker=name if tickers is not None else None,
        )
    z = centered / np.sqrt(ss)[:, None]
    rho = z @ z.T
    rho = 0.5 * (rho + rho.T)
    np.clip(rho, -1.0, 1.0, out=rho)
    np.fill_diagonal(rho, 1.0)
    return rho


def bin_count(T: int) -> int:
    """Smallest integer b with b >= sqrt(T/4)."""
    T = int(T)
    if T < 4:
        raise InsufficientDataError(f"bin rule needs T >= 4, got {T}")
    b = math.isqrt(T // 4)
    while 4 * b * b < T:
        b += 1
    return max(b, 1)


def bin_edges(x, b):
    x = np.asarray(x, dtype=float)
    return np.linspace(x.min(), x.max(), int(b) + 1)


def bin_indices(x, b) -> np.ndarray:
    """Equal-width bin index of each sample; the maximum lands in the top bin."""
    x = np.asarray(x, dtype=float)
    b = int(b)
    if b < 1:
        raise ValidationError(f"bin count must be >= 1, got {b}")
    lo, hi = x.min(), x.max()
    if lo == hi:
        return np.zeros(x.shape, dtype=np.intp)
    idx = np.searchsorted(bin_edges(x, b), x, side="right") - 1
    return np.clip(idx, 0, b - 1)


def _entropy_counts(counts, n) -> float:
    # sorted so the value does not depend on the layout of the histogram
    c = np.sort(counts[counts > 0]).astype(float)
    if c.size <= 1:
        return 0.0
    p = c / n
    return float(-(p * np.log(p)).sum())


def entropy(x, b: int) -> float:
    """Shannon entropy (nats) of the equal-width histogram of ``x``."""
    idx = bin_indices(x, b)
    return _entropy_counts(np.bincount(idx, minlength=int(b)), idx.size)


def _nmi_from_indices(ix, iy, b):
    n = ix.size
    hx = _entropy_counts(np.bincount(ix, minlength=b), n)
    hy = _entropy_counts(np.bincount(iy, minlength=b), n)
    if hx == 0.0 or hy == 0.0:
        return 0.0, True
    hxy = _entropy_counts(np.bincount(ix * b + iy, minlength=b * b), n)
    v = (hx + hy - hxy) / math.sqrt(hx * hy)
    return min(1.0, max(0.0, v)), False


def normalized_mi_flagged(x, y, b=None) -> tuple[float, bool]:
    """Normalized mutual information plus a flag set when either entropy is zero."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("normalized_mi needs two 1-D series of equal length")
    if x.size < 2:
        raise InsufficientDataError("normalized_mi needs at least 2 observations")
    if b is None:
        b = bin_count(x.size)
    b = int(b)
    return _nmi_from_indices(bin_indices(x, b), bin_indices(y, b), b)


def normalized_mi(x, y, b=None) -> float:
    return normalized_mi_flagged(x, y, b)[0]


def mi_matrix(data, b=None):
    """Pairwise normalized MI of the rows of ``data``.

    Returns ``(matrix, degenerate_pairs)``; the diagonal is 1.
    """
    data = np.asarray(data, dtype=float)
    n, T = data.shape
    if b is None:
        b = bin_count(T)
    b = int(b)
    idx = [bin_indices(row, b) for row in data]
    out = np.eye(n)
    degenerate = []
    for i in range(n):
        for j in range(i + 1, n):
            v, flag = _nmi_from_indices(idx[i], idx[j], b)
            out[i, j] = out[j, i] = v
            if flag:
                degenerate.append((i, j))
    return out, tuple(degenerate)


@dataclass(frozen=True)
class DependencyMatrix:
    measure: str
    values: np.ndarray
    tickers: tuple
    window_index: int | None = None
    bins: int | None = None
    degenerate: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "measure", canonical_measure(self.measure))
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "tickers", tuple(self.tickers))


@dataclass(frozen=True)
class DistanceMatrix:
    metric: str  # "mi-distance" | "corr-distance"
    values: np.ndarray
    tickers: tuple
    window_index: int | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "tickers", tuple(self.tickers))

    @property
    def n(self):
        return self.values.shape[0]


def dependency_matrix(window, measure, bins=None) -> DependencyMatrix:
    """Pairwise dependency matrix for one :class:`~nlcorr.panel.WindowView` (or panel)."""
    measure = canonical_measure(measure)
    data = np.asarray(window.returns, dtype=float)
    if data.shape[0] < 2:
        raise ValidationError("need at least 2 series")
    tickers = tuple(window.tickers)
    index = getattr(window, "index", None)
    if measure == "pearson":
        return DependencyMatrix(measure, pearson_matrix(data, tickers), tickers, index)
    b = int(bins) if bins is not None else bin_count(data.shape[1])
    values, degenerate = mi_matrix(data, b)
    return DependencyMatrix(measure, values, tickers, index, b, degenerate)


def to_distance(dep: DependencyMatrix) -> DistanceMatrix:
    v = np.asarray(dep.values, dtype=float)
    if dep.measure == "mutual-information":
        d = 1.0 - v
        metric = "mi-distance"
    else:
        d = np.sqrt(np.maximum(2.0 * (1.0 - v), 0.0))
        metric = "corr-distance"
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(metric, d, dep.tickers, dep.window_index)


def similarity_from_distance(values, metric):
    """Invert the distance transform back to dependency strength."""
    d = np.asarray(values, dtype=float)
    if metric == "mi-distance":
        return 1.0 - d
    if metric == "corr-distance":
        return 1.0 - d * d / 2.0
    raise ValidationError(f"unknown distance metric {metric!r}")


# --------------------------------------------------------------------------
# moments of off-diagonal coefficients


def upper_triangle(m):
    m = np.asarray(m)
    return m[np.triu_indices(m.shape[0], k=1)]


def standardized_moments(values):
    """Mean, population variance, skewness and (non-excess) kurtosis.

    Skewness and kurtosis are NaN when the variance is zero.
    """
    v = np.asarray(values, dtype=float)
    mean = float(v.mean())
    dev = v - mean
    m2 = float((dev ** 2).mean())
    if m2 == 0.0:
        return mean, 0.0, math.nan, math.nan
    m3 = float((dev ** 3).mean())
    m4 = float((dev ** 4).mean())
    return mean, m2, m3 / m2 ** 1.5, m4 / m2 ** 2


@dataclass(frozen=True)
class MomentSeries:
    window_index: tuple
    end_dates: tuple
    mean: np.ndarray
    variance: np.ndarray
    skewness: np.ndarray
    kurtosis: np.ndarray

    def rows(self):
        for k in range(len(self.window_index)):
            yield (self.end_dates[k], self.mean[k], self.variance[k], self.skewness[k], self.kurtosis[k])


def moment_series(distances, end_dates=None) -> MomentSeries:
    """First four moments of the upper-triangle coefficients of each distance matrix."""
    distances = list(distances)
    if not distances:
        raise ValidationError("moment_series needs at least one window")
    stats = np.array([standardized_moments(upper_triangle(d.values)) for d in distances])
    idx = tuple(d.window_index if d.window_index is not None else k for k, d in enumerate(distances))
    if end_dates is None:
        end_dates = tuple(str(i) for i in idx)
    return MomentSeries(idx, tuple(end_dates), *(stats[:, c] for c in range(4)))
