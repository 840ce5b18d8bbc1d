"""Long-only Markowitz optimization and the max-Sharpe target-return sweep."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientDataError, NumericError, ValidationError

SHARPE_MODES = ("variance", "conventional")


def expected_returns(window, return_flags=False):
    """Per-asset median after dropping samples outside the 1.5 IQR fences.

    Quartiles use linear interpolation.  If every sample of a row were
    filtered the unfiltered median is used and the row is flagged.
    """
    data = np.asarray(getattr(window, "returns", window), dtype=float)
    if data.ndim == 1:
        data = data[None, :]
    if data.shape[1] < 4:
        raise InsufficientDataError(f"expected returns need T >= 4, got {data.shape[1]}")
    out = np.empty(data.shape[0])
    flags = np.zeros(data.shape[0], dtype=bool)
    for i, row in enumerate(data):
        q1, q3 = np.percentile(row, [25.0, 75.0])
        iqr = q3 - q1
        kept = row[(row >= q1 - 1.5 * iqr) & (row <= q3 + 1.5 * iqr)]
        if kept.size == 0:
            kept = row
            flags[i] = True
        out[i] = np.median(kept)
    return (out, flags) if return_flags else out


def covariance(window) -> np.ndarray:
    data = np.asarray(getattr(window, "returns", window), dtype=float)
    if data.ndim == 1:
        data = data[None, :]
    if data.shape[1] < 2:
        raise InsufficientDataError("covariance needs T >= 2")
    c = np.atleast_2d(np.cov(data, ddof=1))
    return 0.5 * (c + c.T)


@dataclass(frozen=True)
class AssetStats:
    R: np.ndarray
    cov: np.ndarray
    window_index: int | None = None

    def __post_init__(self):
        R = np.atleast_1d(np.asarray(self.R, dtype=float))
        S = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if S.shape != (R.size, R.size):
            raise ValidationError(f"covariance shape {S.shape} does not match {R.size} assets")
        if not (np.isfinite(R).all() and np.isfinite(S).all()):
            raise ValidationError("asset statistics must be finite")
        if not np.allclose(S, S.T, rtol=0, atol=1e-14 * max(1.0, np.abs(S).max())):
            raise ValidationError("covariance matrix must be symmetric")
        S = 0.5 * (S + S.T)
        tr = float(np.trace(S))
        if R.size > 1 and np.linalg.eigvalsh(S).min() < -1e-10 * max(tr, 0.0):
            raise ValidationError("covariance matrix is not positive semi-definite")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "cov", S)

    @property
    def n(self):
        return self.R.size

    @classmethod
    def from_window(cls, window):
        return cls(expected_returns(window), covariance(window), getattr(window, "index", None))


@dataclass(frozen=True)
class Portfolio:
    weights: np.ndarray
    expected_return: float
    variance: float
    target: float
    ratio: float
    cash_weight: float = 0.0


def _null_space(A, rtol=1e-10):
    if A.shape[1] == 0:
        return np.zeros((0, 0))
    u, s, vt = np.linalg.svd(A)
    rank = int((s > rtol * max(s.max(initial=0.0), 1.0)).sum())
    return vt[rank:].T


def _constraint_rows(R):
    # budget row plus the return row centred and scaled for conditioning
    c = R.mean()
    scale = np.abs(R - c).max()
    if scale == 0.0:
        return np.ones((1, R.size)), c, 0.0
    return np.vstack([np.ones(R.size), (R - c) / scale]), c, scale


def _active_set(S, A, w, active, max_iter):
    """Primal active-set iterations from the feasible point ``w``."""
    n = w.size
    for _ in range(max_iter):
        free = np.array([i for i in range(n) if i not in active], dtype=int)
        Z = _null_space(A[:, free])
        if Z.shape[1]:
            H = Z.T @ S[np.ix_(free, free)] @ Z
            g = Z.T @ (S @ w)[free]
            y = -np.linalg.lstsq(H, g, rcond=None)[0]
            p_free = Z @ y
        else:
            p_free = np.zeros(free.size)
        if np.abs(p_free).max(initial=0.0) <= 1e-13:
            if not active:
                return w
            grad = 2.0 * (S @ w)
            nu = np.linalg.lstsq(A[:, free].T, grad[free], rcond=None)[0]
            act = np.array(sorted(active), dtype=int)
            mult = grad[act] - A[:, act].T @ nu
            tol = 1e-12 * max(1.0, np.abs(grad).max())
            j = int(np.argmin(mult))
            if mult[j] >= -tol:
                return w
            active.discard(int(act[j]))
            continue
        neg = p_free < 0
        alpha, block = 1.0, None
        if neg.any():
            ratios = -w[free[neg]] / p_free[neg]
            k = int(np.argmin(ratios))
            if ratios[k] < 1.0:
                alpha, block = float(max(ratios[k], 0.0)), int(free[neg][k])
        w = w.copy()
        w[free] += alpha * p_free
        if block is not None:
            w[block] = 0.0
            active.add(block)
    raise NumericError("active-set iteration did not converge")


def min_variance_weights(stats: AssetStats, target, max_iter=None):
    """Long-only minimum-variance weights hitting ``target`` expected return.

    Returns ``None`` when the target lies outside [min R, max R].
    """
    R, S = stats.R, stats.cov
    n = R.size
    lo, hi = float(R.min()), float(R.max())
    slack = 1e-12 * max(1.0, abs(lo), abs(hi))
    if not (lo - slack <= target <= hi + slack):
        return None
    target = min(max(float(target), lo), hi)
    if max_iter is None:
        max_iter = 50 * n + 50

    # at the ends of the range only the extreme-return assets are feasible
    if hi > lo and (target == hi or target == lo):
        sub = np.flatnonzero(R == target)
        w = np.zeros(n)
        if sub.size == 1:
            w[sub[0]] = 1.0
            return w
        Ss = S[np.ix_(sub, sub)]
        ws = _active_set(Ss, np.ones((1, sub.size)), np.full(sub.size, 1.0 / sub.size), set(), max_iter)
        w[sub] = ws
        return _clean(w)

    A, _, _ = _constraint_rows(R)
    if hi == lo:
        w0 = np.full(n, 1.0 / n)
    else:
        lam = (target - lo) / (hi - lo)
        w0 = np.zeros(n)
        w0[int(np.argmax(R))] += lam
        w0[int(np.argmin(R))] += 1.0 - lam
    active = {i for i in range(n) if w0[i] == 0.0}
    return _clean(_active_set(S, A, w0, active, max_iter))


def _clean(w):
    w = np.where(np.abs(w) < 1e-15, 0.0, w)
    return w


def kkt_residual(stats: AssetStats, w, target) -> float:
    """Largest violation of the KKT conditions of the long-only QP at ``w``."""
    R, S = stats.R, stats.cov
    w = np.asarray(w, dtype=float)
    A = np.vstack([np.ones(R.size), R])
    grad = 2.0 * S @ w
    support = w > 1e-12
    nu = np.linalg.lstsq(A[:, support].T, grad[support], rcond=None)[0]
    mult = grad - A.T @ nu
    free_nu = _null_space(A[:, support].T)
    if free_nu.shape[1] == 1 and (~support).any():
        # the equality multipliers are not unique on a degenerate face: move
        # along the free direction to make the bound multipliers as large as possible
        c = (A.T @ free_nu[:, 0])[~support]
        c[np.abs(c) <= 1e-12 * np.abs(A).max()] = 0.0
        mult[~support] -= _best_shift(mult[~support], c) * c
    parts = [
        abs(w.sum() - 1.0),
        abs(R @ w - target),
        max(0.0, -w.min()),
        np.abs(mult[support]).max(initial=0.0),
        max(0.0, -mult[~support].min(initial=0.0)),
        np.abs(mult * w).max(initial=0.0),
    ]
    return float(max(parts))


def _best_shift(m0, c):
    """t maximizing min_j (m0_j - t c_j), clipped to a finite range."""
    m0 = np.asarray(m0, dtype=float)
    c = np.asarray(c, dtype=float)
    scale = max(1.0, np.abs(m0).max(initial=0.0))
    pos, neg = c > 0, c < 0
    if not pos.any() and not neg.any():
        return 0.0
    # candidates: every pairwise crossing plus the points where a line reaches zero
    cands = [0.0]
    cands += list(m0[c != 0] / c[c != 0])
    for i in np.flatnonzero(pos):
        for j in np.flatnonzero(neg):
            cands.append((m0[i] - m0[j]) / (c[i] - c[j]))
    if not pos.any() or not neg.any():
        # one-sided: push far enough that every line with c != 0 is positive
        far = 2.0 * max(abs(x) for x in cands) + scale
        cands.append(-far if pos.any() else far)
    return float(max(cands, key=lambda t: (m0 - t * c).min()))


def sharpe_ratio(mu, var, mode="variance"):
    if mode not in SHARPE_MODES:
        raise ValidationError(f"unknown sharpe mode {mode!r}")
    if var <= 0.0:
        return 0.0 if mu == 0.0 else math.copysign(math.inf, mu)
    return mu / var if mode == "variance" else mu / math.sqrt(var)


def max_sharpe_portfolio(stats: AssetStats, grid=101, sharpe="variance") -> Portfolio:
    """Sweep ``grid`` equally spaced targets over [min R, max R] and keep the best ratio.

    ``sharpe="variance"`` ranks by return over variance, ``"conventional"`` by
    return over volatility.  Ties go to lower variance, then lower target.
    """
    if grid < 1:
        raise ValidationError("grid must have at least one point")
    R, S = stats.R, stats.cov
    best = None
    best_key = None
    for target in np.linspace(R.min(), R.max(), int(grid)):
        w = min_variance_weights(stats, target)
        if w is None:
            continue
        mu = float(R @ w)
        var = float(max(w @ S @ w, 0.0))
        ratio = sharpe_ratio(mu, var, sharpe)
        key = (-ratio, var, float(target))
        if best_key is None or key < best_key:
            best_key = key
            best = Portfolio(w, mu, var, float(target), ratio)
    if best is None:
        raise NumericError("no feasible target return on the sweep grid")
    return best
