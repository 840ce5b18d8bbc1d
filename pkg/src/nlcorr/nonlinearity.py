"""Significance and strength of nonlinear dependence from original-vs-surrogate MI."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dependence import DependencyMatrix, bin_count, mi_matrix
from .errors import ValidationError
from .surrogate import EnsemblePairStats, ensemble_mi_stats, make_surrogates

EPS = 1e-12


def _values(m):
    if isinstance(m, DependencyMatrix):
        if m.measure != "mutual-information":
            raise ValidationError("nonlinearity measures need a mutual-information matrix")
        return np.asarray(m.values, dtype=float)
    return np.asarray(m, dtype=float)


def _check(orig, stats):
    if orig.ndim != 2 or orig.shape[0] != orig.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {orig.shape}")
    if orig.shape != stats.mean.shape or orig.shape != stats.std.shape:
        raise ValidationError(
            f"dimension mismatch: original {orig.shape} vs surrogate stats {stats.mean.shape}"
        )


@dataclass(frozen=True)
class SignificanceMatrix:
    values: np.ndarray
    degenerate: np.ndarray  # bool mask, True where sigma < eps
    window_index: int | None = None


@dataclass(frozen=True)
class NonlinearityMatrix:
    values: np.ndarray
    degenerate: np.ndarray  # bool mask, True where original MI < eps
    window_index: int | None = None


@dataclass(frozen=True)
class SignificanceProfile:
    per_asset: np.ndarray
    global_average: float


def chi_sig(original, stats: EnsemblePairStats, eps=EPS, window_index=None) -> SignificanceMatrix:
    """(I - <I*>) / sigma_I*, zero on the diagonal and wherever sigma_I* < eps."""
    orig = _values(original)
    _check(orig, stats)
    sigma = np.asarray(stats.std, dtype=float)
    degenerate = sigma < eps
    with np.errstate(divide="ignore", invalid="ignore"):
        chi = np.where(degenerate, 0.0, (orig - stats.mean) / np.where(degenerate, 1.0, sigma))
    np.fill_diagonal(chi, 0.0)
    np.fill_diagonal(degenerate, False)
    return SignificanceMatrix(chi, degenerate, window_index)


def chi_profile(sig: SignificanceMatrix) -> SignificanceProfile:
    """Row means of the significance matrix over the other N-1 assets."""
    v = np.asarray(sig.values, dtype=float)
    n = v.shape[0]
    if n < 2:
        raise ValidationError("profile needs at least 2 assets")
    off = ~np.eye(n, dtype=bool)
    per_asset = np.array([v[i, off[i]].mean() for i in range(n)])
    return SignificanceProfile(per_asset, float(per_asset.mean()))


def zeta_nlc(original, stats: EnsemblePairStats, eps=EPS, window_index=None) -> NonlinearityMatrix:
    """|I - <I*>| / I, zero on the diagonal and wherever I < eps."""
    orig = _values(original)
    _check(orig, stats)
    degenerate = orig < eps
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(degenerate, 0.0, np.abs(orig - stats.mean) / np.where(degenerate, 1.0, orig))
    np.fill_diagonal(z, 0.0)
    np.fill_diagonal(degenerate, False)
    return NonlinearityMatrix(z, degenerate, window_index)


def off_diagonal_mean(m) -> float:
    v = np.asarray(getattr(m, "values", m), dtype=float)
    n = v.shape[0]
    return float(v[~np.eye(n, dtype=bool)].mean())


def window_seed(seed, index) -> int:
    """Independent, reproducible surrogate seed for window ``index``."""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1)[0])


@dataclass(frozen=True)
class WindowNonlinearity:
    original: np.ndarray
    stats: EnsemblePairStats
    chi: SignificanceMatrix
    zeta: NonlinearityMatrix
    profile: SignificanceProfile

    @property
    def zeta_mean(self):
        return off_diagonal_mean(self.zeta)


def analyze_window(window, K=20, mode="shared-phase", seed=0, bins=None) -> WindowNonlinearity:
    """MI of the window, a K-member surrogate ensemble of it, and chi/zeta/profile."""
    data = np.asarray(window.returns, dtype=float)
    b = int(bins) if bins is not None else bin_count(data.shape[1])
    index = getattr(window, "index", None)
    orig, _ = mi_matrix(data, b)
    ens = make_surrogates(window, K, mode, seed)
    stats = ensemble_mi_stats(ens, bins=b)
    chi = chi_sig(orig, stats, window_index=index)
    return WindowNonlinearity(
        orig, stats, chi, zeta_nlc(orig, stats, window_index=index), chi_profile(chi)
    )
