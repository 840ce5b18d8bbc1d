"""Fourier-transform surrogates, phase maps and ensemble MI statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dependence import bin_count, mi_matrix, standardized_moments, upper_triangle
from .errors import InsufficientDataError, ValidationError
from .panel import ReturnPanel

MODES = ("shared-phase", "independent-phase")
_MODE_ALIASES = {
    "shared": "shared-phase",
    "shared-phase": "shared-phase",
    "independent": "independent-phase",
    "independent-phase": "independent-phase",
}

# stream key for the shared draw; per-series streams use i + 1
_SHARED_STREAM = 0


def canonical_mode(mode):
    try:
        return _MODE_ALIASES[mode]
    except KeyError:
        raise ValidationError(f"unknown surrogate mode {mode!r}; expected one of {MODES}") from None


def randomized_bins(T: int) -> np.ndarray:
    """rfft bins whose phase gets randomized: everything except DC and (even T) Nyquist."""
    last = T // 2 - 1 if T % 2 == 0 else T // 2
    return np.arange(1, last + 1)


def _phases(seed, k, stream, size):
    rng = np.random.default_rng([seed, k, stream])
    return rng.uniform(0.0, 2.0 * math.pi, size)


def surrogate_realization(data, k, mode="shared-phase", seed=0) -> np.ndarray:
    """The ``k``-th FT surrogate of the rows of ``data`` (N x T).

    Random phases are added to every non-DC, non-Nyquist rfft bin; ``irfft``
    supplies the conjugate-symmetric half so the output is real.
    """
    mode = canonical_mode(mode)
    data = np.atleast_2d(np.asarray(data, dtype=float))
    n, T = data.shape
    spec = np.fft.rfft(data, axis=1)
    bins = randomized_bins(T)
    rot = np.ones_like(spec)
    if mode == "shared-phase":
        rot[:, bins] = np.exp(1j * _phases(seed, k, _SHARED_STREAM, bins.size))[None, :]
    else:
        for i in range(n):
            rot[i, bins] = np.exp(1j * _phases(seed, k, i + 1, bins.size))
    return np.fft.irfft(spec * rot, n=T, axis=1)


@dataclass(frozen=True)
class SurrogateEnsemble:
    realizations: np.ndarray  # K x N x T
    mode: str
    seed: int
    tickers: tuple
    dates: tuple

    def __post_init__(self):
        r = np.array(self.realizations, dtype=float)
        r.setflags(write=False)
        object.__setattr__(self, "realizations", r)

    @property
    def K(self):
        return self.realizations.shape[0]

    def realization(self, k) -> ReturnPanel:
        return ReturnPanel(self.tickers, self.dates, self.realizations[k])

    def __len__(self):
        return self.K

    def __iter__(self):
        return (self.realization(k) for k in range(self.K))


def _check_seed(seed):
    if int(seed) != seed or seed < 0:
        raise ValidationError(f"seed must be a non-negative integer, got {seed!r}")
    return int(seed)


def make_surrogates(panel, K=20, mode="shared-phase", seed=0) -> SurrogateEnsemble:
    """K surrogate panels; realization ``k`` depends only on (panel, mode, seed, k)."""
    if int(K) != K or K < 1:
        raise ValidationError(f"surrogate count K must be >= 1, got {K}")
    mode = canonical_mode(mode)
    seed = _check_seed(seed)
    data = np.asarray(panel.returns, dtype=float)
    if data.shape[1] < 4:
        raise InsufficientDataError(f"surrogates need T >= 4, got {data.shape[1]}")
    real = np.stack([surrogate_realization(data, k, mode, seed) for k in range(int(K))])
    dates = tuple(getattr(panel, "dates", range(data.shape[1])))
    return SurrogateEnsemble(real, mode, seed, tuple(panel.tickers), dates)


@dataclass(frozen=True)
class EnsemblePairStats:
    mean: np.ndarray  # N x N, mean normalized MI over realizations
    std: np.ndarray  # N x N, population std over realizations
    K: int
    bins: int


def ensemble_mi_stats(ensemble: SurrogateEnsemble, window=None, bins=None) -> EnsemblePairStats:
    """Per-pair mean and population standard deviation of MI across the ensemble.

    ``window`` is an optional ``(start, stop)`` column range.
    """
    if ensemble.K < 1:
        raise ValidationError("empty surrogate ensemble")
    real = ensemble.realizations
    if window is not None:
        start, stop = window
        real = real[:, :, start:stop]
    b = int(bins) if bins is not None else bin_count(real.shape[2])
    stack = np.stack([mi_matrix(r, b)[0] for r in real])
    return EnsemblePairStats(stack.mean(axis=0), stack.std(axis=0), ensemble.K, b)


def ensemble_distance_moments(ensemble: SurrogateEnsemble, bins=None):
    """Moments of the MI-distance coefficients averaged over realizations.

    Returns ``(mean, std)``, each a length-4 array (mean, variance, skewness,
    kurtosis), the std being the spread across realizations.
    """
    T = ensemble.realizations.shape[2]
    b = int(bins) if bins is not None else bin_count(T)
    m = np.array([
        standardized_moments(upper_triangle(1.0 - mi_matrix(r, b)[0]))
        for r in ensemble.realizations
    ])
    return m.mean(axis=0), m.std(axis=0)


@dataclass(frozen=True)
class PhaseMap:
    first: np.ndarray  # phi(l)
    second: np.ndarray  # phi(l + delay)
    delay: int

    def __len__(self):
        return self.first.size

    @property
    def points(self):
        return np.column_stack([self.first, self.second])


def fourier_phases(x) -> np.ndarray:
    """Phase of every rfft mode, mapped into (-pi, pi]."""
    phi = np.angle(np.fft.rfft(np.asarray(x, dtype=float)))
    phi[phi <= -math.pi] = math.pi
    return phi


def phase_map(x, delay=1) -> PhaseMap:
    """Pairs (phi(l), phi(l + delay)) for modes l = 1 .. floor(T/2) - 1 - delay."""
    x = np.asarray(x, dtype=float)
    T = x.size
    top = T // 2 - 1
    if int(delay) != delay or delay < 1:
        raise ValidationError(f"delay must be a positive integer, got {delay}")
    if delay >= top:
        raise ValidationError(f"delay {delay} leaves no usable modes for T={T}")
    phi = fourier_phases(x)
    l = np.arange(1, top - delay + 1)
    return PhaseMap(phi[l], phi[l + delay], int(delay))
