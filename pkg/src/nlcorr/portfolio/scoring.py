"""NLC scoring: rolling nonlinearity measures, banded scores and the cash weight."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from ..nonlinearity import off_diagonal_mean

S2_WINDOW = 24
S3_LAG = 3

# (lower bound inclusive, score) for the absolute level of s1
S1_BANDS = ((0.25, 0), (0.20, 25), (0.15, 50), (0.10, 75))
S1_FLOOR = 100
# multiples of s2 that s1 must reach for each score
S2_BANDS = ((23 / 20, 0), (21 / 20, 25), (3 / 4, 50), (1 / 2, 75))
S2_FLOOR = 100

NEUTRAL_S1 = 50
NEUTRAL_S2 = 50
NEUTRAL_S3 = 0


def s1_from_zeta(zeta) -> float:
    """Mean of zeta over all ordered pairs i != j."""
    return off_diagonal_mean(zeta)


def nlc_measures(history, t, s2_mode="printed"):
    """(s1, s2, s3) at window ``t``; unavailable measures come back as ``None``.

    ``history`` holds per-window zeta matrices or precomputed s1 values.
    ``s2_mode="printed"`` sums the 25 values s1(t-24..t) and divides by 24;
    ``"mean"`` divides by 25.
    """
    if s2_mode not in ("printed", "mean"):
        raise ValidationError(f"unknown s2 mode {s2_mode!r}")
    if not 0 <= t < len(history):
        raise ValidationError(f"window {t} outside history of length {len(history)}")
    s1_path = [h if np.isscalar(h) else s1_from_zeta(h) for h in history[: t + 1]]
    s1 = float(s1_path[t])
    s2 = None
    if t >= S2_WINDOW:
        total = float(sum(s1_path[t - S2_WINDOW: t + 1]))
        s2 = total / (S2_WINDOW if s2_mode == "printed" else S2_WINDOW + 1)
    s3 = None
    if t >= S3_LAG and s1_path[t - S3_LAG] != 0.0:
        s3 = s1 / float(s1_path[t - S3_LAG]) - 1.0
    return s1, s2, s3


def score_s1(s1):
    if s1 is None:
        return NEUTRAL_S1
    for lo, score in S1_BANDS:
        if s1 >= lo:
            return score
    return S1_FLOOR


def score_s2(s1, s2):
    if s1 is None or s2 is None or s2 <= 0.0:
        return NEUTRAL_S2
    for mult, score in S2_BANDS:
        if s1 >= mult * s2:
            return score
    return S2_FLOOR


def score_s3(s3):
    # the printed top band reads "0.05 <= s3 < 0"; read as s3 >= 0.05
    if s3 is None:
        return NEUTRAL_S3
    if s3 <= -0.02:
        return 25
    if s3 < 0.0:
        return 10
    if s3 < 0.02:
        return 0
    if s3 < 0.05:
        return -10
    return -100


@dataclass(frozen=True)
class NlcScore:
    s1: float | None
    s2: float | None
    s3: float | None
    score1: int
    score2: int
    score3: int
    combined: float
    s_nlc: float


def score_map(s1, s2, s3) -> NlcScore:
    """Banded scores, their equal-weight mean and the result clamped to [0, 100]."""
    if s1 is not None and s1 < 0:
        raise ValidationError(f"s1 must be non-negative, got {s1}")
    a, b, c = score_s1(s1), score_s2(s1, s2), score_s3(s3)
    combined = (a + b + c) / 3.0
    return NlcScore(s1, s2, s3, a, b, c, combined, min(max(combined, 0.0), 100.0))


def cash_weight(s_nlc) -> float:
    """+1 is all cash, -1 doubles the risky exposure with borrowed cash."""
    if not 0.0 <= s_nlc <= 100.0:
        raise ValidationError(f"s_nlc must lie in [0, 100], got {s_nlc}")
    return (100.0 - 2.0 * s_nlc) / 100.0
