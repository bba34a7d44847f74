"""Out-of-sample replay of a calibration scheme over a score sequence.

At every evaluation origin the half-width is computed from scores that are
already realised at that origin, exactly as it would have been in real time.
Because the intervals are symmetric, coverage, width and Winkler score only
depend on the absolute error, so the replay works from score records alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .calibration import available_counts, expanding_quantiles, rolling_quantiles
from .errors import InputError, InsufficientScores, MissingSigma
from .metrics import LOCAL_WINDOW, EvalReport, evaluate_arrays, winkler_array
from .series import ScoreRecord, score_arrays


def _arrays(records: Sequence[ScoreRecord]):
    if not records:
        raise InsufficientScores(1, 0)
    arr = score_arrays(records)
    if np.any(np.diff(arr["origin"]) <= 0):
        raise InputError("score records must be sorted by strictly increasing origin")
    horizons = {r.horizon for r in records}
    if len(horizons) != 1:
        raise InputError(f"score records mix horizons {sorted(horizons)}")
    return arr, horizons.pop()


def replay_halfwidths(
    origins: np.ndarray,
    scores: np.ndarray,
    sigma: Optional[np.ndarray],
    h: int,
    eval_idx: np.ndarray,
    m: Optional[int],
    level: float,
    plus_one: bool = False,
) -> np.ndarray:
    """Half-widths at ``eval_idx`` for window ``m`` (``None`` = full history).

    With ``sigma`` the quantile is taken over ``score / sigma`` and multiplied
    by the current ``sigma``.
    """
    counts = available_counts(origins, h)[eval_idx]
    values = scores if sigma is None else scores / sigma
    if m is None:
        q = expanding_quantiles(values, counts, level, plus_one)
    else:
        q = rolling_quantiles(values, counts, m, level, plus_one)
    return q if sigma is None else q * sigma[eval_idx]


@dataclass(frozen=True)
class Backtest:
    origins: np.ndarray
    scores: np.ndarray
    halfwidths: np.ndarray
    alpha: float
    m: Optional[int]
    scaled: bool
    horizon: int

    @property
    def hits(self) -> np.ndarray:
        return self.scores <= self.halfwidths

    @property
    def winkler(self) -> np.ndarray:
        return winkler_array(self.scores, -self.halfwidths, self.halfwidths, self.alpha)

    def report(self, window: int = LOCAL_WINDOW) -> EvalReport:
        return evaluate_arrays(self.scores, -self.halfwidths, self.halfwidths, self.alpha, window)


def backtest(
    records: Sequence[ScoreRecord],
    alpha: float,
    m: Optional[int] = None,
    scaled: bool = False,
    start: Optional[int] = None,
    plus_one: bool = False,
) -> Backtest:
    """Replay ROCP (``m``), full-history (``m=None``) or VS-ROCP (``scaled``).

    ``start`` is the first evaluation origin; by default the first origin at
    which ``m`` realised scores exist (one for full history).
    """
    if not 0 < alpha < 1:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")
    arr, h = _arrays(records)
    origins, scores = arr["origin"], arr["score"]
    sigma = None
    if scaled:
        sigma = arr["sigma"]
        missing = np.flatnonzero(np.isnan(sigma))
        if missing.size:
            raise MissingSigma(int(origins[missing[0]]))
    counts = available_counts(origins, h)
    need = 1 if m is None else m
    ok = counts >= need
    if start is not None:
        ok &= origins >= start
    eval_idx = np.flatnonzero(ok)
    if eval_idx.size == 0:
        raise InsufficientScores(need + h, len(records))
    hw = replay_halfwidths(origins, scores, sigma, h, eval_idx, m, 1 - alpha, plus_one)
    return Backtest(origins[eval_idx], scores[eval_idx], hw, alpha, m, scaled, h)
