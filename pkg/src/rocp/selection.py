"""Calibration-window selection by Winkler cross-validation.

Candidates come from a geometric grid of ratios times the anchor
``T^(2*beta/(2*beta+1))``. Each candidate is replayed over a held-out,
temporally final validation fold and the one with the lowest mean Winkler
score wins; ties go to the smaller window.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .backtest import _arrays, replay_halfwidths
from .calibration import available_counts
from .errors import DegenerateGrid, InputError, InsufficientScores, MissingSigma
from .metrics import winkler_array
from .series import ScoreRecord, SplitSpec

GRID_POINTS = 30
GRID_LO = 0.1
GRID_HI = 4.0


class Boundary(str, enum.Enum):
    NO = "no"
    LOWER = "lower"
    UPPER = "upper"


@dataclass(frozen=True)
class WindowGrid:
    candidates: tuple
    T_ref: int
    beta: float
    lo_ratio: float
    hi_ratio: float
    n_points: int

    @property
    def anchor(self) -> float:
        return self.T_ref ** (2 * self.beta / (2 * self.beta + 1))

    def ratios(self) -> np.ndarray:
        return np.asarray(self.candidates, dtype=float) / self.anchor


def make_grid(
    T: int,
    beta: float = 1.0,
    n_points: int = GRID_POINTS,
    lo: float = GRID_LO,
    hi: float = GRID_HI,
) -> WindowGrid:
    """Geometric ratios in ``[lo, hi]`` times ``T^(2b/(2b+1))``, rounded, clamped at 1, deduplicated."""
    if T < 4:
        raise InputError(f"grid needs T >= 4, got {T}")
    if not (beta > 0 and lo > 0 and hi >= lo and n_points >= 1):
        raise InputError("grid needs beta > 0, 0 < lo <= hi and n_points >= 1")
    anchor = T ** (2 * beta / (2 * beta + 1))
    ratios = np.geomspace(lo, hi, n_points) if n_points > 1 else np.array([lo])
    raw = np.maximum(1, np.floor(ratios * anchor + 0.5).astype(np.int64))
    cands: list[int] = []
    for c in raw:
        if not cands or c > cands[-1]:
            cands.append(int(c))
    if len(cands) == 1 and n_points > 1 and T < 8:
        raise DegenerateGrid(f"all {n_points} grid points collapse to m={cands[0]} at T={T}")
    return WindowGrid(tuple(cands), int(T), float(beta), float(lo), float(hi), int(n_points))


@dataclass(frozen=True)
class SelectionResult:
    m_hat: int
    per_candidate: tuple  # (m, mean validation Winkler or None if not evaluable)
    at_boundary: Boundary
    n_val: int = 0
    scaled: bool = False
    coverages: tuple = ()  # validation coverage per candidate, None where skipped

    def winkler_of(self, m: int) -> Optional[float]:
        return dict(self.per_candidate)[m]

    def coverage_of(self, m: int) -> Optional[float]:
        return dict(zip((c for c, _ in self.per_candidate), self.coverages))[m]

    @property
    def evaluated(self) -> list:
        return [m for m, w in self.per_candidate if w is not None]


def select_window(
    scores: Sequence[ScoreRecord],
    grid: WindowGrid,
    alpha: float,
    h: Optional[int] = None,
    forecaster_centers: Optional[Sequence[float]] = None,
    split: SplitSpec = SplitSpec(),
    scaled: bool = False,
) -> SelectionResult:
    """Pick ``m`` by mean Winkler score over the validation fold.

    At each validation origin ``t`` the half-width for candidate ``m`` is the
    empirical quantile of the ``m`` most recent scores realised by ``t``
    (origins ``<= t - h``), so validation never looks ahead. Candidates that
    do not fit in the history preceding the first validation origin are
    reported with ``None`` and skipped. ``forecaster_centers``, if given,
    are the validation-origin point forecasts; they shift intervals and
    outcomes together and so do not change the criterion.
    """
    if not 0 < alpha < 1:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")
    arr, h_rec = _arrays(list(scores))
    if h is not None and h != h_rec:
        raise InputError(f"records have horizon {h_rec}, selection asked for {h}")
    h = h_rec
    origins, score = arr["origin"], arr["score"]
    n = len(origins)
    n_cal, n_val = split.sizes(n)
    if n_cal < 1 or n_val < 1:
        raise InsufficientScores(2, n)
    val_idx = np.arange(n - n_val, n)
    sigma = None
    if scaled:
        sigma = arr["sigma"]
        missing = np.flatnonzero(np.isnan(sigma))
        if missing.size:
            raise MissingSigma(int(origins[missing[0]]))
    counts = available_counts(origins, h)[val_idx]
    # candidates may reach back into the calibration fold only
    history = int(counts.min()) - (n - n_val - n_cal)
    centers = np.zeros(n_val)
    if forecaster_centers is not None:
        centers = np.asarray(forecaster_centers, dtype=float)
        if centers.shape != (n_val,):
            raise InputError(f"expected {n_val} validation centers, got {centers.shape}")
    y = centers + score[val_idx]

    per: list[tuple[int, Optional[float]]] = []
    cov: list[Optional[float]] = []
    for m in grid.candidates:
        if m > history:
            per.append((int(m), None))
            cov.append(None)
            continue
        hw = replay_halfwidths(origins, score, sigma, h, val_idx, int(m), 1 - alpha)
        w = winkler_array(y, centers - hw, centers + hw, alpha)
        per.append((int(m), float(np.mean(w))))
        cov.append(float(np.mean(score[val_idx] <= hw)))
    usable = [(m, w) for m, w in per if w is not None]
    if not usable:
        raise InsufficientScores(min(grid.candidates) + n_val + h, n)
    best_m, best_w = usable[0]
    for m, w in usable[1:]:
        if w < best_w:
            best_m, best_w = m, w
    if len(usable) > 1 and best_m == usable[0][0]:
        side = Boundary.LOWER
    elif len(usable) > 1 and best_m == usable[-1][0]:
        side = Boundary.UPPER
    else:
        side = Boundary.NO
    return SelectionResult(best_m, tuple(per), side, n_val, scaled, tuple(cov))
