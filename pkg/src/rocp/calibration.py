"""Windowed empirical quantiles and the conformal intervals built from them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import (
    EmptyInput,
    InputError,
    MissingSigma,
    NonPositiveSigma,
    ScaledSetRequiresSigma,
    WindowTooLarge,
)
from .series import PredictionInterval, ScoreRecord


@dataclass(frozen=True, eq=False)
class CalibrationSet:
    """The ``m`` most recent (possibly volatility-scaled) scores, oldest first."""

    scores: np.ndarray
    scaled: bool = False

    def __post_init__(self):
        arr = np.array(self.scores, dtype=float).ravel()
        if arr.size == 0:
            raise EmptyInput("calibration set is empty")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise InputError("calibration scores must be finite and nonnegative")
        arr.setflags(write=False)
        object.__setattr__(self, "scores", arr)

    @property
    def m(self) -> int:
        return len(self.scores)

    def __eq__(self, other):
        if not isinstance(other, CalibrationSet):
            return NotImplemented
        return self.scaled == other.scaled and np.array_equal(self.scores, other.scores)


def _sorted_tail(scores: Sequence[ScoreRecord], m: int) -> list:
    if m < 1:
        raise InputError(f"window must be >= 1, got {m}")
    if m > len(scores):
        raise WindowTooLarge(m, len(scores))
    return sorted(scores, key=lambda r: r.origin)[len(scores) - m :]


def take_window(scores: Sequence[ScoreRecord], m: int) -> CalibrationSet:
    """The ``m`` records with the largest origins."""
    tail = _sorted_tail(scores, m)
    return CalibrationSet(np.array([r.score for r in tail]), scaled=False)


def scale_window(scores: Sequence[ScoreRecord], m: int) -> CalibrationSet:
    """Like :func:`take_window` but each score is divided by its ``sigma``."""
    tail = _sorted_tail(scores, m)
    for r in tail:
        if r.sigma is None:
            raise MissingSigma(r.origin)
    return CalibrationSet(np.array([r.score / r.sigma for r in tail]), scaled=True)


def order_statistic_rank(level: float, m: int, plus_one: bool = False) -> int:
    """Smallest ``k`` with ``k / m >= level``, i.e. ``ceil(level * m)``.

    Evaluated with the same floating-point comparison as the definition so
    that e.g. ``level=0.7, m=10`` gives 7 rather than 8. With ``plus_one`` the
    split-conformal rank ``ceil(level * (m + 1))`` is returned instead; it
    may exceed ``m``.
    """
    if not 0 < level <= 1:
        raise InputError(f"level must lie in (0, 1], got {level}")
    if m < 1:
        raise InputError("m must be >= 1")
    n = m + 1 if plus_one else m
    k = max(1, math.ceil(level * n))
    while k > 1 and (k - 1) / n >= level:
        k -= 1
    while k / n < level:
        k += 1
    return k


def empirical_quantile(cal: CalibrationSet, level: float, plus_one: bool = False) -> float:
    """``inf{x : #{scores <= x} / m >= level}``, the ``ceil(level*m)``-th order statistic.

    No interpolation. With ``plus_one`` the rank is ``ceil(level*(m+1))`` and
    the result is ``inf`` when that rank exceeds ``m``.
    """
    k = order_statistic_rank(level, cal.m, plus_one)
    if k > cal.m:
        return math.inf
    return float(np.partition(cal.scores, k - 1)[k - 1])


def batch_quantiles(windows: np.ndarray, level: float, plus_one: bool = False) -> np.ndarray:
    """:func:`empirical_quantile` applied to every row of a 2-D array."""
    windows = np.asarray(windows, dtype=float)
    m = windows.shape[-1]
    k = order_statistic_rank(level, m, plus_one)
    if k > m:
        return np.full(windows.shape[:-1], np.inf)
    return np.partition(windows, k - 1, axis=-1)[..., k - 1]


def available_counts(origins: np.ndarray, h: int) -> np.ndarray:
    """For each record, how many earlier records are realised at its origin.

    A score made at origin ``s`` for horizon ``h`` is observed at time
    ``s + h``, so at origin ``t`` only records with ``s <= t - h`` may be used.
    """
    origins = np.asarray(origins)
    return np.searchsorted(origins, origins - h, side="right")


def rolling_quantiles(
    values: np.ndarray,
    counts: np.ndarray,
    m: int,
    level: float,
    plus_one: bool = False,
) -> np.ndarray:
    """Quantile of ``values[c - m : c]`` for every ``c`` in ``counts`` (all ``c >= m``)."""
    values = np.asarray(values, dtype=float)
    counts = np.asarray(counts)
    if counts.size == 0:
        return np.empty(0)
    if counts.min() < m:
        raise WindowTooLarge(m, int(counts.min()))
    windows = sliding_window_view(values, m)[counts - m]
    return batch_quantiles(windows, level, plus_one)


def expanding_quantiles(values: np.ndarray, counts: np.ndarray, level: float, plus_one: bool = False) -> np.ndarray:
    """Quantile of ``values[:c]`` for every ``c`` in ``counts``; the full-history scheme."""
    values = np.asarray(values, dtype=float)
    out = np.empty(len(counts))
    for i, c in enumerate(counts):
        if c < 1:
            raise WindowTooLarge(1, 0)
        k = order_statistic_rank(level, int(c), plus_one)
        out[i] = np.inf if k > c else np.partition(values[:c], k - 1)[k - 1]
    return out


def rocp_interval(center: float, cal: CalibrationSet, alpha: float, plus_one: bool = False) -> PredictionInterval:
    """``[center - q, center + q]`` with ``q`` the empirical ``(1 - alpha)``-quantile."""
    if cal.scaled:
        raise ScaledSetRequiresSigma("scaled calibration set: use vs_rocp_interval")
    _check_alpha(alpha)
    q = empirical_quantile(cal, 1 - alpha, plus_one)
    return PredictionInterval.symmetric(center, q, 1 - alpha)


def vs_rocp_interval(
    center: float, cal: CalibrationSet, sigma_now: float, alpha: float, plus_one: bool = False
) -> PredictionInterval:
    """Volatility-scaled interval ``center -/+ q_scaled * sigma_now``."""
    if not sigma_now > 0 or not math.isfinite(sigma_now):
        raise NonPositiveSigma(f"current volatility must be positive, got {sigma_now}")
    if not cal.scaled:
        raise InputError("vs_rocp_interval needs a scaled calibration set")
    _check_alpha(alpha)
    q = empirical_quantile(cal, 1 - alpha, plus_one)
    return PredictionInterval.symmetric(center, q * sigma_now, 1 - alpha)


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha < 1:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")
