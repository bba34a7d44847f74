"""Core data types shared by every other module.

Indices in user-facing records are 1-based: a score at ``origin=t`` was
produced by a model that saw ``Y_1, ..., Y_t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np

from .errors import (
    EmptySeries,
    InputError,
    InsufficientScores,
    NonFiniteValue,
    NonMonotoneTimestamps,
)

CANONICAL_FREQS = ("Yearly", "Quarterly", "Monthly", "Weekly", "Daily")


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """An ordered, finite, univariate series.

    Build instances through :func:`validate_series`; the constructor itself
    does not check invariants.
    """

    values: np.ndarray
    id: Optional[str] = None
    freq_tag: Optional[str] = None
    timestamps: Optional[tuple] = None

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (
            self.id == other.id
            and self.freq_tag == other.freq_tag
            and self.timestamps == other.timestamps
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self) -> int:
        return hash((self.id, self.freq_tag, self.values.tobytes()))

    def prefix(self, t: int) -> "TimeSeries":
        """The first ``t`` observations (``Y_1..Y_t``)."""
        ts = self.timestamps[:t] if self.timestamps is not None else None
        return TimeSeries(self.values[:t], self.id, self.freq_tag, ts)


def validate_series(
    raw: Any,
    id: Optional[str] = None,
    freq_tag: Optional[str] = None,
    timestamps: Optional[Sequence] = None,
) -> TimeSeries:
    """Check ``raw`` and wrap it in a :class:`TimeSeries`.

    Passing an existing ``TimeSeries`` returns an equal value; its id, tag
    and timestamps are kept unless overridden.
    """
    if isinstance(raw, TimeSeries):
        id = raw.id if id is None else id
        freq_tag = raw.freq_tag if freq_tag is None else freq_tag
        timestamps = raw.timestamps if timestamps is None else timestamps
        raw = raw.values
    values = np.array(raw, dtype=float).ravel()
    if values.size == 0:
        raise EmptySeries("series has no observations")
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise NonFiniteValue(int(bad[0]))
    ts = None
    if timestamps is not None:
        ts = tuple(timestamps)
        if len(ts) != len(values):
            raise InputError(
                f"timestamps length {len(ts)} does not match {len(values)} values"
            )
        for i in range(1, len(ts)):
            if not ts[i] > ts[i - 1]:
                raise NonMonotoneTimestamps(i)
    values.setflags(write=False)
    return TimeSeries(values, id, freq_tag, ts)


@dataclass(frozen=True)
class ScoreRecord:
    """A pseudo-out-of-sample absolute error ``|Y_{t+h} - Yhat_{t+h|t}|``.

    ``sigma`` is the h-step volatility forecast made at the same origin, when
    the model provides one.
    """

    origin: int
    horizon: int
    score: float
    sigma: Optional[float] = None

    def __post_init__(self):
        if self.horizon < 1:
            raise InputError(f"horizon must be >= 1, got {self.horizon}")
        if not (self.score >= 0 and math.isfinite(self.score)):
            raise InputError(f"score must be finite and >= 0, got {self.score}")
        if self.sigma is not None and not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise InputError(f"sigma must be finite and > 0, got {self.sigma}")


@dataclass(frozen=True)
class PredictionInterval:
    center: float
    lower: float
    upper: float
    level: float

    def __post_init__(self):
        if not (self.lower <= self.center <= self.upper):
            raise InputError(
                f"interval [{self.lower}, {self.upper}] does not contain center {self.center}"
            )
        if not 0 < self.level < 1:
            raise InputError(f"level must lie in (0, 1), got {self.level}")

    @property
    def halfwidth(self) -> float:
        return 0.5 * (self.upper - self.lower)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, y: float) -> bool:
        return self.lower <= y <= self.upper

    @classmethod
    def symmetric(cls, center: float, halfwidth: float, level: float) -> "PredictionInterval":
        return cls(center, center - halfwidth, center + halfwidth, level)


@dataclass(frozen=True)
class SplitSpec:
    """Fractions of the score sequence used for calibration and validation.

    The validation fold is always the temporally final block; when the two
    fractions sum to less than one the oldest records are left out.
    """

    calibration_fraction: float = 0.6
    validation_fraction: float = 0.4

    def __post_init__(self):
        cf, vf = self.calibration_fraction, self.validation_fraction
        if not (0 < cf < 1 and 0 < vf < 1):
            raise InputError("split fractions must lie in (0, 1)")
        if cf + vf > 1 + 1e-12:
            raise InputError("split fractions must sum to at most 1")

    def sizes(self, n: int) -> tuple[int, int]:
        n_cal = math.floor(self.calibration_fraction * n + 1e-9)
        if abs(self.calibration_fraction + self.validation_fraction - 1) <= 1e-12:
            n_val = n - n_cal
        else:
            n_val = math.floor(self.validation_fraction * n + 1e-9)
        return n_cal, n_val


def split_scores(
    scores: Sequence[ScoreRecord], spec: SplitSpec = SplitSpec()
) -> tuple[list[ScoreRecord], list[ScoreRecord]]:
    """Split origin-sorted records into (calibration, validation) folds."""
    scores = list(scores)
    n = len(scores)
    for a, b in zip(scores, scores[1:]):
        if b.origin <= a.origin:
            raise InputError("score records must be sorted by strictly increasing origin")
    n_cal, n_val = spec.sizes(n)
    if n_cal < 1 or n_val < 1:
        needed = max(2, math.ceil(1 / min(spec.calibration_fraction, spec.validation_fraction)))
        raise InsufficientScores(needed, n)
    start = n - n_val - n_cal
    return scores[start : n - n_val], scores[n - n_val :]


def score_arrays(scores: Sequence[ScoreRecord]) -> dict[str, np.ndarray]:
    """Columnar view of a record sequence; missing sigmas become NaN."""
    return {
        "origin": np.array([r.origin for r in scores], dtype=np.int64),
        "score": np.array([r.score for r in scores], dtype=float),
        "sigma": np.array(
            [np.nan if r.sigma is None else r.sigma for r in scores], dtype=float
        ),
    }
