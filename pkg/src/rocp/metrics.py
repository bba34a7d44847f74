"""Interval evaluation: Winkler score, coverage, rolling local coverage."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyInput, InputError, TooFewObservations
from .series import PredictionInterval

LOCAL_WINDOW = 50


def winkler(y: float, interval: PredictionInterval, alpha: float) -> float:
    """``(u - l) + (2 / alpha) * (max(l - y, 0) + max(y - u, 0))``."""
    if not 0 < alpha < 1:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")
    l, u = interval.lower, interval.upper
    return (u - l) + (2.0 / alpha) * (max(l - y, 0.0) + max(y - u, 0.0))


def winkler_array(y, lower, upper, alpha: float) -> np.ndarray:
    y, lower, upper = (np.asarray(a, dtype=float) for a in (y, lower, upper))
    return (upper - lower) + (2.0 / alpha) * (
        np.maximum(lower - y, 0.0) + np.maximum(y - upper, 0.0)
    )


def _unzip(pairs):
    pairs = list(pairs)
    if not pairs:
        raise EmptyInput("no (y, interval) pairs to evaluate")
    y = np.array([p[0] for p in pairs], dtype=float)
    lo = np.array([p[1].lower for p in pairs], dtype=float)
    hi = np.array([p[1].upper for p in pairs], dtype=float)
    return y, lo, hi


def coverage(pairs: Iterable) -> float:
    """Fraction of pairs with ``lower <= y <= upper``."""
    y, lo, hi = _unzip(pairs)
    return float(np.mean((lo <= y) & (y <= hi)))


def local_coverage(hits: Sequence[bool], window: int = LOCAL_WINDOW) -> tuple[np.ndarray, float]:
    """Sliding-window (stride 1) hit rates and their standard deviation."""
    hits = np.asarray(hits, dtype=float)
    if window < 1:
        raise InputError("window must be >= 1")
    if len(hits) < window:
        raise TooFewObservations(f"need at least {window} observations, have {len(hits)}")
    c = np.concatenate([[0.0], np.cumsum(hits)])
    means = (c[window:] - c[:-window]) / window
    # cumulative sums leave ~1e-16 noise; hit rates are multiples of 1/window
    means = np.round(means * window) / window
    return means, float(np.std(means))


@dataclass(frozen=True)
class EvalReport:
    coverage: float
    mean_halfwidth: float
    mean_winkler: float
    n: int
    local_cov_std: float = float("nan")

    def as_row(self, **context) -> dict:
        return {**context, **asdict(self)}


EVAL_COLUMNS = (
    "scheme",
    "m",
    "h",
    "alpha",
    "coverage",
    "mean_halfwidth",
    "mean_winkler",
    "n",
    "local_cov_std",
)


def evaluate_arrays(y, lower, upper, alpha: float, window: int = LOCAL_WINDOW) -> EvalReport:
    y, lower, upper = (np.asarray(a, dtype=float) for a in (y, lower, upper))
    if y.size == 0:
        raise EmptyInput("no (y, interval) pairs to evaluate")
    hits = (lower <= y) & (y <= upper)
    w = winkler_array(y, lower, upper, alpha)
    std = local_coverage(hits, window)[1] if len(hits) >= window else float("nan")
    return EvalReport(
        coverage=float(np.mean(hits)),
        mean_halfwidth=float(np.mean(0.5 * (upper - lower))),
        mean_winkler=float(np.mean(w)),
        n=int(y.size),
        local_cov_std=std,
    )


def evaluate(pairs: Iterable, alpha: float, window: int = LOCAL_WINDOW) -> EvalReport:
    """Coverage, mean half-width and mean Winkler score over ``(y, interval)`` pairs.

    ``local_cov_std`` is NaN when there are fewer pairs than ``window``.
    """
    if not 0 < alpha < 1:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")
    y, lo, hi = _unzip(pairs)
    return evaluate_arrays(y, lo, hi, alpha, window)
