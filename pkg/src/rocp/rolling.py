"""Rolling-origin evaluation: the pseudo-out-of-sample score sequence.

At each origin ``t`` the model is fitted on ``Y_1..Y_t`` (or reused from the
last refit) and the absolute error of its h-step forecast is recorded.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import FitFailure, InputError, RocpError, SeriesTooShort
from .models import (
    FittedAR,
    FittedArmaGarch,
    FittedNaive,
    ModelSpec,
    arma_garch_states,
    fit_model,
    forecast_ar,
    forecast_arma_mean,
    forecast_volatility,
    min_history,
)
from .series import ScoreRecord, TimeSeries

log = logging.getLogger(__name__)

MAX_FAILURE_RATE = 0.2


@dataclass(frozen=True)
class RollingConfig:
    """Settings for :func:`rolling_scores`.

    ``min_train=None`` resolves to ``max(30, 2 * max_lag + 2)`` for AR models,
    to 30 for the naive model and to 50 for ARMA-GARCH.
    """

    horizon: int = 1
    min_train: Optional[int] = None
    refit_stride: int = 1
    scale_scores: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.horizon < 1:
            raise InputError("horizon must be >= 1")
        if self.min_train is not None and self.min_train < 1:
            raise InputError("min_train must be >= 1")
        if self.refit_stride < 1:
            raise InputError("refit_stride must be >= 1")

    def resolve(self, spec: ModelSpec) -> "RollingConfig":
        if self.min_train is not None:
            return self
        if spec.kind == "ar":
            mt = max(30, 2 * spec.max_lag + 2)
        else:
            mt = max(30, min_history(spec))
        return dataclasses.replace(self, min_train=mt)


@dataclass
class RollingRun:
    records: list
    centers: np.ndarray
    config: RollingConfig
    model: ModelSpec
    failures: list = field(default_factory=list)

    def metadata(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "horizon": self.config.horizon,
            "min_train": self.config.min_train,
            "refit_stride": self.config.refit_stride,
            "scale_scores": self.config.scale_scores,
            "seed": self.config.seed,
            "n_scores": len(self.records),
            "n_failed_origins": len(self.failures),
        }


def _refit_seed(seed: int, origin: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(origin)]).generate_state(1)[0])


def rolling_forecasts(series: TimeSeries, spec: ModelSpec, cfg: RollingConfig = RollingConfig()) -> RollingRun:
    """Run the rolling-origin loop and keep the forecast centres alongside the scores."""
    cfg = cfg.resolve(spec)
    y = np.asarray(series.values, dtype=float)
    T, h, t0 = len(y), cfg.horizon, cfg.min_train
    if T < t0 + h:
        raise SeriesTooShort(t0 + h, T)
    origins = range(t0, T - h + 1)
    want_sigma = cfg.scale_scores and spec.has_volatility

    records: list[ScoreRecord] = []
    centers: list[float] = []
    failures: list[tuple[int, Exception]] = []
    model = None
    fit_error: Exception = RocpError("no fitted model")
    states = None
    for t in origins:
        if (t - t0) % cfg.refit_stride == 0:
            try:
                model = fit_model(spec, y[:t], seed=_refit_seed(cfg.seed, t))
            except RocpError as exc:
                model, fit_error = None, exc
                log.warning("fit failed at origin %d: %s", t, exc)
            if isinstance(model, FittedArmaGarch):
                end = min(t + cfg.refit_stride - 1, T - h)
                states = arma_garch_states(model, y[:end])
        if model is None:
            failures.append((t, fit_error))
            continue
        try:
            center, sigma = _predict(model, y, t, h, states, want_sigma)
        except RocpError as exc:
            log.warning("forecast failed at origin %d: %s", t, exc)
            failures.append((t, exc))
            continue
        score = abs(y[t + h - 1] - center)
        records.append(ScoreRecord(t, h, float(score), sigma))
        centers.append(center)

    n_origins = len(origins)
    if failures and len(failures) > MAX_FAILURE_RATE * n_origins:
        origin, cause = failures[0]
        raise FitFailure(origin, cause)
    return RollingRun(records, np.asarray(centers, dtype=float), cfg, spec, failures)


def _predict(model, y, t, h, states, want_sigma):
    if isinstance(model, FittedNaive):
        return float(y[t - 1]), None
    if isinstance(model, FittedAR):
        return forecast_ar(model, y[:t], h), None
    e, s = states
    current = dataclasses.replace(
        model, last_state=(float(e[t - 2]), float(s[t - 2])), last_value=float(y[t - 1])
    )
    center = forecast_arma_mean(current, h)
    sigma = forecast_volatility(current, h) if want_sigma else None
    if not math.isfinite(center):
        raise FitFailure(t, ArithmeticError("non-finite forecast"))
    return center, sigma


def rolling_scores(series: TimeSeries, spec: ModelSpec, cfg: RollingConfig = RollingConfig()) -> list:
    """One :class:`ScoreRecord` per origin ``t = min_train, ..., T - h``.

    Origins whose fit fails are dropped with a warning; the run fails with
    :class:`FitFailure` only when more than 20% of origins fail. With
    ``scale_scores`` and a volatility model each record carries ``sigma``;
    the score itself is always the raw absolute error.
    """
    return rolling_forecasts(series, spec, cfg).records
