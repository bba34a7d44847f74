"""End-to-end interval forecast for the next ``h`` steps of a series.

Schemes
-------
``full``
    Quantile of every available score.
``rolling:<m>``
    Quantile of the ``m`` most recent scores.
``rolling:auto``
    As ``rolling:<m>`` with ``m`` chosen by Winkler cross-validation.
``vs:auto`` / ``vs:<m>``
    Volatility-scaled: quantile of ``score / sigma`` times the current
    ``sigma``. Models without a volatility forecast fall back to the matching
    ``rolling`` scheme with a warning.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Optional

from .calibration import rocp_interval, scale_window, take_window, vs_rocp_interval
from .errors import InputError, InsufficientScores, RocpError, WindowTooLarge
from .models import ModelSpec, fit_model, forecast_mean, forecast_volatility
from .rolling import RollingConfig, _refit_seed, rolling_forecasts
from .selection import Boundary, SelectionResult, WindowGrid, make_grid, select_window
from .series import SplitSpec, TimeSeries

log = logging.getLogger(__name__)

BOUNDARY_POLICIES = ("flag", "error", "accept")


class BoundarySelected(RocpError):
    """The selected window sits on the edge of the grid and the policy forbids it."""


class SchemeFallback(UserWarning):
    pass


@dataclass(frozen=True)
class Scheme:
    kind: str  # "full", "rolling" or "vs"
    m: Optional[int] = None  # None with kind != "full" means auto

    @classmethod
    def parse(cls, text: str) -> "Scheme":
        text = text.strip().lower()
        if text == "full":
            return cls("full")
        kind, _, arg = text.partition(":")
        if kind not in ("rolling", "vs") or not arg:
            raise InputError(f"unknown scheme {text!r}; use full, rolling:<m>, rolling:auto or vs:auto")
        if arg == "auto":
            return cls(kind)
        try:
            m = int(arg)
        except ValueError:
            raise InputError(f"window in scheme {text!r} is not an integer") from None
        if m < 1:
            raise InputError("window must be >= 1")
        return cls(kind, m)

    @property
    def auto(self) -> bool:
        return self.kind != "full" and self.m is None

    def __str__(self) -> str:
        if self.kind == "full":
            return "full"
        return f"{self.kind}:{'auto' if self.m is None else self.m}"


@dataclass(frozen=True)
class Prediction:
    center: float
    lower: float
    upper: float
    level: float
    m_used: int
    scheme: str
    boundary_flag: str = Boundary.NO.value
    sigma: Optional[float] = None

    def to_dict(self) -> dict:
        d = {
            "center": self.center,
            "lower": self.lower,
            "upper": self.upper,
            "level": self.level,
            "m_used": self.m_used,
            "scheme": self.scheme,
            "boundary_flag": self.boundary_flag,
        }
        if self.sigma is not None:
            d["sigma"] = self.sigma
        return d


@dataclass
class PredictRun:
    prediction: Prediction
    records: list
    selection: Optional[SelectionResult] = None


def predict(
    series: TimeSeries,
    spec: ModelSpec,
    h: int = 1,
    alpha: float = 0.1,
    scheme: str = "rolling:auto",
    rolling: RollingConfig = RollingConfig(),
    grid: Optional[WindowGrid] = None,
    split: SplitSpec = SplitSpec(),
    boundary_policy: str = "flag",
) -> PredictRun:
    """Interval for ``Y_{T+h}`` from the rolling-origin scores of ``series``."""
    if not 0 < alpha < 1:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")
    if boundary_policy not in BOUNDARY_POLICIES:
        raise InputError(f"boundary policy must be one of {BOUNDARY_POLICIES}")
    sch = Scheme.parse(scheme)
    if sch.kind == "vs" and not spec.has_volatility:
        warnings.warn(
            f"model {spec.kind!r} has no volatility forecast; using the rolling scheme",
            SchemeFallback,
            stacklevel=2,
        )
        sch = Scheme("rolling", sch.m)
    scaled = sch.kind == "vs"
    cfg = RollingConfig(
        horizon=h,
        min_train=rolling.min_train,
        refit_stride=rolling.refit_stride,
        scale_scores=scaled,
        seed=rolling.seed,
    )
    run = rolling_forecasts(series, spec, cfg)
    records = run.records
    n = len(records)
    if n == 0:
        raise InsufficientScores(1, 0)

    selection = None
    boundary = Boundary.NO
    if sch.kind == "full":
        m = n
    elif sch.auto:
        g = grid if grid is not None else make_grid(len(series))
        selection = select_window(records, g, alpha, split=split, scaled=scaled)
        m, boundary = selection.m_hat, selection.at_boundary
        if boundary is not Boundary.NO:
            if boundary_policy == "error":
                raise BoundarySelected(f"selected m={m} is at the {boundary.value} edge of the grid")
            if boundary_policy == "flag":
                log.warning("selected m=%d is at the %s edge of the grid", m, boundary.value)
    else:
        m = sch.m
    if m > n:
        raise WindowTooLarge(m, n)

    y = series.values
    model = fit_model(spec, y, seed=_refit_seed(cfg.seed, len(y)))
    center = forecast_mean(model, y, h)
    sigma = None
    if scaled:
        sigma = forecast_volatility(model.with_history(y), h)
        iv = vs_rocp_interval(center, scale_window(records, m), sigma, alpha)
    else:
        iv = rocp_interval(center, take_window(records, m), alpha)
    if not (math.isfinite(iv.lower) and math.isfinite(iv.upper)):
        raise RocpError("non-finite interval")
    flag = boundary.value if boundary_policy != "accept" else Boundary.NO.value
    pred = Prediction(iv.center, iv.lower, iv.upper, iv.level, int(m), str(sch), flag, sigma)
    return PredictRun(pred, records, selection)
