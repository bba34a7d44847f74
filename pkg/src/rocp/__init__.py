"""Rolling-origin conformal prediction intervals for time series.

The pipeline: fit a point forecaster on every prefix of a series and record
its absolute errors (:mod:`rocp.rolling`), take the empirical quantile of the
most recent ``m`` of them (:mod:`rocp.calibration`), and pick ``m`` by
Winkler cross-validation (:mod:`rocp.selection`).
"""

from .backtest import Backtest, backtest
from .calibration import (
    CalibrationSet,
    empirical_quantile,
    rocp_interval,
    scale_window,
    take_window,
    vs_rocp_interval,
)
from .errors import InputError, RocpError
from .experiment import (
    ExperimentConfig,
    ProcessFamily,
    RegressionResult,
    ScalingRow,
    ols_hc1,
    run_scaling_experiment,
    scaling_regression,
)
from .metrics import EvalReport, coverage, evaluate, local_coverage, winkler
from .models import ModelSpec, fit_ar, fit_arma_garch, forecast_volatility
from .pipeline import Prediction, predict
from .rolling import RollingConfig, rolling_forecasts, rolling_scores
from .selection import Boundary, SelectionResult, WindowGrid, make_grid, select_window
from .series import (
    PredictionInterval,
    ScoreRecord,
    SplitSpec,
    TimeSeries,
    split_scores,
    validate_series,
)
from .synthetic import ProcessSpec, generate, holder_drift, holder_drift_calibrated
from .theory import (
    BoundParams,
    coverage_bound,
    theoretical_window,
    tradeoff_curve,
)

__all__ = [
    "Backtest",
    "backtest",
    "Boundary",
    "BoundParams",
    "CalibrationSet",
    "coverage",
    "coverage_bound",
    "empirical_quantile",
    "EvalReport",
    "evaluate",
    "ExperimentConfig",
    "fit_ar",
    "fit_arma_garch",
    "forecast_volatility",
    "generate",
    "holder_drift",
    "holder_drift_calibrated",
    "InputError",
    "local_coverage",
    "make_grid",
    "ModelSpec",
    "ols_hc1",
    "predict",
    "Prediction",
    "PredictionInterval",
    "ProcessFamily",
    "ProcessSpec",
    "RegressionResult",
    "rocp_interval",
    "RocpError",
    "rolling_forecasts",
    "rolling_scores",
    "RollingConfig",
    "run_scaling_experiment",
    "scale_window",
    "scaling_regression",
    "ScalingRow",
    "ScoreRecord",
    "select_window",
    "SelectionResult",
    "split_scores",
    "SplitSpec",
    "take_window",
    "theoretical_window",
    "TimeSeries",
    "tradeoff_curve",
    "validate_series",
    "vs_rocp_interval",
    "WindowGrid",
    "winkler",
]

__version__ = "0.1.0"
