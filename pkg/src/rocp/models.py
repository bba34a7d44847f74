"""Point and volatility forecasters for the rolling engine.

Three model kinds are supported:

* ``naive``: last observed value, no parameters.
* ``ar``: AR(p) by conditional least squares, ``p`` chosen by BIC.
* ``arma_garch``: ARMA(1,1) mean with GARCH(1,1) errors, Gaussian QMLE.

Only the ARMA-GARCH model produces volatility forecasts.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Union

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter

from .errors import (
    HistoryTooShort,
    InvalidSpec,
    NumericOverflow,
    OptimizerDiverged,
    SeriesTooShort,
    SingularDesign,
)
from .series import TimeSeries

MODEL_KINDS = ("naive", "ar", "arma_garch")
DEFAULT_MAX_LAG = 12
GARCH_MIN_LENGTH = 50
VARIANCE_LIMIT = 1e30
N_RESTARTS = 5


@dataclass(frozen=True)
class ModelSpec:
    """Declarative forecaster choice, e.g. ``ModelSpec("ar", max_lag=4)``."""

    kind: str = "ar"
    max_lag: Optional[int] = None
    options: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise InvalidSpec(f"unknown model kind {self.kind!r}; expected one of {MODEL_KINDS}")
        if self.kind == "ar":
            if self.max_lag is None:
                object.__setattr__(self, "max_lag", DEFAULT_MAX_LAG)
            if int(self.max_lag) != self.max_lag or self.max_lag < 1:
                raise InvalidSpec(f"max_lag must be a positive integer, got {self.max_lag}")
        elif self.max_lag is not None:
            raise InvalidSpec("max_lag is only meaningful for AR models")

    @property
    def has_volatility(self) -> bool:
        return self.kind == "arma_garch"

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind}
        if self.kind == "ar":
            out["max_lag"] = int(self.max_lag)
        if self.options:
            out["options"] = dict(self.options)
        return out

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ModelSpec":
        d = dict(d)
        kind = str(d.pop("kind", "ar")).lower()
        max_lag = d.pop("max_lag", None)
        options = dict(d.pop("options", {}))
        if d:
            raise InvalidSpec(f"unknown model fields: {sorted(d)}")
        return cls(kind, None if max_lag is None else int(max_lag), options)

    @classmethod
    def parse(cls, text: str) -> "ModelSpec":
        """Parse the CLI shorthand ``naive``, ``ar``, ``ar:8`` or ``arma_garch``."""
        kind, _, arg = text.strip().lower().partition(":")
        kind = kind.replace("-", "_")
        if kind == "ar" and arg:
            return cls("ar", int(arg))
        if arg:
            raise InvalidSpec(f"model {kind!r} takes no argument")
        return cls(kind)


# ---------------------------------------------------------------------------
# naive


@dataclass(frozen=True)
class FittedNaive:
    order: int = 0


# ---------------------------------------------------------------------------
# AR(p)


@dataclass(frozen=True)
class FittedAR:
    order: int
    intercept: float
    coefficients: tuple
    residual_variance: float
    bic: float
    bic_path: tuple = ()


def _lag_design(y: np.ndarray, max_lag: int) -> tuple[np.ndarray, np.ndarray]:
    n = len(y)
    target = y[max_lag:]
    cols = [np.ones(n - max_lag)]
    cols += [y[max_lag - j : n - j] for j in range(1, max_lag + 1)]
    return np.column_stack(cols), target


def fit_ar(history: Union[TimeSeries, np.ndarray], max_lag: int = DEFAULT_MAX_LAG) -> FittedAR:
    """Fit AR(p) for every ``p <= max_lag`` on a common sample and keep the BIC minimiser.

    All orders share the target rows ``Y_{max_lag+1}, ..., Y_n`` so their BIC
    values are comparable. ``BIC(p) = n log(RSS_p / n) + (p + 1) log n``;
    ties go to the smaller order.
    """
    y = np.asarray(getattr(history, "values", history), dtype=float)
    if max_lag < 1:
        raise InvalidSpec("max_lag must be >= 1")
    if len(y) < max_lag + 2:
        raise SeriesTooShort(max_lag + 2, len(y))
    X, target = _lag_design(y, max_lag)
    n = len(target)
    Q, R = np.linalg.qr(X)
    z = Q.T @ target
    diag = np.abs(np.diag(R))
    # Column j is (numerically) a combination of columns < j: orders >= j are unusable.
    scale = np.linalg.norm(X, axis=0)
    collinear = diag <= 1e-10 * np.maximum(scale, 1e-300)
    usable = int(np.argmax(collinear)) - 1 if collinear.any() else max_lag
    if usable < 0:
        raise SingularDesign("intercept column is degenerate")
    rss_full = float(np.sum((target - Q @ z) ** 2))
    tail = np.concatenate([np.cumsum((z[::-1] ** 2))[::-1][1:], [0.0]])
    rss = rss_full + tail
    tss = float(np.sum(target**2))
    best_p, best_bic, path = -1, math.inf, []
    for p in range(usable + 1):
        if rss[p] <= 1e-24 * max(tss, 1e-300) or rss[p] <= 0:
            path.append(-math.inf)
            continue
        bic = n * math.log(rss[p] / n) + (p + 1) * math.log(n)
        path.append(bic)
        if bic < best_bic:
            best_p, best_bic = p, bic
    if best_p < 0:
        raise SingularDesign("zero residual variance: the series has no variation to model")
    coef = _solve_upper(R[: best_p + 1, : best_p + 1], z[: best_p + 1])
    return FittedAR(
        order=best_p,
        intercept=float(coef[0]),
        coefficients=tuple(float(c) for c in coef[1:]),
        residual_variance=float(rss[best_p] / n),
        bic=float(best_bic),
        bic_path=tuple(path),
    )


def _solve_upper(R: np.ndarray, b: np.ndarray) -> np.ndarray:
    from scipy.linalg import solve_triangular

    return solve_triangular(R, b, lower=False)


def forecast_ar(model: FittedAR, history: Union[TimeSeries, np.ndarray], h: int) -> float:
    """Iterated plug-in forecast of ``Y_{n+h}`` given ``history = Y_1..Y_n``."""
    y = np.asarray(getattr(history, "values", history), dtype=float)
    if h < 1:
        raise InvalidSpec("horizon must be >= 1")
    p = model.order
    if len(y) < p:
        raise HistoryTooShort(p, len(y))
    if p == 0:
        return float(model.intercept)
    phi = np.asarray(model.coefficients)
    # newest first
    state = list(y[::-1][:p])
    value = 0.0
    for _ in range(h):
        value = model.intercept + float(np.dot(phi, state))
        state = [value] + state[:-1]
    return float(value)


# ---------------------------------------------------------------------------
# ARMA(1,1)-GARCH(1,1)


@dataclass(frozen=True)
class FittedArmaGarch:
    """ARMA(1,1)-GARCH(1,1) parameters plus the filter state at the last observation.

    ``last_state = (e_n, s_n)`` holds the last residual and its conditional
    variance; the one-step variance forecast is ``omega + alpha e_n^2 + beta s_n``.
    """

    arma: tuple  # (intercept, ar1, ma1)
    garch: tuple  # (omega, alpha, beta)
    last_state: tuple  # (last residual, last conditional variance)
    last_value: float
    init_variance: float
    loglik: float = float("nan")

    def __post_init__(self):
        omega, alpha, beta = self.garch
        if not (omega > 0 and alpha >= 0 and beta >= 0 and alpha + beta < 1):
            raise InvalidSpec(f"GARCH parameters violate stationarity: {self.garch}")

    @property
    def persistence(self) -> float:
        return self.garch[1] + self.garch[2]

    @property
    def next_variance(self) -> float:
        omega, alpha, beta = self.garch
        e, s = self.last_state
        return omega + alpha * e * e + beta * s

    def with_history(self, history: Union[TimeSeries, np.ndarray]) -> "FittedArmaGarch":
        """Same parameters, filter state rolled forward over ``history``."""
        y = np.asarray(getattr(history, "values", history), dtype=float)
        e, s = _arma_garch_filter(y, *self.arma, *self.garch, self.init_variance)
        return dataclasses.replace(
            self, last_state=(float(e[-1]), float(s[-1])), last_value=float(y[-1])
        )


def _arma_garch_filter(y, c, phi, theta, omega, alpha, beta, v0):
    """Residuals ``e_2..e_n`` and conditional variances (conditioning on ``Y_1``)."""
    x = y[1:] - c - phi * y[:-1]
    e = lfilter([1.0], [1.0, theta], x)
    u = omega + alpha * e[:-1] ** 2
    s = np.empty_like(e)
    s[0] = v0
    if len(e) > 1:
        s[1:] = lfilter([1.0], [1.0, -beta], u, zi=[beta * v0])[0]
    return e, s


def arma_garch_states(model: FittedArmaGarch, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Filter the whole array at once; entry ``k`` is the state after ``Y_{k+2}``.

    The filter is causal, so the state at position ``k`` depends on
    ``values[:k+2]`` only.
    """
    return _arma_garch_filter(np.asarray(values, float), *model.arma, *model.garch, model.init_variance)


_PERSIST_CAP = 0.9999
_PHI_CAP = 0.999


def _unpack(x):
    c = x[0]
    phi = _PHI_CAP * math.tanh(x[1])
    theta = _PHI_CAP * math.tanh(x[2])
    omega = math.exp(min(x[3], 700.0))
    persist = _PERSIST_CAP / (1.0 + math.exp(-x[4])) if x[4] > -700 else 0.0
    share = 1.0 / (1.0 + math.exp(-x[5])) if x[5] > -700 else 0.0
    alpha = persist * share
    return c, phi, theta, omega, alpha, persist - alpha


def _pack(c, phi, theta, omega, alpha, beta):
    persist = alpha + beta
    share = alpha / persist
    return np.array(
        [
            c,
            math.atanh(phi / _PHI_CAP),
            math.atanh(theta / _PHI_CAP),
            math.log(omega),
            math.log(persist / (_PERSIST_CAP - persist)),
            math.log(share / (1 - share)),
        ]
    )


def _negloglik(x, y, v0):
    c, phi, theta, omega, alpha, beta = _unpack(x)
    e, s = _arma_garch_filter(y, c, phi, theta, omega, alpha, beta, v0)
    if not np.all(s > 0) or not np.all(np.isfinite(s)):
        return np.inf
    val = 0.5 * float(np.sum(np.log(s) + e * e / s))
    return val if math.isfinite(val) else np.inf


def _negloglik_homoskedastic(x, y, v0):
    return _negloglik(np.r_[x, -np.inf, -np.inf], y, v0)


def fit_arma_garch(history: Union[TimeSeries, np.ndarray], seed: int = 0) -> FittedArmaGarch:
    """Gaussian QMLE of ARMA(1,1)-GARCH(1,1) by Nelder-Mead with restarts.

    The data are standardised before optimisation and the parameters mapped
    back afterwards. Parameter transforms keep ``omega > 0``,
    ``alpha, beta >= 0``, ``alpha + beta < 1`` and ``|ar1|, |ma1| < 1``.
    Restart points come from ``seed`` so repeated fits agree exactly.

    The GARCH terms are dropped (``alpha = beta = 0``) when they do not improve
    the quasi-likelihood by more than the BIC penalty ``log n``; without this
    step ``beta`` is unidentified on homoskedastic data.
    """
    y = np.asarray(getattr(history, "values", history), dtype=float)
    if len(y) < GARCH_MIN_LENGTH:
        raise SeriesTooShort(GARCH_MIN_LENGTH, len(y))
    mu, sd = float(np.mean(y)), float(np.std(y))
    if not sd > 0:
        raise SingularDesign("zero variance: the series has no variation to model")
    z = (y - mu) / sd
    v0 = 1.0
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x6A2C]))
    starts = [_pack(0.0, 0.0, 0.0, 0.05, 0.05, 0.90)]
    for _ in range(N_RESTARTS - 1):
        persist = rng.uniform(0.05, 0.98)
        share = rng.uniform(0.05, 0.6)
        starts.append(
            _pack(
                rng.normal(0, 0.1),
                rng.uniform(-0.5, 0.5),
                rng.uniform(-0.5, 0.5),
                max(1 - persist, 1e-3),
                persist * share,
                persist * (1 - share),
            )
        )
    best = None
    for x0 in starts:
        res = minimize(
            _negloglik,
            x0,
            args=(z, v0),
            method="Nelder-Mead",
            options={"maxiter": 3000, "maxfev": 4000, "xatol": 1e-6, "fatol": 1e-9},
        )
        if np.isfinite(res.fun) and (best is None or res.fun < best.fun):
            best = res
    if best is None:
        raise OptimizerDiverged("non-finite quasi-likelihood at every restart")
    c, phi, theta, omega, alpha, beta = _unpack(best.x)
    # With alpha ~ 0 the likelihood is flat in beta, so keep the GARCH terms
    # only if they beat constant variance by BIC (two extra parameters).
    flat = minimize(
        _negloglik_homoskedastic,
        best.x[:4],
        args=(z, v0),
        method="Nelder-Mead",
        options={"maxiter": 2000, "maxfev": 3000, "xatol": 1e-6, "fatol": 1e-9},
    )
    n_eff = len(z) - 1
    if np.isfinite(flat.fun) and 2.0 * (flat.fun - best.fun) <= 2.0 * math.log(n_eff):
        c, phi, theta, omega, _, _ = _unpack(np.r_[flat.x, -np.inf, -np.inf])
        alpha = beta = 0.0
        best = flat
    # back to the original scale: y = mu + sd * z
    c_y = mu * (1 - phi) + sd * c
    omega_y = omega * sd * sd
    v0_y = v0 * sd * sd
    e, s = _arma_garch_filter(y, c_y, phi, theta, omega_y, alpha, beta, v0_y)
    n = len(e)
    loglik = -best.fun - n * math.log(sd) - 0.5 * n * math.log(2 * math.pi)
    model = FittedArmaGarch(
        arma=(float(c_y), float(phi), float(theta)),
        garch=(float(omega_y), float(alpha), float(beta)),
        last_state=(float(e[-1]), float(s[-1])),
        last_value=float(y[-1]),
        init_variance=float(v0_y),
        loglik=float(loglik),
    )
    assert model.persistence < 1
    return model


def forecast_arma_mean(model: FittedArmaGarch, h: int) -> float:
    """ARMA recursion for ``E[Y_{n+h} | Y_1..Y_n]``."""
    c, phi, theta = model.arma
    value = c + phi * model.last_value + theta * model.last_state[0]
    for _ in range(h - 1):
        value = c + phi * value
    return float(value)


def forecast_volatility(model: FittedArmaGarch, h: int) -> float:
    """h-step conditional standard deviation from the GARCH variance recursion.

    ``s_{n+h} = omega * sum_{j<h-1} (alpha+beta)^j + (alpha+beta)^(h-1) * s_{n+1}``,
    iterated step by step. Raises :class:`NumericOverflow` once the variance
    passes ``1e30`` instead of clamping it.
    """
    if h < 1:
        raise InvalidSpec("horizon must be >= 1")
    omega, alpha, beta = model.garch
    persist = alpha + beta
    var = model.next_variance
    if not math.isfinite(var) or var > VARIANCE_LIMIT:
        raise NumericOverflow(f"one-step variance {var!r} exceeds {VARIANCE_LIMIT:g}")
    for _ in range(h - 1):
        var = omega + persist * var
        if not math.isfinite(var) or var > VARIANCE_LIMIT:
            raise NumericOverflow(f"multi-step variance exceeds {VARIANCE_LIMIT:g}")
    if not var > 0:
        raise NumericOverflow(f"non-positive variance forecast {var!r}")
    return math.sqrt(var)


# ---------------------------------------------------------------------------
# uniform entry points used by the rolling engine

FittedModel = Union[FittedNaive, FittedAR, FittedArmaGarch]


def fit_model(spec: ModelSpec, history: Union[TimeSeries, np.ndarray], seed: int = 0) -> FittedModel:
    if spec.kind == "naive":
        return FittedNaive()
    if spec.kind == "ar":
        return fit_ar(history, spec.max_lag)
    return fit_arma_garch(history, seed=seed)


def min_history(spec: ModelSpec) -> int:
    """Shortest history the model can be fitted on."""
    if spec.kind == "naive":
        return 1
    if spec.kind == "ar":
        return spec.max_lag + 2
    return GARCH_MIN_LENGTH


def forecast_mean(model: FittedModel, history: Union[TimeSeries, np.ndarray], h: int) -> float:
    y = np.asarray(getattr(history, "values", history), dtype=float)
    if isinstance(model, FittedNaive):
        return float(y[-1])
    if isinstance(model, FittedAR):
        return forecast_ar(model, y, h)
    return forecast_arma_mean(model.with_history(y), h)
