import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.signal import lfilter

from rocp.errors import HistoryTooShort, InvalidSpec, NumericOverflow, SeriesTooShort, SingularDesign
from rocp.models import (
    FittedAR,
    FittedArmaGarch,
    ModelSpec,
    fit_ar,
    fit_arma_garch,
    forecast_ar,
    forecast_arma_mean,
    forecast_mean,
    forecast_volatility,
)
from rocp.synthetic import ProcessSpec, generate, make_rng


def simulate_ar(coefs, T, seed, burn=200):
    e = make_rng(seed, 99).standard_normal(T + burn)
    return lfilter([1.0], np.r_[1.0, -np.asarray(coefs)], e)[burn:]


def garch_model(omega, alpha, beta, e=0.0, s=1.0, arma=(0.0, 0.0, 0.0)):
    return FittedArmaGarch(arma=arma, garch=(omega, alpha, beta), last_state=(e, s), last_value=0.0, init_variance=1.0)


# ModelSpec ----------------------------------------------------------------

def test_model_spec_round_trip():
    spec = ModelSpec("ar", 12)
    assert spec.to_dict() == {"kind": "ar", "max_lag": 12}
    assert ModelSpec.from_dict(spec.to_dict()) == spec
    assert ModelSpec.parse("ar:8") == ModelSpec("ar", 8)
    assert ModelSpec.parse("naive") == ModelSpec("naive")
    assert ModelSpec.parse("arma_garch").has_volatility
    assert not ModelSpec.parse("ar").has_volatility


def test_model_spec_guards():
    with pytest.raises(InvalidSpec):
        ModelSpec("arima")
    with pytest.raises(InvalidSpec):
        ModelSpec("ar", 0)
    with pytest.raises(InvalidSpec):
        ModelSpec("naive", 3)


# AR -----------------------------------------------------------------------

def test_constant_series_is_singular():
    with pytest.raises(SingularDesign):
        fit_ar(np.full(50, 5.0), 3)


def test_fit_ar_too_short():
    with pytest.raises(SeriesTooShort):
        fit_ar(np.arange(4.0), 3)


def test_fit_ar_matches_lstsq_oracle():
    y = simulate_ar([0.5, -0.3], 500, 1)
    model = fit_ar(y, 4)
    p, P = model.order, 4
    X = np.column_stack([np.ones(len(y) - P)] + [y[P - j : len(y) - j] for j in range(1, p + 1)])
    beta, *_ = np.linalg.lstsq(X, y[P:], rcond=None)
    assert model.intercept == pytest.approx(beta[0], abs=1e-10)
    assert np.allclose(model.coefficients, beta[1:], atol=1e-10)


def test_bic_path_is_the_textbook_formula():
    y = simulate_ar([0.6], 300, 2)
    P = 3
    model = fit_ar(y, P)
    n = len(y) - P
    for p, bic in enumerate(model.bic_path):
        X = np.column_stack([np.ones(n)] + [y[P - j : len(y) - j] for j in range(1, p + 1)])
        r = y[P:] - X @ np.linalg.lstsq(X, y[P:], rcond=None)[0]
        assert bic == pytest.approx(n * math.log(r @ r / n) + (p + 1) * math.log(n), rel=1e-10)
    assert model.order == int(np.argmin(model.bic_path))


def test_ar2_order_recovery():
    hits = sum(fit_ar(simulate_ar([0.5, -0.3], 2000, s), 12).order == 2 for s in range(100))
    assert hits >= 95


def test_white_noise_order_zero():
    hits = sum(fit_ar(make_rng(s, 7).standard_normal(2000), 12).order == 0 for s in range(100))
    assert hits >= 80


def test_forecast_ar_hand_recursion():
    m = FittedAR(order=1, intercept=0.0, coefficients=(0.5,), residual_variance=1.0, bic=0.0)
    assert forecast_ar(m, np.array([7.0, 2.0]), 1) == 1.0
    assert forecast_ar(m, np.array([7.0, 2.0]), 2) == 0.5


def test_forecast_ar_order_zero_is_mean():
    m = FittedAR(order=0, intercept=3.25, coefficients=(), residual_variance=1.0, bic=0.0)
    for h in (1, 5, 40):
        assert forecast_ar(m, np.array([100.0]), h) == 3.25


def test_forecast_ar_one_step_is_linear_predictor():
    y = simulate_ar([0.4, 0.2, -0.1], 400, 3)
    m = fit_ar(y, 5)
    lags = y[::-1][: m.order]
    assert forecast_ar(m, y, 1) == pytest.approx(m.intercept + np.dot(m.coefficients, lags), abs=1e-12)


def test_forecast_ar_needs_history():
    m = FittedAR(order=2, intercept=0.0, coefficients=(0.1, 0.1), residual_variance=1.0, bic=0.0)
    with pytest.raises(HistoryTooShort):
        forecast_ar(m, np.array([1.0]), 1)


# ARMA-GARCH ---------------------------------------------------------------

def test_garch_short_series():
    with pytest.raises(SeriesTooShort):
        fit_arma_garch(np.arange(10.0))


def test_garch_constant_series():
    with pytest.raises(SingularDesign):
        fit_arma_garch(np.ones(200))


def test_garch_invalid_params():
    with pytest.raises(InvalidSpec):
        garch_model(0.1, 0.5, 0.5)
    with pytest.raises(InvalidSpec):
        garch_model(0.0, 0.1, 0.5)


def test_volatility_h1_is_next_variance():
    m = garch_model(0.1, 0.1, 0.8, e=2.0, s=1.5)
    assert forecast_volatility(m, 1) == pytest.approx(math.sqrt(0.1 + 0.1 * 4 + 0.8 * 1.5))


def test_volatility_hand_recursion():
    # next variance = 0.1 + 0.1 * 0 + 0.8 * 1.125 = 1.0
    m = garch_model(0.1, 0.1, 0.8, e=0.0, s=1.125)
    assert m.next_variance == pytest.approx(1.0)
    assert forecast_volatility(m, 3) == pytest.approx(math.sqrt(0.1 * 1.9 + 0.81 * 1.0))


def test_volatility_near_unit_persistence_grows_linearly():
    m = garch_model(0.01, 0.2, 0.7999999, e=0.0, s=1.0 / 0.7999999)
    for h in (10, 100, 1000):
        assert forecast_volatility(m, h) == pytest.approx(math.sqrt(0.01 * (h - 1) + m.next_variance), rel=1e-3)


@given(st.floats(0.01, 10), st.floats(0.01, 10), st.integers(1, 30))
def test_volatility_monotone_in_next_variance(s1, s2, h):
    lo, hi = sorted((s1, s2))
    assert forecast_volatility(garch_model(0.1, 0.1, 0.8, s=lo), h) <= forecast_volatility(garch_model(0.1, 0.1, 0.8, s=hi), h)


def test_volatility_overflow_is_reported():
    with pytest.raises(NumericOverflow):
        forecast_volatility(garch_model(1e29, 0.1, 0.85, s=1e31), 2)


def test_arma_mean_recursion():
    m = FittedArmaGarch((1.0, 0.5, 0.2), (0.1, 0.1, 0.8), (2.0, 1.0), 4.0, 1.0)
    assert forecast_arma_mean(m, 1) == pytest.approx(1.0 + 0.5 * 4.0 + 0.2 * 2.0)
    assert forecast_arma_mean(m, 2) == pytest.approx(1.0 + 0.5 * 3.4)


def test_with_history_matches_loop_filter():
    y = generate(ProcessSpec("garch11", 300, 4, {"omega": 0.1, "alpha": 0.1, "beta": 0.8})).values
    m = fit_arma_garch(y, seed=1)
    c, phi, theta = m.arma
    omega, alpha, beta = m.garch
    e_prev, s_prev, s = 0.0, None, m.init_variance
    for t in range(1, len(y)):
        e = y[t] - c - phi * y[t - 1] - theta * e_prev
        if s_prev is not None:
            s = omega + alpha * e_prev**2 + beta * s_prev
        e_prev, s_prev = e, s
    rolled = m.with_history(y)
    assert rolled.last_state[0] == pytest.approx(e_prev, rel=1e-9, abs=1e-12)
    assert rolled.last_state[1] == pytest.approx(s_prev, rel=1e-9)
    assert forecast_mean(m, y, 1) == pytest.approx(forecast_arma_mean(rolled, 1))


def test_garch_parameter_recovery():
    est = []
    for s in range(20):
        y = generate(ProcessSpec("garch11", 5000, s, {"omega": 0.1, "alpha": 0.1, "beta": 0.8}))
        m = fit_arma_garch(y, seed=s)
        assert m.persistence < 1
        est.append(m.garch)
    mean = np.mean(est, axis=0)
    assert np.all(np.abs(mean - [0.1, 0.1, 0.8]) <= 0.05)


def test_garch_on_iid_finds_no_persistence():
    ok = 0
    for s in range(10):
        m = fit_arma_garch(make_rng(s, 3).standard_normal(5000), seed=s)
        ok += m.persistence <= 0.3
    assert ok >= 8


def test_garch_fit_is_deterministic():
    y = generate(ProcessSpec("garch11", 400, 9, {"omega": 0.1, "alpha": 0.1, "beta": 0.8}))
    assert fit_arma_garch(y, seed=5) == fit_arma_garch(y, seed=5)
