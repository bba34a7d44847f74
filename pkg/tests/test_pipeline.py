import warnings

import numpy as np
import pytest

from rocp.errors import InputError, WindowTooLarge
from rocp.models import ModelSpec
from rocp.pipeline import BoundarySelected, Scheme, SchemeFallback, predict
from rocp.rolling import RollingConfig
from rocp.selection import make_grid, select_window
from rocp.series import validate_series
from rocp.synthetic import generate, holder_drift, ProcessSpec

AR = ModelSpec("ar", 3)


@pytest.fixture(scope="module")
def drift_series():
    return generate(holder_drift(600, 300, 3.0, seed=4))


def test_scheme_parse():
    assert Scheme.parse("full") == Scheme("full")
    assert Scheme.parse("rolling:25") == Scheme("rolling", 25)
    assert Scheme.parse("VS:auto").auto
    assert str(Scheme.parse("rolling:auto")) == "rolling:auto"
    for bad in ("rolling", "window:3", "rolling:x", "rolling:0"):
        with pytest.raises(InputError):
            Scheme.parse(bad)


def test_full_equals_rolling_with_all_scores(drift_series):
    full = predict(drift_series, AR, scheme="full").prediction
    n = len(predict(drift_series, AR, scheme="full").records)
    roll = predict(drift_series, AR, scheme=f"rolling:{n}").prediction
    assert full.m_used == n
    assert (full.lower, full.upper) == (roll.lower, roll.upper)


def test_interval_is_symmetric_and_contains_center(drift_series):
    p = predict(drift_series, AR, scheme="rolling:50").prediction
    assert p.lower < p.center < p.upper
    assert p.center - p.lower == pytest.approx(p.upper - p.center)
    assert p.level == pytest.approx(0.9)


def test_vs_with_ar_falls_back(drift_series):
    with pytest.warns(SchemeFallback):
        vs = predict(drift_series, AR, scheme="vs:50").prediction
    roll = predict(drift_series, AR, scheme="rolling:50").prediction
    assert vs.scheme == "rolling:50"
    assert (vs.lower, vs.upper) == (roll.lower, roll.upper)


def test_auto_matches_selector(drift_series):
    run = predict(drift_series, AR, scheme="rolling:auto", rolling=RollingConfig(seed=3))
    direct = select_window(run.records, make_grid(len(drift_series)), 0.1)
    assert run.prediction.m_used == direct.m_hat
    assert run.prediction.boundary_flag == direct.at_boundary.value


def test_boundary_policies():
    y = validate_series(np.random.default_rng(0).normal(size=400))
    grid = make_grid(400, 1.0, 2, 0.1, 0.2)  # two candidates: whichever wins is an edge
    with pytest.raises(BoundarySelected):
        predict(y, ModelSpec("naive"), grid=grid, boundary_policy="error")
    flagged = predict(y, ModelSpec("naive"), grid=grid, boundary_policy="flag").prediction
    accepted = predict(y, ModelSpec("naive"), grid=grid, boundary_policy="accept").prediction
    assert flagged.boundary_flag in ("upper", "lower")
    assert accepted.boundary_flag == "no" and accepted.m_used == flagged.m_used
    with pytest.raises(InputError):
        predict(y, ModelSpec("naive"), boundary_policy="ignore")


def test_window_too_large():
    y = validate_series(np.arange(50.0))
    with pytest.raises(WindowTooLarge):
        predict(y, ModelSpec("naive"), scheme="rolling:500")


def test_vs_with_garch_scales_by_sigma():
    y = generate(ProcessSpec("garch11", 800, 1, {"omega": 0.1, "alpha": 0.1, "beta": 0.8}))
    with warnings.catch_warnings():
        warnings.simplefilter("error", SchemeFallback)
        p = predict(y, ModelSpec("arma_garch"), scheme="vs:100", rolling=RollingConfig(refit_stride=100)).prediction
    assert p.sigma is not None and p.sigma > 0
    assert p.scheme == "vs:100"
    assert p.upper - p.center == pytest.approx(p.center - p.lower)
