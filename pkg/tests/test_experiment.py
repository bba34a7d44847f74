import math

import numpy as np
import pytest

from rocp.errors import ExperimentFailed, InputError, RankDeficient, TooFewGroups, TooFewRows
from rocp.experiment import (
    ExperimentConfig,
    ProcessFamily,
    ScalingRow,
    ols_hc1,
    replicate_seed,
    run_scaling_experiment,
    scaling_regression,
)
from rocp.models import ModelSpec
from rocp.selection import Boundary


def sandwich_loop(X, y):
    """HC1 covariance with explicit loops and an explicit inverse."""
    n, k = X.shape
    xtx = np.zeros((k, k))
    xty = np.zeros(k)
    for i in range(n):
        xtx += np.outer(X[i], X[i])
        xty += X[i] * y[i]
    inv = np.linalg.inv(xtx)
    b = inv @ xty
    meat = np.zeros((k, k))
    for i in range(n):
        e = y[i] - X[i] @ b
        meat += e * e * np.outer(X[i], X[i])
    return b, inv @ meat @ inv * n / (n - k)


def test_exact_line():
    x = np.arange(5.0)
    res = ols_hc1(np.column_stack([np.ones(5), x]), 2 * x)
    assert res.slope == pytest.approx(2.0)
    assert res.slope_se_hc1 == pytest.approx(0.0, abs=1e-12)
    assert res.r2 == pytest.approx(1.0)


def test_three_points_hand():
    X = np.column_stack([np.ones(3), [0.0, 1.0, 2.0]])
    y = np.array([0.0, 1.0, 3.0])
    res = ols_hc1(X, y)
    # slope 1.5, intercept -1/6, residuals (1/6, -1/3, 1/6)
    assert res.slope == pytest.approx(1.5)
    e = np.array([1 / 6, -1 / 3, 1 / 6])
    inv = np.linalg.inv(X.T @ X)
    cov = inv @ (X.T * e**2) @ X @ inv * 3
    assert res.slope_se_hc1 == pytest.approx(math.sqrt(cov[1, 1]), rel=1e-12)
    assert res.ci95 == pytest.approx((1.5 - 1.96 * res.slope_se_hc1, 1.5 + 1.96 * res.slope_se_hc1))


def test_matches_loop_sandwich(rng):
    for _ in range(20):
        n, k = int(rng.integers(5, 30)), int(rng.integers(2, 4))
        X = np.column_stack([np.ones(n), rng.normal(size=(n, k - 1))])
        y = rng.normal(size=n)
        res = ols_hc1(X, y)
        b, cov = sandwich_loop(X, y)
        assert np.allclose(res.coef, b, rtol=1e-10)
        assert np.allclose(res.cov, cov, rtol=1e-10, atol=1e-14)


def test_simple_regression_slope_is_cov_over_var(rng):
    x, y = rng.normal(size=50), rng.normal(size=50)
    res = ols_hc1(np.column_stack([np.ones(50), x]), y)
    assert res.slope == pytest.approx(np.cov(x, y)[0, 1] / np.var(x, ddof=1))


def test_ols_guards():
    X = np.column_stack([np.ones(5), np.arange(5.0), np.arange(5.0)])
    with pytest.raises(RankDeficient):
        ols_hc1(X, np.arange(5.0))
    with pytest.raises(TooFewRows):
        ols_hc1(np.ones((2, 2)), np.ones(2))


def rows_for(Ts, C=1.0, tag="synthetic", exponent=2 / 3, boundary=Boundary.NO):
    return [ScalingRow(f"{tag}{T}", tag, T, round(C * T**exponent), boundary) for T in Ts]


def test_planted_law_gives_two_thirds():
    rows = rows_for([k**3 for k in range(4, 15)])
    res = scaling_regression(rows)
    assert res.slope == pytest.approx(2 / 3, abs=1e-12)
    assert res.slope_se_hc1 == pytest.approx(0, abs=1e-12)


def test_fixed_effects_recover_common_slope():
    Ts = [k**3 for k in range(3, 12)]
    rows = [ScalingRow(f"a{T}", "Daily", T, k * k) for k, T in zip(range(3, 12), Ts)]
    rows += [ScalingRow(f"b{T}", "Monthly", T * 8, 4 * k * k * 2) for k, T in zip(range(3, 12), Ts)]
    res = scaling_regression(rows, fixed_effects=True)
    assert res.slope == pytest.approx(2 / 3, abs=1e-10)
    assert res.constants["Daily"] == pytest.approx(1.0)
    assert res.constants["Monthly"] == pytest.approx(2.0)


def test_boundary_rows_excluded():
    rows = rows_for([k**3 for k in range(4, 10)]) + rows_for([1000, 8000], C=9.0, boundary=Boundary.UPPER)
    assert scaling_regression(rows).slope == pytest.approx(2 / 3)
    assert scaling_regression(rows, exclude_boundary=False).slope != pytest.approx(2 / 3)


def test_regression_guards():
    with pytest.raises(TooFewRows):
        scaling_regression(rows_for([8, 27]))
    with pytest.raises(TooFewGroups):
        scaling_regression(rows_for([8, 27, 64, 125]), fixed_effects=True)


def test_scaling_row_guards():
    with pytest.raises(InputError):
        ScalingRow("x", "Daily", 100, 0)
    with pytest.raises(InputError):
        ScalingRow("x", "Daily", 100, 5, coverage=1.5)
    assert ScalingRow("x", "Daily", 100, 5, "upper").at_boundary


def test_replicate_seeds_are_distinct():
    seeds = {replicate_seed(0, T, r) for T in (100, 200) for r in range(50)}
    assert len(seeds) == 100
    assert replicate_seed(3, 100, 1) == replicate_seed(3, 100, 1)


def test_planted_experiment():
    cfg = ExperimentConfig((64, 125, 343, 1000), ProcessFamily("planted", {"C": 1.0}), n_reps=2)
    rows = run_scaling_experiment(cfg)
    assert [r.T for r in rows] == [64, 64, 125, 125, 343, 343, 1000, 1000]
    assert scaling_regression(rows).slope == pytest.approx(2 / 3, abs=1e-9)


def test_iid_family_prefers_long_windows():
    fam = ProcessFamily("pure_scale", {"path": "constant"})
    cfg = ExperimentConfig((600,), fam, model=ModelSpec("naive"), n_reps=10, seed=1)
    rows = run_scaling_experiment(cfg)
    ratios = [r.m_star / 600 ** (2 / 3) for r in rows]
    # the Winkler curve is flat for long windows when nothing drifts, so only the centre is pinned
    assert np.median(ratios) > 1.0


def test_drift_family_gives_interior_windows():
    fam = ProcessFamily("pure_scale", {"path": "bumps"}, {"width": 2.0, "amplitude": 20.0})
    cfg = ExperimentConfig((600,), fam, model=ModelSpec("ar", 2), n_reps=10, seed=2, min_train=30)
    rows = run_scaling_experiment(cfg)
    assert sum(not r.at_boundary for r in rows) >= 8


def test_experiment_config_guards():
    fam = ProcessFamily("ar1", {"phi": 0.5})
    with pytest.raises(InputError):
        ExperimentConfig((), fam)
    with pytest.raises(InputError):
        ExperimentConfig((50,), fam)
    with pytest.raises(InputError):
        ExperimentConfig((200, 100), fam)


def test_all_replicates_failing(caplog):
    # a 60-point series cannot host 30 training points plus a 60-point AR warm-up
    cfg = ExperimentConfig((60,), ProcessFamily("ar1", {"phi": 0.5}), model=ModelSpec("ar", 30), n_reps=2)
    with pytest.raises(ExperimentFailed):
        run_scaling_experiment(cfg)
    assert "dropped replicate" in caplog.text


def test_config_round_trip():
    cfg = ExperimentConfig(
        (100, 200), ProcessFamily("holder_drift", {"beta_h": 1.0}, {"width": 0.5, "amplitude": 3.0}),
        model=ModelSpec("ar", 3), n_reps=3, seed=9,
    )
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
