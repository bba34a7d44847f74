import numpy as np
import pytest

from rocp.backtest import backtest
from rocp.calibration import CalibrationSet, empirical_quantile, scale_window, take_window
from rocp.errors import InputError, InsufficientScores, MissingSigma

from conftest import make_records


def slow_backtest(records, alpha, m, h):
    """Direct loop: at origin t use the m latest records with origin <= t - h."""
    out = []
    for r in records:
        avail = [s for s in records if s.origin <= r.origin - h]
        if m is None:
            if not avail:
                continue
            cal = CalibrationSet([s.score for s in avail])
        else:
            if len(avail) < m:
                continue
            cal = take_window(avail, m)
        out.append((r.origin, empirical_quantile(cal, 1 - alpha)))
    return out


@pytest.mark.parametrize("h", [1, 3])
@pytest.mark.parametrize("m", [None, 5, 20])
def test_backtest_matches_loop(rng, h, m):
    recs = make_records(rng.exponential(size=80), h=h)
    bt = backtest(recs, 0.2, m=m)
    ref = slow_backtest(recs, 0.2, m, h)
    assert list(bt.origins) == [o for o, _ in ref]
    assert np.array_equal(bt.halfwidths, [q for _, q in ref])


def test_scaled_backtest(rng):
    sig = rng.uniform(0.5, 2, size=60)
    recs = make_records(rng.exponential(size=60) * sig, sig)
    bt = backtest(recs, 0.1, m=10, scaled=True)
    for j in (0, 17, len(bt.origins) - 1):
        t = int(bt.origins[j])
        avail = [r for r in recs if r.origin <= t - 1]
        q = empirical_quantile(scale_window(avail, 10), 0.9)
        assert bt.halfwidths[j] == pytest.approx(q * sig[t - 1])
    with pytest.raises(MissingSigma):
        backtest(make_records([1.0] * 20), 0.1, m=5, scaled=True)


def test_backtest_report_and_start(rng):
    recs = make_records(rng.exponential(size=200))
    bt = backtest(recs, 0.1, m=30, start=100)
    assert bt.origins[0] == 100
    rep = bt.report()
    assert rep.n == 101
    assert rep.coverage == pytest.approx(np.mean(bt.scores <= bt.halfwidths))
    assert rep.mean_halfwidth == pytest.approx(bt.halfwidths.mean())


def test_backtest_guards():
    with pytest.raises(InsufficientScores):
        backtest(make_records([1.0] * 5), 0.1, m=10)
    with pytest.raises(InputError):
        backtest(make_records([1.0] * 5)[::-1], 0.1)
    with pytest.raises(InputError):
        backtest(make_records([1.0] * 5), 0.0)
