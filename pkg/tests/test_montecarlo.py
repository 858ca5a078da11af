import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from crswipt import analytic
from crswipt.model import TargetRates, default_network, default_power, default_swipt
from crswipt.montecarlo import BLOCK, SimSpec, approximation_gap, sample_channel_power, simulate

NET = default_network()
SW = default_swipt()
R3 = TargetRates.uniform(1 / 3)


@given(st.floats(0.5, 6.0), st.floats(1e-3, 10.0))
def test_channel_power_moments(m, om):
    rng = np.random.default_rng(3)
    x = sample_channel_power(m, om, rng, 200_000)
    assert x.min() >= 0
    assert x.mean() == pytest.approx(om, rel=0.02)
    assert x.var() == pytest.approx(om**2 / m, rel=0.06)


def test_same_seed_same_result():
    sim = SimSpec(trials=50_000, seed=11)
    r1 = simulate(NET, SW, default_power(20.0), R3, sim)
    r2 = simulate(NET, SW, default_power(20.0), R3, sim)
    assert r1.counts == r2.counts


def test_different_seed_differs():
    a = simulate(NET, SW, default_power(20.0), R3, SimSpec(trials=50_000, seed=1))
    b = simulate(NET, SW, default_power(20.0), R3, SimSpec(trials=50_000, seed=2))
    assert a.counts != b.counts


def test_worker_count_does_not_change_result():
    n = 2 * BLOCK + 123
    r1 = simulate(NET, SW, default_power(25.0), R3, SimSpec(trials=n, seed=5, workers=1))
    r2 = simulate(NET, SW, default_power(25.0), R3, SimSpec(trials=n, seed=5, workers=2))
    assert r1.counts == r2.counts
    assert r1.op == r2.op


def test_stderr_and_occupancy():
    r = simulate(NET, SW, default_power(20.0), R3, SimSpec(trials=40_000, seed=9))
    for k, p in r.op.items():
        assert 0.0 <= p <= 1.0
        assert r.stderr[k] == pytest.approx(math.sqrt(p * (1 - p) / r.trials))
    for lin, sat in r.occupancy.values():
        assert lin + sat == pytest.approx(1.0)
    cap = (1 - SW.alpha) / 3 * 4 / 3
    assert 0 <= r.throughput <= cap


def test_mc_tracks_analytic_at_moderate_trials():
    pw = default_power(30.0)
    r = simulate(NET, SW, pw, R3, SimSpec(trials=200_000, seed=4))
    rep = analytic.outage_report(NET, SW, pw, R3)
    for k in r.op:
        assert abs(r.op[k] - rep.op[k]) <= 5 * r.stderr[k] + 2e-3


def test_approximation_gap_is_reported_per_node():
    gap = approximation_gap(NET, SW, default_power(20.0), R3, SimSpec(trials=30_000, seed=2))
    assert set(gap.delta) == {"a", "b", "1", "2"}
    for k, d in gap.delta.items():
        assert -1 <= d <= 1
        assert gap.stderr[k] >= 0


@pytest.mark.parametrize("kw", [{"trials": 0}, {"seed": -1}, {"seed": 2**64}, {"workers": 0}])
def test_simspec_validation(kw):
    with pytest.raises(ValueError):
        SimSpec(**kw)
