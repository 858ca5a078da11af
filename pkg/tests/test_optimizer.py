import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crswipt._numerics import ConvergenceError
from crswipt.model import TargetRates, default_network, default_power, default_swipt
from crswipt.optimizer import (
    InfeasibleBoundsError,
    ObjectiveEvaluationError,
    OptimizationContext,
    PsoConfig,
    make_objective,
    pso_maximize,
    sphere_objective,
)

BOX = ((0.0, 1.0), (0.0, 1.0), (0.0, 1.0))


def test_sphere_converges():
    pso = PsoConfig(population=30, iterations=200, bounds=BOX, seed=7)
    res = pso_maximize(sphere_objective((0.3, 0.55, 0.75)), pso, physical=False)
    assert np.allclose(res.best_position, (0.3, 0.55, 0.75), atol=1e-3)
    assert res.evaluations == 30 * 201


def test_frozen_swarm_keeps_best_initial_sample():
    seen = []

    def f(*x):
        seen.append(x)
        return -sum(v * v for v in x)

    pso = PsoConfig(population=12, iterations=5, w=0.0, c1=0.0, c2=0.0, bounds=BOX, seed=3, init_velocity="zero")
    res = pso_maximize(f, pso, physical=False)
    initial = seen[:12]
    best = max(initial, key=lambda x: -sum(v * v for v in x))
    assert np.allclose(res.best_position, best)
    assert all(t == res.trace[0] for t in res.trace)


@settings(max_examples=20)
@given(st.integers(0, 2**32), st.tuples(*[st.floats(-0.5, 1.5)] * 3))
def test_trace_nondecreasing_and_in_bounds(seed, center):
    pts = []

    def f(*x):
        pts.append(x)
        return sphere_objective(center)(*x)

    res = pso_maximize(f, PsoConfig(population=6, iterations=15, bounds=BOX, seed=seed), physical=False)
    assert len(res.trace) == 16
    assert all(b >= a for a, b in zip(res.trace, res.trace[1:]))
    arr = np.array(pts)
    assert arr.min() >= 0.0 and arr.max() <= 1.0


def test_same_seed_is_deterministic():
    pso = PsoConfig(population=8, iterations=20, bounds=BOX, seed=42)
    a = pso_maximize(sphere_objective((0.1, 0.2, 0.3)), pso, physical=False)
    b = pso_maximize(sphere_objective((0.1, 0.2, 0.3)), pso, physical=False)
    assert a.trace == b.trace and a.position_trace == b.position_trace


def test_nonfinite_values_never_win():
    def f(a, b, m):
        return math.nan if a > 0.5 else -a

    res = pso_maximize(f, PsoConfig(population=10, iterations=10, bounds=BOX, seed=1), physical=False)
    assert res.best_position[0] <= 0.5


@pytest.mark.parametrize("bounds", [
    ((0.0, 1.0), (0.0, 0.5), (0.6, 0.9)),   # α = 1 allowed
    ((0.0, 0.5), (0.0, 1.0), (0.6, 0.9)),   # β = 1 allowed
    ((0.0, 0.5), (0.0, 0.5), (0.0, 0.9)),   # μ = 0 allowed
])
def test_physical_bounds_enforced(bounds):
    with pytest.raises(InfeasibleBoundsError):
        pso_maximize(sphere_objective((0, 0, 0)), PsoConfig(bounds=bounds, population=2, iterations=1))


def test_config_validation():
    with pytest.raises(InfeasibleBoundsError):
        PsoConfig(bounds=((0.5, 0.2), (0, 1), (0, 1)))
    with pytest.raises(InfeasibleBoundsError):
        PsoConfig().with_mu_floor(0.97)
    assert PsoConfig().with_mu_floor(0.8).bounds[2] == (0.8, 0.95)
    for kw in ({"population": 1}, {"iterations": 0}, {"w": -1}, {"init_velocity": "x"}):
        with pytest.raises(ValueError):
            PsoConfig(**kw)


def test_objective_errors_are_wrapped_with_position():
    def f(a, b, m):
        raise ConvergenceError("boom")

    with pytest.raises(ObjectiveEvaluationError) as ei:
        pso_maximize(f, PsoConfig(population=2, iterations=1, bounds=BOX), physical=False)
    assert isinstance(ei.value.__cause__, ConvergenceError)
    assert len(ei.value.position) == 3


def _ctx(rate):
    return OptimizationContext(default_network(), default_swipt(), default_power(20.0), TargetRates.uniform(rate))


def test_penalty_is_graded_and_negative_when_c3_fails():
    f = make_objective("throughput", _ctx(1 / 3))
    bad_low, bad_mid = f(0.2, 0.2, 0.6), f(0.2, 0.2, 0.7)
    assert bad_low < bad_mid < 0
    assert f(0.01, 0.5, 0.95) > 0


def test_named_objective_needs_context():
    with pytest.raises(ValueError):
        pso_maximize("throughput", PsoConfig(population=2, iterations=1))
    with pytest.raises(ValueError):
        make_objective("latency", _ctx(1 / 3))


def test_short_run_on_the_model_prefers_small_alpha():
    res = pso_maximize("throughput", PsoConfig(population=6, iterations=6, seed=1), _ctx(1 / 6))
    assert res.best_value > 0
    assert res.best_position[0] < 0.2
