"""Particle swarm search over (α, β, μ) for throughput or energy efficiency.

Constraint C3 (primary QoS no worse than direct transmission) depends on α
through γ_j, so it is enforced per evaluation by a graded penalty: a position
whose relayed PU OP exceeds the direct-link OP scores minus the total excess.
Feasible positions score >= 0, so they always rank above infeasible ones, and
the swarm still has a slope to follow when it starts out entirely infeasible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import analytic
from .analytic import DEFAULT_SERIES, SeriesControl
from .model import PUS, NetworkConfig, PowerParams, SwiptParams, TargetRates

Bounds = tuple[tuple[float, float], tuple[float, float], tuple[float, float]]


class InfeasibleBoundsError(ValueError):
    pass


class ObjectiveEvaluationError(RuntimeError):
    def __init__(self, position, cause):
        super().__init__(f"objective failed at (alpha, beta, mu) = {tuple(position)}: {cause!r}")
        self.position = tuple(position)


@dataclass(frozen=True)
class PsoConfig:
    population: int = 40
    iterations: int = 200
    w: float = 0.72
    c1: float = 1.49
    c2: float = 1.49
    bounds: Bounds = ((0.01, 0.99), (0.01, 0.99), (0.6, 0.95))
    seed: int = 0
    vmax_fraction: float = 0.2
    init_velocity: str = "random"

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be >= 2")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.w < 0 or self.c1 < 0 or self.c2 < 0:
            raise ValueError("w, c1, c2 must be non-negative")
        if self.init_velocity not in ("random", "zero"):
            raise ValueError("init_velocity must be 'random' or 'zero'")
        if len(self.bounds) != 3:
            raise InfeasibleBoundsError("bounds must give (lo, hi) for alpha, beta and mu")
        for (lo, hi), name in zip(self.bounds, ("alpha", "beta", "mu")):
            if not lo <= hi:
                raise InfeasibleBoundsError(f"{name} bounds are empty: [{lo}, {hi}]")

    def with_mu_floor(self, mu_lo: float) -> "PsoConfig":
        (a, b, (_, mu_hi)) = self.bounds
        if mu_lo > mu_hi:
            raise InfeasibleBoundsError(f"critical mu {mu_lo:.6g} exceeds the mu upper bound {mu_hi}")
        return PsoConfig(self.population, self.iterations, self.w, self.c1, self.c2,
                         (a, b, (mu_lo, mu_hi)), self.seed, self.vmax_fraction, self.init_velocity)


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    p_best_position: np.ndarray
    p_best_value: float


@dataclass
class OptimizationResult:
    best_position: tuple[float, float, float]
    best_value: float
    trace: list[float] = field(default_factory=list)
    position_trace: list[tuple[float, float, float]] = field(default_factory=list)
    evaluations: int = 0


@dataclass(frozen=True)
class OptimizationContext:
    cfg: NetworkConfig
    swipt: SwiptParams
    power: PowerParams
    rates: TargetRates
    series: SeriesControl = DEFAULT_SERIES


def _check_physical_bounds(bounds: Bounds):
    (alo, ahi), (blo, bhi), (mlo, mhi) = bounds
    if alo < 0 or ahi >= 1:
        raise InfeasibleBoundsError("C1 requires alpha in [0, 1)")
    if blo < 0 or bhi >= 1:
        raise InfeasibleBoundsError("C2 requires beta in [0, 1)")
    if mlo <= 0 or mhi >= 1:
        raise InfeasibleBoundsError("C3 requires mu in (0, 1)")


def feasible_mu_bound(cfg, swipt, power, rates, series: SeriesControl = DEFAULT_SERIES, target="direct") -> float:
    """C3 lower bound μ* for the template's α (see :func:`analytic.critical_mu`)."""
    return analytic.critical_mu(cfg, swipt, power, rates, series, target=target)


def make_objective(kind: str, ctx: OptimizationContext) -> Callable[[float, float, float], float]:
    """Throughput or energy efficiency at (α, β, μ), minus the C3 excess where violated."""
    if kind not in ("throughput", "ee", "energy_efficiency"):
        raise ValueError(f"unknown objective {kind!r}")
    direct = {
        j: analytic.outage_direct((j, o), ctx.power, (ctx.cfg.m(j, o), ctx.cfg.omega(j, o)), ctx.rates.of(j))
        for j, o in (("a", "b"), ("b", "a"))
    }
    cache: dict[tuple, float] = {}

    def f(alpha, beta, mu):
        key = (float(alpha), float(beta), float(mu))
        if key in cache:
            return cache[key]
        sw = ctx.swipt.with_(alpha=key[0], beta=key[1], mu=key[2])
        rep = analytic.outage_report(ctx.cfg, sw, ctx.power, ctx.rates, ctx.series)
        excess = sum(max(rep.op[j] - direct[j], 0.0) for j in PUS)
        if excess > 0:
            val = -excess
        elif kind == "throughput":
            val = analytic.throughput(ctx.cfg, sw, ctx.power, ctx.rates, report=rep)
        else:
            val = analytic.energy_efficiency(ctx.cfg, sw, ctx.power, ctx.rates, report=rep)
        cache[key] = val
        return val

    return f


def pso_maximize(objective, pso: PsoConfig = PsoConfig(), context: OptimizationContext | None = None,
                 physical: bool = True) -> OptimizationResult:
    """Maximise ``objective`` over the box ``pso.bounds``.

    ``objective`` is ``"throughput"``, ``"ee"`` (both need ``context``) or a
    callable of three floats. ``physical=False`` skips the C1–C3 range check,
    for synthetic test functions.
    """
    if isinstance(objective, str):
        if context is None:
            raise ValueError("named objectives need an OptimizationContext")
        fn = make_objective(objective, context)
    else:
        fn = objective
    if physical:
        _check_physical_bounds(pso.bounds)
    lo = np.array([b[0] for b in pso.bounds], dtype=float)
    hi = np.array([b[1] for b in pso.bounds], dtype=float)
    span = hi - lo
    vmax = pso.vmax_fraction * span
    rng = np.random.Generator(np.random.Philox(pso.seed))
    n = pso.population
    evals = 0

    def evaluate(x):
        nonlocal evals
        evals += 1
        try:
            v = float(fn(*x))
        except Exception as exc:  # surfaced with the position that caused it
            raise ObjectiveEvaluationError(x, exc) from exc
        return v if math.isfinite(v) else -math.inf

    pos = lo + rng.random((n, 3)) * span
    if pso.init_velocity == "random":
        vel = (2.0 * rng.random((n, 3)) - 1.0) * vmax
    else:
        vel = np.zeros((n, 3))
    swarm = []
    for k in range(n):
        val = evaluate(pos[k])
        swarm.append(Particle(pos[k].copy(), vel[k].copy(), pos[k].copy(), val))
    best = max(range(n), key=lambda k: swarm[k].p_best_value)
    g_pos = swarm[best].p_best_position.copy()
    g_val = swarm[best].p_best_value
    trace = [g_val]
    ptrace = [tuple(float(x) for x in g_pos)]
    for _ in range(pso.iterations):
        r1 = rng.random((n, 3))
        r2 = rng.random((n, 3))
        for k, p in enumerate(swarm):
            v = pso.w * p.velocity + pso.c1 * r1[k] * (p.p_best_position - p.position) + pso.c2 * r2[k] * (g_pos - p.position)
            v = np.clip(v, -vmax, vmax)
            x = p.position + v
            out = (x < lo) | (x > hi)
            x = np.clip(x, lo, hi)
            v[out] = 0.0
            p.position, p.velocity = x, v
        # evaluations first, then the barrier update of the bests
        vals = [evaluate(p.position) for p in swarm]
        for p, val in zip(swarm, vals):
            if val > p.p_best_value:
                p.p_best_value = val
                p.p_best_position = p.position.copy()
                if val > g_val:
                    g_val = val
                    g_pos = p.position.copy()
        trace.append(g_val)
        ptrace.append(tuple(float(x) for x in g_pos))
    return OptimizationResult(ptrace[-1], g_val, trace, ptrace, evals)


def sphere_objective(center: Sequence[float]) -> Callable[[float, float, float], float]:
    """-‖ψ - ψ0‖², maximal at ``center``."""
    c = np.asarray(center, dtype=float)

    def f(*x):
        return -float(np.sum((np.asarray(x) - c) ** 2))

    return f
