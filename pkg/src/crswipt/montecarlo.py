"""Monte Carlo oracle for the outage probabilities, throughput and energy efficiency.

Channel power gains are drawn directly (the unit-energy symbols never matter).
Trials are split into fixed-size blocks and block ``k`` always uses the
SeedSequence(seed, spawn_key=(k,)) with a Philox generator, so a result
depends on the seed and trial count only, never on how blocks are scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import (
    PUS,
    SUS,
    NetworkConfig,
    PowerParams,
    SwiptParams,
    TargetRates,
    link_key,
    other_pu,
    other_su,
    snr_primary,
    snr_secondary,
    target_snr,
)

BLOCK = 1 << 16
LINKS = (("a", "1"), ("a", "2"), ("b", "1"), ("b", "2"), ("1", "2"))


@dataclass(frozen=True)
class SimSpec:
    trials: int = 1_000_000
    seed: int = 0
    exact_af_gain: bool = False
    include_bc_noise: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class SimResult:
    op: dict[str, float]
    stderr: dict[str, float]
    throughput: float
    energy_efficiency: float
    occupancy: dict[str, tuple[float, float]]
    trials: int
    counts: dict[str, int] = field(default_factory=dict)


def sample_channel_power(m: float, omega: float, rng: np.random.Generator, size=None):
    """Gamma(shape m, mean Ω) power gain, i.e. |h|² under Nakagami-m fading."""
    if not m >= 0.5:
        raise ValueError(f"fading severity must be >= 0.5, got {m}")
    if not omega > 0:
        raise ValueError(f"mean power must be positive, got {omega}")
    return rng.gamma(m, omega / m, size)


def _block_rng(seed: int, index: int) -> np.random.Generator:
    child = np.random.SeedSequence(seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(child))


def _draw(cfg: NetworkConfig, rng, n):
    return {link_key(*lk): sample_channel_power(cfg.m(*lk), cfg.omega(*lk), rng, n) for lk in LINKS}


def _gain(h, u, v):
    return h[link_key(u, v)]


def _block_counts(args):
    cfg, swipt, power, rates, sim, index, n = args
    rng = _block_rng(sim.seed, index)
    h = _draw(cfg, rng, n)
    out = {}
    sat = {}
    for i in SUS:
        w = power.p["a"] * _gain(h, "a", i) + power.p["b"] * _gain(h, "b", i)
        sat[i] = w > swipt.p_th
        out[f"sat_{i}"] = int(np.count_nonzero(sat[i]))
    for j in PUS:
        jh = other_pu(j)
        g = target_snr(rates.of(j), swipt.alpha, "relayed")
        snr = {
            i: snr_primary(
                _gain(h, j, i), _gain(h, jh, i), swipt, power, (i, j),
                exact_af_gain=sim.exact_af_gain, include_bc_noise=sim.include_bc_noise,
            )
            for i in SUS
        }
        best = np.maximum(snr["1"], snr["2"])
        out[f"out_{j}"] = int(np.count_nonzero(best < g))
        chosen_sat = np.where(snr["1"] >= snr["2"], sat["1"], sat["2"])
        out[f"sat_{j}"] = int(np.count_nonzero(chosen_sat))
    for n_ in SUS:
        i = other_su(n_)
        g = target_snr(rates.of(n_), swipt.alpha, "relayed")
        s = snr_secondary(
            _gain(h, "a", i), _gain(h, "b", i), _gain(h, i, n_), swipt, power, i,
            exact_af_gain=sim.exact_af_gain,
        )
        out[f"out_{n_}"] = int(np.count_nonzero(s < g))
    return out


def _budget(trials):
    nb = math.ceil(trials / BLOCK)
    return [(k, min(BLOCK, trials - k * BLOCK)) for k in range(nb)]


def simulate(cfg, swipt: SwiptParams, power: PowerParams, rates: TargetRates, sim: SimSpec = SimSpec()) -> SimResult:
    jobs = [(cfg, swipt, power, rates, sim, k, n) for k, n in _budget(sim.trials)]
    if sim.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=sim.workers) as ex:
            parts = list(ex.map(_block_counts, jobs))
    else:
        parts = [_block_counts(j) for j in jobs]
    tot = {k: sum(p[k] for p in parts) for k in parts[0]}
    n = sim.trials
    op, se, occ = {}, {}, {}
    for node in PUS + SUS:
        p = tot[f"out_{node}"] / n
        op[node] = p
        se[node] = math.sqrt(p * (1.0 - p) / n)
    for node in PUS:
        fs = tot[f"sat_{node}"] / n
        occ[node] = (1.0 - fs, fs)
    for node in SUS:
        # the SU receiver sees the branch of the transmitting SU
        fs = tot[f"sat_{other_su(node)}"] / n
        occ[node] = (1.0 - fs, fs)
    st = (1.0 - swipt.alpha) / 3.0 * sum((1.0 - op[k]) * rates.of(k) for k in PUS + SUS)
    denom = (swipt.alpha + swipt.beta * (1.0 - swipt.alpha) / 3.0) * (power.p["a"] + power.p["b"])
    ee = st / denom if denom > 0 else math.nan
    return SimResult(op=op, stderr=se, throughput=st, energy_efficiency=ee, occupancy=occ, trials=n, counts=tot)


@dataclass
class ApproximationGap:
    delta: dict[str, float]
    stderr: dict[str, float]


def approximation_gap(cfg, swipt, power, rates, sim: SimSpec = SimSpec()) -> ApproximationGap:
    """OP(exact AF gain + BC noise) - OP(closed-form assumptions), on common random numbers."""
    base = SimSpec(sim.trials, sim.seed, False, False, sim.workers)
    full = SimSpec(sim.trials, sim.seed, True, True, sim.workers)
    r0 = simulate(cfg, swipt, power, rates, base)
    r1 = simulate(cfg, swipt, power, rates, full)
    delta = {k: r1.op[k] - r0.op[k] for k in r0.op}
    se = {k: math.hypot(r0.stderr[k], r1.stderr[k]) for k in r0.op}
    return ApproximationGap(delta=delta, stderr=se)
