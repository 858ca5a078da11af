"""Closed-form outage, throughput, energy efficiency and critical spectrum-sharing factor.

Conventions
-----------
* ``outage_primary(j)`` is the selection-combining OP at PU ``j``: the product
  over both SU relays of F_{γ_{i,j}}(γ_j).
* ``outage_secondary(n)`` is the OP at SU ``n`` for the signal sent by the
  other SU, i.e. F_{γ_{i,n}}(γ_n) with i ≠ n. The harvested-power sum W is
  expanded about the PU_a term, which reproduces the published truncation
  behaviour of the index-s series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.optimize import brentq

from ._numerics import ConvergenceError, SeriesControl, gamma_cdf
from ._primary import primary_lin, primary_sat
from ._secondary import secondary_cdfs
from .model import (
    PUS,
    SUS,
    NetworkConfig,
    PowerParams,
    SwiptParams,
    TargetRates,
    derive_coefficients,
    other_pu,
    other_su,
    target_snr,
    with_threshold,
)

__all__ = [
    "SeriesControl",
    "ConvergenceError",
    "NoFeasibleMuError",
    "OutageReport",
    "cdf_primary_lin",
    "cdf_primary_sat",
    "cdf_secondary_lin",
    "cdf_secondary_sat",
    "outage_primary",
    "outage_secondary",
    "outage_direct",
    "outage_report",
    "critical_mu",
    "feasibility_edge",
    "throughput",
    "energy_efficiency",
]

DEFAULT_SERIES = SeriesControl()

# PU_a's term leads the expansion of W for the SU link (see module docstring)
SU_EXPANSION_PU = "a"


class NoFeasibleMuError(ValueError):
    """No spectrum-sharing factor in (0, 1) meets the primary QoS target."""


@dataclass
class OutageReport:
    op: dict[str, float]
    lin: dict[str, float] = field(default_factory=dict)
    sat: dict[str, float] = field(default_factory=dict)
    terms: dict[str, int] = field(default_factory=dict)
    flags: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self):
        for n, p in self.op.items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"OP at {n} outside [0, 1]: {p}")


def _check_gamma(gamma):
    if not gamma >= 0:
        raise ValueError(f"target SNR must be non-negative, got {gamma}")


# --- link CDFs ---------------------------------------------------------------


def cdf_primary_lin(gamma, coeffs, fading, series: SeriesControl = DEFAULT_SERIES) -> float:
    """Pr[γ_lin < γ, W <= P_th] for relay ``coeffs.i`` and destination ``coeffs.j``.

    ``fading`` = (m_ij, Ω_ij, m_iĵ, Ω_iĵ). Returns 1 when Ξ <= 0.
    """
    _check_gamma(gamma)
    return primary_lin(with_threshold(coeffs, gamma), fading)


def cdf_primary_sat(gamma, coeffs, fading, series: SeriesControl = DEFAULT_SERIES) -> float:
    """Pr[γ_sat < γ, W > P_th]; Pr[W > P_th] once γ exceeds the sat-branch supremum."""
    _check_gamma(gamma)
    return primary_sat(with_threshold(coeffs, gamma), fading, series).value


def cdf_secondary_lin(gamma, coeffs, fading, series: SeriesControl = DEFAULT_SERIES) -> float:
    """Pr[γ_lin < γ, W <= P_th] on the link i → î.

    ``fading`` = ((m_ij, Ω_ij), (m_iĵ, Ω_iĵ), (m_iî, Ω_iî)); the ``j`` term of W
    is the one expanded in s. If ζP_th <= ξγ the result is Pr[W <= P_th].
    """
    _check_gamma(gamma)
    return secondary_cdfs(with_threshold(coeffs, gamma), fading, series).lin


def cdf_secondary_sat(gamma, coeffs, fading, series: SeriesControl = DEFAULT_SERIES) -> float:
    """Pr[γ_sat < γ, W > P_th] on the link i → î."""
    _check_gamma(gamma)
    return secondary_cdfs(with_threshold(coeffs, gamma), fading, series).sat


# --- node OPs ----------------------------------------------------------------


def _primary_fading(cfg: NetworkConfig, i: str, j: str):
    jh = other_pu(j)
    return (cfg.m(i, j), cfg.omega(i, j), cfg.m(i, jh), cfg.omega(i, jh))


def _secondary_fading(cfg: NetworkConfig, i: str, j: str):
    jh = other_pu(j)
    ih = other_su(i)
    return ((cfg.m(i, j), cfg.omega(i, j)), (cfg.m(i, jh), cfg.omega(i, jh)), (cfg.m(i, ih), cfg.omega(i, ih)))


def _primary_detail(node, cfg, swipt, power, rates, series):
    if node not in PUS:
        raise KeyError(f"unknown PU {node!r}")
    g = target_snr(rates.of(node), swipt.alpha, "relayed")
    op, lin, sat, terms, flags = 1.0, 0.0, 0.0, 0, []
    for i in SUS:
        co = derive_coefficients(swipt, power, g, (i, node))
        fad = _primary_fading(cfg, i, node)
        fl = primary_lin(co, fad)
        fs = primary_sat(co, fad, series)
        if not co.Xi > 0:
            flags.append(f"relay {i}: infeasible spectrum sharing (Xi <= 0)")
        if fs.degenerate:
            flags.append(f"relay {i}: sat branch beyond supremum")
        op *= min(max(fl + fs.value, 0.0), 1.0)
        lin += fl
        sat += fs.value
        terms = max(terms, fs.terms)
    return op, lin / 2.0, sat / 2.0, terms, flags


def _secondary_detail(node, cfg, swipt, power, rates, series):
    if node not in SUS:
        raise KeyError(f"unknown SU {node!r}")
    i = other_su(node)
    g = target_snr(rates.of(node), swipt.alpha, "relayed")
    co = derive_coefficients(swipt, power, g, (i, SU_EXPANSION_PU))
    res = secondary_cdfs(co, _secondary_fading(cfg, i, SU_EXPANSION_PU), series)
    flags = []
    if res.lin_degenerate:
        flags.append("lin branch degenerate: value is Pr[W <= P_th]")
    if res.sat_degenerate:
        flags.append("sat branch: W-bound never drops to P_th (iota4 infinite)")
    if res.quad_fallbacks:
        flags.append(f"{res.quad_fallbacks} Bessel-type integrals done by quadrature")
    return min(max(res.lin + res.sat, 0.0), 1.0), res.lin, res.sat, res.terms, flags


def outage_primary(node, cfg, swipt, power, rates, series: SeriesControl = DEFAULT_SERIES) -> float:
    return _primary_detail(node, cfg, swipt, power, rates, series)[0]


def outage_secondary(node, cfg, swipt, power, rates, series: SeriesControl = DEFAULT_SERIES) -> float:
    return _secondary_detail(node, cfg, swipt, power, rates, series)[0]


def outage_report(cfg, swipt, power, rates, series: SeriesControl = DEFAULT_SERIES) -> OutageReport:
    rep = OutageReport(op={})
    for n in PUS + SUS:
        fn = _primary_detail if n in PUS else _secondary_detail
        op, lin, sat, terms, flags = fn(n, cfg, swipt, power, rates, series)
        rep.op[n], rep.lin[n], rep.sat[n], rep.terms[n], rep.flags[n] = op, lin, sat, terms, flags
    return rep


def outage_direct(pu_pair, power: PowerParams, fading, rate: float) -> float:
    """OP of the direct PU link ĵ → j, with ``pu_pair`` = (j, ĵ) and ``fading`` = (m, Ω)."""
    if not rate > 0:
        raise ValueError("rate must be positive")
    j, jh = pu_pair
    m, omega = fading
    g = target_snr(rate, 0.0, "direct")
    return gamma_cdf(m, m / omega, g * power.sigma2[j] / power.p[jh])


def _direct_for(cfg, power, rates, j):
    jh = other_pu(j)
    return outage_direct((j, jh), power, (cfg.m(j, jh), cfg.omega(j, jh)), rates.of(j))


# --- spectrum sharing ----------------------------------------------------------


def feasibility_edge(swipt: SwiptParams, rates: TargetRates, node: str) -> float:
    """μ below which Ξ <= 0 and the PU is in certain outage: γ_j / (1 + γ_j)."""
    g = target_snr(rates.of(node), swipt.alpha, "relayed")
    return g / (1.0 + g)


def critical_mu(
    cfg,
    swipt,
    power,
    rates,
    series: SeriesControl = DEFAULT_SERIES,
    target="direct",
    node: str = "both",
    xtol: float = 1e-12,
) -> float:
    """Smallest common μ for which the relayed PU OP does not exceed ``target``.

    ``target`` is ``"direct"`` (the direct-link OP of each PU) or a probability.
    ``node`` picks PU ``"a"``, ``"b"`` or ``"both"`` (the binding one of the two).
    """
    nodes = PUS if node == "both" else (node,)
    for n in nodes:
        if n not in PUS:
            raise KeyError(f"unknown PU {n!r}")
    if target == "direct":
        tgt = {n: _direct_for(cfg, power, rates, n) for n in nodes}
    else:
        t = float(target)
        if not 0.0 <= t:
            raise ValueError("target probability must be non-negative")
        tgt = {n: t for n in nodes}
    edge = max(feasibility_edge(swipt, rates, n) for n in nodes)
    if all(t >= 1.0 for t in tgt.values()):
        return edge

    def excess(mu):
        sw = swipt.with_(mu=mu)
        return max(outage_primary(n, cfg, sw, power, rates, series) - tgt[n] for n in nodes)

    lo = edge + 1e-9
    hi = 1.0 - 1e-9
    f_hi = excess(hi)
    if f_hi >= 0:
        raise NoFeasibleMuError(f"primary OP stays above the target even as mu -> 1 (excess {f_hi:.3g})")
    f_lo = excess(lo)
    if f_lo <= 0:
        return lo
    mu_star = brentq(excess, lo, hi, xtol=xtol, rtol=1e-15)
    # land on the feasible side of the root
    step = xtol
    while excess(mu_star) > 0 and mu_star < hi:
        mu_star = min(mu_star + step, hi)
        step *= 2
    return mu_star


# --- system metrics ------------------------------------------------------------


def throughput(cfg, swipt, power, rates, series: SeriesControl = DEFAULT_SERIES, report: OutageReport | None = None) -> float:
    """S_T = (1-α)/3 Σ_n (1 - P_out,n) r_n over all four nodes."""
    rep = report or outage_report(cfg, swipt, power, rates, series)
    return (1.0 - swipt.alpha) / 3.0 * sum((1.0 - rep.op[n]) * rates.of(n) for n in PUS + SUS)


def energy_efficiency(cfg, swipt, power, rates, series: SeriesControl = DEFAULT_SERIES, report: OutageReport | None = None) -> float:
    """S_T / [(α + β(1-α)/3)(P_a + P_b)]."""
    denom = (swipt.alpha + swipt.beta * (1.0 - swipt.alpha) / 3.0) * (power.p["a"] + power.p["b"])
    if not denom > 0:
        raise ValueError("energy efficiency undefined for alpha = beta = 0")
    return throughput(cfg, swipt, power, rates, series, report) / denom
