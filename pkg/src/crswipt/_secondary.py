"""Closed-form CDF pieces of the SU-to-SU link.

Everything is expressed as Φ(K, A) functionals of W (see ``_wsum``), with the
Z = |h_{i,î}|² integration done through the truncated Bessel-type integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._numerics import (
    NEG_INF,
    SeriesControl,
    TruncatedBesselIntegrals,
    gamma_cdf,
    gamma_sf,
    log_comb,
    log_p_int_table,
    log_q_int_table,
    safe_log,
)
from ._wsum import GammaPair, integrate_against_density
from .model import DerivedCoefficients


@dataclass
class SecondaryResult:
    lin: float
    sat: float
    terms: int
    lin_degenerate: bool
    sat_degenerate: bool
    quad_fallbacks: int = 0


def _log_fact_pow(k_max: int, A: float) -> np.ndarray:
    K = np.arange(k_max + 1)
    return np.array([math.lgamma(k + 1) for k in K]) - (K + 1) * math.log(A)


def _log_bracket(vals) -> np.ndarray:
    v = np.asarray(vals, dtype=float)
    out = np.full(v.shape, NEG_INF)
    pos = v > 0
    out[pos] = np.log(v[pos])
    return out


def _lambda(k_max: int, A: float, p_th: float) -> np.ndarray:
    """ln Λ(K, A) = ln( A^{-(K+1)} Υ[K+1, A P_th] )."""
    return _log_fact_pow(k_max, A) + log_p_int_table(k_max + 1, A * p_th)[1:]


def _rho_inner(k_max, A, co: DerivedCoefficients, mz, bz, ctl, counters) -> np.ndarray:
    """ρ(K, A) · A^{K+1}/K!, i.e. ∫_{ι3}^∞ f_Z(z) P(K+1, A h3(z)) dz."""
    iota3 = co.iota3
    qz = gamma_sf(mz, bz, iota3)
    if qz == 0.0:
        return np.zeros(k_max + 1)
    g = co.gamma
    c = A * g * co.sigma2_ihat / co.zeta_i
    e1 = A * co.xi_i * g / co.zeta_i
    tb = TruncatedBesselIntegrals(bz, c, iota3, mz - k_max, mz, ctl)
    counters["quad"] += tb.quad_fallbacks
    lq = log_q_int_table(k_max + 1, e1)
    pref = mz * math.log(bz) - math.lgamma(mz)
    lc = math.log(c)
    d = np.arange(k_max + 1)
    ld = pref + d * lc - np.array([math.lgamma(x + 1) for x in d]) + np.array([tb.upper_part(mz - x) for x in d])
    out = np.empty(k_max + 1)
    for K in range(k_max + 1):
        out[K] = qz - np.exp(ld[: K + 1] + lq[K + 1 - d[: K + 1]]).sum()
    return np.maximum(out, 0.0)


def _varrho_inner(k_max, A, co: DerivedCoefficients, mz, bz, z0, iota4, ctl, counters) -> np.ndarray:
    """∫_{z0}^{ι4} f_Z(z) Q(K+1, A h(z)) dz with h = (Cγ/Ψ)(1 + z0/(z - z0))."""
    g = co.gamma
    e2 = A * co.C_i * g / co.Psi_i
    c2 = e2 * z0
    big_y = math.inf if math.isinf(iota4) else iota4 - z0
    tb = TruncatedBesselIntegrals(bz, c2, big_y, 1 - k_max, mz, ctl)
    counters["quad"] += tb.quad_fallbacks
    lz0 = math.log(z0)
    lg = np.empty(k_max + 1)
    for d in range(k_max + 1):
        logs = [log_comb(mz - 1, q) + (mz - 1 - q) * lz0 + tb.lower(q - d + 1) for q in range(mz)]
        lg[d] = np.logaddexp.reduce(logs)
    lq = log_q_int_table(k_max + 1, e2)
    pref = mz * math.log(bz) - math.lgamma(mz) - bz * z0
    d = np.arange(k_max + 1)
    ld = pref + d * safe_log(c2) - np.array([math.lgamma(x + 1) for x in d]) + lg
    out = np.empty(k_max + 1)
    for K in range(k_max + 1):
        out[K] = np.exp(ld[: K + 1] + lq[K + 1 - d[: K + 1]]).sum()
    return out


def _log_phi_pair(k_max, A, co, mz, bz, ctl, counters):
    """(ln Φ_lin(K, A), ln Φ_sat(K, A)) for K = 0..k_max."""
    base = _log_fact_pow(k_max, A)
    x = A * co.p_th
    lp = log_p_int_table(k_max + 1, x)[1:]
    lqp = log_q_int_table(k_max + 1, x)[1:]

    # lin: W < min(h3(Z), P_th)
    if math.isinf(co.iota3) or co.iota3 < 0:
        lin = _lambda(k_max, A, co.p_th)
    else:
        fz3 = gamma_cdf(mz, bz, co.iota3)
        rho = _rho_inner(k_max, A, co, mz, bz, ctl, counters)
        lin = base + _log_bracket(fz3 * np.exp(lp) + rho)

    # sat: W > P_th and W < h(Z)
    if not co.Psi_i > 0:
        sat = base + lqp
    else:
        z0 = co.D_ihat * co.gamma / co.Psi_i
        iota4 = co.iota4 if co.iota4 > 0 else math.inf
        fz4 = gamma_cdf(mz, bz, iota4)
        h = _varrho_inner(k_max, A, co, mz, bz, z0, iota4, ctl, counters)
        sat = base + _log_bracket(np.exp(lqp) * fz4 - h)
    return lin, sat


def secondary_cdfs(co: DerivedCoefficients, fading, ctl: SeriesControl) -> SecondaryResult:
    """Lin and sat CDF terms of the SU link for coefficients ``co`` at ``co.gamma``.

    ``fading`` is ((m_ij, Ω_ij), (m_iĵ, Ω_iĵ), (m_iî, Ω_iî)).
    """
    (mx, omx), (my, omy), (mz, omz) = fading
    if mz < 1 or not float(mz).is_integer():
        raise ValueError(f"closed forms need integer fading severities >= 1, got {mz}")
    mz = int(mz)
    bz = mz / omz
    lin_deg = math.isinf(co.iota3) or co.iota3 < 0
    sat_deg = not (co.Psi_i > 0) or math.isinf(co.iota4) or co.iota4 < 0
    if co.gamma <= 0:
        return SecondaryResult(0.0, 0.0, 0, False, False)
    pair = GammaPair.from_components(mx, mx / (omx * co.p_j), my, my / (omy * co.p_jhat))
    ka, kab = pair.k_max(ctl.s_max)
    counters = {"quad": 0}
    empty = np.empty(0)
    lin_a, sat_a = _log_phi_pair(ka, pair.a, co, mz, bz, ctl, counters) if ka >= 0 else (empty, empty)
    lin_ab, sat_ab = _log_phi_pair(kab, pair.a + pair.b, co, mz, bz, ctl, counters) if kab >= 0 else (empty, empty)
    (lin, sat), used = integrate_against_density(pair, [lin_a, sat_a], [lin_ab, sat_ab], ctl)
    return SecondaryResult(
        lin=min(max(lin, 0.0), 1.0),
        sat=min(max(sat, 0.0), 1.0),
        terms=used,
        lin_degenerate=lin_deg,
        sat_degenerate=sat_deg,
        quad_fallbacks=counters["quad"],
    )
