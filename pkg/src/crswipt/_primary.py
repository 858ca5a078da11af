"""Closed-form CDF pieces of the relayed primary link ĵ → i → j.

X = |h_{j,i}|² and Y = |h_{ĵ,i}|² are gamma distributed with integer shapes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._numerics import (
    NEG_INF,
    ConvergenceError,
    SeriesControl,
    gamma_cdf,
    log_comb,
    log_int_pow_exp,
    log_sub,
    signed_lse,
)
from . import specialfn as sf
from ._wsum import GammaPair, prob_w_below
from .model import DerivedCoefficients


@dataclass
class PrimarySat:
    value: float
    terms: int
    degenerate: bool


def _int_shape(m):
    if m < 1 or not float(m).is_integer():
        raise ValueError(f"closed forms need integer fading severities >= 1, got {m}")
    return int(m)


def primary_lin(co: DerivedCoefficients, fading) -> float:
    """Pr[γ_lin < γ, W <= P_th] = F_X(P_th/P_j) - T_A - T_B."""
    mx, omx, my, omy = fading
    mx, my = _int_shape(mx), _int_shape(my)
    g = co.gamma
    if g <= 0:
        return 0.0
    if not co.delta_i > 0 or not co.Xi > 0:
        return 1.0
    a = mx / omx
    b = my / omy
    xi = co.Xi
    x_max = co.p_th / co.p_j
    iota1 = min(max(co.iota1, 0.0), x_max)
    fx = gamma_cdf(mx, a, x_max)
    lpre = mx * math.log(a) - math.lgamma(mx)

    # T_A: x in (0, ι1), the SNR condition binds
    ta = 0.0
    if iota1 > 0:
        eg, wg = co.eps_ij * g, co.omega_ij * g
        A1 = a + b * wg / xi
        la0 = lpre - b * eg / xi
        logs = []
        for p in range(my):
            for n in range(p + 1):
                order = mx + p - n
                logs.append(
                    la0 + p * math.log(b / xi) - math.lgamma(p + 1) + log_comb(p, n)
                    + n * math.log(eg) + (p - n) * math.log(wg)
                    - order * math.log(A1) + sf.log_lower_incomplete_gamma(order, A1 * iota1)
                )
        ta = float(np.exp(logs).sum())

    # T_B: x in (ι1, P_th/P_j), the power budget binds
    tb = 0.0
    if iota1 < x_max:
        pj, pjh = co.p_j, co.p_jhat
        dlt = b * pj / pjh - a
        lb0 = lpre - b * co.p_th / pjh
        logs, signs = [], []
        for k in range(my):
            for q in range(k + 1):
                n_pow = mx - 1 + k - q
                logs.append(
                    lb0 + k * math.log(b / pjh) - math.lgamma(k + 1) + log_comb(k, q)
                    + q * math.log(co.p_th) + (k - q) * math.log(pj)
                    + log_int_pow_exp(n_pow, dlt, iota1, x_max)
                )
                signs.append(-1.0 if (k - q) % 2 else 1.0)
        val, sgn = signed_lse(logs, signs)
        tb = sgn * math.exp(val) if val > NEG_INF else 0.0
    return min(max(fx - ta - tb, 0.0), 1.0)


def _prob_w_above(co, a, mx, b, my, ctl) -> float:
    pair = GammaPair.from_components(mx, a / co.p_j, my, b / co.p_jhat)
    return prob_w_below(pair, co.p_th, ctl)[1]


def primary_sat(co: DerivedCoefficients, fading, ctl: SeriesControl) -> PrimarySat:
    """Pr[γ_sat < γ, W > P_th] with the s-series for the region below y_a.

    The term P_ĵ σ_j² Y of the SNR denominator is dropped, as in the closed
    form; it is negligible next to Φ'_ij X Y when W > P_th.
    """
    mx, omx, my, omy = fading
    mx, my = _int_shape(mx), _int_shape(my)
    g = co.gamma
    if g <= 0:
        return PrimarySat(0.0, 0, False)
    a = mx / omx
    b = my / omy
    if not co.delta_i > 0 or not co.Xi > 0 or not (math.isfinite(co.T1) and co.T1 > 0):
        return PrimarySat(_prob_w_above(co, a, mx, b, my, ctl), 0, True)
    pj, pjh, p_th = co.p_j, co.p_jhat, co.p_th
    T1, T2 = co.T1, co.T2
    y_cut = p_th / pjh
    if T1 <= y_cut:
        y_a = y_b = co.iota2
    else:
        y_a, y_b = y_cut, T1

    # S1: y in (0, y_a), X above the power-budget line
    cy = a * pjh / pj
    lpre = my * math.log(b) - math.lgamma(my) - a * p_th / pj
    lb = math.log(b)
    heads, signs_h, lexact, lcum = [], [], [], []
    s_terms = np.arange(ctl.s_max + 1)
    ls = s_terms * math.log(cy) - np.array([math.lgamma(s + 1) for s in s_terms])
    for p in range(mx):
        for n in range(p + 1):
            M = my + p - n
            heads.append(
                lpre + p * math.log(a / pj) - math.lgamma(p + 1) + log_comb(p, n)
                + n * math.log(p_th) + (p - n) * math.log(pjh)
            )
            signs_h.append(-1.0 if (p - n) % 2 else 1.0)
            lt = np.array([-(M + s) * lb + sf.log_lower_incomplete_gamma(M + s, b * y_a) for s in s_terms])
            lcum.append(np.logaddexp.accumulate(ls + lt))
            lexact.append(log_int_pow_exp(M - 1, cy - b, 0.0, y_a))
    heads = np.array(heads)[:, None]
    signs_h = np.array(signs_h)
    lcum = np.array(lcum)
    lexact = np.array(lexact)[:, None]
    trunc = signs_h @ np.exp(heads + lcum)  # S1 after 1..s_max terms
    gap = np.array([[log_sub(e, c) for c in row] for e, row in zip(lexact[:, 0], np.minimum(lcum, lexact))])
    err = np.exp(heads + gap).sum(axis=0)
    s1_exact = float(signs_h @ np.exp(heads[:, 0] + lexact[:, 0]))
    tol = ctl.rel_stop * abs(s1_exact) + ctl.abs_stop
    ok = np.nonzero(err <= tol)[0]
    if ok.size:
        used = int(ok[0]) + 1
    else:
        used = ctl.s_max + 1
        if ctl.strict:
            raise ConvergenceError(f"primary s-series not converged within s_max={ctl.s_max}")
    s1 = float(trunc[used - 1])

    # middle band: X unconstrained
    s_mid = gamma_cdf(my, b, y_b) - gamma_cdf(my, b, y_a)

    # S2: y > y_b, X above the SNR line
    A2 = a / T2 + b
    lpre2 = my * math.log(b) - math.lgamma(my) + a * T1 / T2
    logs, signs = [], []
    for k in range(mx):
        for q in range(k + 1):
            logs.append(
                lpre2 + k * math.log(a / T2) - math.lgamma(k + 1) + log_comb(k, q)
                + (k - q) * math.log(T1) - (my + q) * math.log(A2)
                + sf.log_upper_incomplete_gamma(my + q, y_b * A2)
            )
            signs.append(-1.0 if (k - q) % 2 else 1.0)
    val, sgn = signed_lse(logs, signs)
    s2 = sgn * math.exp(val) if val > NEG_INF else 0.0
    total = s1 + s_mid + s2
    return PrimarySat(min(max(total, 0.0), 1.0), used, False)
