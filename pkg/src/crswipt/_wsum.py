"""Series expansion of the density of W = X1 + X2 with independent gamma terms.

With X1 ~ Gamma(m1, a) listed first, expanding e^{ax} under the convolution integral gives

    f_W(w) = Σ_s Σ_k c_{k,s} w^k e^{-aw} P(n_s, b w),
    c_{k,s} = a^{m1} b^{m2} / (Γ(m1) Γ(m2)) (-1)^{m1-1-k} C(m1-1, k) a^s/s! b^{-n_s} Γ(n_s),
    n_s = m1 + m2 - k - 1 + s.

Any functional ∫ g(w) f_W(w) dw with 0 <= g <= 1 then reduces to
Φ(K, A) = ∫ g(w) w^K e^{-Aw} dw at A = a + b through the all-positive tail
P(n, bw) = e^{-bw} Σ_{t>=n} (bw)^t/t!. The form 1 - e^{-bw} Σ_{t<n} cancels
badly once (a/b)^s is large, so it is not used. Since Φ(K, A) <= K!/A^{K+1},
the t-tail is dominated by a geometric series of ratio b/(a+b).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._numerics import ConvergenceError, SeriesControl, log_comb


@dataclass(frozen=True)
class GammaPair:
    """The two gamma components of W; the first one (rate ``a``) is expanded in s.

    Every s-increment is a non-negative contribution, so the series converges
    for either order, geometrically in a/b when a < b and only once s exceeds
    about a·w in the other case.
    """

    m1: int
    a: float
    m2: int
    b: float

    @classmethod
    def from_components(cls, m_x: float, rate_x: float, m_y: float, rate_y: float) -> "GammaPair":
        for m in (m_x, m_y):
            if m < 1 or not float(m).is_integer():
                raise ValueError(f"closed forms need integer fading severities >= 1, got {m}")
        return cls(int(m_x), rate_x, int(m_y), rate_y)

    @property
    def single(self) -> bool:
        return abs(self.b - self.a) <= 1e-12 * self.b

    def t_extra(self) -> int:
        """Tail length in t beyond n_s that bounds the neglected part below ~1e-18."""
        return int(math.ceil(45.0 / math.log1p(self.a / self.b))) + 2 * (self.m1 + self.m2)

    def k_max(self, s_max: int) -> tuple[int, int]:
        """Largest K needed at A = a (equal rates only) and at A = a + b (-1: unused)."""
        if self.single:
            return self.m1 + self.m2 - 1, -1
        return -1, self.m1 + self.m2 + s_max - 2 + self.t_extra()


def integrate_against_density(pair: GammaPair, log_phi_a, log_phi_ab, ctl: SeriesControl):
    """Σ over the f_W expansion for several functionals at once.

    ``log_phi_a[f][K]`` holds ln Φ_f(K, a) and ``log_phi_ab[f][K]`` ln Φ_f(K, a+b)
    for each functional f. Returns (values, number of s-terms used).
    """
    nf = len(log_phi_a)
    if pair.single:
        mt = pair.m1 + pair.m2
        lc = mt * math.log(pair.a) - math.lgamma(mt)
        vals = [math.exp(lc + log_phi_a[f][mt - 1]) for f in range(nf)]
        return vals, 1
    m1, m2, a, b = pair.m1, pair.m2, pair.a, pair.b
    la, lb = math.log(a), math.log(b)
    l0 = m1 * la + m2 * lb - math.lgamma(m1) - math.lgamma(m2)
    totals = np.zeros(nf)
    kab = pair.k_max(ctl.s_max)[1]
    t_all = np.arange(0, kab + 1)
    lbt = t_all * lb - np.array([math.lgamma(t + 1) for t in t_all])
    used = ctl.s_max + 1
    converged = False
    prev = np.zeros(nf)
    for s in range(ctl.s_max + 1):
        inc = np.zeros(nf)
        for k in range(m1):
            ns = m1 + m2 - k - 1 + s
            lc = l0 + log_comb(m1 - 1, k) + s * la - math.lgamma(s + 1) - ns * lb + math.lgamma(ns)
            sign = -1.0 if (m1 - 1 - k) % 2 else 1.0
            for f in range(nf):
                tail = np.exp(lc + lbt[ns : kab + 1 - k] + log_phi_ab[f][k + ns : kab + 1]).sum()
                inc[f] += sign * tail
        totals += inc
        if s >= 1:
            # the increments decay geometrically; bound the tail by the observed ratio
            with np.errstate(divide="ignore", invalid="ignore"):
                rho = np.where(np.abs(prev) > 0, np.abs(inc) / np.abs(prev), 0.0)
            # while still growing there is no bound; fall back to the increment itself
            tail = np.where(rho < 1.0, np.abs(inc) / np.maximum(1.0 - rho, 1e-300), np.abs(inc))
            if np.all(tail <= ctl.rel_stop * np.abs(totals) + ctl.abs_stop):
                used = s + 1
                converged = True
                break
        prev = inc
    if not converged and ctl.strict:
        raise ConvergenceError(f"index-s series not converged within s_max={ctl.s_max}")
    return [float(v) for v in totals], used


def log_phi_window(k_max: int, A: float, p_th: float) -> tuple[np.ndarray, np.ndarray]:
    """ln ∫_0^{P_th} and ln ∫_{P_th}^∞ of w^K e^{-Aw} dw for K = 0..k_max."""
    from ._numerics import log_p_int_table, log_q_int_table

    x = A * p_th
    lp = log_p_int_table(k_max + 1, x)
    lq = log_q_int_table(k_max + 1, x)
    K = np.arange(k_max + 1)
    base = np.array([math.lgamma(k + 1) for k in K]) - (K + 1) * math.log(A)
    return base + lp[1:], base + lq[1:]


def prob_w_below(pair: GammaPair, x: float, ctl: SeriesControl) -> tuple[float, float, int]:
    """(Pr[W <= x], Pr[W > x], s-terms used) from the same expansion."""
    ka, kab = pair.k_max(ctl.s_max)
    lo_a, hi_a = log_phi_window(ka, pair.a, x) if ka >= 0 else (np.empty(0), np.empty(0))
    lo_ab, hi_ab = log_phi_window(kab, pair.a + pair.b, x) if kab >= 0 else (np.empty(0), np.empty(0))
    (below, above), used = integrate_against_density(pair, [lo_a, hi_a], [lo_ab, hi_ab], ctl)
    return min(max(below, 0.0), 1.0), min(max(above, 0.0), 1.0), used
