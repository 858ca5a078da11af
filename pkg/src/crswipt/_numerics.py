"""Log-space building blocks shared by the closed-form CDF evaluators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import logsumexp

from . import specialfn as sf

NEG_INF = -math.inf


@dataclass(frozen=True)
class SeriesControl:
    """Truncation of the infinite sums in the closed forms.

    ``s_max`` is the largest index kept in the s-series (s = 0 .. s_max),
    ``u_max`` the largest index of the u-series. The s-series stops early once
    its remaining tail, estimated from the ratio of the last two increments,
    falls below ``rel_stop`` times the running total plus ``abs_stop``. With ``strict`` set, exhausting a cap before
    that happens raises :class:`ConvergenceError`; otherwise the partial sum is
    returned, which is how truncation studies are run.
    """

    s_max: int = 160
    u_max: int = 64
    rel_stop: float = 1e-9
    abs_stop: float = 1e-14
    strict: bool = True

    def __post_init__(self):
        if self.s_max < 1:
            raise ValueError("s_max must be >= 1")
        if self.u_max < 1:
            raise ValueError("u_max must be >= 1")
        if not self.rel_stop > 0:
            raise ValueError("rel_stop must be positive")
        if self.abs_stop < 0:
            raise ValueError("abs_stop must be non-negative")

    def truncated(self, s_max: int) -> "SeriesControl":
        """Sum exactly s = 0..s_max, no early stop, no convergence error."""
        return SeriesControl(s_max=s_max, u_max=self.u_max, rel_stop=1e-300, abs_stop=0.0, strict=False)


ConvergenceError = sf.ConvergenceError


def signed_lse(logs, signs) -> tuple[float, float]:
    """(ln|Σ s·e^l|, sign of the sum)."""
    logs = np.asarray(logs, dtype=float)
    if logs.size == 0 or np.all(np.isneginf(logs)):
        return NEG_INF, 0.0
    val, sgn = logsumexp(logs, b=np.asarray(signs, dtype=float), return_sign=True)
    return float(val), float(sgn)


def log_sub(la: float, lb: float) -> float:
    """ln(e^la - e^lb) for la >= lb; -inf when equal."""
    if lb == NEG_INF:
        return la
    if lb >= la:
        return NEG_INF
    return la + math.log1p(-math.exp(lb - la))


def log_comb(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def log_factorial(n) -> float:
    return math.lgamma(n + 1)


def safe_log(x: float) -> float:
    return math.log(x) if x > 0 else NEG_INF


# --- gamma distribution pieces -------------------------------------------


def gamma_cdf(m: float, rate: float, x: float) -> float:
    if x <= 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    return sf.regularized_lower_gamma(m, rate * x)


def gamma_sf(m: float, rate: float, x: float) -> float:
    if x <= 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    return sf.regularized_upper_gamma(m, rate * x)


def log_p(a: float, x: float) -> float:
    if x <= 0:
        return NEG_INF
    if math.isinf(x):
        return 0.0
    return sf.log_lower_incomplete_gamma(a, x) - math.lgamma(a)


def log_q(a: float, x: float) -> float:
    if x <= 0:
        return 0.0
    if math.isinf(x):
        return NEG_INF
    return sf.log_upper_incomplete_gamma(a, x) - math.lgamma(a)


def log_q_int_table(nmax: int, x: float) -> np.ndarray:
    """ln Q(n, x) for n = 0..nmax (entry 0 unused, set to ln Q(1, x))."""
    out = np.empty(nmax + 1)
    if x <= 0:
        out[:] = 0.0
        return out
    if math.isinf(x):
        out[:] = NEG_INF
        return out
    lx = math.log(x)
    out[0] = out[1] = -x
    for n in range(1, nmax):
        out[n + 1] = np.logaddexp(out[n], -x + n * lx - math.lgamma(n + 1))
    return out


def log_p_int_table(nmax: int, x: float) -> np.ndarray:
    """ln P(n, x) for n = 0..nmax (entry 0 set to ln P(1, x))."""
    out = np.empty(nmax + 1)
    for n in range(1, nmax + 1):
        out[n] = log_p(n, x)
    out[0] = out[1]
    return out


# --- ∫ x^n e^{δx} dx ---------------------------------------------------------


def _log_int_pow_exp_series(n: int, delta: float, hi: float) -> float:
    # ∫_0^hi x^n e^{δx} dx = Σ_t δ^t/t! hi^{n+t+1}/(n+t+1), δ > 0
    lh = math.log(hi)
    ld = math.log(delta)
    logs = []
    t = 0
    while True:
        lt = t * ld - math.lgamma(t + 1) + (n + t + 1) * lh - math.log(n + t + 1)
        logs.append(lt)
        if t > delta * hi and lt < max(logs) - 40.0:
            break
        t += 1
        if t > 100_000:
            raise ConvergenceError("power-exponential series did not converge")
    return float(logsumexp(logs))


def _log_int_pow_exp_asym(n: int, delta: float, hi: float) -> float:
    # e^{δh} Σ_t (-1)^t n!/(n-t)! h^{n-t} / δ^{t+1}, dominated by t = 0 when δh > n
    lh = math.log(hi)
    ld = math.log(delta)
    logs = [math.lgamma(n + 1) - math.lgamma(n - t + 1) + (n - t) * lh - (t + 1) * ld for t in range(n + 1)]
    signs = [(-1) ** t for t in range(n + 1)]
    # the antiderivative at 0 is (-1)^n n!/δ^{n+1}
    logs.append(math.lgamma(n + 1) - (n + 1) * ld - delta * hi)
    signs.append(-((-1) ** n))
    val, sgn = signed_lse(logs, signs)
    if sgn <= 0:
        return _log_int_pow_exp_series(n, delta, hi)
    return delta * hi + val


def _log_int_0_to(n: int, delta: float, hi: float) -> float:
    if hi <= 0:
        return NEG_INF
    if delta < 0:
        lam = -delta
        return math.lgamma(n + 1) - (n + 1) * math.log(lam) + log_p(n + 1, lam * hi)
    if delta == 0:
        return (n + 1) * math.log(hi) - math.log(n + 1)
    if delta * hi <= n + 40.0:
        return _log_int_pow_exp_series(n, delta, hi)
    return _log_int_pow_exp_asym(n, delta, hi)


def log_int_pow_exp(n: int, delta: float, lo: float, hi: float) -> float:
    """ln ∫_lo^hi x^n e^{δx} dx for integer n >= 0 and 0 <= lo <= hi <= ∞.

    ``hi = ∞`` requires δ < 0.
    """
    if not hi > lo:
        return NEG_INF
    lo = max(lo, 0.0)
    if delta < 0:
        lam = -delta
        base = math.lgamma(n + 1) - (n + 1) * math.log(lam)
        xl, xh = lam * lo, lam * hi
        if xl >= n + 1:
            return base + log_sub(log_q(n + 1, xl), log_q(n + 1, xh))
        return base + log_sub(log_p(n + 1, xh), log_p(n + 1, xl))
    if math.isinf(hi):
        raise ValueError("integral diverges for delta >= 0 on an infinite range")
    return log_sub(_log_int_0_to(n, delta, hi), _log_int_0_to(n, delta, lo))


# --- ∫ y^{ν-1} e^{-βy - c/y} dy ----------------------------------------------


def _log_quad_kint(nu: int, beta: float, c: float, lo: float, hi: float) -> float:
    """Numerical fallback for ln ∫_lo^hi y^{ν-1} e^{-βy-c/y} dy.

    With y = e^t the log-integrand h(t) = νt - βe^t - c e^{-t} is concave, so the
    mass sits in one window around the (clipped) peak; only that window, cut
    where h is 50 below its maximum, is handed to quad.
    """
    def h(t):
        return nu * t - beta * math.exp(t) - c * math.exp(-t)

    root = math.sqrt(nu * nu + 4.0 * beta * c)
    y_pk = (nu + root) / (2.0 * beta) if nu >= 0 else 2.0 * c / (root - nu)
    t_lo = math.log(lo) if lo > 0 else -math.inf
    t_hi = math.log(hi) if math.isfinite(hi) else math.inf
    t_pk = min(max(math.log(y_pk), t_lo), t_hi)
    h_pk = h(t_pk)

    def edge(direction, bound):
        step = 1e-3 * max(1.0, abs(t_pk))
        t = t_pk
        while True:
            nxt = t + direction * step
            if (direction < 0 and nxt <= bound) or (direction > 0 and nxt >= bound):
                return bound
            if h(nxt) < h_pk - 50.0:
                return nxt
            t = nxt
            step *= 2.0

    left = edge(-1, t_lo)
    right = edge(+1, t_hi)
    if not right > left:
        return NEG_INF

    def g(t):
        return math.exp(h(t) - h_pk)

    pts = [t_pk] if left < t_pk < right else None
    val = integrate.quad(g, left, right, points=pts, limit=400, epsabs=0.0, epsrel=1e-12)[0]
    return h_pk + safe_log(val)


class TruncatedBesselIntegrals:
    """ln ∫_0^U and ln ∫_U^∞ of y^{ν-1} e^{-βy-c/y} for integer ν in [nu_lo, nu_hi].

    The complete integral is 2 (c/β)^{ν/2} K_ν(2√(βc)); the part below U is the
    alternating u-series Σ (-β)^u/u! c^{ν+u} Γ[-ν-u, c/U] with the incomplete
    gamma of negative order written through Whittaker's W. When that series
    loses too many digits to cancellation the integral is done by quadrature.
    """

    CANCEL_LIMIT = math.log(1e7)

    def __init__(self, beta: float, c: float, upper: float, nu_lo: int, nu_hi: int, ctl: SeriesControl):
        self.beta, self.c, self.upper = beta, c, upper
        self.nu_lo, self.nu_hi = nu_lo, nu_hi
        self.ctl = ctl
        self.quad_fallbacks = 0
        nmax = max(abs(nu_lo), abs(nu_hi))
        self._lk = sf.log_bessel_k_int(nmax, 2.0 * math.sqrt(beta * c))
        n = nu_hi - nu_lo + 1
        self.log_full = np.empty(n)
        self.log_lower = np.empty(n)
        self.log_upper = np.empty(n)
        lcb = math.log(c) - math.log(beta)
        if math.isinf(upper):
            for idx in range(n):
                nu = nu_lo + idx
                self.log_full[idx] = math.log(2.0) + 0.5 * nu * lcb + self._lk[abs(nu)]
            self.log_lower[:] = self.log_full
            self.log_upper[:] = NEG_INF
            return
        x = c / upper
        # ln c^n Γ[-n, x] for every n the u-series can touch
        self._n_lo = nu_lo
        self._n_hi = nu_hi + ctl.u_max
        self._lJ = np.array([self._log_J(k, x) for k in range(self._n_lo, self._n_hi + 1)])
        for idx in range(n):
            nu = nu_lo + idx
            full = math.log(2.0) + 0.5 * nu * lcb + self._lk[abs(nu)]
            low = self._lower_series(nu)
            if low is None:
                self.quad_fallbacks += 1
                low = _log_quad_kint(nu, beta, c, 0.0, upper) if upper > 0 else NEG_INF
            up = log_sub(full, low)
            if up == NEG_INF or full - up > self.CANCEL_LIMIT:
                self.quad_fallbacks += 1
                up = _log_quad_kint(nu, beta, c, upper, math.inf)
            self.log_full[idx], self.log_lower[idx], self.log_upper[idx] = full, low, up

    def _log_J(self, n: int, x: float) -> float:
        # c^n Γ[-n, x],  Γ[-n, x] = x^{-(n+1)/2} e^{-x/2} W_{-(n+1)/2, -n/2}(x)
        if n < 0 and x < 1e-300:
            return NEG_INF
        lg = -0.5 * (n + 1) * math.log(x) - 0.5 * x + sf.log_whittaker_w(-0.5 * (n + 1), -0.5 * n, x)
        return n * math.log(self.c) + lg

    def _lower_series(self, nu: int):
        lb = math.log(self.beta)
        logs, signs = [], []
        bu = self.beta * self.upper
        for u in range(self.ctl.u_max):
            k = nu + u - self._n_lo
            lt = u * lb - math.lgamma(u + 1) + self._lJ[k]
            logs.append(lt)
            signs.append(-1.0 if u % 2 else 1.0)
            if u > bu and lt < max(logs) - 37.0:
                break
        else:
            if logs[-1] > max(logs) - 37.0:
                # not converged within u_max: hand over to quadrature
                return None
        val, sgn = signed_lse(logs, signs)
        if sgn <= 0 or max(logs) - val > self.CANCEL_LIMIT:
            return None
        return val

    def lower(self, nu: int) -> float:
        return self.log_lower[nu - self.nu_lo]

    def upper_part(self, nu: int) -> float:
        return self.log_upper[nu - self.nu_lo]
