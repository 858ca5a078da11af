"""Real-valued special functions used by the closed-form outage expressions.

Covers the complete and incomplete gamma functions, the modified Bessel
function of the second kind and the Whittaker W function. Everything here is
a pure function of its arguments.

Incomplete gamma values are computed in log space with the usual split:
power series for ``x < a + 1`` and a Lentz continued fraction otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.special as sc

__all__ = [
    "FnEvalOptions",
    "ConvergenceError",
    "log_gamma",
    "lower_incomplete_gamma",
    "upper_incomplete_gamma",
    "regularized_lower_gamma",
    "regularized_upper_gamma",
    "log_lower_incomplete_gamma",
    "log_upper_incomplete_gamma",
    "log_upper_gamma_any",
    "bessel_k",
    "log_bessel_k_int",
    "whittaker_w",
    "log_whittaker_w",
]

_EULER = 0.57721566490153286061
_TINY = 1e-300


class ConvergenceError(ArithmeticError):
    """An internal series or continued fraction hit its iteration cap."""


@dataclass(frozen=True)
class FnEvalOptions:
    rel_tol: float = 1e-15
    max_terms: int = 10_000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


DEFAULT_OPTIONS = FnEvalOptions()


def log_gamma(x: float) -> float:
    """ln Γ(x) for x > 0."""
    if not x > 0:
        raise ValueError(f"log_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


# --- incomplete gamma -------------------------------------------------------


def _series_log_p(a, x, opts):
    # ln P(a, x) from P = x^a e^-x / Γ(a+1) * Σ x^n / ((a+1)...(a+n))
    term = 1.0
    total = 1.0
    ap = a
    for _ in range(opts.max_terms):
        ap += 1.0
        term *= x / ap
        total += term
        if term < total * opts.rel_tol:
            return -x + a * math.log(x) - math.lgamma(a + 1.0) + math.log(total)
    raise ConvergenceError(f"incomplete gamma series did not converge (a={a}, x={x})")


def _cf_log_q_unnormalized(a, x, opts):
    # ln( Γ(a, x) e^x x^-a ) by modified Lentz; valid for any real a when x > 0
    # and converging quickly for x >= a + 1.
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b if b != 0 else 1.0 / _TINY
    h = d
    for i in range(1, opts.max_terms + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < opts.rel_tol:
            return math.log(h)
    raise ConvergenceError(f"incomplete gamma continued fraction did not converge (a={a}, x={x})")


def _check_ax(a, x):
    if not a > 0:
        raise ValueError(f"incomplete gamma requires a > 0, got a={a!r}")
    if not x >= 0:
        raise ValueError(f"incomplete gamma requires x >= 0, got x={x!r}")


def _log_pq(a, x, opts):
    """(ln P, ln Q) for a > 0, x > 0."""
    if x < a + 1.0:
        lp = _series_log_p(a, x, opts)
        return lp, math.log1p(-math.exp(lp)) if lp < 0 else -math.inf
    lq = -x + a * math.log(x) - math.lgamma(a) + _cf_log_q_unnormalized(a, x, opts)
    lq = min(lq, 0.0)
    return (math.log1p(-math.exp(lq)) if lq < 0 else -math.inf), lq


def regularized_lower_gamma(a: float, x: float, opts: FnEvalOptions = DEFAULT_OPTIONS) -> float:
    """P(a, x) = Υ[a, x] / Γ[a]."""
    _check_ax(a, x)
    if x == 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    return math.exp(_log_pq(a, x, opts)[0])


def regularized_upper_gamma(a: float, x: float, opts: FnEvalOptions = DEFAULT_OPTIONS) -> float:
    """Q(a, x) = Γ[a, x] / Γ[a]."""
    _check_ax(a, x)
    if x == 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    return math.exp(_log_pq(a, x, opts)[1])


def log_lower_incomplete_gamma(a: float, x: float, opts: FnEvalOptions = DEFAULT_OPTIONS) -> float:
    _check_ax(a, x)
    if x == 0:
        return -math.inf
    if math.isinf(x):
        return math.lgamma(a)
    return _log_pq(a, x, opts)[0] + math.lgamma(a)


def log_upper_incomplete_gamma(a: float, x: float, opts: FnEvalOptions = DEFAULT_OPTIONS) -> float:
    _check_ax(a, x)
    if x == 0:
        return math.lgamma(a)
    if math.isinf(x):
        return -math.inf
    return _log_pq(a, x, opts)[1] + math.lgamma(a)


def lower_incomplete_gamma(a: float, x: float, opts: FnEvalOptions = DEFAULT_OPTIONS) -> float:
    """Υ[a, x] = ∫_0^x t^(a-1) e^(-t) dt."""
    return math.exp(log_lower_incomplete_gamma(a, x, opts))


def upper_incomplete_gamma(a: float, x: float, opts: FnEvalOptions = DEFAULT_OPTIONS) -> float:
    """Γ[a, x] = ∫_x^∞ t^(a-1) e^(-t) dt."""
    return math.exp(log_upper_incomplete_gamma(a, x, opts))


def _e1_series(x, opts):
    total = 0.0
    term = 1.0
    for k in range(1, opts.max_terms + 1):
        term *= -x / k
        contrib = term / k
        total += contrib
        if abs(contrib) < abs(total) * opts.rel_tol + _TINY:
            return -_EULER - math.log(x) - total
    raise ConvergenceError(f"E1 series did not converge (x={x})")


def log_upper_gamma_any(a: float, x: float, opts: FnEvalOptions = DEFAULT_OPTIONS) -> float:
    """ln Γ[a, x] for any real order a and x > 0 (the value is always positive)."""
    if not x > 0:
        raise ValueError(f"requires x > 0, got x={x!r}")
    if a > 0:
        return log_upper_incomplete_gamma(a, x, opts)
    if x >= 1.0:
        return -x + a * math.log(x) + _cf_log_q_unnormalized(a, x, opts)
    # small x: climb to a non-negative order, then recur back down with
    # Γ(a, x) = (Γ(a+1, x) - x^a e^-x) / a
    n = math.ceil(-a)
    top = a + n
    if top == 0:
        g = _e1_series(x, opts)
    else:
        g = upper_incomplete_gamma(top, x, opts)
    for step in range(n, 0, -1):
        order = a + step - 1
        g = (g - x**order * math.exp(-x)) / order
    if not g > 0:
        raise ArithmeticError(f"upper gamma recursion lost precision (a={a}, x={x})")
    return math.log(g)


# --- modified Bessel function of the second kind ---------------------------


def bessel_k(v: float, x: float) -> float:
    """K_v(x) for real order v and x > 0.

    Backed by the Cephes/AMOS routines in scipy. Negative orders are folded
    onto |v| so K_{-v} and K_v return the identical float.
    """
    if not x > 0:
        raise ValueError(f"bessel_k requires x > 0, got x={x!r}")
    val = float(sc.kv(abs(v), x))
    if math.isinf(val):
        raise OverflowError(f"K_{v}({x}) overflows double precision")
    return val


def log_bessel_k_int(nmax: int, x: float) -> np.ndarray:
    """ln K_n(x) for n = 0..nmax via forward recurrence on the ratio K_{n+1}/K_n.

    Stays finite where K_n itself overflows (large n, small x).
    """
    if not x > 0:
        raise ValueError(f"requires x > 0, got x={x!r}")
    out = np.empty(nmax + 1)
    k0 = float(sc.kve(0, x))
    k1 = float(sc.kve(1, x))
    out[0] = math.log(k0) - x
    if nmax == 0:
        return out
    ratio = k1 / k0
    out[1] = out[0] + math.log(ratio)
    for n in range(1, nmax):
        ratio = 1.0 / ratio + 2.0 * n / x
        out[n + 1] = out[n] + math.log(ratio)
    return out


# --- Whittaker W via Tricomi U ----------------------------------------------


def _is_nonpos_int(a):
    return a <= 0 and float(a).is_integer()


def _hyperu_polynomial(n, b, x):
    # U(-n, b, x) = (-1)^n Σ_s C(n,s) (b+s)_{n-s} (-x)^s
    total = 0.0
    for s in range(n + 1):
        total += math.comb(n, s) * float(sc.poch(b + s, n - s)) * (-x) ** s
    return (-1) ** n * total


def _hyperu_asymptotic(a, b, x, opts):
    # U ~ x^-a Σ_k (a)_k (a-b+1)_k / k! (-1/x)^k; None if it does not settle
    term = 1.0
    total = 1.0
    c = a - b + 1.0
    prev = math.inf
    for k in range(opts.max_terms):
        term *= -(a + k) * (c + k) / ((k + 1) * x)
        if term == 0.0:
            return x**-a * total
        if abs(term) > prev:
            return None
        total += term
        if abs(term) < 1e-16 * abs(total):
            return x**-a * total
        prev = abs(term)
    return None


def _log_hyperu_a1(b, x, opts):
    # U(1, b, x) = x^(1-b) e^x Γ(b-1, x)
    return (1.0 - b) * math.log(x) + x + log_upper_gamma_any(b - 1.0, x, opts)


def _hyperu(a, b, x, opts):
    if a == 1.0:
        return math.exp(_log_hyperu_a1(b, x, opts))
    a2 = a - b + 1.0
    if a2 == 1.0:
        return x ** (1.0 - b) * math.exp(_log_hyperu_a1(2.0 - b, x, opts))
    if _is_nonpos_int(a):
        return _hyperu_polynomial(int(-a), b, x)
    if _is_nonpos_int(a2):
        return x ** (1.0 - b) * _hyperu_polynomial(int(-a2), 2.0 - b, x)
    if x > 30.0:
        val = _hyperu_asymptotic(a, b, x, opts)
        if val is not None:
            return val
    import mpmath

    with mpmath.workdps(30):
        return float(mpmath.hyperu(a, b, x))


def whittaker_w(u: float, v: float, x: float, opts: FnEvalOptions = DEFAULT_OPTIONS) -> float:
    """Whittaker function W_{u,v}(x) = e^(-x/2) x^(v+1/2) U(1/2+v-u, 1+2v, x)."""
    if not x > 0:
        raise ValueError(f"whittaker_w requires x > 0, got x={x!r}")
    a = 0.5 + v - u
    b = 1.0 + 2.0 * v
    if a == 1.0 or a - b + 1.0 == 1.0:
        lw = log_whittaker_w(u, v, x, opts)
        return math.exp(lw)
    return math.exp(-0.5 * x) * x ** (v + 0.5) * _hyperu(a, b, x, opts)


def log_whittaker_w(u: float, v: float, x: float, opts: FnEvalOptions = DEFAULT_OPTIONS) -> float:
    """ln W_{u,v}(x) where W is positive; survives arguments where W underflows."""
    if not x > 0:
        raise ValueError(f"log_whittaker_w requires x > 0, got x={x!r}")
    a = 0.5 + v - u
    b = 1.0 + 2.0 * v
    pre = -0.5 * x + (v + 0.5) * math.log(x)
    if a == 1.0:
        return pre + _log_hyperu_a1(b, x, opts)
    if a - b + 1.0 == 1.0:
        return pre + (1.0 - b) * math.log(x) + _log_hyperu_a1(2.0 - b, x, opts)
    val = _hyperu(a, b, x, opts)
    if not val > 0:
        raise ValueError("log_whittaker_w needs a positive W value")
    return pre + math.log(val)
