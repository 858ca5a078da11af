import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from crswipt._numerics import (
    SeriesControl,
    TruncatedBesselIntegrals,
    gamma_cdf,
    gamma_sf,
    log_int_pow_exp,
    log_p_int_table,
    log_q_int_table,
    signed_lse,
)
from crswipt._wsum import GammaPair, prob_w_below
from crswipt.specialfn import ConvergenceError


@pytest.mark.parametrize("n,delta,lo,hi", [
    (0, -1.0, 0.0, math.inf), (3, -2.5, 0.1, 4.0), (10, -0.3, 5.0, 80.0),
    (4, 1.5, 0.0, 3.0), (25, 0.7, 1.0, 20.0), (2, 60.0, 0.0, 2.0), (0, 0.5, 2.0, 2.0),
])
def test_log_int_pow_exp_vs_mpmath(n, delta, lo, hi):
    got = log_int_pow_exp(n, delta, lo, hi)
    if hi <= lo:
        assert got == -math.inf
        return
    ref = mp.log(mp.quad(lambda x: x**n * mp.exp(delta * x), [lo, hi]))
    assert got == pytest.approx(float(ref), rel=1e-11, abs=1e-11)


@given(st.integers(1, 40), st.floats(1e-3, 80))
def test_pq_tables_complement(n, x):
    lp, lq = log_p_int_table(n, x), log_q_int_table(n, x)
    assert np.logaddexp(lp[n], lq[n]) == pytest.approx(0.0, abs=1e-12)
    assert math.exp(lq[n]) == pytest.approx(stats.gamma.sf(x, n), rel=1e-9, abs=1e-300)


def test_gamma_cdf_helpers():
    assert gamma_cdf(3, 2.0, 1.1) == pytest.approx(stats.gamma.cdf(1.1, 3, scale=0.5), rel=1e-13)
    assert gamma_sf(3, 2.0, 1.1) == pytest.approx(stats.gamma.sf(1.1, 3, scale=0.5), rel=1e-13)
    assert gamma_cdf(2, 1.0, math.inf) == 1.0 and gamma_sf(2, 1.0, 0.0) == 1.0


def test_signed_lse():
    val, sign = signed_lse([math.log(3.0), math.log(5.0)], [1.0, -1.0])
    assert sign == -1 and math.exp(val) == pytest.approx(2.0)


def _bessel_ref(nu, beta, c, lo, hi):
    # y = e^t keeps the integrand smooth; fine subdivision around the peak
    f = lambda t: mp.exp(nu * t - beta * mp.exp(t) - c * mp.exp(-t))
    t_lo = mp.log(lo) if lo > 0 else mp.log(c) - mp.log(1e4 + abs(nu) * 50)
    t_hi = mp.log(hi) if hi != mp.inf else mp.log((abs(nu) + 800) / beta)
    with mp.workdps(40):
        return float(mp.log(mp.quad(f, mp.linspace(t_lo, t_hi, 40))))


@pytest.mark.parametrize("beta,c,upper", [(1.0, 0.5, 2.0), (3.0, 40.0, 1.5), (0.5, 1e-3, 10.0), (2.0, 200.0, 50.0)])
def test_truncated_bessel_integrals(beta, c, upper):
    tb = TruncatedBesselIntegrals(beta, c, upper, -6, 4, SeriesControl())
    for nu in (-6, -1, 0, 1, 4):
        full = float(mp.log(2 * (c / beta) ** (nu / 2) * mp.besselk(nu, 2 * mp.sqrt(beta * c))))
        assert tb.log_full[nu + 6] == pytest.approx(full, rel=1e-12)
        assert tb.lower(nu) == pytest.approx(_bessel_ref(nu, beta, c, 0, upper), rel=1e-8, abs=1e-8)
        assert tb.upper_part(nu) == pytest.approx(_bessel_ref(nu, beta, c, upper, mp.inf), rel=1e-8, abs=1e-8)


def test_truncated_bessel_infinite_upper():
    tb = TruncatedBesselIntegrals(1.0, 2.0, math.inf, 0, 3, SeriesControl())
    assert np.all(tb.log_upper == -math.inf)
    assert np.array_equal(tb.log_lower, tb.log_full)


@pytest.mark.parametrize("m1,a,m2,b,x", [(3, 2.0, 2, 5.0, 0.7), (2, 7.0, 3, 1.5, 1.2), (1, 3.0, 1, 3.0, 0.4), (3, 6.0, 2, 2.0, 0.3)])
def test_prob_w_below_vs_quadrature(m1, a, m2, b, x):
    below, above, used = prob_w_below(GammaPair(m1, a, m2, b), x, SeriesControl())
    # Pr[X1 + X2 <= x] = ∫ F_2(x - t) f_1(t) dt
    ref = integrate.quad(lambda t: stats.gamma.pdf(t, m1, scale=1 / a) * stats.gamma.cdf(x - t, m2, scale=1 / b),
                         0, x, epsabs=0, epsrel=1e-13)[0]
    assert below == pytest.approx(ref, rel=1e-10)
    assert below + above == pytest.approx(1.0, abs=1e-9)
    assert used >= 1


def test_series_cap_is_enforced():
    # with a >> b the index-s series needs far more than a handful of terms
    pair = GammaPair(3, 40.0, 2, 1.0)
    with pytest.raises(ConvergenceError):
        prob_w_below(pair, 0.3, SeriesControl(s_max=2))
    lo, _, used = prob_w_below(pair, 0.3, SeriesControl().truncated(2))
    assert used == 3 and 0 <= lo <= 1


def test_series_control_validation():
    with pytest.raises(ValueError):
        SeriesControl(s_max=0)
    with pytest.raises(ValueError):
        SeriesControl(rel_stop=0)
