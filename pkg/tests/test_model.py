import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crswipt.model import (
    NetworkConfig,
    PowerParams,
    SwiptParams,
    TargetRates,
    db_to_linear,
    dbm_to_watts,
    derive_coefficients,
    link_key,
    linear_to_db,
    default_network,
    default_power,
    default_swipt,
    snr_primary,
    snr_secondary,
    target_snr,
    watts_to_dbm,
    with_threshold,
)


@given(st.floats(-200, 200))
def test_db_round_trip(x):
    assert linear_to_db(db_to_linear(x)) == pytest.approx(x, abs=1e-12)
    assert watts_to_dbm(dbm_to_watts(x)) == pytest.approx(x, abs=1e-12)


def test_dbm_reference_points():
    assert dbm_to_watts(30.0) == pytest.approx(1.0)
    assert dbm_to_watts(-10.0) == pytest.approx(1e-4)
    assert dbm_to_watts(-60.0) == pytest.approx(1e-9)


def test_network_geometry():
    net = default_network()
    assert net.distance("a", "b") == 4.0
    assert net.omega("a", "1") == pytest.approx(2.0**-3)
    assert net.omega("2", "b") == pytest.approx(8.0**-1.5)
    assert net.m("1", "a") == 3 and net.m("b", "2") == 2 and net.m("2", "1") == 1
    assert link_key("a", "2") == link_key("2", "a") == ("2", "a")


def test_network_validation():
    with pytest.raises(ValueError):
        NetworkConfig(coords={"a": (0, 0), "b": (0, 0)}, fading_m={("a", "b"): 1}).omega("a", "b")
    with pytest.raises(ValueError):
        NetworkConfig(coords={"a": (0, 0), "b": (1, 0)}, fading_m={("a", "b"): 0.3})
    with pytest.raises(KeyError):
        default_network().m("a", "c")
    net = NetworkConfig(coords={"a": (0, 0), "b": (1, 0)}, mean_power_override={("b", "a"): 0.5})
    assert net.omega("a", "b") == 0.5


def test_swipt_validation_and_delta():
    sw = default_swipt()
    assert sw.delta("1") == pytest.approx(3 * 0.7 * 0.2 / 0.8 + 0.2 * 0.7)
    for bad in (dict(alpha=1.0), dict(beta=-0.1), dict(mu=1.0), dict(mu=0.0)):
        with pytest.raises(ValueError):
            sw.with_(**bad)
    assert sw.with_(mu=0.6).mu == {"1": 0.6, "2": 0.6}


def test_target_snr():
    assert target_snr(1 / 3, 0.2) == pytest.approx(2**1.25 - 1)
    assert target_snr(1 / 3, 0.0, "direct") == pytest.approx(2 ** (2 / 3) - 1)
    with pytest.raises(ValueError):
        target_snr(1 / 3, 1.0)
    with pytest.raises(ValueError):
        target_snr(1 / 3, 0.2, "mystery")


def test_power_and_rates():
    pw = default_power(20.0)
    assert pw.p_a == pytest.approx(1e-7) and pw.sigma2["1"] == pytest.approx(1e-9)
    assert pw.scaled(10).p_b == pytest.approx(1e-6)
    with pytest.raises(ValueError):
        PowerParams(p={"a": 0, "b": 1}, sigma2=pw.sigma2, sigma2_conv=pw.sigma2_conv)
    with pytest.raises(ValueError):
        TargetRates(1, 1, 0, 1)
    assert TargetRates.uniform(0.25).of("2") == 0.25


def _draws(seed, n, snr):
    rng = np.random.default_rng(seed)
    net, pw = default_network(), default_power(snr)
    g = lambda u, v: rng.gamma(net.m(u, v), net.omega(u, v) / net.m(u, v), n)
    return net, pw, g


@pytest.mark.parametrize("snr", [15.0, 30.0, 45.0])
@pytest.mark.parametrize("i,j", [("1", "a"), ("2", "b")])
def test_primary_snr_matches_coefficient_forms(snr, i, j):
    # lin: γ_lin < γ  <=>  Ξ y < γ (ω x + ε)
    net, pw, g = _draws(1, 20000, snr)
    sw = default_swipt()
    jh = "b" if j == "a" else "a"
    x, y = g(j, i), g(jh, i)
    gam = target_snr(1 / 3, sw.alpha)
    co = derive_coefficients(sw, pw, gam, (i, j))
    snr_v = snr_primary(x, y, sw, pw, (i, j))
    w = pw.p[j] * x + pw.p[jh] * y
    lin = w <= sw.p_th
    pred_lin = co.Xi * y < gam * (co.omega_ij * x + co.eps_ij)
    assert np.array_equal((snr_v < gam)[lin], pred_lin[lin])
    # sat, multiplied through by W: μΔP_th P_ĵ x y < γ (Φ x² + Φ̂ x y + φ x + ϕ y)
    lhs = sw.mu[i] * co.delta_i * sw.p_th * pw.p[jh] * x * y
    rhs = gam * (co.Phi_ij * x * x + co.Phi_ij_hat * x * y + co.phi_ij * x + co.varphi_jj * y)
    assert np.array_equal((snr_v < gam)[~lin], (lhs < rhs)[~lin])


def test_secondary_snr_matches_coefficient_forms():
    net, pw, g = _draws(2, 20000, 30.0)
    sw = default_swipt()
    xa, xb, z = g("a", "2"), g("b", "2"), g("2", "1")
    gam = target_snr(1 / 3, sw.alpha)
    co = derive_coefficients(sw, pw, gam, ("2", "a"))
    s = snr_secondary(xa, xb, z, sw, pw, "2")
    w = pw.p["a"] * xa + pw.p["b"] * xb
    lin = w <= sw.p_th
    pred_lin = co.zeta_i * w * z < gam * (co.xi_i * z + co.sigma2_ihat)
    pred_sat = co.Psi_i * w * z < gam * (co.C_i * z + co.D_ihat * w)
    assert np.array_equal((s < gam)[lin], pred_lin[lin])
    assert np.array_equal((s < gam)[~lin], pred_sat[~lin])


def test_exact_gain_and_bc_noise_lower_the_snr():
    net, pw, g = _draws(3, 5000, 20.0)
    sw = default_swipt()
    x, y = g("a", "1"), g("b", "1")
    base = snr_primary(x, y, sw, pw, ("1", "a"))
    full = snr_primary(x, y, sw, pw, ("1", "a"), exact_af_gain=True, include_bc_noise=True)
    assert np.all(full <= base)


def test_zero_channel_gives_zero_snr():
    sw, pw = default_swipt(), default_power(20.0)
    assert snr_primary(0.0, 0.3, sw, pw, ("1", "a")) == 0.0
    assert snr_secondary(0.0, 0.0, 1.0, sw, pw, "1") == 0.0


def test_threshold_fields():
    sw, pw = default_swipt(), default_power(20.0)
    co = derive_coefficients(sw, pw, 1.0, ("1", "a"))
    assert co.Xi == pytest.approx(sw.mu["1"] * co.delta_i * pw.p["b"] - co.omega_ij_hat)
    co2 = with_threshold(co, 2.0)
    assert co2.gamma == 2.0 and co2.eps_ij == co.eps_ij
    assert co2.Xi < co.Xi
    edge = derive_coefficients(sw.with_(mu=0.5), pw, 1.0 / 0.5 - 1.0 + 0.5, ("1", "a"))
    assert edge.Xi <= 0 and edge.iota1 == -math.inf
