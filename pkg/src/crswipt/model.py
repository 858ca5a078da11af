"""Network, SWIPT and power descriptions plus the instantaneous SNR expressions.

Node labels: primary users ``"a"``, ``"b"``; secondary users ``"1"``, ``"2"``.
A link is an unordered pair of labels; channels are reciprocal.

Block duration is normalised to 1, so harvested energies are average powers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

PUS = ("a", "b")
SUS = ("1", "2")
NODES = PUS + SUS


def other_pu(j: str) -> str:
    return "b" if j == "a" else "a"


def other_su(i: str) -> str:
    return "2" if i == "1" else "1"


def link_key(u: str, v: str) -> tuple[str, str]:
    if u == v:
        raise ValueError(f"a link needs two distinct nodes, got {u!r} twice")
    return tuple(sorted((str(u), str(v))))


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(w: float) -> float:
    return 10.0 * math.log10(w) + 30.0


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class NetworkConfig:
    coords: Mapping[str, tuple[float, float]]
    path_loss_exp: float = 3.0
    fading_m: Mapping[tuple[str, str], float] = field(default_factory=dict)
    mean_power_override: Mapping[tuple[str, str], float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "fading_m", {link_key(*k): float(v) for k, v in self.fading_m.items()})
        object.__setattr__(
            self, "mean_power_override", {link_key(*k): float(v) for k, v in self.mean_power_override.items()}
        )
        for k, m in self.fading_m.items():
            if m < 0.5:
                raise ValueError(f"fading severity for {k} must be >= 0.5, got {m}")
        for k, om in self.mean_power_override.items():
            if not om > 0:
                raise ValueError(f"mean power override for {k} must be > 0, got {om}")

    def distance(self, u: str, v: str) -> float:
        for n in (u, v):
            if n not in self.coords:
                raise KeyError(f"unknown node {n!r}")
        (x1, y1), (x2, y2) = self.coords[u], self.coords[v]
        d = math.hypot(x1 - x2, y1 - y2)
        if not d > 0:
            raise ValueError(f"nodes {u!r} and {v!r} coincide")
        return d

    def m(self, u: str, v: str) -> float:
        key = link_key(u, v)
        if key not in self.fading_m:
            raise KeyError(f"no fading severity configured for link {key}")
        return self.fading_m[key]

    def omega(self, u: str, v: str) -> float:
        return link_mean_power(self, (u, v))


def link_mean_power(cfg: NetworkConfig, link: tuple[str, str]) -> float:
    """Ω for a link: the override if present, else d^-ν."""
    key = link_key(*link)
    for n in key:
        if n not in cfg.coords:
            raise KeyError(f"unknown node {n!r}")
    if key in cfg.mean_power_override:
        return cfg.mean_power_override[key]
    return cfg.distance(*key) ** (-cfg.path_loss_exp)


@dataclass(frozen=True)
class SwiptParams:
    alpha: float
    beta: float
    mu: Mapping[str, float]
    eta: Mapping[str, float]
    p_th: float
    block_T: float = 1.0

    def __post_init__(self):
        if not 0 <= self.alpha < 1:
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")
        if not 0 <= self.beta < 1:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta}")
        for i in SUS:
            if not 0 < self.mu[i] < 1:
                raise ValueError(f"mu[{i}] must lie in (0, 1), got {self.mu[i]}")
            if not 0 < self.eta[i] < 1:
                raise ValueError(f"eta[{i}] must lie in (0, 1), got {self.eta[i]}")
        if not self.p_th > 0:
            raise ValueError("p_th must be positive")

    def delta(self, i: str) -> float:
        """Δ_i = 3 η α / (1 - α) + β η."""
        eta = self.eta[i]
        return 3.0 * eta * self.alpha / (1.0 - self.alpha) + self.beta * eta

    def with_(self, **kw) -> "SwiptParams":
        vals = dict(alpha=self.alpha, beta=self.beta, mu=dict(self.mu), eta=dict(self.eta), p_th=self.p_th)
        if "mu" in kw and not isinstance(kw["mu"], Mapping):
            kw["mu"] = {i: float(kw["mu"]) for i in SUS}
        vals.update(kw)
        return SwiptParams(**vals)


@dataclass(frozen=True)
class PowerParams:
    p: Mapping[str, float]
    sigma2: Mapping[str, float]
    sigma2_conv: Mapping[str, float]

    def __post_init__(self):
        for j in PUS:
            if not self.p[j] > 0:
                raise ValueError(f"transmit power of PU {j} must be > 0")
        for n in NODES:
            if not self.sigma2[n] > 0:
                raise ValueError(f"noise variance at {n} must be > 0")
        for i in SUS:
            if not self.sigma2_conv[i] > 0:
                raise ValueError(f"conversion noise at SU {i} must be > 0")

    @property
    def p_a(self) -> float:
        return self.p["a"]

    @property
    def p_b(self) -> float:
        return self.p["b"]

    @classmethod
    def from_snr(cls, snr_db: float, noise_w: float) -> "PowerParams":
        """P_a = P_b = SNR·σ² with one σ² for every node and conversion stage."""
        p = db_to_linear(snr_db) * noise_w
        return cls(
            p={"a": p, "b": p},
            sigma2={n: noise_w for n in NODES},
            sigma2_conv={i: noise_w for i in SUS},
        )

    def scaled(self, factor: float) -> "PowerParams":
        return PowerParams(
            p={k: v * factor for k, v in self.p.items()},
            sigma2={k: v * factor for k, v in self.sigma2.items()},
            sigma2_conv={k: v * factor for k, v in self.sigma2_conv.items()},
        )


@dataclass(frozen=True)
class TargetRates:
    r_a: float
    r_b: float
    r_1: float
    r_2: float

    def __post_init__(self):
        for name in ("r_a", "r_b", "r_1", "r_2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def uniform(cls, r: float) -> "TargetRates":
        return cls(r, r, r, r)

    def of(self, node: str) -> float:
        return getattr(self, f"r_{node}")


def target_snr(rate: float, alpha: float = 0.0, mode: str = "relayed") -> float:
    """SNR threshold for a target rate: 2^(3r/(1-α)) - 1 relayed, 2^(2r) - 1 direct."""
    if not 0 <= alpha < 1:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    if rate < 0:
        raise ValueError("rate must be non-negative")
    if mode == "relayed":
        return 2.0 ** (3.0 * rate / (1.0 - alpha)) - 1.0
    if mode == "direct":
        return 2.0 ** (2.0 * rate) - 1.0
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class DerivedCoefficients:
    """Shorthand coefficients of the SNR expressions for relay ``i``.

    The primary-link group refers to destination PU ``j`` (source ``ĵ``), the
    secondary group to the link i → î. Threshold-dependent quantities use
    ``gamma``.
    """

    i: str
    j: str
    gamma: float
    mu: float
    p_j: float
    p_jhat: float
    p_th: float
    sigma2_ihat: float
    delta_i: float
    eps_ij: float
    omega_ij: float
    omega_ij_hat: float
    phi_ij: float
    Phi_ij: float
    Phi_ij_hat: float
    varphi_jj: float
    zeta_i: float
    xi_i: float
    Psi_i: float
    C_i: float
    D_ihat: float
    Xi: float
    T1: float
    T2: float
    iota1: float
    iota2: float
    iota3: float
    iota4: float


def _ratio(num, den):
    if den > 0:
        return num / den
    return math.inf if num > 0 else (math.nan if num == 0 else -math.inf)


def derive_coefficients(
    swipt: SwiptParams, power: PowerParams, gamma_threshold: float, direction: tuple[str, str]
) -> DerivedCoefficients:
    """Every coefficient of the lin/sat SNR forms for relay ``i`` and destination PU ``j``.

    Degenerate signs (Ξ ≤ 0, non-positive ι denominators) are kept as they are;
    ι values whose denominator is not positive come back as ``inf``.
    """
    i, j = direction
    jh = other_pu(j)
    ih = other_su(i)
    g = gamma_threshold
    mu = swipt.mu[i]
    beta = swipt.beta
    p_th = swipt.p_th
    dlt = swipt.delta(i)
    pj, pjh = power.p[j], power.p[jh]
    s2i = power.sigma2[i]
    s2c = power.sigma2_conv[i]
    s2j = power.sigma2[j]
    s2ih = power.sigma2[ih]

    eps = mu * dlt * s2i + mu * dlt * s2c / (1.0 - beta)
    om = (1.0 - mu) * dlt * pj
    omh = (1.0 - mu) * dlt * pjh
    phi = mu * dlt * p_th * s2i + mu * dlt * p_th * s2c / (1.0 - beta) + pj * s2j
    Phi = (1.0 - mu) * dlt * p_th * pj
    Phih = (1.0 - mu) * dlt * p_th * pjh
    varphi = pjh * s2j
    zeta = (1.0 - mu) * dlt
    xi = mu * dlt * (s2i + s2c / (1.0 - beta))
    Psi = (1.0 - mu) * (1.0 - beta) * dlt * p_th
    C = mu * dlt * p_th * ((1.0 - beta) * s2i + s2c)
    D = (1.0 - beta) * s2ih

    base = dict(
        i=i, j=j, mu=mu, p_j=pj, p_jhat=pjh, p_th=p_th, sigma2_ihat=s2ih,
        delta_i=dlt, eps_ij=eps, omega_ij=om, omega_ij_hat=omh, phi_ij=phi, Phi_ij=Phi,
        Phi_ij_hat=Phih, varphi_jj=varphi, zeta_i=zeta, xi_i=xi, Psi_i=Psi, C_i=C, D_ihat=D,
    )
    return DerivedCoefficients(gamma=g, **base, **_threshold_fields(base, g))


def _threshold_fields(c: Mapping, g: float) -> dict:
    pj, pjh, p_th = c["p_j"], c["p_jhat"], c["p_th"]
    Xi = c["mu"] * c["delta_i"] * pjh - c["omega_ij_hat"] * g
    sat_den = c["mu"] * c["delta_i"] * p_th * pjh - c["Phi_ij_hat"] * g
    T1 = _ratio(c["phi_ij"] * g, sat_den)
    T2 = _ratio(c["Phi_ij"] * g, sat_den)
    if Xi > 0:
        iota1 = (p_th * Xi - c["eps_ij"] * g * pjh) / (c["omega_ij"] * g * pjh + pj * Xi)
    else:
        iota1 = -math.inf
    if math.isfinite(T1) and math.isfinite(T2):
        iota2 = (T2 * p_th + T1 * pj) / (pj + T2 * pjh)
    else:
        iota2 = math.inf
    iota3 = _ratio(g * c["sigma2_ihat"], c["zeta_i"] * p_th - c["xi_i"] * g)
    iota4 = _ratio(c["D_ihat"] * g * p_th, c["Psi_i"] * p_th - c["C_i"] * g)
    return dict(Xi=Xi, T1=T1, T2=T2, iota1=iota1, iota2=iota2, iota3=iota3, iota4=iota4)


def with_threshold(co: DerivedCoefficients, gamma_threshold: float) -> DerivedCoefficients:
    """The same coefficients re-evaluated at another SNR threshold."""
    if gamma_threshold == co.gamma:
        return co
    base = {k: v for k, v in vars(co).items() if k not in ("gamma", "Xi", "T1", "T2", "iota1", "iota2", "iota3", "iota4")}
    return DerivedCoefficients(gamma=gamma_threshold, **base, **_threshold_fields(base, gamma_threshold))


def harvested_tx_power(sum_rx, swipt: SwiptParams, su: str):
    """Transmit power of an SU from its received power: Δ_i·min(sum_rx, P_th)."""
    return swipt.delta(su) * np.minimum(sum_rx, swipt.p_th)


def _safe_div(num, den):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    out = np.zeros(np.broadcast(num, den).shape)
    np.divide(num, den, out=out, where=num > 0)
    return out if out.ndim else float(out)


def snr_primary(
    h_j_i,
    h_jh_i,
    swipt: SwiptParams,
    power: PowerParams,
    direction: tuple[str, str],
    exact_af_gain: bool = False,
    include_bc_noise: bool = False,
):
    """End-to-end SNR at PU ``j`` of the copy relayed by SU ``i``.

    ``h_j_i`` and ``h_jh_i`` are channel power gains |h_{j,i}|², |h_{ĵ,i}|²;
    reciprocity gives |h_{i,j}|² = |h_{j,i}|². The defaults reproduce the
    closed forms: the AF gain drops σ_i², and BC-phase noise at PU ``j`` is
    kept only in the saturated branch.
    """
    i, j = direction
    jh = other_pu(j)
    x = np.asarray(h_j_i, dtype=float)
    y = np.asarray(h_jh_i, dtype=float)
    pj, pjh = power.p[j], power.p[jh]
    w = pj * x + pjh * y
    sat = w > swipt.p_th
    p_i = harvested_tx_power(w, swipt, i)
    mu, beta = swipt.mu[i], swipt.beta
    s2i = power.sigma2[i]
    gain = w + s2i if exact_af_gain else w
    signal = _safe_div(mu * p_i * pjh * x * y, gain)
    interf = (1.0 - mu) * p_i * x
    relay_noise = _safe_div(mu * p_i * (s2i + power.sigma2_conv[i] / (1.0 - beta)) * x, gain)
    bc = np.where(sat | include_bc_noise, power.sigma2[j], 0.0)
    return _safe_div(signal, interf + relay_noise + bc)


def snr_secondary(
    h_a_i,
    h_b_i,
    h_i_ih,
    swipt: SwiptParams,
    power: PowerParams,
    i: str,
    exact_af_gain: bool = False,
):
    """SNR at SU î of the signal broadcast by SU ``i`` (primary interference removed)."""
    ih = other_su(i)
    xa = np.asarray(h_a_i, dtype=float)
    xb = np.asarray(h_b_i, dtype=float)
    z = np.asarray(h_i_ih, dtype=float)
    w = power.p["a"] * xa + power.p["b"] * xb
    p_i = harvested_tx_power(w, swipt, i)
    mu, beta = swipt.mu[i], swipt.beta
    s2i = power.sigma2[i]
    gain = w + s2i if exact_af_gain else w
    signal = (1.0 - mu) * p_i * z
    relay_noise = _safe_div(mu * p_i * (s2i + power.sigma2_conv[i] / (1.0 - beta)) * z, gain)
    return _safe_div(signal, relay_noise + power.sigma2[ih])


# --- reference scenario ---------------------------------------------------

DEFAULT_COORDS = {"a": (0.0, 0.0), "b": (4.0, 0.0), "1": (2.0, 0.0), "2": (2.0, 2.0)}


def default_network(m_a: float = 3, m_b: float = 2, m_12: float = 1, m_ab: float = 2, nu: float = 3.0) -> NetworkConfig:
    fading = {
        ("a", "1"): m_a, ("a", "2"): m_a,
        ("b", "1"): m_b, ("b", "2"): m_b,
        ("1", "2"): m_12, ("a", "b"): m_ab,
    }
    return NetworkConfig(coords=dict(DEFAULT_COORDS), path_loss_exp=nu, fading_m=fading)


def default_swipt(alpha=0.2, beta=0.2, mu=0.8, eta=0.7, p_th_dbm=-10.0) -> SwiptParams:
    return SwiptParams(
        alpha=alpha, beta=beta, mu={i: mu for i in SUS}, eta={i: eta for i in SUS}, p_th=dbm_to_watts(p_th_dbm)
    )


def default_power(snr_db: float, noise_dbm: float = -60.0) -> PowerParams:
    return PowerParams.from_snr(snr_db, dbm_to_watts(noise_dbm))
