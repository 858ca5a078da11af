"""INI experiment configuration.

Every section is optional and falls back to the default scenario. Unknown
sections or keys are errors, reported with their line number.

    [network]  coord_a = 0, 0   (coord_b, coord_1, coord_2)
               path_loss_exp = 3
               m_a, m_b, m_12, m_ab; per-link m_a1, m_a2, m_b1, m_b2
               omega_<link> overrides d^-ν, e.g. omega_ab = 0.0156
    [swipt]    alpha, beta, mu (or mu_1, mu_2), eta (or eta_1, eta_2), p_th_dbm
    [power]    snr_db or p_w; noise_dbm, noise_pu_dbm, noise_su_dbm, conv_noise_dbm
    [rates]    r (all nodes) or r_a, r_b, r_1, r_2
    [sweep]    variable, start/stop/step or values = v1, v2, ...; metric
    [sim]      enabled, trials, seed, exact_af_gain, include_bc_noise, workers
    [series]   s_max, u_max, rel_stop, abs_stop, strict
    [pso]      objective, population, iterations, w, c1, c2, seed, vmax_fraction,
               alpha_lo, alpha_hi, beta_lo, beta_hi, mu_lo, mu_hi
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from ._numerics import SeriesControl
from .model import (
    DEFAULT_COORDS,
    NODES,
    PUS,
    SUS,
    NetworkConfig,
    PowerParams,
    SwiptParams,
    TargetRates,
    db_to_linear,
    dbm_to_watts,
)
from .montecarlo import SimSpec
from .optimizer import PsoConfig

SWEEP_VARIABLES = ("snr_db", "mu", "alpha", "beta", "p_th_dbm", "rate", "s_max")
METRICS = ("throughput", "ee")
OBJECTIVES = ("throughput", "ee")

_LINK_M = {"m_a1": ("a", "1"), "m_a2": ("a", "2"), "m_b1": ("b", "1"), "m_b2": ("b", "2"), "m_12": ("1", "2"), "m_ab": ("a", "b")}
_OMEGA = {f"omega_{a}{b}": (a, b) for a, b in ["a1", "a2", "b1", "b2", "12", "ab"]}

KEYS = {
    "network": {"coord_a", "coord_b", "coord_1", "coord_2", "path_loss_exp", "m_a", "m_b", *_LINK_M, *_OMEGA},
    "swipt": {"alpha", "beta", "mu", "mu_1", "mu_2", "eta", "eta_1", "eta_2", "p_th_dbm"},
    "power": {"snr_db", "p_w", "noise_dbm", "noise_pu_dbm", "noise_su_dbm", "conv_noise_dbm"},
    "rates": {"r", "r_a", "r_b", "r_1", "r_2"},
    "sweep": {"variable", "start", "stop", "step", "values", "metric"},
    "sim": {"enabled", "trials", "seed", "exact_af_gain", "include_bc_noise", "workers"},
    "series": {"s_max", "u_max", "rel_stop", "abs_stop", "strict"},
    "pso": {"objective", "population", "iterations", "w", "c1", "c2", "seed", "vmax_fraction",
            "alpha_lo", "alpha_hi", "beta_lo", "beta_hi", "mu_lo", "mu_hi"},
}


class ConfigError(ValueError):
    def __init__(self, msg, section=None, key=None, line=None):
        where = ""
        if section:
            where = f"[{section}]" + (f" {key}" if key else "")
            if line:
                where = f"line {line}: " + where
            where += ": "
        super().__init__(where + msg)
        self.section, self.key, self.line = section, key, line


@dataclass(frozen=True)
class PowerSpec:
    snr_db: float | None = 20.0
    p_w: float | None = None
    noise_pu_dbm: float = -60.0
    noise_su_dbm: float = -60.0
    conv_noise_dbm: float = -60.0

    def build(self, snr_db: float | None = None) -> PowerParams:
        npu, nsu, nc = (dbm_to_watts(x) for x in (self.noise_pu_dbm, self.noise_su_dbm, self.conv_noise_dbm))
        snr = self.snr_db if snr_db is None else snr_db
        if snr is not None:
            # SNR is referred to the PU noise floor
            p = db_to_linear(snr) * npu
        else:
            p = self.p_w
        return PowerParams(
            p={"a": p, "b": p},
            sigma2={n: (npu if n in PUS else nsu) for n in NODES},
            sigma2_conv={i: nc for i in SUS},
        )


@dataclass(frozen=True)
class SweepSpec:
    variable: str = "snr_db"
    values: tuple[float, ...] = (20.0,)
    metric: str = "throughput"


@dataclass(frozen=True)
class Scenario:
    network: NetworkConfig
    swipt: SwiptParams
    power: PowerParams
    rates: TargetRates
    series: SeriesControl


@dataclass(frozen=True)
class ExperimentConfig:
    network: NetworkConfig
    swipt: SwiptParams
    power: PowerSpec
    rates: TargetRates
    sweep: SweepSpec = SweepSpec()
    sim: SimSpec = SimSpec()
    sim_enabled: bool = True
    series: SeriesControl = SeriesControl()
    pso: PsoConfig = PsoConfig()
    objective: str = "throughput"
    resolved: dict = field(default_factory=dict, compare=False)

    def base(self) -> Scenario:
        return Scenario(self.network, self.swipt, self.power.build(), self.rates, self.series)

    def at(self, value: float) -> Scenario:
        """The scenario with the sweep variable set to ``value``."""
        v = self.sweep.variable
        sc = self.base()
        if v == "snr_db":
            return replace(sc, power=self.power.build(snr_db=value))
        if v == "mu":
            return replace(sc, swipt=self.swipt.with_(mu=value))
        if v == "alpha":
            return replace(sc, swipt=self.swipt.with_(alpha=value))
        if v == "beta":
            return replace(sc, swipt=self.swipt.with_(beta=value))
        if v == "p_th_dbm":
            return replace(sc, swipt=self.swipt.with_(p_th=dbm_to_watts(value)))
        if v == "rate":
            return replace(sc, rates=TargetRates.uniform(value))
        if v == "s_max":
            return replace(sc, series=self.series.truncated(int(round(value))))
        raise ConfigError(f"unknown sweep variable {v!r}", "sweep", "variable")


# --- parsing -------------------------------------------------------------------


def _line_index(text: str) -> dict:
    out, sec = {}, None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        m = re.match(r"\[([^\]]+)\]", line)
        if m:
            sec = m.group(1).strip().lower()
            out.setdefault((sec, None), n)
            continue
        m = re.match(r"([^=:;#\s][^=:]*?)\s*[=:]", line)
        if m and sec:
            out.setdefault((sec, m.group(1).strip().lower()), n)
    return out


class _Reader:
    def __init__(self, cp: configparser.ConfigParser, lines: dict):
        self.cp, self.lines, self.used = cp, lines, {}

    def err(self, msg, sec, key=None):
        return ConfigError(msg, sec, key, self.lines.get((sec, key)) or self.lines.get((sec, None)))

    def wrap(self, exc, sec):
        """Turn a validation error from a parameter class into a located ConfigError."""
        if isinstance(exc, ConfigError):
            return exc
        msg = str(exc)
        # those classes name the offending field first, e.g. "trials must be >= 1"
        head = re.split(r"[\s,]", msg, maxsplit=1)[0].lower()
        key = head if self.has(sec, head) else None
        return self.err(msg, sec, key)

    def has(self, sec, key):
        return self.cp.has_option(sec, key)

    def raw(self, sec, key):
        v = self.cp.get(sec, key).strip()
        self.used.setdefault(sec, {})[key] = v
        return v

    def num(self, sec, key, default=None, kind=float):
        if not self.has(sec, key):
            return default
        v = self.raw(sec, key)
        try:
            x = _to_float(v) if kind is float else int(v, 0)
        except ValueError:
            raise self.err(f"expected a number, got {v!r}", sec, key) from None
        if kind is float and not math.isfinite(x):
            raise self.err(f"value must be finite, got {v!r}", sec, key)
        return x

    def flag(self, sec, key, default):
        if not self.has(sec, key):
            return default
        v = self.raw(sec, key).lower()
        if v in ("1", "true", "yes", "on"):
            return True
        if v in ("0", "false", "no", "off"):
            return False
        raise self.err(f"expected a boolean, got {v!r}", sec, key)

    def floats(self, sec, key):
        v = self.raw(sec, key)
        try:
            return tuple(_to_float(t) for t in v.split(",") if t.strip())
        except ValueError:
            raise self.err(f"expected comma-separated numbers, got {v!r}", sec, key) from None

    def word(self, sec, key, default, allowed):
        if not self.has(sec, key):
            return default
        v = self.raw(sec, key).lower()
        if v not in allowed:
            raise self.err(f"must be one of {', '.join(allowed)}; got {v!r}", sec, key)
        return v


def _to_float(v: str) -> float:
    # accepts plain floats and fractions such as 1/3
    v = v.strip()
    return float(Fraction(v)) if "/" in v else float(v)


def _range(start, stop, step):
    if not step > 0:
        raise ValueError("step must be positive")
    if stop < start:
        raise ValueError("stop must not be below start")
    n = int(math.floor((stop - start) / step + 1e-9))
    return tuple(round(start + k * step, 12) for k in range(n + 1))


def _network(r: _Reader) -> NetworkConfig:
    s = "network"
    coords = dict(DEFAULT_COORDS)
    for n in NODES:
        k = f"coord_{n}"
        if r.has(s, k):
            xy = r.floats(s, k)
            if len(xy) != 2:
                raise r.err("expected 'x, y'", s, k)
            coords[n] = xy
    fading = {("a", "1"): 3.0, ("a", "2"): 3.0, ("b", "1"): 2.0, ("b", "2"): 2.0, ("1", "2"): 1.0, ("a", "b"): 2.0}
    for key, pu in (("m_a", "a"), ("m_b", "b")):
        m = r.num(s, key)
        if m is not None:
            fading[(pu, "1")] = fading[(pu, "2")] = m
    for key, link in _LINK_M.items():
        m = r.num(s, key)
        if m is not None:
            fading[link] = m
    omega = {}
    for key, link in _OMEGA.items():
        om = r.num(s, key)
        if om is not None:
            omega[link] = om
    nu = r.num(s, "path_loss_exp", 3.0)
    try:
        cfg = NetworkConfig(coords=coords, path_loss_exp=nu, fading_m=fading, mean_power_override=omega)
        for u, v in fading:
            cfg.omega(u, v)
    except (ValueError, KeyError) as e:
        raise r.wrap(e, s) from None
    return cfg


def _swipt(r: _Reader) -> SwiptParams:
    s = "swipt"
    mu = r.num(s, "mu", 0.8)
    eta = r.num(s, "eta", 0.7)
    mus = {i: r.num(s, f"mu_{i}", mu) for i in SUS}
    etas = {i: r.num(s, f"eta_{i}", eta) for i in SUS}
    try:
        return SwiptParams(
            alpha=r.num(s, "alpha", 0.2), beta=r.num(s, "beta", 0.2), mu=mus, eta=etas,
            p_th=dbm_to_watts(r.num(s, "p_th_dbm", -10.0)),
        )
    except ValueError as e:
        raise r.wrap(e, s) from None


def _power(r: _Reader) -> PowerSpec:
    s = "power"
    snr = r.num(s, "snr_db")
    pw = r.num(s, "p_w")
    if snr is not None and pw is not None:
        raise r.err("give either snr_db or p_w, not both", s, "p_w")
    if pw is not None and not pw > 0:
        raise r.err("p_w must be positive", s, "p_w")
    if snr is None and pw is None:
        snr = 20.0
    noise = r.num(s, "noise_dbm", -60.0)
    nsu = r.num(s, "noise_su_dbm", noise)
    return PowerSpec(snr_db=snr, p_w=pw, noise_pu_dbm=r.num(s, "noise_pu_dbm", noise), noise_su_dbm=nsu,
                     conv_noise_dbm=r.num(s, "conv_noise_dbm", nsu))


def _rates(r: _Reader) -> TargetRates:
    s = "rates"
    base = r.num(s, "r", 1.0 / 3.0)
    try:
        return TargetRates(*(r.num(s, f"r_{n}", base) for n in NODES))
    except ValueError as e:
        raise r.wrap(e, s) from None


def _sweep(r: _Reader) -> SweepSpec:
    s = "sweep"
    var = r.word(s, "variable", "snr_db", SWEEP_VARIABLES)
    metric = r.word(s, "metric", "throughput", METRICS)
    has_range = any(r.has(s, k) for k in ("start", "stop", "step"))
    if r.has(s, "values"):
        if has_range:
            raise r.err("give either values or start/stop/step", s, "values")
        vals = r.floats(s, "values")
        if not vals:
            raise r.err("empty list", s, "values")
    elif has_range:
        missing = [k for k in ("start", "stop", "step") if not r.has(s, k)]
        if missing:
            raise r.err(f"missing {', '.join(missing)}", s)
        try:
            vals = _range(r.num(s, "start"), r.num(s, "stop"), r.num(s, "step"))
        except ValueError as e:
            raise r.err(str(e), s, "step") from None
    else:
        vals = (20.0,) if var == "snr_db" else ()
        if not vals:
            raise r.err(f"sweep over {var} needs values or start/stop/step", s)
    return SweepSpec(var, vals, metric)


def _sim(r: _Reader) -> tuple[SimSpec, bool]:
    s = "sim"
    try:
        spec = SimSpec(
            trials=r.num(s, "trials", 1_000_000, int), seed=r.num(s, "seed", 0, int),
            exact_af_gain=r.flag(s, "exact_af_gain", False), include_bc_noise=r.flag(s, "include_bc_noise", False),
            workers=r.num(s, "workers", 1, int),
        )
    except ValueError as e:
        raise r.wrap(e, s) from None
    return spec, r.flag(s, "enabled", True)


def _series(r: _Reader) -> SeriesControl:
    s = "series"
    d = SeriesControl()
    try:
        return SeriesControl(
            s_max=r.num(s, "s_max", d.s_max, int), u_max=r.num(s, "u_max", d.u_max, int),
            rel_stop=r.num(s, "rel_stop", d.rel_stop), abs_stop=r.num(s, "abs_stop", d.abs_stop),
            strict=r.flag(s, "strict", d.strict),
        )
    except ValueError as e:
        raise r.wrap(e, s) from None


def _pso(r: _Reader) -> tuple[PsoConfig, str]:
    s = "pso"
    d = PsoConfig()
    (alo, ahi), (blo, bhi), (mlo, mhi) = d.bounds
    bounds = (
        (r.num(s, "alpha_lo", alo), r.num(s, "alpha_hi", ahi)),
        (r.num(s, "beta_lo", blo), r.num(s, "beta_hi", bhi)),
        (r.num(s, "mu_lo", mlo), r.num(s, "mu_hi", mhi)),
    )
    try:
        cfg = PsoConfig(
            population=r.num(s, "population", d.population, int), iterations=r.num(s, "iterations", d.iterations, int),
            w=r.num(s, "w", d.w), c1=r.num(s, "c1", d.c1), c2=r.num(s, "c2", d.c2), bounds=bounds,
            seed=r.num(s, "seed", d.seed, int), vmax_fraction=r.num(s, "vmax_fraction", d.vmax_fraction),
        )
    except ValueError as e:
        raise r.wrap(e, s) from None
    return cfg, r.word(s, "objective", "throughput", OBJECTIVES)


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    cp.optionxform = str.lower
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"malformed config: {e}") from None
    r = _Reader(cp, _line_index(text))
    for sec in cp.sections():
        if sec not in KEYS:
            raise r.err(f"unknown section (expected one of {', '.join(KEYS)})", sec)
        for key in cp.options(sec):
            if key not in KEYS[sec]:
                raise r.err("unknown key", sec, key)
    sim, enabled = _sim(r)
    pso, objective = _pso(r)
    return ExperimentConfig(
        network=_network(r), swipt=_swipt(r), power=_power(r), rates=_rates(r), sweep=_sweep(r),
        sim=sim, sim_enabled=enabled, series=_series(r), pso=pso, objective=objective, resolved=r.used,
    )


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    return parse_config(text)


def default_config() -> ExperimentConfig:
    return parse_config("")


def with_overrides(cfg: ExperimentConfig, trials=None, seed=None, workers=None, s_max=None) -> ExperimentConfig:
    """Apply the command-line overrides."""
    sim = cfg.sim
    if trials is not None or seed is not None or workers is not None:
        sim = SimSpec(
            trials=sim.trials if trials is None else trials, seed=sim.seed if seed is None else seed,
            exact_af_gain=sim.exact_af_gain, include_bc_noise=sim.include_bc_noise,
            workers=sim.workers if workers is None else workers,
        )
    series = cfg.series if s_max is None else replace(cfg.series, s_max=s_max)
    return replace(cfg, sim=sim, series=series)


def describe(cfg: ExperimentConfig) -> dict:
    """Fully resolved configuration, for the sidecar metadata file."""
    net = cfg.network
    return {
        "network": {
            "coords": {n: list(net.coords[n]) for n in NODES},
            "path_loss_exp": net.path_loss_exp,
            "fading_m": {"".join(k): v for k, v in sorted(net.fading_m.items())},
            "omega": {"".join(k): net.omega(*k) for k in sorted(net.fading_m)},
        },
        "swipt": {"alpha": cfg.swipt.alpha, "beta": cfg.swipt.beta, "mu": dict(cfg.swipt.mu),
                  "eta": dict(cfg.swipt.eta), "p_th_w": cfg.swipt.p_th},
        "power": {"snr_db": cfg.power.snr_db, "p_w": cfg.power.p_w, "noise_pu_dbm": cfg.power.noise_pu_dbm,
                  "noise_su_dbm": cfg.power.noise_su_dbm, "conv_noise_dbm": cfg.power.conv_noise_dbm},
        "rates": {n: cfg.rates.of(n) for n in NODES},
        "sweep": {"variable": cfg.sweep.variable, "values": list(cfg.sweep.values), "metric": cfg.sweep.metric},
        "sim": {"enabled": cfg.sim_enabled, "trials": cfg.sim.trials, "seed": cfg.sim.seed,
                "exact_af_gain": cfg.sim.exact_af_gain, "include_bc_noise": cfg.sim.include_bc_noise,
                "workers": cfg.sim.workers},
        "series": {"s_max": cfg.series.s_max, "u_max": cfg.series.u_max, "rel_stop": cfg.series.rel_stop,
                   "abs_stop": cfg.series.abs_stop, "strict": cfg.series.strict},
        "pso": {"objective": cfg.objective, "population": cfg.pso.population, "iterations": cfg.pso.iterations,
                "w": cfg.pso.w, "c1": cfg.pso.c1, "c2": cfg.pso.c2, "seed": cfg.pso.seed,
                "vmax_fraction": cfg.pso.vmax_fraction, "bounds": [list(b) for b in cfg.pso.bounds]},
    }
