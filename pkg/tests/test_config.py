from pathlib import Path

import pytest

from crswipt.config import ConfigError, default_config, describe, load_config, parse_config, with_overrides
from crswipt.model import dbm_to_watts

CONFIGS = sorted((Path(__file__).parent.parent / "configs").glob("*.ini"))


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.stem)
def test_shipped_configs_parse(path):
    cfg = load_config(path)
    assert cfg.sweep.values
    for v in cfg.sweep.values[:2]:
        cfg.at(v)


def test_defaults():
    cfg = default_config()
    assert cfg.swipt.alpha == 0.2 and cfg.swipt.beta == 0.2
    assert cfg.sweep.values == (20.0,)
    assert cfg.sim.trials == 1_000_000


def test_fractions_and_ranges():
    cfg = parse_config("[rates]\nr = 1/3\n[sweep]\nvariable = snr_db\nstart = 0\nstop = 10\nstep = 2.5\n")
    assert cfg.rates.of("a") == pytest.approx(1 / 3)
    assert cfg.sweep.values == (0.0, 2.5, 5.0, 7.5, 10.0)


def test_sweep_applies_variable():
    cfg = parse_config("[sweep]\nvariable = p_th_dbm\nvalues = -20, 0\n")
    assert cfg.at(0.0).swipt.p_th == pytest.approx(dbm_to_watts(0.0))
    cfg = parse_config("[sweep]\nvariable = rate\nvalues = 1/4\n")
    assert cfg.at(0.25).rates.of("2") == 0.25


@pytest.mark.parametrize("text,line,key", [
    ("[swipt]\nalfa = 0.2\n", 2, "alfa"),
    ("[swipt]\nalpha = 0.2\n\nbeta = lots\n", 4, "beta"),
    ("[sim]\ntrials = 0\n", 2, "trials"),
    ("[sweep]\nvariable = colour\n", 2, "variable"),
])
def test_errors_carry_line_and_key(text, line, key):
    with pytest.raises(ConfigError) as ei:
        parse_config(text)
    assert ei.value.line == line and ei.value.key == key
    assert str(ei.value).startswith(f"line {line}: ")


@pytest.mark.parametrize("text", [
    "[nonsense]\nx = 1\n",
    "[swipt]\nalpha = 1.5\n",
    "[swipt]\nalpha = 0.2\nalpha = 0.3\n",
    "[sweep]\nvalues = 1\nstart = 0\n",
    "[sweep]\nvariable = mu\n",
    "not an ini file",
])
def test_bad_configs_rejected(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_missing_file():
    with pytest.raises((ConfigError, OSError)):
        load_config("/nonexistent/x.ini")


def test_overrides_and_describe():
    cfg = with_overrides(default_config(), trials=10, seed=3, workers=2, s_max=5)
    assert (cfg.sim.trials, cfg.sim.seed, cfg.sim.workers, cfg.series.s_max) == (10, 3, 2, 5)
    d = describe(cfg)
    assert d["sim"]["trials"] == 10
    assert describe(cfg) == d
