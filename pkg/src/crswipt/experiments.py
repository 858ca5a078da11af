"""Sweep runners behind the command-line interface.

Each runner writes a CSV file plus ``<out>.meta.json`` holding the resolved
configuration. Floats are written as ``%.17e``, so outputs are byte-identical
across reruns with the same configuration, seed and worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import __version__, analytic
from ._numerics import ConvergenceError
from .analytic import NoFeasibleMuError
from .config import ExperimentConfig, describe
from .model import PUS, SUS
from .montecarlo import SimSpec, simulate
from .optimizer import OptimizationContext, ObjectiveEvaluationError, pso_maximize

_NODE_TAG = {"a": "pu_a", "b": "pu_b", "1": "su_1", "2": "su_2"}

OUTAGE_COLUMNS = (
    ["sweep_value"]
    + [f"op_{_NODE_TAG[n]}_analytic" for n in PUS + SUS]
    + [f"op_{_NODE_TAG[n]}_mc" for n in PUS + SUS]
    + [f"stderr_{_NODE_TAG[n]}" for n in PUS + SUS]
    + ["series_terms_used", "status"]
)
METRIC_COLUMNS = ["sweep_value", "metric_analytic", "metric_mc", "status"]
MU_COLUMNS = [
    "sweep_value", "mu_star", "feasibility_edge", "op_direct_pu_a", "op_direct_pu_b",
    "op_pu_a_at_mu_star", "op_pu_b_at_mu_star", "status",
]
OPT_COLUMNS = ["iteration", "alpha", "beta", "mu", "objective"]


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17e}"


def write_table(path, columns, rows, meta: dict):
    """CSV with a header row and ``\\n`` line ends, plus the JSON sidecar."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row[c]) for c in columns])
    path = Path(path)
    path.write_text(buf.getvalue())
    sidecar = dict(meta)
    sidecar["columns"] = list(columns)
    sidecar["version"] = __version__
    Path(str(path) + ".meta.json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")


def _map(fn, args, workers):
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, args))
    return [fn(a) for a in args]


def _point_sim(cfg: ExperimentConfig) -> SimSpec:
    # points run in parallel already, so each simulation is serial
    return replace(cfg.sim, workers=1) if cfg.sim.workers > 1 and len(cfg.sweep.values) > 1 else cfg.sim


def _outage_point(args):
    cfg, value = args
    sc = cfg.at(value)
    row = {"sweep_value": value, "status": "ok", "series_terms_used": 0}
    try:
        rep = analytic.outage_report(sc.network, sc.swipt, sc.power, sc.rates, sc.series)
        for n in PUS + SUS:
            row[f"op_{_NODE_TAG[n]}_analytic"] = rep.op[n]
        row["series_terms_used"] = max(rep.terms.values())
    except ConvergenceError as e:
        row["status"] = f"convergence failure: {e}"
        for n in PUS + SUS:
            row[f"op_{_NODE_TAG[n]}_analytic"] = math.nan
    if cfg.sim_enabled:
        res = simulate(sc.network, sc.swipt, sc.power, sc.rates, _point_sim(cfg))
        for n in PUS + SUS:
            row[f"op_{_NODE_TAG[n]}_mc"] = res.op[n]
            row[f"stderr_{_NODE_TAG[n]}"] = res.stderr[n]
    else:
        for n in PUS + SUS:
            row[f"op_{_NODE_TAG[n]}_mc"] = math.nan
            row[f"stderr_{_NODE_TAG[n]}"] = math.nan
    return row


def outage_sweep(cfg: ExperimentConfig) -> list[dict]:
    return _map(_outage_point, [(cfg, v) for v in cfg.sweep.values], cfg.sim.workers)


def _metric_point(args):
    cfg, value, metric = args
    sc = cfg.at(value)
    row = {"sweep_value": value, "status": "ok", "metric_analytic": math.nan, "metric_mc": math.nan}
    try:
        fn = analytic.throughput if metric == "throughput" else analytic.energy_efficiency
        row["metric_analytic"] = fn(sc.network, sc.swipt, sc.power, sc.rates, sc.series)
    except ConvergenceError as e:
        row["status"] = f"convergence failure: {e}"
    except ValueError as e:
        row["status"] = f"undefined: {e}"
    if cfg.sim_enabled:
        res = simulate(sc.network, sc.swipt, sc.power, sc.rates, _point_sim(cfg))
        row["metric_mc"] = res.throughput if metric == "throughput" else res.energy_efficiency
    return row


def metric_sweep(cfg: ExperimentConfig, metric: str | None = None) -> list[dict]:
    metric = metric or cfg.sweep.metric
    if metric not in ("throughput", "ee"):
        raise ValueError(f"unknown metric {metric!r}")
    return _map(_metric_point, [(cfg, v, metric) for v in cfg.sweep.values], cfg.sim.workers)


def _mu_point(args):
    cfg, value = args
    sc = cfg.at(value)
    row = {"sweep_value": value, "status": "ok"}
    row["feasibility_edge"] = max(analytic.feasibility_edge(sc.swipt, sc.rates, j) for j in PUS)
    for j in PUS:
        o = "b" if j == "a" else "a"
        row[f"op_direct_{_NODE_TAG[j]}"] = analytic.outage_direct(
            (j, o), sc.power, (sc.network.m(j, o), sc.network.omega(j, o)), sc.rates.of(j)
        )
    try:
        mu = analytic.critical_mu(sc.network, sc.swipt, sc.power, sc.rates, sc.series)
        row["mu_star"] = mu
        sw = sc.swipt.with_(mu=mu)
        for j in PUS:
            row[f"op_{_NODE_TAG[j]}_at_mu_star"] = analytic.outage_primary(j, sc.network, sw, sc.power, sc.rates, sc.series)
    except NoFeasibleMuError as e:
        row["status"] = f"no feasible mu: {e}"
    except ConvergenceError as e:
        row["status"] = f"convergence failure: {e}"
    for k in ("mu_star", "op_pu_a_at_mu_star", "op_pu_b_at_mu_star"):
        row.setdefault(k, math.nan)
    return row


def mu_critical(cfg: ExperimentConfig) -> list[dict]:
    if cfg.sweep.variable == "mu":
        raise ValueError("mu-critical solves for mu; sweep another variable")
    return _map(_mu_point, [(cfg, v) for v in cfg.sweep.values], cfg.sim.workers)


def optimize(cfg: ExperimentConfig):
    sc = cfg.base()
    ctx = OptimizationContext(sc.network, sc.swipt, sc.power, sc.rates, sc.series)
    res = pso_maximize(cfg.objective, cfg.pso, ctx)
    rows = [
        {"iteration": k, "alpha": p[0], "beta": p[1], "mu": p[2], "objective": v}
        for k, (p, v) in enumerate(zip(res.position_trace, res.trace))
    ]
    return res, rows


def run(command: str, cfg: ExperimentConfig, out, metric: str | None = None):
    """Run one subcommand and write its output files. Returns the rows."""
    meta = {"command": command, "config": describe(cfg)}
    if command == "outage-sweep":
        rows = outage_sweep(cfg)
        write_table(out, OUTAGE_COLUMNS, rows, meta)
    elif command == "metric-sweep":
        m = metric or cfg.sweep.metric
        rows = metric_sweep(cfg, m)
        meta["metric"] = m
        write_table(out, METRIC_COLUMNS, rows, meta)
    elif command == "mu-critical":
        rows = mu_critical(cfg)
        write_table(out, MU_COLUMNS, rows, meta)
    elif command == "optimize":
        res, rows = optimize(cfg)
        meta["best"] = {"alpha": res.best_position[0], "beta": res.best_position[1], "mu": res.best_position[2],
                        "objective": res.best_value, "evaluations": res.evaluations}
        write_table(out, OPT_COLUMNS, rows, meta)
    else:
        raise ValueError(f"unknown command {command!r}")
    return rows


__all__ = ["run", "outage_sweep", "metric_sweep", "mu_critical", "optimize", "write_table", "fmt",
           "ObjectiveEvaluationError"]
