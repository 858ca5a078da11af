"""Command-line entry point: ``crswipt <command> --config FILE --out FILE``.

Exit status: 0 success, 1 configuration error, 2 convergence failure,
3 validation failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import experiments
from ._numerics import ConvergenceError
from .config import ConfigError, default_config, describe, load_config, with_overrides
from .optimizer import ObjectiveEvaluationError

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_VALIDATION = 0, 1, 2, 3
VALIDATE_COLUMNS = ["criterion", "check", "status", "measured", "tolerance", "detail"]

log = logging.getLogger("crswipt")


def _u64(s):
    v = int(s, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _pos_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _criteria(s):
    try:
        out = {int(t) for t in s.split(",") if t.strip()}
    except ValueError:
        raise argparse.ArgumentTypeError("expected a comma-separated list of criterion numbers") from None
    if not out or not out <= set(range(1, 9)):
        raise argparse.ArgumentTypeError("criteria are numbered 1 to 8")
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI experiment file (defaults if omitted)")
    common.add_argument("--out", metavar="PATH", required=True, help="output CSV; metadata goes to PATH.meta.json")
    common.add_argument("--trials", type=_pos_int, metavar="N", help="Monte Carlo trials per point")
    common.add_argument("--seed", type=_u64, metavar="U64", help="Monte Carlo seed")
    common.add_argument("--workers", type=_pos_int, metavar="N", help="worker processes")
    common.add_argument("--series-smax", type=_pos_int, metavar="N", help="largest index of the s-series")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="crswipt", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("outage-sweep", parents=[common], help="analytic and simulated OP of all four nodes")
    m = sub.add_parser("metric-sweep", parents=[common], help="system throughput or energy efficiency")
    m.add_argument("--metric", choices=("throughput", "ee"), help="overrides [sweep] metric")
    sub.add_parser("mu-critical", parents=[common], help="critical spectrum-sharing factor per sweep point")
    sub.add_parser("optimize", parents=[common], help="PSO over (alpha, beta, mu)")
    v = sub.add_parser("validate", parents=[common], help="run the acceptance checks")
    v.add_argument("--only", type=_criteria, metavar="LIST", help="comma-separated criterion numbers")
    v.add_argument("--tolerance-scale", type=float, default=1.0, metavar="F", help="multiply every tolerance by F")
    return p


def _validate(args, cfg) -> int:
    from .validation import run_checks

    checks = run_checks(only=args.only, scale=args.tolerance_scale, trials=cfg.sim.trials, seed=cfg.sim.seed,
                        workers=cfg.sim.workers)
    rows = []
    for c in checks:
        print(c.line())
        rows.append({"criterion": c.criterion, "check": c.name, "status": "pass" if c.passed else "fail",
                     "measured": c.measured, "tolerance": c.tolerance, "detail": c.detail})
    meta = {"command": "validate", "config": describe(cfg), "only": sorted(args.only or range(1, 9)),
            "tolerance_scale": args.tolerance_scale}
    experiments.write_table(args.out, VALIDATE_COLUMNS, rows, meta)
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VALIDATION


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config) if args.config else default_config()
        cfg = with_overrides(cfg, trials=args.trials, seed=args.seed, workers=args.workers, s_max=args.series_smax)
    except (ConfigError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "validate":
            return _validate(args, cfg)
        rows = experiments.run(args.command, cfg, args.out, metric=getattr(args, "metric", None))
    except ConvergenceError as e:
        print(f"convergence failure: {e}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except ObjectiveEvaluationError as e:
        print(f"objective evaluation failed: {e}", file=sys.stderr)
        return EXIT_CONVERGENCE if isinstance(e.__cause__, ConvergenceError) else EXIT_CONFIG
    except ValueError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"cannot write output: {e}", file=sys.stderr)
        return EXIT_CONFIG
    bad = [r for r in rows if r.get("status", "ok") != "ok"]
    for r in bad:
        log.warning("point %s: %s", r.get("sweep_value"), r["status"])
    log.info("wrote %d rows to %s", len(rows), args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
