"""Regenerate the data behind every figure into results/ (CSV + metadata).

    python scripts/reproduce_figures.py [--trials N] [--workers N] [--only fig3,fig9]
"""

import argparse
from dataclasses import replace
from pathlib import Path

from crswipt.config import load_config, with_overrides
from crswipt.experiments import run
from crswipt.model import TargetRates

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"

# (config stem, command, extra rates to rerun with)
JOBS = [
    ("fig3_pu_op_vs_snr", "outage-sweep", (1 / 4, 1 / 3, 1 / 2)),
    ("fig4_su_op_vs_snr", "outage-sweep", (1 / 4, 1 / 3, 1 / 2)),
    ("fig5_pu_op_vs_mu", "outage-sweep", (1 / 4, 1 / 3, 1 / 2)),
    ("fig6_su_op_vs_mu", "outage-sweep", (1 / 4, 1 / 3, 1 / 2)),
    ("fig7_pu_op_vs_alpha_beta", "outage-sweep", None),
    ("fig8_mu_critical", "mu-critical", None),
    ("fig9_throughput_vs_snr", "metric-sweep", (1 / 4, 1 / 3, 1 / 2)),
    ("fig10_ee_vs_snr", "metric-sweep", (1 / 4, 1 / 3, 1 / 2)),
    ("table1", "outage-sweep", None),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int)
    ap.add_argument("--workers", type=int)
    ap.add_argument("--out", default=str(ROOT / "results"))
    ap.add_argument("--only", help="comma-separated config-name prefixes")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    only = args.only.split(",") if args.only else None
    for stem, cmd, rates in JOBS:
        if only and not any(stem.startswith(p) for p in only):
            continue
        cfg = with_overrides(load_config(CONFIGS / f"{stem}.ini"), trials=args.trials, workers=args.workers)
        for r in rates or (None,):
            c = cfg if r is None else replace(cfg, rates=TargetRates.uniform(r))
            name = stem if r is None else f"{stem}_r{round(1 / r)}"
            run(cmd, c, out / f"{name}.csv")
            print("wrote", out / f"{name}.csv")


if __name__ == "__main__":
    main()
