"""PSO over (alpha, beta, mu) at 20 dB for each target rate.

The full swarm (40 particles, 200 iterations) takes about 15 minutes per rate
on one core; --population/--iterations trade accuracy for time.
"""

import argparse

from crswipt import analytic
from crswipt.model import TargetRates, default_network, default_power, default_swipt
from crswipt.optimizer import OptimizationContext, PsoConfig, pso_maximize


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--population", type=int, default=40)
    ap.add_argument("--iterations", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--objective", choices=("throughput", "ee"), default="throughput")
    args = ap.parse_args()
    cfg, sw, pw = default_network(), default_swipt(), default_power(20.0)
    pso = PsoConfig(population=args.population, iterations=args.iterations, seed=args.seed)
    print(f"{'rate':>6} {'alpha':>8} {'beta':>8} {'mu':>8} {'optimum':>10} {'typical':>10}")
    for r in (1 / 2, 1 / 3, 1 / 4, 1 / 5, 1 / 6):
        rt = TargetRates.uniform(r)
        res = pso_maximize(args.objective, pso, OptimizationContext(cfg, sw, pw, rt))
        f = analytic.throughput if args.objective == "throughput" else analytic.energy_efficiency
        a, b, m = res.best_position
        print(f"1/{round(1 / r):<4} {a:8.4f} {b:8.4f} {m:8.4f} {res.best_value:10.5g} {f(cfg, sw, pw, rt):10.5g}")


if __name__ == "__main__":
    main()
