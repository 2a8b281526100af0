"""Sweep step cap and complex-task rate and report the faster-agent and budget-split
quantities (threshold ratio, crossover ratios, scenario means) at each setting.

Used to check whether any calibration of the two free world parameters makes the
f>=4 threshold, the G18/G40 crossover, or the scenario ordering appear.

    python scripts/sensitivity.py [--seeds 10]
"""

import argparse
import itertools
import statistics
from dataclasses import replace

from coopex.sim_engine import BudgetConfig, GraphSpec, RunConfig, run_simulation


def fast_last(f):
    return (1.0,) * (5 - f) + (2.0,) * f


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--caps", type=float, nargs="*", default=[0.25, 0.5, 1.0], help="cap as a fraction of N^2")
    ap.add_argument("--rates", type=float, nargs="*", default=[0.0, 0.2, 0.5])
    args = ap.parse_args()

    def mean(cfg):
        return statistics.fmean(run_simulation(replace(cfg, seed=s)).expl_mean for s in range(args.seeds))

    print("cap  rate  thresh  g18(1,80)/(4,20)  g40(4,20)/(1,80)  scenarios S1..S5")
    for capf, rate in itertools.product(args.caps, args.rates):
        base = RunConfig(step_cap=int(capf * 100 * 100), complex_rate=rate)
        g18 = replace(base, graph=GraphSpec("g18"))
        g40 = replace(base, graph=GraphSpec("g40"))
        e0, e3, e4 = (mean(replace(g18, speeds=fast_last(f))) for f in (0, 3, 4))
        thresh = (e3 - e4) / (e0 - e3) if e0 != e3 else float("inf")
        a = mean(replace(g18, speeds=fast_last(1), budget=BudgetConfig(total=80)))
        b = mean(replace(g18, speeds=fast_last(4), budget=BudgetConfig(total=20)))
        c = mean(replace(g40, speeds=fast_last(4), budget=BudgetConfig(total=20)))
        d = mean(replace(g40, speeds=fast_last(1), budget=BudgetConfig(total=80)))
        scen = []
        for g in (g18, g40):
            scen.append([
                round(mean(replace(g, speeds=(1, 2, 3, 4, 5),
                                   budget=BudgetConfig("per-agent", f"scenario{k}", 100))), 3)
                for k in range(1, 6)
            ])
        # thresh > 1, both ratios <= 1 and decreasing scenarios would satisfy the claims
        print(f"{capf:<4} {rate:<5} {thresh:6.2f}  {a / b:16.3f}  {c / d:16.3f}  {scen[0]} {scen[1]}", flush=True)


if __name__ == "__main__":
    main()
