"""Run every named experiment and print a compact summary of each aggregate.

    python scripts/run_all_presets.py --out out/presets [--replications 20] [--full-scale]
"""

import argparse
import csv
import logging
import time

from coopex.harness import PRESET_NAMES, run_experiment


def summarize(path, limit=12):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    keys = [k for k in rows[0] if k not in ("preset", "metric", "mean", "stddev", "n")] if rows else []
    for r in rows[:limit]:
        labels = " ".join(f"{k}={r[k]}" for k in keys)
        print(f"    {labels:<28} {r['metric']:<18} {float(r['mean']):10.4f} +- {float(r['stddev']):.4f}")
    if len(rows) > limit:
        print(f"    ... {len(rows) - limit} more rows")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/presets")
    ap.add_argument("--replications", type=int)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--full-scale", action="store_true")
    ap.add_argument("--only", nargs="*", choices=PRESET_NAMES)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    for name in args.only or PRESET_NAMES:
        t0 = time.perf_counter()
        files = run_experiment(name, args.out, args.replications, args.seed, args.full_scale)
        print(f"{name}: {time.perf_counter() - t0:.1f}s -> {files['aggregate']}")
        summarize(files["aggregate"])


if __name__ == "__main__":
    main()
