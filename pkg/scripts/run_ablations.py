#!/usr/bin/env python3
"""Run every sweep on the standard 20-scene suite and write CSVs.

Usage: python scripts/run_ablations.py [--out DIR] [--noise 2] [--erosion 1]
"""

import argparse
from pathlib import Path

from sesam.ablate import (
    results_csv,
    sweep_point_count,
    sweep_samplers,
    sweep_selection,
    sweep_thresholds,
)
from sesam.refine import RefinementConfig
from sesam.scenes import build_suite


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="ablation_results")
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--noise", type=int, default=2)
    ap.add_argument("--erosion", type=int, default=1)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    suite = build_suite(count=args.count, seed=args.seed)
    cfg = RefinementConfig(seed=args.seed)

    sweeps = {
        "samplers": sweep_samplers(suite, cfg, args.erosion, args.noise),
        "selection": sweep_selection(suite, cfg, args.erosion, args.noise),
        "point_count": sweep_point_count(suite, cfg, range(1, 11), args.erosion, args.noise),
        "thresholds": sweep_thresholds(suite, cfg, erosion=args.erosion, noise=args.noise),
    }
    for name, rows in sweeps.items():
        path = out / f"{name}.csv"
        path.write_text(results_csv(rows) + "\n")
        print(f"== {name} -> {path}")
        for r in rows:
            print(f"   {r.setting:18s} P={r.precision:.3f} R={r.recall:.3f} F1={r.f1:.3f}")


if __name__ == "__main__":
    main()
