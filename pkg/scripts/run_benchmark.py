"""Run the composed synthetic benchmark and print the AP table and selection shares.

    python scripts/run_benchmark.py [--seed 1] [--out out]
"""
from __future__ import annotations

import argparse
import csv
import io

from roma import benchmark
from roma.experiment import ExperimentConfig, run_experiment


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=benchmark.SEED)
    ap.add_argument("--out", default="out")
    args = ap.parse_args()

    raw = benchmark.config()
    raw["seed"] = args.seed
    root, results = run_experiment(ExperimentConfig.from_dict(raw), args.out)
    print((root / "summary.csv").read_text())

    # how often ROMA picked each detector, per workload case
    rows = csv.DictReader(io.StringIO((root / "deployment.csv").read_text()))
    shares: dict[str, dict[str, str]] = {}
    for r in rows:
        if r["policy"] == "roma":
            shares.setdefault(r["case"], {})[r["detector"]] = r["selection_fraction"]
    names = [d.name for d in benchmark.DETECTORS]
    print("roma selection share (by decisions)")
    print("case," + ",".join(names))
    for case, row in shares.items():
        print(case + "," + ",".join(row[n] for n in names))
    print(f"\nfull outputs in {root}")


if __name__ == "__main__":
    main()
