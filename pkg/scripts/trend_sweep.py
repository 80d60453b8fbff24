"""Real-time AP of each fixed detector over workload multipliers and object speeds.

Shows the two staleness effects the selector trades off: slower analysis
(larger multiplier) and faster objects both cost accuracy, more so for
heavier detectors.

    python scripts/trend_sweep.py [--seed 1] [--multipliers 1 2 3 4] [--speeds 0 1 2]
"""
from __future__ import annotations

import argparse

from roma import benchmark
from roma.evaluation import realtime_ap
from roma.policies import StaticPolicy
from roma.simulator import WorkloadSchedule, run_simulation
from roma.synthetic import generate_synthetic_scenario


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=benchmark.SEED)
    ap.add_argument("--multipliers", type=float, nargs="+", default=[1, 2, 3, 4])
    ap.add_argument("--speeds", type=float, nargs="+", default=[0, 1, 2], help="velocity scale factors")
    args = ap.parse_args()

    print("detector,velocity_scale,multiplier,realtime_ap")
    for speed in args.speeds:
        sc = generate_synthetic_scenario(benchmark.scenario(speed), args.seed)
        for i, tr in enumerate(sc.traces):
            for m in args.multipliers:
                run = run_simulation(sc.traces, sc.meta, WorkloadSchedule.constant(m), StaticPolicy(i, len(sc.traces)))
                print(f"{tr.name},{speed:g},{m:g},{realtime_ap(run, sc.ground_truth).ap:.6f}")


if __name__ == "__main__":
    main()
