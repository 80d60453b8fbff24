"""Command-line front end.

    roma build-prior   --scenario offline.json --seed 7 -o prior.txt
    roma gen-synthetic --scenario scene.json --seed 1 -o data/
    roma simulate      --config experiment.json [--policy roma --case a ...]
    roma compare       out/experiment
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .experiment import ExperimentConfig, compare, run_experiment
from .geometry import RegionBoundaries
from .prior import build_prior
from .synthetic import ConfigError, ScenarioSpec, generate_synthetic_scenario
from .trace import (
    ParseError,
    VideoMeta,
    format_latency_sidecar,
    format_mot,
    read_mot_file,
    trace_from_mot,
)

log = logging.getLogger("roma")


def cmd_build_prior(args: argparse.Namespace) -> int:
    if args.scenario:
        spec = ScenarioSpec.loads(Path(args.scenario).read_text())
        sc = generate_synthetic_scenario(spec, args.seed)
        traces, meta, boundaries = sc.traces, sc.meta, spec.boundaries
    elif args.detections:
        if args.frame_count is None:
            raise ConfigError("--frame-count is required with --detections")
        meta = VideoMeta(args.frame_count, args.fps, args.width, args.height)
        boundaries = RegionBoundaries(tuple(args.thresholds))
        if len(args.latency) not in (0, len(args.detections)):
            raise ConfigError("give one --latency per --detections file")
        lats = args.latency or [float(i + 1) for i in range(len(args.detections))]
        traces = [
            trace_from_mot(i, read_mot_file(p), args.frame_count, lats[i], Path(p).stem)
            for i, p in enumerate(args.detections)
        ]
    else:
        raise ConfigError("build-prior needs --scenario or --detections")
    prior = build_prior(traces, boundaries, meta, args.confidence)
    Path(args.output).write_text(prior.dumps())
    print(f"wrote {prior.n}x{prior.num_regions} prior to {args.output}")
    return 0


def cmd_gen_synthetic(args: argparse.Namespace) -> int:
    spec = ScenarioSpec.loads(Path(args.scenario).read_text())
    sc = generate_synthetic_scenario(spec, args.seed)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    (out / "gt.txt").write_text(format_mot(sc.ground_truth.per_frame))
    detectors = []
    for tr in sc.traces:
        det_file = f"det_{tr.name}.txt"
        lat_file = f"latency_{tr.name}.csv"
        (out / det_file).write_text(format_mot({f: d.boxes for f, d in tr.per_frame.items()}))
        (out / lat_file).write_text(
            format_latency_sidecar({f: tr.latency_at(f) for f in range(sc.meta.frame_count)})
        )
        detectors.append({"name": tr.name, "detections": det_file, "latency_file": lat_file})
    data = {
        "frame_count": sc.meta.frame_count,
        "fps": sc.meta.fps,
        "width": sc.meta.width,
        "height": sc.meta.height,
        "ground_truth": "gt.txt",
        "detectors": detectors,
    }
    (out / "data.json").write_text(json.dumps(data, indent=2) + "\n")
    print(f"wrote {len(sc.traces)} traces over {sc.meta.frame_count} frames to {out}")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    raw = json.loads(Path(args.config).read_text())
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.fps is not None:
        raw["fps"] = args.fps
    if args.policy:
        raw["policies"] = args.policy
    cfg = ExperimentConfig.from_dict(raw, Path(args.config).parent)
    if args.case:
        missing = [c for c in args.case if c not in cfg.cases]
        if missing:
            raise ConfigError(f"unknown cases {missing}; config defines {list(cfg.cases)}")
        cfg.cases = {c: cfg.cases[c] for c in args.case}
    root, _ = run_experiment(cfg, args.output)
    print((root / "summary.csv").read_text(), end="")
    print(f"results in {root}")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    table = compare(args.root)
    if args.output:
        Path(args.output).write_text(table)
    print(table, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="roma", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    bp = sub.add_parser("build-prior", help="histogram matrix from offline traces")
    bp.add_argument("--scenario", help="synthetic scenario JSON for the offline data")
    bp.add_argument("--seed", type=int, default=0)
    bp.add_argument("--detections", nargs="+", help="MOT detection files, one per detector")
    bp.add_argument("--latency", type=float, nargs="*", default=[], help="nominal latency per detector (s)")
    bp.add_argument("--frame-count", type=int)
    bp.add_argument("--fps", type=float, default=30.0)
    bp.add_argument("--width", type=float, default=640.0)
    bp.add_argument("--height", type=float, default=480.0)
    bp.add_argument("--thresholds", type=float, nargs="+", default=[2500.0, 7500.0])
    bp.add_argument("--confidence", type=float, default=0.3)
    bp.add_argument("-o", "--output", required=True)
    bp.set_defaults(func=cmd_build_prior)

    gp = sub.add_parser("gen-synthetic", help="write a synthetic scene as MOT files")
    gp.add_argument("--scenario", required=True)
    gp.add_argument("--seed", type=int, default=0)
    gp.add_argument("-o", "--output", required=True)
    gp.set_defaults(func=cmd_gen_synthetic)

    sp = sub.add_parser("simulate", help="run every (policy, case) pair of an experiment")
    sp.add_argument("--config", required=True)
    sp.add_argument("--seed", type=int, help="override the config seed")
    sp.add_argument("--fps", type=float, help="override the video frame rate (default 30)")
    sp.add_argument("--policy", action="append", help="roma, tod, lad, static:<name|index>, static:all")
    sp.add_argument("--case", action="append", help="restrict to these workload cases")
    sp.add_argument("-o", "--output", help="output root (default: config output_dir)")
    sp.set_defaults(func=cmd_simulate)

    cp = sub.add_parser("compare", help="policy x case AP table from a results directory")
    cp.add_argument("root")
    cp.add_argument("-o", "--output")
    cp.set_defaults(func=cmd_compare)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ParseError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"roma {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
