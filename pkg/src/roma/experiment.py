"""Experiment configuration and the policy-by-workload sweep runner.

Config files are JSON (``"schema_version": 1``). Either a synthetic
``scenario`` or a ``data`` block of MOT files describes the video and the
detector pool; ``prior`` says where the offline histogram matrix comes from.

Output layout::

    <output_dir>/<name>/config.json
    <output_dir>/<name>/summary.csv          policies x cases, plus mean column
    <output_dir>/<name>/deployment.csv       per-detector selection fractions
    <output_dir>/<name>/<policy>/<case>/detections.txt   MOT-format output boxes
    <output_dir>/<name>/<policy>/<case>/telemetry.csv    one row per analyzed frame
    <output_dir>/<name>/<policy>/<case>/ap.json
    <output_dir>/<name>/roma/<case>/estimator.csv        ROMA per-step state
"""
from __future__ import annotations

import copy
import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .estimator import StepRecord
from .evaluation import ApReport, realtime_ap
from .geometry import RegionBoundaries
from .policies import LadPolicy, RomaPolicy, StaticPolicy, TodPolicy
from .prior import PriorModel, build_prior
from .simulator import SimulationConfig, SimulationRun, WorkloadSchedule, run_simulation
from .synthetic import ConfigError, ScenarioSpec, generate_synthetic_scenario
from .trace import (
    DetectionTrace,
    GroundTruth,
    VideoMeta,
    parse_latency_sidecar,
    read_mot_file,
    trace_from_mot,
)

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

# Latency multipliers standing in for the four background-workload cases.
DEFAULT_CASES = {"a": 1.0, "b": 1.4, "c": 1.8, "d": 2.6}
DEFAULT_POLICIES = ["roma", "static:all", "tod", "lad"]


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    seed: int = 0
    fps: float | None = None
    confidence_threshold: float = 0.3
    survival_iou: float = 0.5
    eval_iou: float = 0.5
    max_block: int = 30
    min_update_block: int = 3
    roma_overhead_coeff: float = 0.0
    scenario: dict[str, Any] | None = None
    data: dict[str, Any] | None = None
    prior: dict[str, Any] = field(default_factory=dict)
    cases: dict[str, Any] = field(default_factory=lambda: dict(DEFAULT_CASES))
    policies: list[str] = field(default_factory=lambda: list(DEFAULT_POLICIES))
    output_dir: str = "out"
    base_dir: str = field(default=".", repr=False)

    def __post_init__(self) -> None:
        if not self.policies:
            raise ConfigError("at least one policy is required")
        if not self.cases:
            raise ConfigError("at least one workload case is required")
        for key in ("confidence_threshold", "survival_iou", "eval_iou"):
            v = getattr(self, key)
            if not 0 < v <= 1:
                raise ConfigError(f"{key} must lie in (0, 1], got {v}")
        if (self.scenario is None) == (self.data is None):
            raise ConfigError("give exactly one of 'scenario' or 'data'")

    @classmethod
    def from_dict(cls, d: dict[str, Any], base_dir: str | Path = ".") -> ExperimentConfig:
        d = dict(d)
        version = d.pop("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported config schema_version {version}")
        known = set(cls.__dataclass_fields__) - {"base_dir"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d, base_dir=str(base_dir))

    @classmethod
    def load(cls, path: str | Path) -> ExperimentConfig:
        path = Path(path)
        return cls.from_dict(json.loads(path.read_text()), path.parent)

    def to_dict(self) -> dict[str, Any]:
        out = {"schema_version": SCHEMA_VERSION}
        for k in self.__dataclass_fields__:
            if k != "base_dir":
                out[k] = copy.deepcopy(getattr(self, k))
        return out

    def path(self, p: str) -> Path:
        q = Path(p)
        return q if q.is_absolute() else Path(self.base_dir) / q


@dataclass
class Workload:
    """Everything a sweep needs once files and scenarios are resolved."""

    meta: VideoMeta
    traces: list[DetectionTrace]
    ground_truth: GroundTruth
    prior: PriorModel
    names: list[str]


def schedule_from(value: Any) -> WorkloadSchedule:
    if isinstance(value, (int, float)):
        return WorkloadSchedule.constant(float(value))
    return WorkloadSchedule(tuple((int(s), float(m)) for s, m in value))


def load_data(cfg: ExperimentConfig) -> tuple[VideoMeta, list[DetectionTrace], GroundTruth]:
    """Video, detector traces and ground truth for ``cfg``."""
    if cfg.scenario is not None:
        spec = ScenarioSpec.from_dict(cfg.scenario)
        if cfg.fps is not None:
            spec = ScenarioSpec.from_dict({**spec.to_dict(), "fps": cfg.fps})
        sc = generate_synthetic_scenario(spec, cfg.seed)
        return sc.meta, sc.traces, sc.ground_truth
    d = cfg.data
    try:
        meta = VideoMeta(
            int(d["frame_count"]),
            float(cfg.fps or d.get("fps", 30.0)),
            float(d.get("width", 640)),
            float(d.get("height", 480)),
        )
        gt_parsed = read_mot_file(cfg.path(d["ground_truth"]), "ground_truth")
        traces = []
        for i, det in enumerate(d["detectors"]):
            parsed = read_mot_file(cfg.path(det["detections"]))
            if parsed.rejected:
                log.warning("%s: skipped %d rows with non-positive size", det["detections"], parsed.rejected)
            if "latency_file" in det:
                latency = parse_latency_sidecar(cfg.path(det["latency_file"]).read_text())
            else:
                latency = float(det["latency"])
            traces.append(trace_from_mot(i, parsed, meta.frame_count, latency, det.get("name", f"d{i}")))
    except KeyError as exc:
        raise ConfigError(f"data block is missing {exc}") from None
    return meta, traces, GroundTruth(gt_parsed.frames)


def load_prior(cfg: ExperimentConfig, meta: VideoMeta, n: int) -> PriorModel:
    p = cfg.prior
    if "file" in p:
        prior = PriorModel.loads(cfg.path(p["file"]).read_text())
    elif "matrix" in p:
        boundaries = RegionBoundaries(tuple(p.get("thresholds", (2500.0, 7500.0))))
        prior = PriorModel(np.array(p["matrix"], dtype=float), boundaries, tuple(p.get("order", ())))
    elif "scenario" in p:
        spec = ScenarioSpec.from_dict(p["scenario"])
        sc = generate_synthetic_scenario(spec, int(p.get("seed", cfg.seed + 1)))
        prior = build_prior(sc.traces, spec.boundaries, sc.meta, cfg.confidence_threshold)
    else:
        raise ConfigError("prior needs one of 'file', 'matrix' or 'scenario'")
    if prior.n != n:
        raise ConfigError(f"prior has {prior.n} detectors but the pool has {n}")
    return prior


def prepare(cfg: ExperimentConfig) -> Workload:
    meta, traces, gt = load_data(cfg)
    prior = load_prior(cfg, meta, len(traces))
    names = [t.name or f"d{t.detector_id}" for t in traces]
    return Workload(meta, traces, gt, prior, names)


def expand_policies(specs: list[str], names: list[str]) -> list[str]:
    out: list[str] = []
    for s in specs:
        if s == "static:all":
            out += [f"static:{n}" for n in names]
        else:
            out.append(s)
    return out


def make_policy(spec: str, w: Workload, cfg: ExperimentConfig):
    order = w.prior.detector_order
    if spec == "roma":
        return RomaPolicy(
            w.prior,
            [t.mean_latency for t in w.traces],
            w.meta.fps,
            w.meta,
            cfg.survival_iou,
            overhead_coeff=cfg.roma_overhead_coeff,
            max_block=cfg.max_block,
            min_update_block=cfg.min_update_block,
        )
    if spec == "tod":
        return TodPolicy(order, w.prior.boundaries)
    if spec == "lad":
        return LadPolicy(order)
    if spec.startswith("static:"):
        key = spec.split(":", 1)[1]
        idx = w.names.index(key) if key in w.names else int(key)
        return StaticPolicy(idx, len(w.traces), name=f"static-{w.names[idx]}")
    raise ConfigError(f"unknown policy {spec!r}")


@dataclass
class RunResult:
    policy: str
    case: str
    run: SimulationRun
    report: ApReport
    history: list[StepRecord] | None = None


def run_one(w: Workload, cfg: ExperimentConfig, policy_spec: str, case: str) -> RunResult:
    policy = make_policy(policy_spec, w, cfg)
    run = run_simulation(
        w.traces,
        w.meta,
        schedule_from(cfg.cases[case]),
        policy,
        SimulationConfig(cfg.confidence_threshold),
    )
    report = realtime_ap(run, w.ground_truth, cfg.eval_iou, cfg.confidence_threshold)
    history = policy.history if isinstance(policy, RomaPolicy) else None
    return RunResult(policy.name, case, run, report, history)


def estimator_csv(history: list[StepRecord], names: list[str]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    cols = ["t", "frame_index", "current", "chosen", "measured_latency", "detected", "surviving", "missing_per_frame"]
    for key in ("latency", "block", "alpha", "gamma", "rap"):
        cols += [f"{key}_{n}" for n in names]
    w.writerow(cols)
    for r in history:
        w.writerow(
            [r.t, r.frame_index, r.current, r.chosen, repr(r.measured_latency), r.detected,
             "" if r.surviving is None else r.surviving,
             "" if r.missing_per_frame is None else repr(r.missing_per_frame)]
            + [repr(x) for x in r.latencies]
            + list(r.block_sizes)
            + [repr(x) for x in r.alpha]
            + [repr(x) for x in r.gamma]
            + [repr(x) for x in r.rap]
        )
    return out.getvalue()


def summary_csv(results: list[RunResult], cases: list[str]) -> str:
    table: dict[str, dict[str, float]] = {}
    for r in results:
        table.setdefault(r.policy, {})[r.case] = r.report.ap
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["policy", *cases, "mean"])
    for policy, row in table.items():
        cells = [row[c] for c in cases]
        w.writerow([policy, *(f"{x:.6f}" for x in cells), f"{sum(cells) / len(cells):.6f}"])
    return out.getvalue()


def deployment_csv(results: list[RunResult], names: list[str]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["policy", "case", "detector", "frame_fraction", "selection_fraction"])
    for r in results:
        frames = r.run.selection_frequency(len(names), "frames")
        picks = r.run.selection_frequency(len(names), "analyses")
        for i, n in enumerate(names):
            w.writerow([r.policy, r.case, n, f"{frames[i]:.6f}", f"{picks[i]:.6f}"])
    return out.getvalue()


def run_experiment(cfg: ExperimentConfig, out_root: str | Path | None = None) -> tuple[Path, list[RunResult]]:
    w = prepare(cfg)
    cases = list(cfg.cases)
    root = Path(out_root if out_root is not None else cfg.path(cfg.output_dir)) / cfg.name
    root.mkdir(parents=True, exist_ok=True)
    (root / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
    results = []
    for spec in expand_policies(cfg.policies, w.names):
        for case in cases:
            res = run_one(w, cfg, spec, case)
            log.info("%s case %s: AP %.4f", res.policy, case, res.report.ap)
            d = root / res.policy / case
            d.mkdir(parents=True, exist_ok=True)
            (d / "detections.txt").write_text(res.run.to_mot())
            (d / "telemetry.csv").write_text(res.run.telemetry_csv())
            (d / "ap.json").write_text(res.report.to_json() + "\n")
            if res.history is not None:
                (d / "estimator.csv").write_text(estimator_csv(res.history, w.names))
            results.append(res)
    (root / "summary.csv").write_text(summary_csv(results, cases))
    (root / "deployment.csv").write_text(deployment_csv(results, w.names))
    return root, results


def compare(root: str | Path) -> str:
    """Rebuild the policy x case AP table from the ``ap.json`` files under ``root``."""
    root = Path(root)
    table: dict[str, dict[str, float]] = {}
    cases: list[str] = []
    for ap_file in sorted(root.glob("*/*/ap.json")):
        policy, case = ap_file.parent.parent.name, ap_file.parent.name
        table.setdefault(policy, {})[case] = json.loads(ap_file.read_text())["ap"]
        if case not in cases:
            cases.append(case)
    if not table:
        raise FileNotFoundError(f"no */*/ap.json under {root}")
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["policy", *cases, "mean"])
    for policy, row in table.items():
        cells = [row.get(c) for c in cases]
        present = [x for x in cells if x is not None]
        w.writerow(
            [policy, *("" if x is None else f"{x:.6f}" for x in cells), f"{sum(present) / len(present):.6f}"]
        )
    return out.getvalue()
