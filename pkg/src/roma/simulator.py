"""Deterministic real-time replay of detector traces with frame dropping.

Frames arrive at a fixed rate. Analyzing a frame takes the detector's
latency (scaled by the background-workload multiplier active at that frame),
and every frame that arrives meanwhile is dropped and reuses the analyzed
frame's boxes. The policy picks the detector for the next analyzed frame.
"""
from __future__ import annotations

import io
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Sequence

from .policies import Policy, PolicyInput
from .trace import BoundingBox, DetectionTrace, FrameDetections, VideoMeta, format_mot


@dataclass(frozen=True)
class WorkloadSchedule:
    """Piecewise-constant latency multipliers keyed by starting frame."""

    segments: tuple[tuple[int, float], ...] = ((0, 1.0),)

    def __post_init__(self) -> None:
        segs = tuple((int(s), float(m)) for s, m in self.segments)
        if not segs or segs[0][0] != 0:
            raise ValueError("workload schedule must start at frame 0")
        if any(b[0] <= a[0] for a, b in zip(segs, segs[1:])):
            raise ValueError("segment starts must be strictly ascending")
        if any(not m > 0 for _, m in segs):
            raise ValueError("latency multipliers must be positive")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "_starts", [s for s, _ in segs])

    @classmethod
    def constant(cls, multiplier: float) -> WorkloadSchedule:
        return cls(((0, multiplier),))

    def multiplier(self, frame_index: int) -> float:
        return self.segments[bisect_right(self._starts, frame_index) - 1][1]


@dataclass(frozen=True)
class FrameOutput:
    boxes: tuple[BoundingBox, ...]
    source_frame: int
    detector: int


@dataclass(frozen=True)
class AnalyzedFrame:
    t: int
    frame_index: int
    detector: int
    latency: float
    overhead: float
    block_size: int
    next_detector: int


@dataclass
class SimulationRun:
    meta: VideoMeta
    per_frame_output: dict[int, FrameOutput] = field(default_factory=dict)
    analyzed: list[AnalyzedFrame] = field(default_factory=list)
    policy_name: str = ""

    def output_frames(self) -> dict[int, tuple[BoundingBox, ...]]:
        return {f: o.boxes for f, o in self.per_frame_output.items()}

    def selection_frequency(self, n_detectors: int, by: str = "frames") -> list[float]:
        """Fraction of frames (or of analyzed frames, ``by="analyses"``) served by each detector."""
        counts = [0] * n_detectors
        if by == "frames":
            for o in self.per_frame_output.values():
                counts[o.detector] += 1
        elif by == "analyses":
            for a in self.analyzed:
                counts[a.detector] += 1
        else:
            raise ValueError(f"unknown basis {by!r}")
        total = sum(counts)
        return [c / total for c in counts]

    def to_mot(self) -> str:
        return format_mot(self.output_frames())

    def telemetry_csv(self) -> str:
        out = io.StringIO()
        out.write("t,frame_index,detector,latency,overhead,block_size,next_detector\n")
        for a in self.analyzed:
            out.write(
                f"{a.t},{a.frame_index},{a.detector},{a.latency!r},{a.overhead!r},"
                f"{a.block_size},{a.next_detector}\n"
            )
        return out.getvalue()


@dataclass(frozen=True)
class SimulationConfig:
    confidence_threshold: float = 0.3


def frames_consumed(fps: float, latency: float) -> int:
    """Frames covered by one analysis: the analyzed frame plus those arriving during it."""
    return math.floor(fps * latency) + 1


def run_simulation(
    traces: Sequence[DetectionTrace],
    meta: VideoMeta,
    schedule: WorkloadSchedule,
    policy: Policy,
    config: SimulationConfig = SimulationConfig(),
) -> SimulationRun:
    for d, tr in enumerate(traces):
        for f in range(meta.frame_count):
            if f not in tr.per_frame:
                raise KeyError(f"trace for detector {d} ({tr.name or 'unnamed'}) is missing frame {f}")
    run = SimulationRun(meta, policy_name=getattr(policy, "name", ""))
    detector = policy.initial_detector()
    prev: FrameDetections | None = None
    frame = 0
    t = 0
    while frame < meta.frame_count:
        tr = traces[detector]
        dets = tr.detections(frame).above(config.confidence_threshold)
        latency = tr.latency_at(frame) * schedule.multiplier(frame)
        decision = policy.step(
            PolicyInput(frame, detector, dets, prev, latency, meta.fps, meta)
        )
        consumed = frames_consumed(meta.fps, latency + decision.overhead)
        end = min(frame + consumed, meta.frame_count)
        out = FrameOutput(dets.boxes, frame, detector)
        for f in range(frame, end):
            run.per_frame_output[f] = out
        run.analyzed.append(
            AnalyzedFrame(t, frame, detector, latency, decision.overhead, end - frame, decision.next_detector)
        )
        prev = dets
        detector = decision.next_detector
        frame = end
        t += 1
    return run
