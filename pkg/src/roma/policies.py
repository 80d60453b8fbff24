"""Detector-selection policies run after every analyzed frame."""
from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Protocol, Sequence

from .estimator import RomaEstimator, StepRecord
from .geometry import RegionBoundaries, size_region
from .prior import PriorModel
from .trace import FrameDetections, VideoMeta


@dataclass(frozen=True)
class PolicyInput:
    analyzed_frame_index: int
    current_detector: int
    detections_now: FrameDetections
    detections_prev: FrameDetections | None
    measured_latency: float
    fps: float
    frame: VideoMeta | None = None

    def __post_init__(self) -> None:
        if not self.measured_latency > 0:
            raise ValueError("measured_latency must be > 0")


@dataclass(frozen=True)
class PolicyDecision:
    next_detector: int
    overhead: float = 0.0


class Policy(Protocol):
    name: str

    def initial_detector(self) -> int: ...

    def step(self, inp: PolicyInput) -> PolicyDecision: ...


class StaticPolicy:
    def __init__(self, detector: int, n_detectors: int, name: str | None = None):
        if not 0 <= detector < n_detectors:
            raise ValueError(f"detector {detector} out of range for a pool of {n_detectors}")
        self.detector = detector
        self.name = name or f"static{detector}"

    def initial_detector(self) -> int:
        return self.detector

    def step(self, inp: PolicyInput) -> PolicyDecision:
        return PolicyDecision(self.detector)


class TodPolicy:
    """Pick a detector from the median detected-object size of the last frame.

    ``region_map[k]`` is the detector used when the median falls in size
    region k. The default sends the smallest region to the heaviest detector
    and the largest region to the lightest.
    """

    name = "tod"

    def __init__(
        self,
        order: Sequence[int],
        boundaries: RegionBoundaries,
        region_map: Sequence[int] | None = None,
        initial: int | None = None,
    ):
        self.order = tuple(order)
        self.boundaries = boundaries
        if region_map is None:
            h = boundaries.num_regions
            n = len(self.order)
            region_map = [self.order[max(n - 1 - k, 0)] for k in range(h)]
            region_map[-1] = self.order[0]
        if len(region_map) != boundaries.num_regions:
            raise ValueError("region_map needs one detector per size region")
        self.region_map = tuple(region_map)
        self._initial = self.order[-1] if initial is None else initial

    def initial_detector(self) -> int:
        return self._initial

    def step(self, inp: PolicyInput) -> PolicyDecision:
        boxes = inp.detections_now.boxes
        if not boxes:
            return PolicyDecision(inp.current_detector)
        median_area = statistics.median(b.area for b in boxes)
        region = size_region(median_area, self.boundaries, inp.frame)
        return PolicyDecision(self.region_map[region])


class LadPolicy:
    """Step one detector lighter when latency misses the frame interval and
    one heavier when it uses less than ``upgrade_fraction`` of it."""

    name = "lad"

    def __init__(self, order: Sequence[int], upgrade_fraction: float = 0.3, initial: int | None = None):
        self.order = tuple(order)
        self.rank = {d: r for r, d in enumerate(self.order)}
        self.upgrade_fraction = upgrade_fraction
        self._initial = self.order[-1] if initial is None else initial

    def initial_detector(self) -> int:
        return self._initial

    def step(self, inp: PolicyInput) -> PolicyDecision:
        budget = 1.0 / inp.fps
        r = self.rank[inp.current_detector]
        if inp.measured_latency > budget:
            r = max(r - 1, 0)
        elif inp.measured_latency < self.upgrade_fraction * budget:
            r = min(r + 1, len(self.order) - 1)
        return PolicyDecision(self.order[r])


# 6 ms decision time at ~40 detected objects, growing with the square of the count.
CALIBRATED_OVERHEAD_COEFF = 6e-3 / 40**2


class RomaPolicy:
    """Relative-AP estimator wrapped as a policy.

    ``overhead_coeff`` models decision cost as ``coeff * k**2`` seconds for
    ``k`` detections on the analyzed frame; 0 disables it.
    """

    name = "roma"

    def __init__(
        self,
        prior: PriorModel,
        nominal_latencies: Sequence[float],
        fps: float,
        frame: VideoMeta | None = None,
        iou_threshold: float = 0.5,
        overhead_coeff: float = 0.0,
        **estimator_kwargs,
    ):
        self.estimator = RomaEstimator(
            prior, nominal_latencies, fps, frame, iou_threshold, **estimator_kwargs
        )
        self.overhead_coeff = overhead_coeff

    @property
    def history(self) -> list[StepRecord]:
        return self.estimator.history

    def initial_detector(self) -> int:
        return self.estimator.initial_detector

    def step(self, inp: PolicyInput) -> PolicyDecision:
        chosen = self.estimator.step(
            inp.current_detector, inp.detections_now, inp.detections_prev, inp.measured_latency
        )
        k = len(inp.detections_now)
        return PolicyDecision(chosen, self.overhead_coeff * k * k)
