"""Synthetic moving-object scenes and detector traces derived from them.

A scenario is a list of content segments (object count, size mix, speed)
and a pool of simulated detectors (per-size-region recall, latency, box
jitter). Each object gets one detectability draw shared by all detectors,
so a detector with higher recall in a region detects a superset of what a
weaker one finds there. Objects drift at constant speed in a random
direction and wrap around the frame.

Scenario files are JSON with ``"schema_version": 1``.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from .geometry import RegionBoundaries
from .trace import BoundingBox, DetectionTrace, FrameDetections, GroundTruth, VideoMeta

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SegmentSpec:
    frames: int
    objects: int
    size_weights: tuple[float, ...] = (1.0, 1.0, 1.0)
    velocity: float = 0.0


@dataclass(frozen=True)
class DetectorSpec:
    name: str
    latency: float
    recall: tuple[float, ...]
    jitter: float = 0.0
    confidence: tuple[float, float] = (1.0, 1.0)


@dataclass(frozen=True)
class ScenarioSpec:
    segments: tuple[SegmentSpec, ...]
    detectors: tuple[DetectorSpec, ...]
    width: float = 640.0
    height: float = 480.0
    fps: float = 30.0
    thresholds: tuple[float, ...] = (2500.0, 7500.0)
    aspect: float = 2.0
    # area range of the smallest and largest regions, as multiples of the
    # neighbouring threshold
    small_floor: float = 0.4
    large_ceiling: float = 2.0

    def __post_init__(self) -> None:
        h = len(self.thresholds) + 1
        if not self.segments:
            raise ConfigError("scenario needs at least one segment")
        if not self.detectors:
            raise ConfigError("scenario needs at least one detector")
        for s in self.segments:
            if s.frames < 1 or s.objects < 0:
                raise ConfigError(f"bad segment {s}")
            if len(s.size_weights) != h or any(w < 0 for w in s.size_weights):
                raise ConfigError(f"segment size_weights need {h} non-negative entries")
            if s.objects and sum(s.size_weights) <= 0:
                raise ConfigError("size_weights must not all be zero")
            if s.velocity < 0:
                raise ConfigError("velocity must be >= 0")
        for d in self.detectors:
            if len(d.recall) != h:
                raise ConfigError(f"detector {d.name}: recall needs {h} entries")
            if any(not 0 <= p <= 1 for p in d.recall):
                raise ConfigError(f"detector {d.name}: recall probabilities must lie in [0, 1]")
            lo, hi = d.confidence
            if not 0 <= lo <= hi <= 1:
                raise ConfigError(f"detector {d.name}: confidence range must lie in [0, 1]")
            if not d.latency > 0:
                raise ConfigError(f"detector {d.name}: latency must be > 0")
            if d.jitter < 0:
                raise ConfigError(f"detector {d.name}: jitter must be >= 0")

    @property
    def frame_count(self) -> int:
        return sum(s.frames for s in self.segments)

    @property
    def meta(self) -> VideoMeta:
        return VideoMeta(self.frame_count, self.fps, self.width, self.height)

    @property
    def boundaries(self) -> RegionBoundaries:
        return RegionBoundaries(tuple(self.thresholds))

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["schema_version"] = SCHEMA_VERSION
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ScenarioSpec:
        data = dict(data)
        version = data.pop("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported scenario schema_version {version}")
        try:
            segments = tuple(
                SegmentSpec(**{**s, "size_weights": tuple(s.get("size_weights", (1.0, 1.0, 1.0)))})
                for s in data.pop("segments")
            )
            detectors = tuple(
                DetectorSpec(
                    **{
                        **d,
                        "recall": tuple(d["recall"]),
                        "confidence": tuple(d.get("confidence", (1.0, 1.0))),
                    }
                )
                for d in data.pop("detectors")
            )
            if "thresholds" in data:
                data["thresholds"] = tuple(data["thresholds"])
            return cls(segments=segments, detectors=detectors, **data)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"invalid scenario: {exc}") from None

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def loads(cls, text: str) -> ScenarioSpec:
        return cls.from_dict(json.loads(text))


@dataclass
class Scenario:
    ground_truth: GroundTruth
    traces: list[DetectionTrace]
    meta: VideoMeta
    spec: ScenarioSpec = field(repr=False, default=None)


def _region_ranges(spec: ScenarioSpec) -> list[tuple[float, float]]:
    scale = (spec.width * spec.height) / (640.0 * 480.0)
    t = [x * scale for x in spec.thresholds]
    edges = [t[0] * spec.small_floor] + t + [t[-1] * spec.large_ceiling]
    return [(edges[k], edges[k + 1]) for k in range(len(edges) - 1)]


def generate_synthetic_scenario(spec: ScenarioSpec, seed: int) -> Scenario:
    """Ground truth plus one trace per detector; a pure function of (spec, seed)."""
    rng = np.random.default_rng(seed)
    ranges = _region_ranges(spec)
    gt: dict[int, list[BoundingBox]] = {}
    dets: list[dict[int, list[BoundingBox]]] = [{} for _ in spec.detectors]
    start = 0
    for seg in spec.segments:
        weights = np.asarray(seg.size_weights, dtype=float)
        n = seg.objects
        regions = rng.choice(len(weights), size=n, p=weights / weights.sum()) if n else np.zeros(0, int)
        lo = np.array([ranges[r][0] for r in regions])
        hi = np.array([ranges[r][1] for r in regions])
        areas = lo + (hi - lo) * rng.random(n)
        widths = np.sqrt(areas / spec.aspect)
        heights = areas / widths
        x0 = rng.random(n) * np.maximum(spec.width - widths, 1.0)
        y0 = rng.random(n) * np.maximum(spec.height - heights, 1.0)
        angle = rng.random(n) * 2 * math.pi
        vx = seg.velocity * np.cos(angle)
        vy = seg.velocity * np.sin(angle)
        detectability = rng.random(n)
        visible = [
            detectability < np.array([d.recall[r] for r in regions]) if n else np.zeros(0, bool)
            for d in spec.detectors
        ]
        span_x = np.maximum(spec.width - widths, 1.0)
        span_y = np.maximum(spec.height - heights, 1.0)
        for k in range(seg.frames):
            f = start + k
            xs = np.mod(x0 + vx * k, span_x)
            ys = np.mod(y0 + vy * k, span_y)
            gt[f] = [
                BoundingBox(float(xs[o]), float(ys[o]), float(widths[o]), float(heights[o]), 1.0)
                for o in range(n)
            ]
            for d_idx, d in enumerate(spec.detectors):
                boxes = []
                for o in np.flatnonzero(visible[d_idx]):
                    w, h = widths[o], heights[o]
                    dx = dy = 0.0
                    if d.jitter > 0:
                        dx, dy = rng.normal(0.0, d.jitter, 2)
                    lo_c, hi_c = d.confidence
                    conf = lo_c if hi_c == lo_c else lo_c + (hi_c - lo_c) * rng.random()
                    boxes.append(
                        BoundingBox(float(xs[o] + dx * w), float(ys[o] + dy * h), float(w), float(h), float(conf))
                    )
                dets[d_idx][f] = boxes
        start += seg.frames
    meta = spec.meta
    traces = [
        DetectionTrace(
            i,
            {f: FrameDetections(f, tuple(boxes)) for f, boxes in dets[i].items()},
            d.latency,
            d.name,
        )
        for i, d in enumerate(spec.detectors)
    ]
    ground_truth = GroundTruth({f: tuple(b) for f, b in gt.items()})
    return Scenario(ground_truth, traces, meta, spec)
