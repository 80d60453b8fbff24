"""Frames, boxes, detector traces and MOTChallenge-style file I/O.

Frame indices are 0-based in memory and 1-based on disk (MOT convention).
Detector indices are 0-based positions in the detector pool.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping


class ParseError(ValueError):
    """Malformed input file."""


@dataclass(frozen=True, slots=True)
class BoundingBox:
    left: float
    top: float
    width: float
    height: float
    confidence: float = 1.0

    def __post_init__(self) -> None:
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"box must have positive size, got {self.width}x{self.height}")

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def right(self) -> float:
        return self.left + self.width

    @property
    def bottom(self) -> float:
        return self.top + self.height


@dataclass(frozen=True, slots=True)
class FrameDetections:
    frame_index: int
    boxes: tuple[BoundingBox, ...] = ()

    def __len__(self) -> int:
        return len(self.boxes)

    def above(self, threshold: float) -> FrameDetections:
        """Keep boxes whose confidence is at least ``threshold``."""
        kept = tuple(b for b in self.boxes if b.confidence >= threshold)
        if len(kept) == len(self.boxes):
            return self
        return FrameDetections(self.frame_index, kept)


@dataclass(frozen=True)
class VideoMeta:
    frame_count: int
    fps: float
    width: float = 640.0
    height: float = 480.0

    def __post_init__(self) -> None:
        if self.frame_count < 1:
            raise ValueError("frame_count must be >= 1")
        if not self.fps > 0:
            raise ValueError("fps must be > 0")

    @property
    def area(self) -> float:
        return self.width * self.height


@dataclass(frozen=True)
class DetectionTrace:
    """Recorded output of one detector over one video.

    ``latency`` is either a constant (seconds) or a per-frame mapping; it is the
    nominal inference time of the detector with no background workload.
    """

    detector_id: int
    per_frame: Mapping[int, FrameDetections]
    latency: float | Mapping[int, float]
    name: str = ""

    def __post_init__(self) -> None:
        values = [self.latency] if isinstance(self.latency, (int, float)) else self.latency.values()
        for v in values:
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"detector {self.detector_id}: latencies must be positive, got {v}")

    def detections(self, frame_index: int) -> FrameDetections:
        try:
            return self.per_frame[frame_index]
        except KeyError:
            raise KeyError(
                f"trace for detector {self.detector_id} ({self.name or 'unnamed'}) "
                f"has no frame {frame_index}"
            ) from None

    def latency_at(self, frame_index: int) -> float:
        if isinstance(self.latency, (int, float)):
            return float(self.latency)
        try:
            return self.latency[frame_index]
        except KeyError:
            raise KeyError(
                f"trace for detector {self.detector_id} ({self.name or 'unnamed'}) "
                f"has no latency for frame {frame_index}"
            ) from None

    @property
    def mean_latency(self) -> float:
        if isinstance(self.latency, (int, float)):
            return float(self.latency)
        return sum(self.latency.values()) / len(self.latency)

    def covers(self, frame_count: int) -> bool:
        return all(f in self.per_frame for f in range(frame_count))


@dataclass(frozen=True)
class GroundTruth:
    per_frame: Mapping[int, tuple[BoundingBox, ...]]

    def boxes(self, frame_index: int) -> tuple[BoundingBox, ...]:
        return self.per_frame.get(frame_index, ())

    @property
    def total(self) -> int:
        return sum(len(v) for v in self.per_frame.values())


@dataclass
class MotParseResult:
    frames: dict[int, tuple[BoundingBox, ...]] = field(default_factory=dict)
    rejected: int = 0


def parse_mot(text: str | Iterable[str], kind: str = "detections") -> MotParseResult:
    """Parse MOT rows ``frame,id,left,top,width,height,conf[,x,y,z]``.

    For ``kind="ground_truth"`` rows with a zero confidence/flag column are
    dropped (MOT marks ignored entries that way). Rows with non-positive
    width or height are skipped and counted in ``rejected``.
    """
    if kind not in ("detections", "ground_truth"):
        raise ValueError(f"unknown kind {kind!r}")
    lines = text.splitlines() if isinstance(text, str) else text
    frames: dict[int, list[BoundingBox]] = {}
    rejected = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) < 7:
            raise ParseError(f"line {lineno}: expected at least 7 fields, got {len(parts)}")
        try:
            frame = int(float(parts[0]))
            left, top, width, height, conf = (float(p) for p in parts[2:7])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        if frame < 1:
            raise ParseError(f"line {lineno}: frame numbers start at 1, got {frame}")
        if kind == "ground_truth" and conf == 0:
            continue
        if not (width > 0 and height > 0):
            rejected += 1
            continue
        conf = min(max(conf, 0.0), 1.0)
        frames.setdefault(frame - 1, []).append(BoundingBox(left, top, width, height, conf))
    return MotParseResult({k: tuple(v) for k, v in sorted(frames.items())}, rejected)


def format_mot(frames: Mapping[int, Iterable[BoundingBox]]) -> str:
    """Inverse of :func:`parse_mot` for detection files (ids written as -1)."""
    out = io.StringIO()
    for f in sorted(frames):
        for b in frames[f]:
            out.write(
                f"{f + 1},-1,{b.left!r},{b.top!r},{b.width!r},{b.height!r},{b.confidence!r},-1,-1,-1\n"
            )
    return out.getvalue()


def read_mot_file(path, kind: str = "detections") -> MotParseResult:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_mot(fh.read(), kind)


def parse_latency_sidecar(text: str) -> dict[int, float]:
    """Read ``frame_index,latency_seconds`` rows (0-based frames, optional header)."""
    out: dict[int, float] = {}
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or not "".join(row).strip():
            continue
        if lineno == 1 and not row[0].strip().lstrip("-").isdigit():
            continue
        if len(row) < 2:
            raise ParseError(f"line {lineno}: expected frame_index,latency_seconds")
        try:
            frame, lat = int(row[0]), float(row[1])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        if not lat > 0:
            raise ParseError(f"line {lineno}: latency must be positive")
        out[frame] = lat
    return out


def format_latency_sidecar(latency: Mapping[int, float]) -> str:
    lines = ["frame_index,latency_seconds"]
    lines += [f"{f},{latency[f]!r}" for f in sorted(latency)]
    return "\n".join(lines) + "\n"


def trace_from_mot(
    detector_id: int,
    parsed: MotParseResult,
    frame_count: int,
    latency: float | Mapping[int, float],
    name: str = "",
) -> DetectionTrace:
    """Build a trace covering every frame; frames absent from the file have no boxes."""
    per_frame = {f: FrameDetections(f, parsed.frames.get(f, ())) for f in range(frame_count)}
    return DetectionTrace(detector_id, per_frame, latency, name)
