"""Box overlap, size regions and per-frame size histograms."""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .trace import BoundingBox, FrameDetections, VideoMeta

REFERENCE_RESOLUTION = (640.0, 480.0)


@dataclass(frozen=True)
class RegionBoundaries:
    """H-1 ascending area thresholds (pixel^2) defined at ``reference_resolution``.

    Regions are lower-inclusive: region k covers [t_{k-1}, t_k).
    """

    thresholds: tuple[float, ...] = (2500.0, 7500.0)
    reference_resolution: tuple[float, float] = REFERENCE_RESOLUTION

    def __post_init__(self) -> None:
        t = tuple(float(x) for x in self.thresholds)
        object.__setattr__(self, "thresholds", t)
        if any(x <= 0 for x in t):
            raise ValueError("region thresholds must be positive")
        if any(b <= a for a, b in zip(t, t[1:])):
            raise ValueError("region thresholds must be strictly ascending")

    @property
    def num_regions(self) -> int:
        return len(self.thresholds) + 1

    def scaled(self, width: float, height: float) -> tuple[float, ...]:
        ref_w, ref_h = self.reference_resolution
        ratio = (width * height) / (ref_w * ref_h)
        return tuple(t * ratio for t in self.thresholds)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    iw = min(a.left + a.width, b.left + b.width) - max(a.left, b.left)
    if iw <= 0:
        return 0.0
    ih = min(a.top + a.height, b.top + b.height) - max(a.top, b.top)
    if ih <= 0:
        return 0.0
    inter = iw * ih
    return min(inter / (a.width * a.height + b.width * b.height - inter), 1.0)


def iou_matrix(a: Sequence[BoundingBox], b: Sequence[BoundingBox]) -> np.ndarray:
    """Pairwise IoU, shape (len(a), len(b))."""
    if not a or not b:
        return np.zeros((len(a), len(b)))
    A = np.array([(x.left, x.top, x.width, x.height) for x in a], dtype=float)
    B = np.array([(x.left, x.top, x.width, x.height) for x in b], dtype=float)
    iw = np.minimum(A[:, None, 0] + A[:, None, 2], B[None, :, 0] + B[None, :, 2]) - np.maximum(
        A[:, None, 0], B[None, :, 0]
    )
    ih = np.minimum(A[:, None, 1] + A[:, None, 3], B[None, :, 1] + B[None, :, 3]) - np.maximum(
        A[:, None, 1], B[None, :, 1]
    )
    inter = np.clip(iw, 0, None) * np.clip(ih, 0, None)
    union = (A[:, 2] * A[:, 3])[:, None] + (B[:, 2] * B[:, 3])[None, :] - inter
    return np.minimum(inter / union, 1.0)


def count_surviving(
    prev: FrameDetections | Sequence[BoundingBox],
    curr: FrameDetections | Sequence[BoundingBox],
    iou_threshold: float = 0.5,
) -> int:
    """Number of previous-frame boxes that overlap some current box by >= threshold.

    Each previous box is counted at most once, so the result lies in
    ``[0, len(prev)]`` and does not depend on box order.
    """
    if not 0 < iou_threshold <= 1:
        raise ValueError("iou_threshold must be in (0, 1]")
    p = prev.boxes if isinstance(prev, FrameDetections) else tuple(prev)
    c = curr.boxes if isinstance(curr, FrameDetections) else tuple(curr)
    if not p or not c:
        return 0
    return int(np.count_nonzero((iou_matrix(p, c) >= iou_threshold).any(axis=1)))


def size_region(area: float, boundaries: RegionBoundaries, frame: VideoMeta | None = None) -> int:
    """0-based size region of an object of ``area`` pixels on ``frame``.

    Thresholds are rescaled by the frame-area ratio to the reference resolution.
    """
    if frame is None:
        thresholds = boundaries.thresholds
    else:
        thresholds = boundaries.scaled(frame.width, frame.height)
    return bisect_right(thresholds, area)


def histogram(
    dets: FrameDetections | Iterable[BoundingBox],
    boundaries: RegionBoundaries,
    frame: VideoMeta | None = None,
) -> np.ndarray:
    boxes = dets.boxes if isinstance(dets, FrameDetections) else dets
    counts = np.zeros(boundaries.num_regions)
    if frame is None:
        thresholds = boundaries.thresholds
    else:
        thresholds = boundaries.scaled(frame.width, frame.height)
    for b in boxes:
        counts[bisect_right(thresholds, b.area)] += 1
    return counts
