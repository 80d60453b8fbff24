"""Greedy IoU matching and 11-point interpolated average precision.

Real-time AP scores every video frame, including dropped frames that carry
the boxes of the last analyzed frame, against that frame's ground truth.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Mapping, Sequence

import numpy as np

from .geometry import iou_matrix
from .trace import BoundingBox, GroundTruth

RECALL_POINTS = 11


@dataclass(frozen=True)
class ApReport:
    ap: float
    tp: int
    fp: int
    gt_count: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def match_frame(
    dets: Sequence[BoundingBox],
    gt: Sequence[BoundingBox],
    iou_threshold: float = 0.5,
) -> list[bool]:
    """TP flags for ``dets`` in descending-confidence order (stable on ties).

    Each detection takes the unmatched ground-truth box it overlaps most,
    provided the overlap reaches ``iou_threshold``.
    """
    order = sorted(range(len(dets)), key=lambda i: -dets[i].confidence)
    flags = [False] * len(dets)
    if not dets or not gt:
        return [flags[i] for i in order]
    ious = iou_matrix([dets[i] for i in order], gt)
    free = np.ones(len(gt), dtype=bool)
    out = []
    for row in ious:
        cand = np.where(free & (row >= iou_threshold), row, -1.0)
        j = int(np.argmax(cand))
        if cand[j] >= 0:
            free[j] = False
            out.append(True)
        else:
            out.append(False)
    return out


def ap_11point(flags: Sequence[bool], confidences: Sequence[float], gt_count: int) -> ApReport:
    """11-point interpolated AP over detections pooled from any number of frames.

    Precision at recall level r is the best precision reached at any recall
    >= r. No ground truth and no detections scores 1; no ground truth with
    detections scores 0.
    """
    flags = np.asarray(flags, dtype=bool)
    conf = np.asarray(confidences, dtype=float)
    if flags.shape != conf.shape:
        raise ValueError("flags and confidences differ in length")
    tp_total = int(flags.sum())
    fp_total = int(flags.size - tp_total)
    if gt_count < 0:
        raise ValueError("gt_count must be >= 0")
    if tp_total > gt_count:
        raise ValueError(f"{tp_total} true positives exceed {gt_count} ground-truth boxes")
    if gt_count == 0:
        return ApReport(1.0 if flags.size == 0 else 0.0, tp_total, fp_total, 0)
    if flags.size == 0:
        return ApReport(0.0, 0, 0, gt_count)
    order = np.argsort(-conf, kind="stable")
    tp = np.cumsum(flags[order])
    ranks = np.arange(1, flags.size + 1)
    precision = tp / ranks
    # best precision at this rank or any later one
    interp = np.maximum.accumulate(precision[::-1])[::-1]
    total = 0.0
    for k in range(RECALL_POINTS):
        # first rank with recall >= k/10, compared in integers
        idx = np.searchsorted(tp * (RECALL_POINTS - 1), k * gt_count, side="left")
        if idx < tp.size:
            total += interp[idx]
    return ApReport(total / RECALL_POINTS, tp_total, fp_total, gt_count)


def score_frames(
    frames: Mapping[int, Sequence[BoundingBox]],
    gt: GroundTruth,
    frame_indices: Sequence[int],
    iou_threshold: float = 0.5,
    confidence_threshold: float = 0.3,
) -> ApReport:
    flags: list[bool] = []
    confs: list[float] = []
    gt_count = 0
    for f in frame_indices:
        dets = sorted(
            (b for b in frames[f] if b.confidence >= confidence_threshold),
            key=lambda b: -b.confidence,
        )
        truth = gt.boxes(f)
        gt_count += len(truth)
        flags.extend(match_frame(dets, truth, iou_threshold))
        confs.extend(b.confidence for b in dets)
    return ap_11point(flags, confs, gt_count)


def offline_ap(trace_frames, gt: GroundTruth, frame_count: int, iou_threshold=0.5, confidence_threshold=0.3):
    """AP of a detector that analyzes every frame."""
    frames = {
        f: (trace_frames[f].boxes if hasattr(trace_frames[f], "boxes") else trace_frames[f])
        for f in range(frame_count)
    }
    return score_frames(frames, gt, range(frame_count), iou_threshold, confidence_threshold)


def realtime_ap(run, gt: GroundTruth, iou_threshold: float = 0.5, confidence_threshold: float = 0.3) -> ApReport:
    frames = run.output_frames()
    missing = [f for f in gt.per_frame if f not in frames]
    if missing:
        raise ValueError(f"run has no output for ground-truth frames {missing[:5]}")
    if len(frames) != run.meta.frame_count:
        raise ValueError("run does not cover every frame of the video")
    return score_frames(frames, gt, sorted(frames), iou_threshold, confidence_threshold)
