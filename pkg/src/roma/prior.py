"""Offline detection-count prior and run-time detected-object estimates."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import RegionBoundaries, histogram
from .trace import DetectionTrace, VideoMeta

FORMAT_TAG = "roma-prior"
FORMAT_VERSION = 1

# Added to zero denominators when forming detection ratios.
ZERO_GUARD = 0.1


@dataclass(frozen=True)
class PriorModel:
    """Per-detector detected-object counts per size region (n x H).

    ``detector_order`` lists detector indices lightest first.
    """

    matrix: np.ndarray
    boundaries: RegionBoundaries = field(default_factory=RegionBoundaries)
    detector_order: tuple[int, ...] = ()
    names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2:
            raise ValueError("prior matrix must be 2-D")
        if m.shape[1] != self.boundaries.num_regions:
            raise ValueError(
                f"prior has {m.shape[1]} columns but boundaries define "
                f"{self.boundaries.num_regions} regions"
            )
        if (m < 0).any() or not np.isfinite(m).all():
            raise ValueError("prior entries must be finite and non-negative")
        if (m.sum(axis=1) <= 0).any():
            raise ValueError("every prior row needs at least one positive entry")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        order = tuple(self.detector_order) or tuple(range(m.shape[0]))
        if sorted(order) != list(range(m.shape[0])):
            raise ValueError("detector_order must be a permutation of detector indices")
        object.__setattr__(self, "detector_order", order)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_regions(self) -> int:
        return self.matrix.shape[1]

    def ratio_matrix(self, c: int) -> np.ndarray:
        """Rows are ``detection_ratio(self, i, c)`` for every i."""
        return np.stack([detection_ratio(self, i, c) for i in range(self.n)])

    def dumps(self) -> str:
        lines = [
            f"{FORMAT_TAG} v{FORMAT_VERSION}",
            f"n {self.n}",
            f"H {self.num_regions}",
            "thresholds " + " ".join(repr(t) for t in self.boundaries.thresholds),
            "reference " + " ".join(repr(float(x)) for x in self.boundaries.reference_resolution),
            "order " + " ".join(str(i) for i in self.detector_order),
        ]
        if self.names:
            lines.append("names " + " ".join(self.names))
        for row in self.matrix:
            lines.append("row " + " ".join(repr(float(x)) for x in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> PriorModel:
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        if not lines or lines[0] != f"{FORMAT_TAG} v{FORMAT_VERSION}":
            raise ValueError(f"not a {FORMAT_TAG} v{FORMAT_VERSION} file")
        fields: dict[str, list[str]] = {}
        rows: list[list[float]] = []
        for ln in lines[1:]:
            key, _, rest = ln.partition(" ")
            if key == "row":
                rows.append([float(x) for x in rest.split()])
            else:
                fields[key] = rest.split()
        n, h = int(fields["n"][0]), int(fields["H"][0])
        if len(rows) != n or any(len(r) != h for r in rows):
            raise ValueError(f"expected {n} rows of {h} values")
        boundaries = RegionBoundaries(
            tuple(float(x) for x in fields.get("thresholds", [])),
            tuple(float(x) for x in fields["reference"]),
        )
        return cls(
            np.array(rows),
            boundaries,
            tuple(int(i) for i in fields.get("order", [])),
            tuple(fields.get("names", [])),
        )


def build_prior(
    traces: Sequence[DetectionTrace],
    boundaries: RegionBoundaries,
    frame: VideoMeta | None = None,
    confidence_threshold: float = 0.3,
) -> PriorModel:
    """Sum per-frame size histograms of each detector over an offline dataset.

    Trace position in ``traces`` is the detector index; ordering by mean
    nominal latency gives ``detector_order``.
    """
    if not traces:
        raise ValueError("build_prior needs at least one trace")
    frames = set(traces[0].per_frame)
    if not frames:
        raise ValueError("build_prior needs non-empty traces")
    for tr in traces[1:]:
        if set(tr.per_frame) != frames:
            raise ValueError("all traces must cover the same frames")
    rows = []
    for tr in traces:
        row = np.zeros(boundaries.num_regions)
        for f in sorted(frames):
            row += histogram(tr.per_frame[f].above(confidence_threshold), boundaries, frame)
        rows.append(row)
    order = tuple(sorted(range(len(traces)), key=lambda i: (traces[i].mean_latency, i)))
    return PriorModel(np.array(rows), boundaries, order, tuple(t.name for t in traces if t.name))


def detection_ratio(prior: PriorModel, i: int, c: int) -> np.ndarray:
    """Elementwise ratio of detector i's prior counts to detector c's.

    Zero denominators are replaced by ZERO_GUARD, except 0/0 which is 1.
    """
    num = prior.matrix[i]
    den = prior.matrix[c]
    out = np.empty_like(num)
    for k in range(num.shape[0]):
        if den[k] > 0:
            out[k] = num[k] / den[k]
        elif num[k] == 0:
            out[k] = 1.0
        else:
            out[k] = num[k] / ZERO_GUARD
    return out


def estimate_detected(ratio: np.ndarray, observed: np.ndarray) -> float:
    ratio = np.asarray(ratio, dtype=float)
    observed = np.asarray(observed, dtype=float)
    if ratio.shape != observed.shape:
        raise ValueError(f"length mismatch: {ratio.shape} vs {observed.shape}")
    return float(ratio @ observed)
