"""Run-time relative-AP estimator.

Per analyzed frame the estimator tracks detector latencies, turns them into
frame-block sizes, estimates how fast detections go stale between analyzed
frames (the per-frame degradation ratios ``beta``) and combines that with
prior-based detected-object estimates into a relative AP per detector.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import RegionBoundaries, count_surviving, histogram
from .prior import PriorModel
from .trace import FrameDetections, VideoMeta

MAX_BLOCK = 30
MIN_UPDATE_BLOCK = 3
DIVISOR_GUARD = 0.1


@dataclass(frozen=True)
class LatencyState:
    estimates: np.ndarray
    last_measured: float
    current: int
    previous: int

    @classmethod
    def initial(cls, nominal: Sequence[float], current: int) -> LatencyState:
        est = np.asarray(nominal, dtype=float).copy()
        if (est <= 0).any() or not np.isfinite(est).all():
            raise ValueError("nominal latencies must be positive and finite")
        return cls(est, float(est[current]), current, current)


def update_latency(state: LatencyState, measured: float, current: int) -> LatencyState:
    """Fold a measured latency of detector ``current`` into every estimate.

    If ``current`` also ran at the previous analyzed frame all estimates are
    scaled by the observed latency variation; after a switch only the
    current detector's estimate is replaced.
    """
    if not (measured > 0 and math.isfinite(measured)):
        raise ValueError(f"measured latency must be positive, got {measured}")
    switched = current != state.current
    if switched:
        est = state.estimates.copy()
        est[current] = measured
    else:
        est = state.estimates * (measured / state.estimates[current])
    return LatencyState(est, float(measured), current, state.current)


def frame_block_size(fps: float, latency: float, max_block: int = MAX_BLOCK) -> int:
    b = math.floor(fps * latency) + 1
    return min(max(b, 1), max_block)


def missing_per_frame(prev_count: float, surviving: float, current_block: int) -> float:
    if current_block < 1:
        raise ValueError("block size must be >= 1")
    return max(prev_count - surviving, 0.0) / current_block


@dataclass(frozen=True)
class DegradationState:
    beta: np.ndarray = field(default_factory=lambda: np.ones(MAX_BLOCK))
    beta_prev: np.ndarray = field(default_factory=lambda: np.ones(MAX_BLOCK))
    min_update_block: int = MIN_UPDATE_BLOCK


def _monotone(beta: np.ndarray) -> np.ndarray:
    beta = np.clip(beta, 0.0, 1.0)
    beta[0] = 1.0
    return np.minimum.accumulate(beta)


def update_betas(
    state: DegradationState,
    q0: float,
    u: float,
    current_block: int,
    block_sizes: Sequence[int],
) -> DegradationState:
    """One degradation-ratio update for a block starting at the current frame.

    ``q0`` is the number of objects detected now and ``u`` the estimated number
    lost per dropped frame. Inside the current detector's block the expected
    detected count shrinks by ``u`` per frame and beta falls with the square of
    that shrinkage. Beyond it (needed by slower candidates) the previous
    step's frame-to-frame ratios are reused. Blocks shorter than
    ``min_update_block`` are too noisy and leave beta untouched.
    """
    old = state.beta
    if current_block < state.min_update_block:
        return DegradationState(old.copy(), old.copy(), state.min_update_block)
    size = old.shape[0]
    beta = old.copy()
    beta[0] = 1.0
    q_prev = float(q0)
    stop = min(current_block, size)
    for j in range(1, stop):
        q = max(q_prev - u, 0.0)
        beta[j] = 0.0 if q_prev == 0 else beta[j - 1] * (q / q_prev) ** 2
        q_prev = q
    far = min(max(block_sizes, default=0), size)
    for j in range(stop, far):
        beta[j] = 0.0 if old[j - 1] == 0 else beta[j - 1] * (old[j] / old[j - 1])
    return DegradationState(_monotone(beta), old.copy(), state.min_update_block)


@dataclass(frozen=True)
class RapResult:
    alpha: np.ndarray
    gamma: np.ndarray
    rap: np.ndarray
    block_sizes: np.ndarray


def compute_rap(
    l_estimates: Sequence[float],
    measured_count: float,
    beta: np.ndarray,
    block_sizes: Sequence[int],
    current: int,
) -> RapResult:
    l_est = np.asarray(l_estimates, dtype=float)
    blocks = np.asarray(block_sizes, dtype=int)
    if (blocks < 1).any() or (blocks > beta.shape[0]).any():
        raise ValueError(f"block sizes must lie in [1, {beta.shape[0]}]")
    alpha = l_est / (measured_count + DIVISOR_GUARD)
    cum = np.cumsum(beta)
    mean_beta = cum[blocks - 1] / blocks
    gamma = mean_beta / mean_beta[current]
    return RapResult(alpha, gamma, alpha * gamma, blocks)


def select_detector(rap: Sequence[float], order: Sequence[int] | None = None) -> int:
    """Index of the largest relative AP; ties go to the lighter detector."""
    values = np.asarray(rap, dtype=float)
    if values.size == 0:
        raise ValueError("empty RAP vector")
    order = range(values.size) if order is None else order
    best = values.max()
    return next(i for i in order if values[i] == best)


@dataclass(frozen=True)
class StepRecord:
    t: int
    frame_index: int
    current: int
    chosen: int
    measured_latency: float
    detected: int
    surviving: int | None
    missing_per_frame: float | None
    latencies: tuple[float, ...]
    block_sizes: tuple[int, ...]
    alpha: tuple[float, ...]
    gamma: tuple[float, ...]
    rap: tuple[float, ...]


class RomaEstimator:
    """Per-stream estimator state machine.

    Starts on the slowest detector with all degradation ratios at 1. Feed it
    one analyzed frame at a time via :meth:`step`.
    """

    def __init__(
        self,
        prior: PriorModel,
        nominal_latencies: Sequence[float],
        fps: float,
        frame: VideoMeta | None = None,
        iou_threshold: float = 0.5,
        max_block: int = MAX_BLOCK,
        min_update_block: int = MIN_UPDATE_BLOCK,
    ):
        if len(nominal_latencies) != prior.n:
            raise ValueError("need one nominal latency per prior row")
        self.prior = prior
        self.boundaries: RegionBoundaries = prior.boundaries
        self.fps = float(fps)
        self.frame = frame
        self.iou_threshold = iou_threshold
        self.max_block = max_block
        self.initial_detector = int(np.argmax(nominal_latencies))
        self.latency = LatencyState.initial(nominal_latencies, self.initial_detector)
        self.degradation = DegradationState(
            np.ones(max_block), np.ones(max_block), min_update_block
        )
        self._ratios = [prior.ratio_matrix(c) for c in range(prior.n)]
        self.t = 0
        self.history: list[StepRecord] = []

    @property
    def block_sizes(self) -> np.ndarray:
        return np.array(
            [frame_block_size(self.fps, x, self.max_block) for x in self.latency.estimates]
        )

    def step(
        self,
        current: int,
        detections_now: FrameDetections,
        detections_prev: FrameDetections | None,
        measured_latency: float,
    ) -> int:
        observed = histogram(detections_now, self.boundaries, self.frame)
        measured_count = float(len(detections_now))
        l_est = self._ratios[current] @ observed
        l_est[current] = measured_count

        self.latency = update_latency(self.latency, measured_latency, current)
        blocks = self.block_sizes

        surviving = u = None
        if detections_prev is not None:
            surviving = count_surviving(detections_prev, detections_now, self.iou_threshold)
            u = missing_per_frame(len(detections_prev), surviving, int(blocks[current]))
            self.degradation = update_betas(
                self.degradation, measured_count, u, int(blocks[current]), blocks
            )

        rap = compute_rap(l_est, measured_count, self.degradation.beta, blocks, current)
        chosen = select_detector(rap.rap, self.prior.detector_order)
        self.history.append(
            StepRecord(
                self.t,
                detections_now.frame_index,
                current,
                chosen,
                float(measured_latency),
                int(measured_count),
                surviving,
                u,
                tuple(float(x) for x in self.latency.estimates),
                tuple(int(b) for b in blocks),
                tuple(float(x) for x in rap.alpha),
                tuple(float(x) for x in rap.gamma),
                tuple(float(x) for x in rap.rap),
            )
        )
        self.t += 1
        return chosen
