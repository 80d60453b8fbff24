"""The composed synthetic benchmark used by the acceptance suite and scripts.

One video of four content segments (small-slow, small-fast, large-slow,
large-fast pedestrians) replayed under four constant workload multipliers.
The detector pool mimics a tiny/full x low/high-resolution ladder: heavier
detectors find many more small objects, about the same number of large
ones, and take longer.
"""
from __future__ import annotations

from typing import Any

from .synthetic import DetectorSpec, ScenarioSpec, SegmentSpec

DETECTORS = (
    DetectorSpec("tiny288", 0.040, (0.20, 0.82, 0.90), 0.02, (0.4, 1.0)),
    DetectorSpec("tiny416", 0.065, (0.45, 0.85, 0.92), 0.02, (0.4, 1.0)),
    DetectorSpec("full288", 0.130, (0.80, 0.88, 0.94), 0.02, (0.4, 1.0)),
    DetectorSpec("full416", 0.225, (0.90, 0.90, 0.95), 0.02, (0.4, 1.0)),
)

SMALL = (0.8, 0.2, 0.0)
LARGE = (0.0, 0.2, 0.8)

CONTENT = {
    "small-slow": SegmentSpec(250, 25, SMALL, 0.2),
    "small-fast": SegmentSpec(250, 25, SMALL, 2.5),
    "large-slow": SegmentSpec(250, 12, LARGE, 0.5),
    "large-fast": SegmentSpec(250, 12, LARGE, 6.0),
}

MULTIPLIERS = {"x1": 1.0, "x2": 2.0, "x3": 3.0, "x4": 4.0}

SEED = 1
PRIOR_SEED = 1001


def scenario(velocity_scale: float = 1.0, detectors=DETECTORS) -> ScenarioSpec:
    segs = tuple(
        SegmentSpec(s.frames, s.objects, s.size_weights, s.velocity * velocity_scale)
        for s in CONTENT.values()
    )
    return ScenarioSpec(segs, tuple(detectors))


def offline_scenario(detectors=DETECTORS) -> ScenarioSpec:
    """Disjoint data for the prior: mixed sizes, moderate motion."""
    return ScenarioSpec(tuple(SegmentSpec(100, 30, (1.0, 1.0, 1.0), 1.0) for _ in range(6)), tuple(detectors))


def config(name: str = "benchmark", velocity_scale: float = 1.0, cases=None, policies=None) -> dict[str, Any]:
    return {
        "schema_version": 1,
        "name": name,
        "seed": SEED,
        "scenario": scenario(velocity_scale).to_dict(),
        "prior": {"scenario": offline_scenario().to_dict(), "seed": PRIOR_SEED},
        "cases": dict(MULTIPLIERS if cases is None else cases),
        "policies": policies or ["roma", "static:all", "tod", "lad"],
    }
