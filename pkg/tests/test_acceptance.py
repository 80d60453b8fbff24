"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run standalone with ``python tests/test_acceptance.py`` or through pytest,
which writes the same lines to the terminal report.
"""
from __future__ import annotations

import json
import sys
import tempfile
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import oracles  # noqa: E402
from roma import benchmark  # noqa: E402
from roma.cli import main as cli_main  # noqa: E402
from roma.estimator import (  # noqa: E402
    DegradationState,
    LatencyState,
    compute_rap,
    frame_block_size,
    missing_per_frame,
    update_betas,
    update_latency,
)
from roma.evaluation import ap_11point, realtime_ap  # noqa: E402
from roma.experiment import ExperimentConfig, expand_policies, prepare, run_one  # noqa: E402
from roma.geometry import RegionBoundaries, count_surviving  # noqa: E402
from roma.policies import StaticPolicy  # noqa: E402
from roma.prior import PriorModel  # noqa: E402
from roma.simulator import WorkloadSchedule, run_simulation  # noqa: E402
from roma.synthetic import DetectorSpec, ScenarioSpec, SegmentSpec, generate_synthetic_scenario  # noqa: E402
from roma.trace import BoundingBox, format_mot  # noqa: E402

REL = 1e-12


def close(a, b) -> bool:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return a.shape == b.shape and bool(np.all(np.abs(a - b) <= REL * np.maximum(np.abs(a), np.abs(b))))


def random_beta(rng, size=30):
    """Valid previous beta: starts at 1, non-increasing, sometimes hits 0."""
    steps = rng.uniform(0.5, 1.0, size - 1) ** rng.integers(1, 4)
    beta = np.concatenate([[1.0], np.cumprod(steps)])
    if rng.random() < 0.2:
        beta[rng.integers(1, size) :] = 0.0
    return beta


# 1. formula exactness


def check_formulas():
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    bad = []
    if frame_block_size(30, 0.225) != 7:
        bad.append("frame_block_size(30, 0.225)")
    for k in range(1000):
        n = int(rng.integers(1, 7))
        est = rng.uniform(1e-3, 1.0, n)
        prev_c, cur = int(rng.integers(n)), int(rng.integers(n))
        if rng.random() < 0.5:
            cur = prev_c
        measured = float(rng.uniform(1e-3, 2.0))
        got = update_latency(LatencyState(est.copy(), float(est[prev_c]), prev_c, prev_c), measured, cur).estimates
        if not close(got, oracles.latency_update(list(est), cur, prev_c, measured)):
            bad.append(f"update_latency #{k}")

        fps, lat = float(rng.uniform(1, 120)), float(rng.uniform(0, 1.5))
        if frame_block_size(fps, lat) != oracles.block_size(fps, lat):
            bad.append(f"frame_block_size #{k}")

        prev_count = int(rng.integers(0, 40))
        surv = int(rng.integers(0, prev_count + 1))
        blk = int(rng.integers(1, 31))
        if not close(missing_per_frame(prev_count, surv, blk), oracles.missing(prev_count, surv, blk)):
            bad.append(f"missing_per_frame #{k}")

        prev_beta = random_beta(rng)
        q0 = float(rng.integers(0, 40))
        u = float(rng.uniform(0, 6))
        blocks = [int(b) for b in rng.integers(1, 31, n)]
        c = int(rng.integers(n))
        got = update_betas(DegradationState(prev_beta.copy()), q0, u, blocks[c], blocks).beta
        if not close(got, oracles.betas(list(prev_beta), q0, u, blocks[c], blocks)):
            bad.append(f"update_betas #{k}")

        l_est = rng.uniform(0, 50, n)
        m = float(rng.integers(0, 50))
        got = compute_rap(l_est, m, prev_beta, blocks, c)
        alpha, gamma, rap = oracles.rap(list(l_est), m, list(prev_beta), blocks, c)
        if not (close(got.alpha, alpha) and close(got.gamma, gamma) and close(got.rap, rap)):
            bad.append(f"compute_rap #{k}")
    dt = time.perf_counter() - t0
    ok = not bad and dt < 1.0
    return ok, f"5 formulas x 1000 inputs, {len(bad)} mismatches {bad[:3]}, {dt:.2f}s (limit 1s)"


# 2. beta invariants


def check_beta_invariants():
    rng = np.random.default_rng(202)
    t0 = time.perf_counter()
    froze = carried = 0
    violations = 0
    for _ in range(10_000):
        s = DegradationState()
        for _ in range(int(rng.integers(1, 6))):
            n = int(rng.integers(1, 5))
            blocks = [int(b) for b in rng.integers(1, 31, n)]
            c = int(rng.integers(n))
            q0 = float(rng.integers(0, 30))
            u = float(rng.uniform(0, 8)) if rng.random() < 0.8 else 0.0
            before = s.beta.copy()
            s = update_betas(s, q0, u, blocks[c], blocks)
            if blocks[c] < 3:
                froze += 1
                if not np.array_equal(s.beta, before):
                    violations += 1
            elif max(blocks) > blocks[c]:
                carried += 1
            b = s.beta
            if not (b[0] == 1.0 and np.all(np.diff(b) <= 0) and np.all((b >= 0) & (b <= 1))):
                violations += 1
    dt = time.perf_counter() - t0
    ok = violations == 0 and froze > 0 and carried > 0 and dt < 5.0
    return ok, f"10000 sequences, {violations} violations, freeze hit {froze}x, carry-over hit {carried}x, {dt:.2f}s (limit 5s)"


# 3. survival count oracle


def random_frame_pair(rng):
    n = int(rng.integers(0, 31))
    prev = []
    for _ in range(n):
        w, h = rng.uniform(5, 80, 2)
        prev.append(BoundingBox(float(rng.uniform(0, 600)), float(rng.uniform(0, 440)), float(w), float(h)))
    curr = []
    for b in prev:
        if rng.random() < 0.8:
            shift = rng.normal(0, 0.25, 2) * (b.width, b.height)
            scale = rng.uniform(0.8, 1.2)
            curr.append(BoundingBox(b.left + shift[0], b.top + shift[1], b.width * scale, b.height * scale))
    for _ in range(int(rng.integers(0, 5))):
        curr.append(BoundingBox(float(rng.uniform(0, 600)), float(rng.uniform(0, 440)), 30.0, 60.0))
    rng.shuffle(curr)
    return prev, curr[:30]


def check_survival_oracle():
    rng = np.random.default_rng(303)
    t0 = time.perf_counter()
    mismatches = 0
    for _ in range(1000):
        prev, curr = random_frame_pair(rng)
        thr = float(rng.choice([0.3, 0.5, 0.7]))
        if count_surviving(prev, curr, thr) != oracles.surviving_by_definition(prev, curr, thr):
            mismatches += 1
    dt = time.perf_counter() - t0
    return mismatches == 0 and dt < 2.0, f"1000 frame pairs, {mismatches} mismatches, {dt:.2f}s (limit 2s)"


# 4. AP oracle


def check_ap_oracle():
    rng = np.random.default_rng(404)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(0, 21))
        flags = list(rng.random(n) < 0.6)
        conf = list(np.round(rng.random(n), 2))  # rounding forces ties
        gt = sum(flags) + int(rng.integers(0, 6))
        order = sorted(range(n), key=lambda i: -conf[i])
        want = oracles.ap_by_enumeration([flags[i] for i in order], gt)
        worst = max(worst, abs(ap_11point(flags, conf, gt).ap - float(want)))
    hand = float(ap_11point([True, False], [0.9, 0.5], 2).ap)
    hand_ok = Fraction(hand).limit_denominator(1000) == Fraction(6, 11) and hand == 6 / 11
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and hand_ok and dt < 2.0
    return ok, f"500 instances, max |err| {worst:.1e}; hand case {hand!r} vs 6/11; {dt:.2f}s (limit 2s)"


# 5. trend reproduction

TREND_VELOCITY = 2.0


def trend_scene(velocity):
    return ScenarioSpec(
        (SegmentSpec(300, 15, (1.0, 1.0, 1.0), velocity),),
        (DetectorSpec("fixed", 0.1, (0.9, 0.9, 0.9), 0.02, (0.4, 1.0)),),
    )


def trend_ap(velocity, multiplier, seed=5):
    sc = generate_synthetic_scenario(trend_scene(velocity), seed)
    run = run_simulation(sc.traces, sc.meta, WorkloadSchedule.constant(multiplier), StaticPolicy(0, 1))
    return realtime_ap(run, sc.ground_truth).ap


def non_increasing(xs):
    return all(b <= a for a, b in zip(xs, xs[1:]))


def check_trend():
    t0 = time.perf_counter()
    by_load = [trend_ap(TREND_VELOCITY, m) for m in (1, 2, 4)]
    by_speed = [trend_ap(v, 1) for v in (0, TREND_VELOCITY, 2 * TREND_VELOCITY)]
    dt = time.perf_counter() - t0
    ok = non_increasing(by_load) and non_increasing(by_speed) and dt < 30
    fmt = lambda xs: ", ".join(f"{x:.4f}" for x in xs)
    return ok, f"AP over load x1/x2/x4 [{fmt(by_load)}], over velocity 0/v/2v [{fmt(by_speed)}], {dt:.1f}s (limit 30s)"


# 6 & 7. composed benchmark

_bench_cache: dict = {}


def benchmark_results():
    if "res" not in _bench_cache:
        t0 = time.perf_counter()
        cfg = ExperimentConfig.from_dict(benchmark.config())
        w = prepare(cfg)
        results = [run_one(w, cfg, p, c) for p in expand_policies(cfg.policies, w.names) for c in cfg.cases]
        _bench_cache["res"] = (results, w, time.perf_counter() - t0)
    return _bench_cache["res"]


def check_policy_superiority():
    results, w, dt = benchmark_results()
    means: dict[str, list[float]] = {}
    for r in results:
        means.setdefault(r.policy, []).append(r.report.ap)
    mean = {p: sum(v) / len(v) for p, v in means.items()}
    statics = {p: v for p, v in mean.items() if p.startswith("static-")}
    best_name = max(statics, key=statics.get)
    roma = mean["roma"]
    ok = roma >= statics[best_name] - 0.01 and roma > mean["lad"] and roma > mean["tod"] and dt < 120
    return ok, (
        f"mean AP roma {roma:.4f}, best static {best_name} {statics[best_name]:.4f}, "
        f"tod {mean['tod']:.4f}, lad {mean['lad']:.4f}; {dt:.1f}s (limit 120s)"
    )


def check_selection_dynamics():
    results, w, _ = benchmark_results()
    heaviest = w.prior.detector_order[-1]
    n = len(w.names)
    share = {
        r.case: r.run.selection_frequency(n, "analyses")[heaviest] for r in results if r.policy == "roma"
    }
    # each content segment as its own static-camera video (no scene cuts)
    static_share = {}
    for label, seg in benchmark.CONTENT.items():
        raw = benchmark.config("static", cases={"x1": 1.0}, policies=["roma"])
        raw["scenario"] = ScenarioSpec((SegmentSpec(seg.frames, seg.objects, seg.size_weights, 0.0),), benchmark.DETECTORS).to_dict()
        cfg = ExperimentConfig.from_dict(raw)
        run = run_one(prepare(cfg), cfg, "roma", "x1").run
        static_share[label] = run.selection_frequency(n, "analyses")[heaviest]
    ok = share["x4"] < share["x1"] and all(v == 1.0 for v in static_share.values())
    statics = ", ".join(f"{k} {v:.3f}" for k, v in static_share.items())
    return ok, (
        f"heaviest ({w.names[heaviest]}) share of decisions x1 {share['x1']:.3f} > x4 {share['x4']:.3f}; "
        f"zero-velocity x1 [{statics}] (want all 1.000)"
    )


# 8. determinism


def check_determinism():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        cfg = benchmark.config("determinism", cases={"x1": 1.0, "x4": 4.0})
        (tmp / "cfg.json").write_text(json.dumps(cfg))
        codes = [cli_main(["simulate", "--config", str(tmp / "cfg.json"), "-o", str(tmp / o)]) for o in ("r1", "r2")]
        a, b = tmp / "r1" / "determinism", tmp / "r2" / "determinism"
        files = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
        checked = [f for f in files if f.name in ("summary.csv", "telemetry.csv")]
        diffs = [str(f) for f in files if (a / f).read_bytes() != (b / f).read_bytes()]
    ok = codes == [0, 0] and not diffs and any(f.name == "summary.csv" for f in checked) and len(checked) > 1
    return ok, f"two simulate runs, {len(files)} files compared ({len(checked)} summary/telemetry), {len(diffs)} differ"


# 9. prior reproduction

REFERENCE_PRIOR = [[1921, 3550, 2748], [4603, 3872, 2488], [8502, 3506, 2982], [9526, 3603, 2993]]


def check_prior():
    # two detectors over three 640x480 frames; region edges 2500 and 7500 px^2
    sq = lambda area, conf=0.9: BoundingBox(0.0, 0.0, area / 50.0, 50.0, conf)
    light = {
        0: (sq(1000), sq(2500), sq(8000)),
        1: (sq(2499), sq(7499), sq(7500, conf=0.2)),  # last one below the 0.3 confidence cut
        2: (),
    }
    heavy = {
        0: (sq(1000), sq(1200), sq(2500), sq(8000)),
        1: (sq(2000), sq(2499), sq(5000), sq(7500)),
        2: (sq(100), sq(20000, conf=0.3)),
    }
    expected = np.array([[2, 2, 1], [5, 2, 3]], dtype=float)
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        (tmp / "light.txt").write_text(format_mot(light))
        (tmp / "heavy.txt").write_text(format_mot(heavy))
        code = cli_main([
            "build-prior", "--detections", str(tmp / "heavy.txt"), str(tmp / "light.txt"),
            "--latency", "0.2", "0.04", "--frame-count", "3", "-o", str(tmp / "prior.txt"),
        ])
        built = PriorModel.loads((tmp / "prior.txt").read_text())
    matrix_ok = code == 0 and np.array_equal(built.matrix, expected[::-1]) and built.detector_order == (1, 0)
    reference = PriorModel(np.array(REFERENCE_PRIOR, dtype=float), RegionBoundaries((2500.0, 7500.0)))
    again = PriorModel.loads(reference.dumps())
    trip_ok = np.array_equal(again.matrix, reference.matrix) and again.dumps() == reference.dumps()
    ok = matrix_ok and trip_ok
    return ok, f"hand matrix {'matches' if matrix_ok else 'differs: ' + str(built.matrix.tolist())}; 4x3 reference prior round trip {'exact' if trip_ok else 'changed'}"


CRITERIA = [
    (1, "formula exactness", check_formulas),
    (2, "beta invariants", check_beta_invariants),
    (3, "survival count oracle", check_survival_oracle),
    (4, "AP oracle", check_ap_oracle),
    (5, "trend reproduction", check_trend),
    (6, "policy superiority", check_policy_superiority),
    (7, "selection dynamics", check_selection_dynamics),
    (8, "determinism", check_determinism),
    (9, "prior reproduction", check_prior),
]


def report_line(num, title, ok, detail):
    return f"{'PASS' if ok else 'FAIL'} criterion {num} ({title}): {detail}"


@pytest.mark.parametrize("num,title,check", CRITERIA, ids=[f"criterion{n}" for n, _, _ in CRITERIA])
def test_criterion(num, title, check, request):
    ok, detail = check()
    line = report_line(num, title, ok, detail)
    reporter = request.config.pluginmanager.getplugin("terminalreporter")
    if reporter is not None:
        reporter.write_line("")
        reporter.write_line(line)
    print(line)
    assert ok, line


if __name__ == "__main__":
    failed = 0
    for num, title, check in CRITERIA:
        ok, detail = check()
        failed += not ok
        print(report_line(num, title, ok, detail), flush=True)
    sys.exit(1 if failed else 0)
