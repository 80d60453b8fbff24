"""Independent reference computations used by the tests.

Written as plain loops over Python numbers, deliberately sharing no code
with the package.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def pixel_iou(a, b, scale=1):
    """IoU by rasterizing integer boxes (left, top, width, height) on a grid."""
    xs = [a[0], a[0] + a[2], b[0], b[0] + b[2]]
    ys = [a[1], a[1] + a[3], b[1], b[1] + b[3]]
    x0, y0 = min(xs), min(ys)
    w, h = (max(xs) - x0) * scale, (max(ys) - y0) * scale
    grid_a = np.zeros((h, w), dtype=bool)
    grid_b = np.zeros((h, w), dtype=bool)
    for g, box in ((grid_a, a), (grid_b, b)):
        l, t = (box[0] - x0) * scale, (box[1] - y0) * scale
        g[t : t + box[3] * scale, l : l + box[2] * scale] = True
    union = np.count_nonzero(grid_a | grid_b)
    return np.count_nonzero(grid_a & grid_b) / union


def plain_iou(a, b):
    ax2, ay2 = a.left + a.width, a.top + a.height
    bx2, by2 = b.left + b.width, b.top + b.height
    iw = max(0.0, min(ax2, bx2) - max(a.left, b.left))
    ih = max(0.0, min(ay2, by2) - max(a.top, b.top))
    inter = iw * ih
    return inter / (a.width * a.height + b.width * b.height - inter)


def surviving_by_definition(prev, curr, threshold):
    return len([p for p in prev if any(plain_iou(p, c) >= threshold for c in curr)])


def ap_by_enumeration(flags_in_rank_order, gt_count):
    """11-point AP: at each recall level take the best precision at any rank reaching it."""
    if gt_count == 0:
        return Fraction(1) if not flags_in_rank_order else Fraction(0)
    points = []
    tp = 0
    for rank, f in enumerate(flags_in_rank_order, start=1):
        tp += bool(f)
        points.append((Fraction(tp, gt_count), Fraction(tp, rank)))
    total = Fraction(0)
    for k in range(11):
        level = Fraction(k, 10)
        reachable = [p for r, p in points if r >= level]
        total += max(reachable, default=Fraction(0))
    return total / 11


# Straight-line versions of the estimator equations.


def latency_update(estimates, current, previous, measured):
    if current == previous:
        ratio = measured / estimates[current]
        return [ratio * x for x in estimates]
    out = list(estimates)
    out[current] = measured
    return out


def block_size(fps, latency, cap=30):
    return min(max(math.floor(fps * latency) + 1, 1), cap)


def missing(prev_count, surviving, block):
    return (prev_count - surviving) / block


def betas(prev_beta, q0, u, block, blocks, b_th=3):
    size = len(prev_beta)
    if block < b_th:
        return list(prev_beta)
    new = [1.0] * size
    for j in range(size):
        new[j] = prev_beta[j]
    new[0] = 1.0
    q = [float(q0)]
    for j in range(1, min(block, size)):
        q.append(max(q[j - 1] - u, 0.0))
        if q[j - 1] == 0:
            new[j] = 0.0
        else:
            new[j] = new[j - 1] * (q[j] / q[j - 1]) ** 2
    for j in range(min(block, size), min(max(blocks), size)):
        if prev_beta[j - 1] == 0:
            new[j] = 0.0
        else:
            new[j] = new[j - 1] * prev_beta[j] / prev_beta[j - 1]
    # clamp and enforce non-increasing
    out = []
    running = 1.0
    for j in range(size):
        v = 1.0 if j == 0 else min(max(new[j], 0.0), 1.0)
        running = min(running, v)
        out.append(running)
    return out


def rap(l_est, measured_count, beta, blocks, current):
    alpha = [x / (measured_count + 0.1) for x in l_est]
    means = [sum(beta[:b]) / b for b in blocks]
    gamma = [m / means[current] for m in means]
    return alpha, gamma, [a * g for a, g in zip(alpha, gamma)]
