"""Measurement-basis search maximizing the marginal OQ negativity."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuits import negativity_baseline, normalize_raw
from .oq import marginal_negativity
from .records import SweepRecord

HALF_PI = math.pi / 2


@dataclass(frozen=True)
class BasisOptimum:
    theta1: float
    theta2: float
    strength: float
    surface: np.ndarray | None = None  # rows of (theta1, theta2, strength), row-major over the coarse grid


def _better(cand: tuple[float, float, float], best: tuple[float, float, float]) -> bool:
    """Strictly larger strength wins; ties go to the smaller theta1, then theta2."""
    s, t1, t2 = cand
    bs, bt1, bt2 = best
    if s != bs:
        return s > bs
    return (t1, t2) < (bt1, bt2)


def _evaluate(args):
    rho, points = args
    return [marginal_negativity(rho, t1, t2) for t1, t2 in points]


def _evaluate_points(rho, points, workers):
    if workers and workers > 1 and len(points) > workers:
        chunks = np.array_split(np.arange(len(points)), workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_evaluate, [(rho, [points[i] for i in c]) for c in chunks])
            return [v for part in parts for v in part]
    return _evaluate((rho, points))


def optimize_basis(
    rho: np.ndarray,
    coarse_steps: int = 64,
    refine_iters: int = 20,
    keep_surface: bool = False,
    workers: int | None = None,
) -> BasisOptimum:
    """Angles ``(θ₁, θ₂) ∈ [0, π/2]²`` maximizing the marginal negativity of ``rho``.

    A ``coarse_steps × coarse_steps`` grid (corners included) is followed by a
    shrinking-box search: each iteration samples a 5×5 stencil around the
    incumbent and halves the box. Ties are broken toward the smallest θ₁, then
    θ₂, so a flat zero surface returns ``(0, 0)``.
    """
    if coarse_steps < 8:
        raise ValueError("coarse_steps must be at least 8")
    axis = np.linspace(0.0, HALF_PI, coarse_steps)
    points = [(float(a), float(b)) for a in axis for b in axis]
    values = _evaluate_points(rho, points, workers)

    best = (values[0], *points[0])
    for v, (t1, t2) in zip(values, points):
        if _better((v, t1, t2), best):
            best = (v, t1, t2)

    half = axis[1] - axis[0]
    offsets = np.linspace(-1.0, 1.0, 5)
    for _ in range(refine_iters):
        _, c1, c2 = best
        box = sorted(
            {
                (float(np.clip(c1 + half * a, 0.0, HALF_PI)), float(np.clip(c2 + half * b, 0.0, HALF_PI)))
                for a in offsets
                for b in offsets
            }
        )
        for v, (t1, t2) in zip(_evaluate_points(rho, box, workers), box):
            if _better((v, t1, t2), best):
                best = (v, t1, t2)
        half /= 2

    surface = None
    if keep_surface:
        surface = np.array([(t1, t2, v) for (t1, t2), v in zip(points, values)])
    strength, t1, t2 = best
    return BasisOptimum(theta1=t1, theta2=t2, strength=strength, surface=surface)


def strength_sweep(
    states: Sequence[tuple[float, np.ndarray]],
    theta1: float,
    theta2: float,
    alphas: Sequence[float] | None = None,
) -> list[SweepRecord]:
    """Raw and normalized marginal negativity at fixed angles, plus the baseline, per ``(tau, rho)``."""
    records = []
    for i, (tau, rho) in enumerate(states):
        records.append(
            SweepRecord(
                tau_s=float(tau),
                alpha_rad=None if alphas is None else float(alphas[i]),
                raw=marginal_negativity(rho, theta1, theta2),
                baseline=negativity_baseline(rho),
            )
        )
    return normalize_raw(records)
