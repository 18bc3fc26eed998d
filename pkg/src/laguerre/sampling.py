"""White- and blue-noise site generators on the unit cube."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

log = logging.getLogger(__name__)

# Packing fractions at which random sequential addition of hard spheres
# saturates, by dimension (Torquato, Uche & Stillinger 2006).
SATURATION = {1: 0.7476, 2: 0.5472, 3: 0.3841, 4: 0.2580, 5: 0.1665, 6: 0.1037}


@dataclass
class BlueNoise:
    points: np.ndarray
    radius: float
    darts: int
    stalled: bool

    @property
    def status(self) -> str:
        return "stalled" if self.stalled else "ok"


def white_noise(n: int, d: int, rng) -> np.ndarray:
    if n < 1:
        raise ValueError("need at least one site")
    return rng.random((n, d))


def ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def poisson_radius(n: int, d: int, fill: float = 0.7) -> float:
    """Exclusion radius at which ``n`` darts reach ``fill`` of the saturation packing."""
    phi = fill * SATURATION[d]
    return 2.0 * (phi / (n * ball_volume(d))) ** (1.0 / d)


def blue_noise(n: int, d: int, rng, radius: float | None = None, batch: int | None = None,
               max_darts: int | None = None) -> BlueNoise:
    """Dart throwing: accept uniform candidates at least ``radius`` from all accepted ones.

    Candidates are drawn in batches; a batch is checked against the accepted
    set with a k-d tree and then greedily, in draw order, against itself.
    Stops at ``n`` points, or with ``stalled`` set once ``max_darts``
    candidates have been spent.
    """
    if n < 1:
        raise ValueError("need at least one site")
    radius = poisson_radius(n, d) if radius is None else float(radius)
    batch = batch or max(64, n // 4)
    max_darts = max_darts or 200 * n + 10_000
    accepted = np.zeros((0, d))
    tree = None
    darts = 0
    while len(accepted) < n and darts < max_darts:
        cand = rng.random((batch, d))
        darts += batch
        if tree is not None:
            near = tree.query_ball_point(cand, radius, return_length=True)
            cand = cand[near == 0]
        if len(cand) == 0:
            continue
        cand = _greedy(cand, radius)
        room = n - len(accepted)
        accepted = np.vstack([accepted, cand[:room]])
        tree = cKDTree(accepted)
    stalled = len(accepted) < n
    if stalled:
        log.warning("blue noise stalled at %d of %d points (radius %.4g)", len(accepted), n, radius)
    return BlueNoise(accepted, radius, darts, stalled)


def _greedy(cand: np.ndarray, radius: float) -> np.ndarray:
    """Accept candidates in draw order, skipping any within ``radius`` of an earlier acceptance."""
    tree = cKDTree(cand)
    taken = np.zeros(len(cand), dtype=bool)
    for i in range(len(cand)):
        nbrs = tree.query_ball_point(cand[i], radius)
        if not any(taken[j] for j in nbrs if j != i):
            taken[i] = True
    return cand[taken]


def min_distance(points: np.ndarray) -> float:
    if len(points) < 2:
        return math.inf
    dist, _ = cKDTree(points).query(points, k=2)
    return float(dist[:, 1].min())
