"""Restricted power diagrams by per-site clipping of the domain elements."""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .densities import Uniform
from . import _kernels
from .geometry import (SIDE_EPS, SNAP_EPS, ConvexPolytope, EmptyResult, clip_signed,
                       cube_polytope, security_radius)
from .neighbors import NeighborCache
from .quadrature import cell_integrals, decompose

TIMING_KEYS = ("vor", "knn", "tri", "quad")


def lift_sites(Y, w=None) -> np.ndarray:
    """Append ``sqrt(max(w) - w_i)`` to each site so power cells become Voronoi cells."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if w is None:
        return np.hstack([Y, np.zeros((len(Y), 1))])
    w = np.asarray(w, dtype=float)
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    return np.hstack([Y, np.sqrt(w.max() - w)[:, None]])


@dataclass
class SiteSet:
    Y: np.ndarray
    w: np.ndarray | None = None

    def __post_init__(self):
        self.Y = np.atleast_2d(np.asarray(self.Y, dtype=float))
        self.w = np.zeros(len(self.Y)) if self.w is None else np.asarray(self.w, dtype=float).copy()
        if self.w.shape != (len(self.Y),):
            raise ValueError("one weight per site")

    @property
    def d(self) -> int:
        return self.Y.shape[1]

    @property
    def n(self) -> int:
        return len(self.Y)

    @property
    def Z(self) -> np.ndarray:
        return lift_sites(self.Y, self.w)


@dataclass
class DomainMesh:
    elements: list

    @classmethod
    def unit_cube(cls, d: int) -> "DomainMesh":
        return cls([cube_polytope(d)])

    @property
    def dim(self) -> int:
        return self.elements[0].dim


@dataclass
class PowerDiagram:
    sites: SiteSet
    cells: list
    mass: np.ndarray
    moment: np.ndarray
    quadratic: np.ndarray
    nvertices: np.ndarray
    nfacets: np.ndarray
    order: int
    timing: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.mass)

    @property
    def empty(self) -> np.ndarray:
        return self.mass <= 0.0

    @property
    def centroids(self) -> np.ndarray:
        """Cell centroids; rows of empty cells are NaN."""
        with np.errstate(invalid="ignore", divide="ignore"):
            c = self.moment / self.mass[:, None]
        c[self.empty] = np.nan
        return c

    @property
    def total_mass(self) -> float:
        return float(self.mass.sum())


def compute_cell(i: int, element: ConvexPolytope, cache: NeighborCache, Z=None,
                 compiled: bool = True) -> ConvexPolytope:
    """Clip ``element`` by bisectors with the neighbours of site ``i`` in rank order.

    Stops once the next neighbour is at least a security radius away, the
    cell vanishes, or every other site has been used.  ``compiled=False``
    runs the same loop through :func:`~laguerre.geometry.clip_signed`.
    """
    Z = cache.Z if Z is None else Z
    n_other = cache.n - 1
    if n_other == 0:
        return element
    if not compiled:
        return _compute_cell_numpy(i, element, cache, Z)
    zi = Z[i]
    X, F, E = element.points.copy(), element.facets.copy(), element.edges.copy()
    nv, ne, rank = len(X), len(E), 0
    idx, dist = cache.neighbors(i, min(cache.initial_k, n_other))
    while True:
        X, F, E, nv, ne, rank, status = _kernels.clip_cell(
            X, F, E, nv, ne, zi, Z, idx, dist, rank, SIDE_EPS, SNAP_EPS)
        if status == _kernels.EMPTY:
            return ConvexPolytope.empty(element.dim)
        if status == _kernels.DONE or len(idx) >= n_other:
            break
        idx, dist = cache.neighbors(i, len(idx) + 1)
    return ConvexPolytope._trusted(element.dim, X[:nv].copy(), F[:nv].copy(), E[:ne].copy())


def _compute_cell_numpy(i, element, cache, Z):
    zi = Z[i]
    P = element
    n_other = cache.n - 1
    rank = 0
    idx, dist = cache.neighbors(i, min(cache.initial_k, n_other))
    while rank < n_other:
        if rank >= len(idx):
            idx, dist = cache.neighbors(i, rank + 1)
        j = int(idx[rank])
        if dist[rank] >= security_radius(zi, P):
            break
        rank += 1
        if dist[rank - 1] == 0.0:
            continue  # coincident lifted sites share no bisector
        normal = (zi - Z[j]) / dist[rank - 1]
        try:
            P = clip_signed(P, (P.points - 0.5 * (zi + Z[j])) @ normal, j)
        except EmptyResult:
            return ConvexPolytope.empty(element.dim)
    return P


def _compute_sites(args):
    Z, Y, elements, density, order, sites, initial_k, increment = args
    cache = NeighborCache(Z, initial_k=initial_k, increment=increment)
    cache.prefetch(sites)
    timing = dict.fromkeys(TIMING_KEYS, 0.0)
    d = Y.shape[1]
    out = []
    for i in sites:
        fragments = []
        mass, moment, quad = 0.0, np.zeros(d), 0.0
        t0 = time.perf_counter()
        knn0 = cache.seconds
        for element in elements:
            P = compute_cell(i, element, cache, Z)
            if not P.is_empty:
                fragments.append(P)
        t1 = time.perf_counter()
        timing["knn"] += cache.seconds - knn0
        timing["vor"] += (t1 - t0) - (cache.seconds - knn0)
        for P in fragments:
            t2 = time.perf_counter()
            batch = decompose(P)
            t3 = time.perf_counter()
            m, mom, qd = cell_integrals(batch, density, Y[i], order)
            timing["tri"] += t3 - t2
            timing["quad"] += time.perf_counter() - t3
            mass += m
            moment = moment + mom
            quad += qd
        out.append((i, fragments, mass, moment, quad))
    return out, timing


_POOLS: dict[int, ProcessPoolExecutor] = {}


def _pool(workers: int) -> ProcessPoolExecutor:
    if workers not in _POOLS:
        _POOLS[workers] = ProcessPoolExecutor(max_workers=workers)
    return _POOLS[workers]


def default_workers() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1


def compute_diagram(sites: SiteSet, mesh: DomainMesh | None = None, density=None,
                    order: int | None = None, workers: int = 1,
                    initial_k: int = 50, increment: int = 10) -> PowerDiagram:
    """Restricted power diagram of ``sites`` with per-cell mass and moments.

    Work is split over sites; results are reduced in site order so the
    output does not depend on ``workers``.
    """
    density = Uniform() if density is None else density
    order = density.recommended_order if order is None else order
    mesh = DomainMesh.unit_cube(sites.d) if mesh is None else mesh
    if sites.n < 1:
        raise ValueError("need at least one site")
    Z = sites.Z
    n = sites.n
    chunks = np.array_split(np.arange(n), max(1, min(workers, n)) * (4 if workers > 1 else 1))
    tasks = [(Z, sites.Y, mesh.elements, density, order, c.tolist(), initial_k, increment)
             for c in chunks if len(c)]
    t0 = time.perf_counter()
    if workers > 1:
        results = list(_pool(workers).map(_compute_sites, tasks))
    else:
        results = [_compute_sites(t) for t in tasks]
    total = time.perf_counter() - t0

    cells = [None] * n
    mass = np.zeros(n)
    moment = np.zeros((n, sites.d))
    quad = np.zeros(n)
    timing = dict.fromkeys(TIMING_KEYS, 0.0)
    for chunk, chunk_timing in results:
        for key in TIMING_KEYS:
            timing[key] += chunk_timing[key]
        for i, fragments, m, mom, qd in chunk:
            cells[i] = fragments
            mass[i], moment[i], quad[i] = m, mom, qd
    timing["total"] = total
    nverts = np.array([sum(P.nvertices for P in c) for c in cells])
    nfacets = np.array([sum(P.nfacets for P in c) for c in cells])
    return PowerDiagram(sites, cells, mass, moment, quad, nverts, nfacets, order, timing)
