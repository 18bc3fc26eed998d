"""Simplex decomposition of simple polytopes and fixed-order simplex quadrature."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .geometry import ConvexPolytope

SUPPORTED_ORDERS = (1, 2, 3, 4)


@dataclass(frozen=True)
class QuadratureRule:
    """Barycentric nodes ``(Q, dim + 1)`` and weights summing to one."""

    dim: int
    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.weights)


@dataclass
class SimplexBatch:
    """``simplices`` has shape ``(S, dim + 1, dim)``; ``volumes`` is ``(S,)``."""

    dim: int
    simplices: np.ndarray
    volumes: np.ndarray
    degenerate: bool = False

    def __len__(self):
        return len(self.volumes)

    @property
    def volume(self) -> float:
        return float(self.volumes.sum())


def _compositions(total: int, parts: int):
    """All non-negative integer tuples of length ``parts`` summing to ``total``."""
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(total + parts - 1 - prev - 1)
        yield tuple(out)


def _grundmann_moeller(n: int, s: int):
    """Grundmann-Moeller rule of degree ``2s + 1`` on the ``n``-simplex."""
    d = 2 * s + 1
    nodes, weights = [], []
    for i in range(s + 1):
        denom = d + n - 2 * i
        w = (-1) ** i * 2.0 ** (-2 * s) * denom ** d / (math.factorial(i) * math.factorial(d + n - i))
        for beta in _compositions(s - i, n + 1):
            nodes.append([(2 * b + 1) / denom for b in beta])
            weights.append(w)
    weights = np.array(weights) * math.factorial(n)
    return np.array(nodes), weights


def _stroud_degree2(n: int):
    # n + 1 points, equal weights: orbit of (b, a, ..., a)
    b = (1.0 + n / math.sqrt(n + 2.0)) / (n + 1.0)
    a = (1.0 - b) / n
    nodes = np.full((n + 1, n + 1), a)
    np.fill_diagonal(nodes, b)
    return nodes, np.full(n + 1, 1.0 / (n + 1))


@lru_cache(maxsize=None)
def quadrature_rule(d: int, q: int) -> QuadratureRule:
    """Rule exact for every polynomial of total degree ``<= q`` on a ``d``-simplex."""
    if not 1 <= d <= 6 or q not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported quadrature (dim={d}, order={q})")
    if q == 1:
        nodes, weights = np.full((1, d + 1), 1.0 / (d + 1)), np.ones(1)
    elif q == 2:
        nodes, weights = _stroud_degree2(d)
    else:
        nodes, weights = _grundmann_moeller(d, 1 if q == 3 else 2)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(d, q, nodes, weights)


def simplex_volumes(simplices: np.ndarray) -> np.ndarray:
    d = simplices.shape[-1]
    if len(simplices) == 0:
        return np.zeros(0)
    edges = simplices[:, 1:, :] - simplices[:, :1, :]
    return np.abs(np.linalg.det(edges)) / math.factorial(d)


def decompose(P: ConvexPolytope, rel_tol: float = 1e-14) -> SimplexBatch:
    """Split ``P`` into simplices by recursive centroid fans.

    For each edge and each ordering of its ``dim - 1`` facet labels, one
    simplex joins the polytope centroid, the centroids of the nested faces
    picked out by growing prefixes of that ordering, and the edge endpoints.
    Face centroids are plain vertex averages.
    """
    d = P.dim
    X = P.coords
    if P.is_empty:
        return SimplexBatch(d, np.zeros((0, d + 1, d)), np.zeros(0), degenerate=True)
    if d == 1:
        simplices = X[P.edges]
    else:
        simplices = _centroid_fan(X, P.facets, P.edges)
    vols = simplex_volumes(simplices)
    scale = np.ptp(X, axis=0).max() ** d if len(X) else 0.0
    keep = vols > rel_tol * scale
    return SimplexBatch(d, simplices[keep], vols[keep], degenerate=not keep.any())


def _encode(rows: np.ndarray, base: int) -> np.ndarray:
    code = np.zeros(len(rows), dtype=np.int64)
    for c in range(rows.shape[1]):
        code = code * base + rows[:, c]
    return code


def _centroid_fan(X: np.ndarray, F: np.ndarray, E: np.ndarray) -> np.ndarray:
    nv, d = F.shape
    labels, local = np.unique(F, return_inverse=True)
    local = local.reshape(F.shape)
    base = len(labels)

    # Face centroids for label subsets of size 1 .. d-2, keyed by encoded subset.
    face_keys, face_centroids = [], []
    for k in range(1, d - 1):
        cols = list(itertools.combinations(range(d), k))
        sub = np.concatenate([local[:, c] for c in cols])
        owner = np.tile(np.arange(nv), len(cols))
        code = _encode(sub, base)
        uniq, inv = np.unique(code, return_inverse=True)
        sums = np.zeros((len(uniq), X.shape[1]))
        np.add.at(sums, inv, X[owner])
        counts = np.bincount(inv, minlength=len(uniq))
        face_keys.append(uniq)
        face_centroids.append(sums / counts[:, None])

    # Labels shared by the endpoints of each edge, in ascending order.
    la, lb = local[E[:, 0]], local[E[:, 1]]
    shared = (la[:, :, None] == lb[:, None, :]).any(axis=2)
    common = la[shared].reshape(len(E), d - 1)

    center = X.mean(axis=0)
    ne = len(E)
    blocks = []
    for perm in itertools.permutations(range(d - 1), d - 2):
        simplex = np.empty((ne, d + 1, X.shape[1]))
        simplex[:, 0] = center
        for k in range(1, d - 1):
            sub = np.sort(common[:, list(perm[:k])], axis=1)
            idx = np.searchsorted(face_keys[k - 1], _encode(sub, base))
            simplex[:, k] = face_centroids[k - 1][idx]
        simplex[:, d - 1] = X[E[:, 0]]
        simplex[:, d] = X[E[:, 1]]
        blocks.append(simplex)
    return np.concatenate(blocks)


def _quad_points(batch: SimplexBatch, rule: QuadratureRule) -> np.ndarray:
    return np.matmul(rule.nodes, batch.simplices)


def integrate(batch: SimplexBatch, f, q: int) -> np.ndarray:
    """Integrate a vectorized ``f: (M, d) -> (M, ...)`` over the batch."""
    rule = quadrature_rule(batch.dim, q)
    pts = _quad_points(batch, rule)
    vals = np.asarray(f(pts.reshape(-1, batch.dim)))
    vals = vals.reshape(len(batch), len(rule), *vals.shape[1:])
    return np.einsum("s,q,sq...->...", batch.volumes, rule.weights, vals)


def integrate_moments(batch: SimplexBatch, density, q: int):
    """Mass and first moment ``(m, int rho x)`` of the density over the batch."""
    d = batch.dim
    if len(batch) == 0:
        return 0.0, np.zeros(d)
    rule = quadrature_rule(d, q)
    pts = _quad_points(batch, rule)
    rho = density(pts.reshape(-1, d)).reshape(len(batch), len(rule))
    wr = batch.volumes[:, None] * rule.weights[None, :] * rho
    return float(wr.sum()), wr.ravel() @ pts.reshape(-1, d)


def integrate_energy_term(batch: SimplexBatch, density, site, weight: float, q: int) -> float:
    """``int rho(x) (|x - site|^2 - weight) dx`` over the batch."""
    if len(batch) == 0:
        return 0.0
    site = np.asarray(site, dtype=float)
    d = batch.dim
    rule = quadrature_rule(d, q)
    pts = _quad_points(batch, rule)
    rho = density(pts.reshape(-1, d)).reshape(len(batch), len(rule))
    r2 = np.sum((pts - site) ** 2, axis=2)
    wr = batch.volumes[:, None] * rule.weights[None, :] * rho
    return float(np.sum(wr * (r2 - weight)))


def cell_integrals(batch: SimplexBatch, density, site, q: int):
    """Mass, first moment and ``int rho |x - site|^2`` from one density sweep."""
    d = batch.dim
    if len(batch) == 0:
        return 0.0, np.zeros(d), 0.0
    rule = quadrature_rule(d, q)
    pts = _quad_points(batch, rule)
    rho = density(pts.reshape(-1, d)).reshape(len(batch), len(rule))
    wr = batch.volumes[:, None] * rule.weights[None, :] * rho
    mass = float(wr.sum())
    moment = wr.ravel() @ pts.reshape(-1, d)
    r2 = np.sum((pts - np.asarray(site, dtype=float)) ** 2, axis=2)
    return mass, moment, float(np.sum(wr * r2))
