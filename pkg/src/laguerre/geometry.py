"""Simple convex polytopes in vertex form, with halfspace clipping.

A polytope is stored as its vertices (lifted to one extra coordinate) plus,
for every vertex, the sorted labels of the ``dim`` facets it lies on.
Negative labels are facets of the input domain, non-negative labels are
bisectors.  Because every vertex carries exactly ``dim`` labels, edges can
be read off the labels alone: two vertices are adjacent when they share
``dim - 1`` of them.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

SIDE_EPS = 1e-12
SNAP_EPS = 1e-12
MAX_DIM = 6


class EmptyResult(Exception):
    """Raised by :func:`clip` when the whole polytope lies outside."""


class Side(enum.Enum):
    INSIDE = 1
    ON_BOUNDARY = 0
    OUTSIDE = -1


@dataclass(frozen=True)
class HalfSpace:
    """``{x : (x - anchor) . normal >= 0}`` carrying a facet label."""

    normal: np.ndarray
    anchor: np.ndarray
    label: int

    def __post_init__(self):
        normal = np.asarray(self.normal, dtype=float)
        norm = np.linalg.norm(normal)
        if not norm > 0:
            raise ValueError("halfspace normal must be nonzero")
        object.__setattr__(self, "normal", normal / norm)
        object.__setattr__(self, "anchor", np.asarray(self.anchor, dtype=float))

    @classmethod
    def bisector(cls, zi, zj, label: int) -> "HalfSpace":
        """Side of the bisector of ``zi`` and ``zj`` that contains ``zi``."""
        zi = np.asarray(zi, dtype=float)
        zj = np.asarray(zj, dtype=float)
        return cls(zi - zj, 0.5 * (zi + zj), int(label))

    def flipped(self, label: int | None = None) -> "HalfSpace":
        return HalfSpace(-self.normal, self.anchor, self.label if label is None else label)

    def signed_distance(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.anchor) @ self.normal


@dataclass(frozen=True, eq=False)
class ConvexPolytope:
    """Vertex representation of a simple ``dim``-polytope.

    ``points`` has shape ``(V, dim + 1)``; the last column is the lifted
    coordinate (zero for anything living in the domain).  ``facets`` has
    shape ``(V, dim)`` with each row sorted.  ``edges`` is an ``(E, 2)``
    index array kept in sync by :func:`clip`; when missing it is derived
    from the labels.
    """

    dim: int
    points: np.ndarray
    facets: np.ndarray
    edges: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float).reshape(-1, self.dim + 1)
        facets = np.sort(np.asarray(self.facets, dtype=np.int64).reshape(-1, self.dim), axis=1)
        if len(points) != len(facets):
            raise ValueError("points and facets disagree on the vertex count")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "facets", facets)
        if self.edges is None:
            object.__setattr__(self, "edges", _edges_from_labels(facets))
        else:
            object.__setattr__(self, "edges", np.asarray(self.edges, dtype=np.int64).reshape(-1, 2))

    @classmethod
    def _trusted(cls, dim, points, facets, edges) -> "ConvexPolytope":
        # internal constructor: arrays already validated and row-sorted
        obj = object.__new__(cls)
        object.__setattr__(obj, "dim", dim)
        object.__setattr__(obj, "points", points)
        object.__setattr__(obj, "facets", facets)
        object.__setattr__(obj, "edges", edges)
        return obj

    @classmethod
    def empty(cls, dim: int) -> "ConvexPolytope":
        return cls(dim, np.zeros((0, dim + 1)), np.zeros((0, dim), dtype=np.int64),
                   np.zeros((0, 2), dtype=np.int64))

    @property
    def nvertices(self) -> int:
        return len(self.points)

    @property
    def is_empty(self) -> bool:
        return len(self.points) == 0

    @property
    def coords(self) -> np.ndarray:
        """Vertex coordinates with the lifted column stripped."""
        return self.points[:, : self.dim]

    def labels(self) -> np.ndarray:
        return np.unique(self.facets)

    @property
    def nfacets(self) -> int:
        return len(np.unique(self.facets)) if len(self.facets) else 0

    def is_simple(self) -> bool:
        if self.is_empty:
            return True
        rows_ok = all(len(set(row)) == self.dim for row in self.facets.tolist())
        return rows_ok and len(np.unique(self.facets, axis=0)) == len(self.facets)


def cube_polytope(d: int, lo=None, hi=None) -> ConvexPolytope:
    """Axis-aligned box ``[lo, hi]`` in ``d`` dimensions.

    The face ``x_k = lo_k`` is labelled ``-(2k + 1)`` and ``x_k = hi_k`` is
    labelled ``-(2k + 2)``.
    """
    if not 1 <= d <= MAX_DIM:
        raise ValueError(f"dimension {d} outside the supported range [1, {MAX_DIM}]")
    lo = np.zeros(d) if lo is None else np.asarray(lo, dtype=float)
    hi = np.ones(d) if hi is None else np.asarray(hi, dtype=float)
    if lo.shape != (d,) or hi.shape != (d,) or np.any(lo >= hi):
        raise ValueError("box bounds must satisfy lo < hi componentwise")
    bits = np.array(list(itertools.product((0, 1), repeat=d)), dtype=np.int64)
    points = np.zeros((len(bits), d + 1))
    points[:, :d] = np.where(bits == 1, hi, lo)
    facets = -(2 * np.arange(d) + 1 + bits)
    return ConvexPolytope(d, points, facets)


def simplex_polytope(vertices) -> ConvexPolytope:
    """A ``d``-simplex from ``d + 1`` vertices.

    Facet ``-(k + 1)`` is the one opposite vertex ``k``.
    """
    vertices = np.asarray(vertices, dtype=float)
    n, d = vertices.shape
    if n != d + 1:
        raise ValueError("a d-simplex needs d + 1 vertices")
    points = np.hstack([vertices, np.zeros((n, 1))])
    facets = np.array([[-(m + 1) for m in range(n) if m != k] for k in range(n)], dtype=np.int64)
    return ConvexPolytope(d, points, facets.reshape(n, d))


_DROP_ONE: dict[int, np.ndarray] = {
    n: np.array([[c for c in range(n) if c != p] for p in range(n)], dtype=np.int64).reshape(n, n - 1)
    for n in range(1, MAX_DIM + 1)
}


def _sub_keys(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Every row with one entry dropped, stacked, plus the source row index."""
    m, n = rows.shape
    keys = rows[:, _DROP_ONE[n]].transpose(1, 0, 2).reshape(m * n, n - 1)
    return keys, np.tile(np.arange(m), n)


def _matching_pairs(keys: np.ndarray, owners: np.ndarray) -> np.ndarray:
    """Pairs ``(a, b)``, ``a < b``, of owners that share an identical key row."""
    if len(keys) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if keys.shape[1] == 0:
        uniq = np.unique(owners)
        pairs = list(itertools.combinations(uniq.tolist(), 2))
        return np.array(pairs, dtype=np.int64).reshape(-1, 2)
    if keys.shape[1] == 1:
        order = np.argsort(keys[:, 0], kind="stable")
        sk = keys[order, 0]
        new_run = np.empty(len(sk), dtype=bool)
        new_run[0] = True
        new_run[1:] = sk[1:] != sk[:-1]
    else:
        order = np.lexsort(keys.T[::-1])
        sk = keys[order]
        new_run = np.empty(len(sk), dtype=bool)
        new_run[0] = True
        new_run[1:] = np.any(sk[1:] != sk[:-1], axis=1)
    so = owners[order]
    starts = np.flatnonzero(new_run)
    counts = np.diff(np.append(starts, len(sk)))
    twos = starts[counts == 2]
    a, b = so[twos], so[twos + 1]
    pairs = np.stack([np.minimum(a, b), np.maximum(a, b)], axis=1)
    if np.any(counts > 2):
        extra = [pairs]
        for s, c in zip(starts[counts > 2], counts[counts > 2]):
            extra.append(np.array(list(itertools.combinations(sorted(so[s:s + c].tolist()), 2)),
                                  dtype=np.int64))
        pairs = np.unique(np.concatenate(extra), axis=0)
    return pairs


def _edges_from_labels(facets: np.ndarray) -> np.ndarray:
    if len(facets) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    return _matching_pairs(*_sub_keys(facets))


def extract_edges(P: ConvexPolytope) -> np.ndarray:
    """All vertex pairs sharing exactly ``dim - 1`` facet labels."""
    return _edges_from_labels(P.facets)


def side(x, H: HalfSpace, eps: float = SIDE_EPS) -> Side:
    s = float(H.signed_distance(x))
    if s > eps:
        return Side.INSIDE
    if s < -eps:
        return Side.OUTSIDE
    return Side.ON_BOUNDARY


def clip(P: ConvexPolytope, H: HalfSpace, eps: float = SIDE_EPS) -> ConvexPolytope:
    """Intersect ``P`` with ``H``, keeping the result simple.

    Vertices within ``eps`` of the plane count as inside (the plane is
    nudged outward by an infinitesimal), so every crossed edge has exactly
    one strictly-outside endpoint and each cut produces one new vertex whose
    labels are the edge's ``dim - 1`` labels plus ``H.label``.  Edges are
    updated incrementally rather than re-derived from scratch.
    """
    if P.is_empty:
        raise EmptyResult()
    return clip_signed(P, (P.points - H.anchor) @ H.normal, H.label, eps)


def clip_signed(P: ConvexPolytope, s: np.ndarray, label: int, eps: float = SIDE_EPS) -> ConvexPolytope:
    """:func:`clip` given precomputed signed distances ``s`` of the vertices."""
    d = P.dim
    X, F, E = P.points, P.facets, P.edges
    out = s < -eps
    if not out.any():
        return P
    if out.all():
        raise EmptyResult()

    keep = ~out
    nk = int(keep.sum())
    remap = np.full(len(X), -1, dtype=np.int64)
    remap[keep] = np.arange(nk)

    o0, o1 = out[E[:, 0]], out[E[:, 1]]
    interior = E[~o0 & ~o1]
    crossed = E[o0 != o1]
    flip = out[crossed[:, 0]]
    a = np.where(flip, crossed[:, 1], crossed[:, 0])
    b = np.where(flip, crossed[:, 0], crossed[:, 1])
    k = len(a)

    sa, sb = s[a], s[b]
    t = np.clip(sa / (sa - sb), 0.0, 1.0)
    t[t < SNAP_EPS] = 0.0
    t[t > 1.0 - SNAP_EPS] = 1.0
    q = X[a] + t[:, None] * (X[b] - X[a])

    Fa, Fb = F[a], F[b]
    shared = (Fa[:, :, None] == Fb[:, None, :]).any(axis=2)
    common = Fa[shared].reshape(k, d - 1)
    newF = np.sort(np.hstack([common, np.full((k, 1), label, dtype=np.int64)]), axis=1)

    new_ids = nk + np.arange(k)
    edges = [remap[interior], np.stack([remap[a], new_ids], axis=1)]
    if d >= 2:
        if d == 2:
            on_plane = _matching_pairs(np.zeros((k, 0), dtype=np.int64), np.arange(k))
        else:
            on_plane = _matching_pairs(*_sub_keys(common))
        edges.append(on_plane + nk)

    return ConvexPolytope._trusted(
        d,
        np.vstack([X[keep], q]),
        np.vstack([F[keep], newF]),
        np.concatenate(edges),
    )


def security_radius(z, P: ConvexPolytope) -> float:
    """Twice the largest distance from ``z`` to a vertex of ``P``."""
    if P.is_empty:
        raise ValueError("security radius of an empty polytope")
    diff = P.points - np.asarray(z, dtype=float)
    return 2.0 * float(np.sqrt(np.max(np.einsum("ij,ij->i", diff, diff))))
