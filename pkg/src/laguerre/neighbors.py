"""Incremental k-nearest-neighbour lists over (lifted) sites."""

from __future__ import annotations

import time

import numpy as np
from scipy.spatial import cKDTree

INITIAL_K = 50
INCREMENT = 10


class NeighborsExhausted(LookupError):
    """Every other site has already been handed out."""


class NeighborCache:
    """Per-site neighbour lists grown on demand from a static k-d tree.

    The first request for a site materialises ``initial_k`` neighbours;
    requests beyond the current list append ``increment`` more at a time.
    Ties in distance are broken by ascending site index.
    """

    def __init__(self, Z, initial_k: int = INITIAL_K, increment: int = INCREMENT):
        self.Z = np.ascontiguousarray(Z, dtype=float)
        if self.Z.ndim != 2 or len(self.Z) == 0:
            raise ValueError("need at least one site")
        self.initial_k = int(initial_k)
        self.increment = int(increment)
        self.tree = cKDTree(self.Z)
        self._lists: dict[int, np.ndarray] = {}
        self._dists: dict[int, np.ndarray] = {}
        self.seconds = 0.0
        self.extensions = 0

    @property
    def n(self) -> int:
        return len(self.Z)

    def _query(self, i: int, k: int):
        k = min(k + 1, self.n)
        dist, idx = self.tree.query(self.Z[i], k=k)
        dist, idx = np.atleast_1d(dist), np.atleast_1d(idx)
        mask = idx != i
        dist, idx = dist[mask], idx[mask]
        if len(idx) == k:
            # self may tie with a duplicate and get pushed out of range
            dist, idx = dist[:-1], idx[:-1]
        order = np.lexsort((idx, dist))
        return idx[order].astype(np.int64), dist[order]

    def prefetch(self, sites) -> None:
        """Materialise the initial lists for many sites in one tree query."""
        sites = np.asarray([s for s in sites if s not in self._lists], dtype=np.int64)
        if len(sites) == 0 or self.n == 1:
            return
        t0 = time.perf_counter()
        k = min(self.initial_k, self.n - 1) + 1
        dist, idx = self.tree.query(self.Z[sites], k=k)
        dist, idx = dist.reshape(len(sites), k), idx.reshape(len(sites), k)
        for row, i in enumerate(sites.tolist()):
            mask = idx[row] != i
            di, ii = dist[row][mask][: k - 1], idx[row][mask][: k - 1]
            order = np.lexsort((ii, di))
            self._lists[i] = ii[order].astype(np.int64)
            self._dists[i] = di[order]
        self.seconds += time.perf_counter() - t0

    def neighbors(self, i: int, count: int):
        """Indices and distances of the ``count`` nearest sites to site ``i``."""
        if count > self.n - 1:
            raise NeighborsExhausted(f"site {i} has only {self.n - 1} neighbours")
        t0 = time.perf_counter()
        have = self._lists.get(i)
        if have is None:
            k = min(self.initial_k, self.n - 1)
            self._lists[i], self._dists[i] = self._query(i, k)
            have = self._lists[i]
        while len(have) < count:
            k = min(len(have) + self.increment, self.n - 1)
            self._lists[i], self._dists[i] = self._query(i, k)
            have = self._lists[i]
            self.extensions += 1
        self.seconds += time.perf_counter() - t0
        return self._lists[i], self._dists[i]

    def next_neighbor(self, i: int, j: int) -> int:
        """The ``j``-th nearest site to site ``i`` (``j`` counts from 1)."""
        if j < 1:
            raise ValueError("neighbour rank starts at 1")
        idx, _ = self.neighbors(i, j)
        return int(idx[j - 1])


def build(Z, **kwargs) -> NeighborCache:
    return NeighborCache(Z, **kwargs)
