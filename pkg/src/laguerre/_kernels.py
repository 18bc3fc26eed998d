"""Compiled inner loop for clipping one cell against ranked neighbours.

Mirrors :func:`laguerre.geometry.clip_signed` (same side rule, snapping and
label bookkeeping) but keeps the polytope in preallocated buffers so a
whole cell is clipped without returning to Python.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# clip_cell status codes
DONE = 0
NEED_NEIGHBORS = 1
EMPTY = 2


@njit(cache=True)
def _grow2(a, rows):
    out = np.empty((rows, a.shape[1]), dtype=a.dtype)
    out[: a.shape[0]] = a
    return out


@njit(cache=True)
def _clip_once(X, F, E, nv, ne, normal, mid, label, eps, snap):
    """Clip buffers in place; returns (X, F, E, nv, ne, status) with status 0 ok, 1 unchanged, 2 empty."""
    dim = F.shape[1]
    amb = X.shape[1]
    s = np.empty(nv)
    nout = 0
    for v in range(nv):
        acc = 0.0
        for c in range(amb):
            acc += (X[v, c] - mid[c]) * normal[c]
        s[v] = acc
        if acc < -eps:
            nout += 1
    if nout == 0:
        return X, F, E, nv, ne, 1
    if nout == nv:
        return X, F, E, nv, ne, 2

    remap = np.empty(nv, dtype=np.int64)
    nk = 0
    for v in range(nv):
        if s[v] >= -eps:
            remap[v] = nk
            nk += 1
        else:
            remap[v] = -1

    # count crossed edges to size the new buffers
    ncross = 0
    for e in range(ne):
        if (s[E[e, 0]] < -eps) != (s[E[e, 1]] < -eps):
            ncross += 1

    nv2 = nk + ncross
    X2 = np.empty((max(nv2, X.shape[0]), amb))
    F2 = np.empty((max(nv2, F.shape[0]), dim), dtype=np.int64)
    for v in range(nv):
        r = remap[v]
        if r >= 0:
            X2[r] = X[v]
            F2[r] = F[v]

    common = np.empty((ncross, max(dim - 1, 1)), dtype=np.int64)
    cap_e = max(E.shape[0], ne + ncross * dim)
    E2 = np.empty((cap_e, 2), dtype=np.int64)
    ne2 = 0
    k = 0
    for e in range(ne):
        a = E[e, 0]
        b = E[e, 1]
        oa = s[a] < -eps
        ob = s[b] < -eps
        if not oa and not ob:
            E2[ne2, 0] = remap[a]
            E2[ne2, 1] = remap[b]
            ne2 += 1
        elif oa != ob:
            if oa:
                a, b = b, a
            sa = s[a]
            sb = s[b]
            t = sa / (sa - sb)
            if t < snap:
                t = 0.0
            elif t > 1.0 - snap:
                t = 1.0
            row = nk + k
            for c in range(amb):
                X2[row, c] = X[a, c] + t * (X[b, c] - X[a, c])
            m = 0
            for p in range(dim):
                la = F[a, p]
                for r in range(dim):
                    if F[b, r] == la:
                        if m < dim - 1:
                            common[k, m] = la
                        m += 1
                        break
            # insert label into the sorted common labels
            pos = 0
            for p in range(dim - 1):
                if common[k, p] < label:
                    pos += 1
            for p in range(dim - 1):
                F2[row, p if p < pos else p + 1] = common[k, p]
            F2[row, pos] = label
            E2[ne2, 0] = remap[a]
            E2[ne2, 1] = row
            ne2 += 1
            k += 1

    # edges among the new vertices: share dim - 2 of their old labels
    if dim >= 2:
        for p in range(ncross):
            for r in range(p + 1, ncross):
                shared = 0
                for x in range(dim - 1):
                    for y in range(dim - 1):
                        if common[p, x] == common[r, y]:
                            shared += 1
                if shared == dim - 2:
                    if ne2 >= E2.shape[0]:
                        E2 = _grow2(E2, 2 * E2.shape[0] + 16)
                    E2[ne2, 0] = nk + p
                    E2[ne2, 1] = nk + r
                    ne2 += 1
    return X2, F2, E2, nv2, ne2, 0


@njit(cache=True)
def clip_cell(X, F, E, nv, ne, zi, Z, nbr_idx, nbr_dist, rank, eps, snap):
    """Clip by neighbours ``nbr_idx[rank:]`` until the security radius test passes.

    Returns ``(X, F, E, nv, ne, rank, status)``.  ``status`` is ``DONE`` when
    the radius test stopped clipping, ``NEED_NEIGHBORS`` when the neighbour
    list ran out first, ``EMPTY`` when the cell vanished.
    """
    amb = X.shape[1]
    normal = np.empty(amb)
    mid = np.empty(amb)
    while rank < nbr_idx.shape[0]:
        r2 = 0.0
        for v in range(nv):
            acc = 0.0
            for c in range(amb):
                diff = X[v, c] - zi[c]
                acc += diff * diff
            if acc > r2:
                r2 = acc
        dist = nbr_dist[rank]
        if dist * dist >= 4.0 * r2:
            return X, F, E, nv, ne, rank, DONE
        j = nbr_idx[rank]
        rank += 1
        if dist == 0.0:
            continue
        for c in range(amb):
            normal[c] = (zi[c] - Z[j, c]) / dist
            mid[c] = 0.5 * (zi[c] + Z[j, c])
        X, F, E, nv, ne, status = _clip_once(X, F, E, nv, ne, normal, mid, j, eps, snap)
        if status == 2:
            return X, F, E, 0, 0, rank, EMPTY
    return X, F, E, nv, ne, rank, NEED_NEIGHBORS
