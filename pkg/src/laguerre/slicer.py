"""Hyperplane sections of diagrams, with plain-text mesh export.

Slicing a simple ``d``-polytope keeps one vertex per edge that crosses the
plane; the vertex inherits the ``d - 1`` labels its edge endpoints share, so
the section is again a simple polytope whose edges come from the same
label rule.  Sections live in a local orthonormal frame of the plane.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import SIDE_EPS, ConvexPolytope, _edges_from_labels
from .quadrature import decompose

AXES = "xyzuvt"


@dataclass(frozen=True)
class SliceSpec:
    """Plane ``(x - anchor) . normal = 0``, optionally followed by a nested slice.

    The nested spec is given in the same ambient coordinates as this one.
    """

    anchor: np.ndarray
    normal: np.ndarray
    nested: "SliceSpec | None" = None

    def __post_init__(self):
        anchor = np.asarray(self.anchor, dtype=float).ravel()
        normal = np.asarray(self.normal, dtype=float).ravel()
        if anchor.shape != normal.shape:
            raise ValueError("anchor and normal must have the same length")
        if not np.linalg.norm(normal) > 0:
            raise ValueError("slice normal must be nonzero")
        object.__setattr__(self, "anchor", anchor)
        object.__setattr__(self, "normal", normal)

    @property
    def dim(self) -> int:
        return len(self.normal)

    @property
    def depth(self) -> int:
        return 1 + (self.nested.depth if self.nested is not None else 0)

    @classmethod
    def axis(cls, d: int, axis: int, value: float, nested=None) -> "SliceSpec":
        """The plane ``x_axis = value``."""
        if not 0 <= axis < d:
            raise ValueError(f"axis {axis} out of range for dimension {d}")
        normal = np.zeros(d)
        normal[axis] = 1.0
        anchor = np.zeros(d)
        anchor[axis] = value
        return cls(anchor, normal, nested)

    @classmethod
    def parse(cls, d: int, items) -> "SliceSpec":
        """Chain of ``"axis=value"`` items; ``axis`` is an index or one of ``xyzuv``/``t``.

        ``t`` names the last coordinate.
        """
        spec = None
        for item in reversed(list(items)):
            name, sep, value = item.partition("=")
            name = name.strip()
            if not sep:
                raise ValueError(f"slice {item!r} is not of the form axis=value")
            if name.isdigit():
                axis = int(name)
            elif name == "t":
                axis = d - 1
            elif len(name) == 1 and name in AXES:
                axis = AXES.index(name)
            else:
                raise ValueError(f"unknown slice axis {name!r}")
            spec = cls.axis(d, axis, float(value), spec)
        if spec is None:
            raise ValueError("empty slice chain")
        return spec


@dataclass(frozen=True)
class Frame:
    """Affine map ``x = origin + u @ basis.T`` from local to ambient coordinates."""

    origin: np.ndarray
    basis: np.ndarray

    @classmethod
    def identity(cls, d: int) -> "Frame":
        return cls(np.zeros(d), np.eye(d))

    def to_ambient(self, u: np.ndarray) -> np.ndarray:
        return self.origin + np.asarray(u) @ self.basis.T

    def then(self, inner: "Frame") -> "Frame":
        """Compose with a frame expressed in this frame's local coordinates."""
        return Frame(self.origin + inner.origin @ self.basis.T, self.basis @ inner.basis)


def plane_frame(anchor: np.ndarray, normal: np.ndarray) -> Frame:
    """Local frame of a plane: drop the axis for axis-aligned normals, else an orthonormal complement."""
    d = len(normal)
    nz = np.flatnonzero(normal)
    if len(nz) == 1:
        k = int(nz[0])
        keep = [c for c in range(d) if c != k]
        origin = np.zeros(d)
        origin[k] = anchor[k]
        return Frame(origin, np.eye(d)[:, keep])
    unit = normal / np.linalg.norm(normal)
    # rows 1.. of the full SVD basis span the orthogonal complement of the normal
    _, _, vt = np.linalg.svd(unit[None, :])
    basis = vt[1:].T
    origin = (anchor @ unit) * unit
    return Frame(origin, basis)


@dataclass
class SliceCell:
    site: int
    polytope: ConvexPolytope
    points: np.ndarray

    @property
    def edges(self) -> np.ndarray:
        return self.polytope.edges


@dataclass
class SliceMesh:
    """Sections of the cells of one diagram.

    ``polytope`` of each cell is in local coordinates of ``frame``;
    ``points`` are the same vertices in ambient coordinates.
    """

    ambient_dim: int
    dim: int
    frame: Frame
    cells: list = field(default_factory=list)

    def __len__(self):
        return len(self.cells)

    @property
    def nvertices(self) -> int:
        return sum(len(c.points) for c in self.cells)

    @property
    def nedges(self) -> int:
        return sum(len(c.edges) for c in self.cells)

    def vertices(self) -> np.ndarray:
        if not self.cells:
            return np.zeros((0, self.ambient_dim))
        return np.vstack([c.points for c in self.cells])

    def edge_list(self) -> np.ndarray:
        """Edges as global indices into :meth:`vertices`."""
        out, offset = [], 0
        for c in self.cells:
            out.append(c.edges + offset)
            offset += len(c.points)
        return np.concatenate(out) if out else np.zeros((0, 2), dtype=np.int64)

    def volumes(self) -> np.ndarray:
        return np.array([decompose(c.polytope).volume for c in self.cells])

    def simplices(self) -> tuple[np.ndarray, np.ndarray]:
        """Centroid-fan decomposition in ambient coordinates, with the owning site per simplex."""
        blocks, owners = [], []
        for c in self.cells:
            batch = decompose(c.polytope)
            if len(batch):
                blocks.append(self.frame.to_ambient(batch.simplices))
                owners.append(np.full(len(batch), c.site))
        if not blocks:
            return np.zeros((0, self.dim + 1, self.ambient_dim)), np.zeros(0, dtype=np.int64)
        return np.concatenate(blocks), np.concatenate(owners)

    def triangles(self) -> tuple[np.ndarray, np.ndarray]:
        """Triangles for a polygon soup: fans of 2d cells, or boundary fans of 3d cells."""
        if self.dim == 2:
            return self.simplices()
        if self.dim != 3:
            raise ValueError(f"polygon soup needs 2d or 3d sections, not {self.dim}d")
        tris, owners = [], []
        for c in self.cells:
            t = _boundary_triangles(c.polytope)
            if len(t):
                tris.append(self.frame.to_ambient(t))
                owners.append(np.full(len(t), c.site))
        if not tris:
            return np.zeros((0, 3, self.ambient_dim)), np.zeros(0, dtype=np.int64)
        return np.concatenate(tris), np.concatenate(owners)


def _boundary_triangles(P: ConvexPolytope) -> np.ndarray:
    """Fan each 2-face of a 3-polytope around its vertex average."""
    X, F, E = P.coords, P.facets, P.edges
    tris = []
    for label in np.unique(F):
        on = (F == label).any(axis=1)
        face_edges = E[on[E[:, 0]] & on[E[:, 1]]]
        if len(face_edges) < 3:
            continue
        c = X[on].mean(axis=0)
        for a, b in face_edges:
            tris.append([c, X[a], X[b]])
    return np.array(tris).reshape(-1, 3, P.dim)


def section(P: ConvexPolytope, s: np.ndarray, eps: float = SIDE_EPS):
    """Cut ``P`` by the zero set of the vertex values ``s``.

    Returns ``(a, b, t, facets)`` for the crossed edges (new point
    ``X[a] + t (X[b] - X[a])``), or ``None`` when the plane misses ``P``.
    Vertices within ``eps`` of the plane join the side that leaves both
    sides nonempty; if both already are, they join the positive side.
    """
    if P.is_empty:
        return None
    neg, pos = s < -eps, s > eps
    on = ~neg & ~pos
    if not neg.any() and not pos.any():
        return None  # polytope flat inside the plane
    if not neg.any():
        below = on
    elif not pos.any():
        below = neg
    else:
        below = neg
    E = P.edges
    crossed = E[below[E[:, 0]] != below[E[:, 1]]]
    if len(crossed) == 0:
        return None
    flip = ~below[crossed[:, 0]]
    a = np.where(flip, crossed[:, 1], crossed[:, 0])
    b = np.where(flip, crossed[:, 0], crossed[:, 1])
    sa, sb = s[a], s[b]
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.clip(sa / (sa - sb), 0.0, 1.0)
    t = np.where(on[a], 0.0, np.where(on[b], 1.0, t))
    Fa, Fb = P.facets[a], P.facets[b]
    shared = (Fa[:, :, None] == Fb[:, None, :]).any(axis=2)
    facets = Fa[shared].reshape(len(a), P.dim - 1)
    return a, b, t, facets


def slice_polytope(P: ConvexPolytope, anchor, normal, eps: float = SIDE_EPS):
    """Section of ``P`` by one plane as ``(local polytope, ambient points of P's frame, frame)``."""
    d = P.dim
    if d < 2:
        raise ValueError("cannot slice a polytope of dimension below 2")
    anchor = np.asarray(anchor, dtype=float)
    normal = np.asarray(normal, dtype=float)
    frame = plane_frame(anchor, normal)
    X = P.coords
    unit = normal / np.linalg.norm(normal)
    cut = section(P, (X - anchor) @ unit, eps)
    if cut is None:
        return None, frame
    a, b, t, facets = cut
    q = X[a] + t[:, None] * (X[b] - X[a])
    u = (q - frame.origin) @ frame.basis
    points = np.hstack([u, np.zeros((len(u), 1))])
    if len(np.unique(np.round(u, 14), axis=0)) < d:
        return None, frame  # touches only a lower-dimensional face
    local = ConvexPolytope._trusted(d - 1, points, facets, _edges_from_labels(facets))
    return local, frame


def _local_spec(frame: Frame, spec: SliceSpec):
    """Express an ambient plane in the local coordinates of ``frame``."""
    n_local = frame.basis.T @ spec.normal
    norm2 = n_local @ n_local
    if norm2 <= 1e-24 * (spec.normal @ spec.normal):
        raise ValueError("nested slice is parallel to its parent plane")
    c = (spec.anchor - frame.origin) @ spec.normal
    n_local = np.where(np.abs(n_local) < 1e-15 * np.sqrt(norm2), 0.0, n_local)
    return n_local * c / (n_local @ n_local), n_local


def _cull(P: ConvexPolytope, anchor, normal, eps) -> bool:
    s = (P.coords - anchor) @ (normal / np.linalg.norm(normal))
    return bool(np.all(s > eps) or np.all(s < -eps))


def slice_cells(items, spec: SliceSpec, cull: bool = True, eps: float = SIDE_EPS) -> SliceMesh:
    """Slice ``(site, polytope)`` pairs by ``spec`` and any nested specs."""
    items = list(items)
    d = spec.dim
    if spec.depth > d - 1:
        raise ValueError(f"at most {d - 2} nested slices in {d} dimensions")
    frame = Frame.identity(d)
    level = [(i, P) for i, P in items if not P.is_empty]
    for P in (p for _, p in level):
        if P.dim != d:
            raise ValueError("slice dimension does not match the diagram")
    current = spec
    while current is not None:
        anchor, normal = _local_spec(frame, current)
        nxt, plane = [], None
        for i, P in level:
            if cull and _cull(P, anchor, normal, eps):
                continue
            local, plane = slice_polytope(P, anchor, normal, eps)
            if local is not None:
                nxt.append((i, local))
        if plane is None:
            plane = plane_frame(anchor, normal)
        frame = frame.then(plane)
        level = nxt
        current = current.nested
    cells = [SliceCell(i, P, frame.to_ambient(P.coords)) for i, P in level]
    return SliceMesh(d, d - spec.depth, frame, cells)


def slice_diagram(diagram, spec: SliceSpec, cull: bool = True, eps: float = SIDE_EPS) -> SliceMesh:
    """Slice every fragment of every cell of a power diagram."""
    if spec.dim != diagram.sites.d:
        raise ValueError("slice dimension does not match the diagram")
    items = [(i, P) for i, fragments in enumerate(diagram.cells) for P in fragments]
    return slice_cells(items, spec, cull, eps)


def _g(v: float) -> str:
    return f"{v:.17g}"


def _comment_lines(comments) -> list[str]:
    return [f"# {c}" for c in comments]


def export_mesh(mesh: SliceMesh, path, fmt: str = "edges", comments=()) -> None:
    """Write ``mesh`` as an edge list or a triangle soup.

    ``edges``: header ``d V E``, then ``V`` lines ``site x_1 .. x_d`` and
    ``E`` lines ``i j`` (0-based vertex indices).  ``soup``: header ``d T``,
    then ``T`` lines ``site`` followed by three ambient points.  Lines
    starting with ``#`` are comments.  Coordinates use 17 significant digits.
    """
    lines = _comment_lines(comments)
    d = mesh.ambient_dim
    if fmt == "edges":
        X = mesh.vertices()
        E = mesh.edge_list()
        owners = [c.site for c in mesh.cells for _ in range(len(c.points))]
        lines.append(f"{d} {len(X)} {len(E)}")
        lines += [" ".join([str(o)] + [_g(v) for v in row]) for o, row in zip(owners, X)]
        lines += [f"{a} {b}" for a, b in E]
    elif fmt == "soup":
        tris, owners = mesh.triangles() if mesh.cells else (np.zeros((0, 3, d)), [])
        lines.append(f"{d} {len(tris)}")
        lines += [" ".join([str(o)] + [_g(v) for v in tri.ravel()]) for o, tri in zip(owners, tris)]
    else:
        raise ValueError(f"unknown mesh format {fmt!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _data_lines(path):
    with open(path) as fh:
        return [ln.split() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]


def read_edges(path):
    """Inverse of the ``edges`` export: ``(sites, vertices, edges)``."""
    rows = _data_lines(path)
    d, nv, ne = map(int, rows[0])
    body = rows[1:1 + nv]
    sites = np.array([int(r[0]) for r in body], dtype=np.int64)
    X = np.array([[float(v) for v in r[1:]] for r in body]).reshape(nv, d)
    E = np.array([[int(v) for v in r] for r in rows[1 + nv:1 + nv + ne]], dtype=np.int64).reshape(ne, 2)
    return sites, X, E


def read_soup(path):
    """Inverse of the ``soup`` export: ``(sites, triangles)``."""
    rows = _data_lines(path)
    d, nt = map(int, rows[0])
    body = rows[1:1 + nt]
    sites = np.array([int(r[0]) for r in body], dtype=np.int64)
    tris = np.array([[float(v) for v in r[1:]] for r in body]).reshape(nt, 3, d)
    return sites, tris
