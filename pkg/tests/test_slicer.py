import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from laguerre.diagram import SiteSet, compute_diagram
from laguerre.geometry import cube_polytope
from laguerre.slicer import (SliceSpec, export_mesh, read_edges, read_soup, slice_cells,
                             slice_diagram)
from laguerre.transport import optimize_points
from laguerre.densities import Gaussian


@pytest.fixture(scope="module")
def single4d():
    return compute_diagram(SiteSet([[0.3, 0.6, 0.2, 0.45]]))


@pytest.fixture(scope="module")
def diagram4d():
    return compute_diagram(SiteSet(np.random.default_rng(0).random((40, 4))))


@pytest.mark.parametrize("t", [0.0, 0.5, 1.0])
def test_single_cell_slice_is_unit_cube(single4d, t):
    mesh = slice_diagram(single4d, SliceSpec.axis(4, 3, t))
    assert len(mesh) == 1 and mesh.dim == 3
    assert mesh.nvertices == 8 and mesh.nedges == 12
    assert mesh.volumes()[0] == pytest.approx(1.0, abs=1e-9)
    assert np.all(np.abs(mesh.vertices()[:, 3] - t) <= 1e-10)


def test_plane_outside_domain_is_empty(single4d):
    mesh = slice_diagram(single4d, SliceSpec.axis(4, 3, 1.5))
    assert len(mesh) == 0 and mesh.nvertices == 0


@pytest.mark.parametrize("t", [0.0, 0.37, 1.0])
def test_slice_volumes_sum_to_one(diagram4d, t):
    assert slice_diagram(diagram4d, SliceSpec.axis(4, 3, t)).volumes().sum() == pytest.approx(1.0, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_oblique_slice_vertices_on_plane(seed):
    rng = np.random.default_rng(seed)
    D = compute_diagram(SiteSet(rng.random((15, 3))))
    n = rng.normal(size=3)
    x0 = rng.random(3)
    mesh = slice_diagram(D, SliceSpec(x0, n))
    if len(mesh):
        assert np.all(np.abs((mesh.vertices() - x0) @ n) <= 1e-10 * np.linalg.norm(n))
        for c in mesh.cells:
            assert c.polytope.is_simple()


def test_cull_does_not_change_vertices(diagram4d):
    spec = SliceSpec(np.full(4, 0.5), [0.3, -1.0, 0.2, 0.7])
    a = slice_diagram(diagram4d, spec, cull=True).vertices()
    b = slice_diagram(diagram4d, spec, cull=False).vertices()
    assert np.array_equal(np.sort(a, axis=0), np.sort(b, axis=0))


def test_diagonal_slice_of_cube():
    # hexagonal section of the unit 3-cube through its centre; area 3 sqrt(3) / 4
    mesh = slice_cells([(0, cube_polytope(3))], SliceSpec(np.full(3, 0.5), [1.0, 1.0, 1.0]))
    assert mesh.nvertices == 6
    assert mesh.volumes()[0] == pytest.approx(3 * np.sqrt(3) / 4, rel=1e-12)


def test_slice_through_vertices():
    # the plane x + y = 1 passes through two edges of the square's boundary at corners
    mesh = slice_cells([(0, cube_polytope(3))], SliceSpec([0.5, 0.5, 0.0], [1.0, 1.0, 0.0]))
    assert mesh.volumes()[0] == pytest.approx(np.sqrt(2), rel=1e-12)
    assert np.all(np.abs(mesh.vertices()[:, :2].sum(axis=1) - 1) <= 1e-12)


def test_nested_slice(diagram4d):
    spec = SliceSpec.parse(4, ["t=0.5", "x=0.5"])
    mesh = slice_diagram(diagram4d, spec)
    assert mesh.dim == 2 and len(mesh) > 0
    V = mesh.vertices()
    assert np.all(np.abs(V[:, 3] - 0.5) <= 1e-10) and np.all(np.abs(V[:, 0] - 0.5) <= 1e-10)
    assert mesh.volumes().sum() == pytest.approx(1.0, rel=1e-12)


def test_too_deep_nesting():
    with pytest.raises(ValueError):
        slice_diagram(compute_diagram(SiteSet([[0.5, 0.5, 0.5]])), SliceSpec.parse(3, ["x=0.5", "y=0.5", "z=0.5"]))


def test_parallel_nested_slice():
    with pytest.raises(ValueError):
        slice_diagram(compute_diagram(SiteSet([[0.5, 0.5, 0.5]])), SliceSpec.parse(3, ["x=0.5", "x=0.2"]))


def test_constant_t_slice_membership():
    rng = np.random.default_rng(8)
    Y = rng.random((30, 4))
    mesh = slice_diagram(compute_diagram(SiteSet(Y)), SliceSpec.axis(4, 3, 0.4))
    for c in mesh.cells:
        centroid = c.points.mean(axis=0)
        assert np.argmin(((Y - centroid) ** 2).sum(axis=1)) == c.site


def test_edges_round_trip(tmp_path, diagram4d):
    mesh = slice_diagram(diagram4d, SliceSpec.axis(4, 3, 0.3))
    path = tmp_path / "mesh.txt"
    export_mesh(mesh, path, "edges", comments=["seed = 0"])
    sites, X, E = read_edges(path)
    assert np.array_equal(X, mesh.vertices())
    assert np.array_equal(E, mesh.edge_list())
    assert sites.tolist() == [c.site for c in mesh.cells for _ in range(len(c.points))]


def test_unit_cube_edge_file(tmp_path, single4d):
    path = tmp_path / "cube.txt"
    export_mesh(slice_diagram(single4d, SliceSpec.axis(4, 3, 0.5)), path)
    _, X, E = read_edges(path)
    assert X.shape == (8, 4) and E.shape == (12, 2)


def test_soup_round_trip(tmp_path, diagram4d):
    mesh = slice_diagram(diagram4d, SliceSpec.parse(4, ["t=0.5", "y=0.25"]))
    path = tmp_path / "soup.txt"
    export_mesh(mesh, path, "soup")
    sites, tris = read_soup(path)
    ref, owners = mesh.triangles()
    assert np.array_equal(tris, ref) and np.array_equal(sites, owners)
    # fan triangles tile the slice
    a, b = tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0]
    area = 0.5 * np.sqrt(np.maximum(0, (a * a).sum(1) * (b * b).sum(1) - ((a * b).sum(1)) ** 2))
    assert area.sum() == pytest.approx(1.0, rel=1e-12)


def test_soup_boundary_of_3d_cells(tmp_path, single4d):
    mesh = slice_diagram(single4d, SliceSpec.axis(4, 3, 0.5))
    tris, _ = mesh.triangles()
    # six square faces, each fanned into four triangles
    assert len(tris) == 24


def test_empty_mesh_files(tmp_path, single4d):
    mesh = slice_diagram(single4d, SliceSpec.axis(4, 3, -1.0))
    for fmt, reader in (("edges", read_edges), ("soup", read_soup)):
        path = tmp_path / f"empty.{fmt}"
        export_mesh(mesh, path, fmt)
        out = reader(path)
        assert all(len(a) == 0 for a in out)


def test_double_slice_of_quantized_gaussian():
    sites, _, _ = optimize_points(60, Gaussian(), 4, "lbfgs", iters=10, seed=0)
    mesh = slice_diagram(compute_diagram(sites, density=Gaussian()), SliceSpec.parse(4, ["t=0.5", "x=0.5"]))
    assert len(mesh) > 0
    assert len(mesh.triangles()[0]) > 0
