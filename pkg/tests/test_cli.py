import time

import numpy as np
import pytest

from laguerre.cli import main
from laguerre.sitefile import read_sites, write_sites
from laguerre.slicer import read_edges, read_soup

from conftest import hull_volume


def _body(path):
    """Data lines only; comments carry run metadata such as worker counts."""
    return [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]


def test_generate_is_deterministic(tmp_path):
    path = tmp_path / "a"
    runs = []
    for _ in range(2):
        assert main(["generate", "--dim", "3", "--num-sites", "40", "--seed", "5", "--out", str(path)]) == 0
        runs.append(path.read_bytes())
    assert runs[0] == runs[1]
    Y, w = read_sites(path)
    assert Y.shape == (40, 3) and w is None


def test_generate_blue_noise(tmp_path, capsys):
    assert main(["generate", "--dim", "2", "--num-sites", "1", "--noise", "blue",
                 "--out", str(tmp_path / "s.txt")]) == 0
    assert "status ok" in capsys.readouterr().out
    assert read_sites(tmp_path / "s.txt")[0].shape == (1, 2)


def test_diagram_quadrants(tmp_path, capsys):
    sites = tmp_path / "q.txt"
    write_sites(sites, [[0.25, 0.25], [0.75, 0.25], [0.25, 0.75], [0.75, 0.75]])
    table = tmp_path / "table.txt"
    assert main(["diagram", "--sites-file", str(sites), "--out", str(table)]) == 0
    out = capsys.readouterr().out
    for key in ("t_vor", "t_knn", "t_tri", "t_q", "t_total", "vertices", "facets"):
        assert any(line.startswith(key + " ") for line in out.splitlines())
    lines = _body(table)
    assert lines[0].split()[:2] == ["site", "mass"]
    masses = [float(ln.split()[1]) for ln in lines[1:]]
    assert masses == pytest.approx([0.25] * 4, abs=1e-14)
    assert table.read_text().startswith("# command = diagram")


def test_sdot_pair_gap(tmp_path, capsys):
    sites = tmp_path / "pair.txt"
    write_sites(sites, [[0.25, 0.5], [0.65, 0.5]])
    assert main(["sdot", "--sites-file", str(sites), "--out", str(tmp_path / "run")]) == 0
    gap = [ln for ln in capsys.readouterr().out.splitlines() if ln.startswith("weight_gap")]
    assert float(gap[0].split()[1]) == pytest.approx(0.04, abs=1e-4)
    Y, w = read_sites(tmp_path / "run" / "sites.txt")
    assert w[0] - w[1] == pytest.approx(0.04, abs=1e-4)
    header = _body(tmp_path / "run" / "convergence.txt")[0].split()
    assert {"iter", "energy", "gnorm", "mass_min", "mass_max", "empty"} <= set(header)


def test_sdot_symmetric_pair_stops_at_once(tmp_path, capsys):
    sites = tmp_path / "pair.txt"
    write_sites(sites, [[0.25, 0.5], [0.75, 0.5]])
    assert main(["sdot", "--sites-file", str(sites), "--out", str(tmp_path / "run")]) == 0
    assert "iterations 0" in capsys.readouterr().out


def test_quantize_single_site(tmp_path):
    assert main(["quantize", "--dim", "3", "--num-sites", "1", "--iters", "20",
                 "--out", str(tmp_path)]) == 0
    Y, _ = read_sites(tmp_path / "sites.txt")
    assert np.allclose(Y, 0.5, atol=1e-6)
    assert len(_body(tmp_path / "convergence.txt")) > 1


def test_quantize_with_double_slice(tmp_path):
    assert main(["quantize", "--dim", "4", "--num-sites", "30", "--density", "gaussian", "--iters", "5",
                 "--slice", "t=0.5,x=0.5", "--format", "soup", "--out", str(tmp_path)]) == 0
    sites, tris = read_soup(tmp_path / "slice_0.soup.txt")
    assert len(tris) > 0 and tris.shape[1:] == (3, 4)
    assert np.allclose(tris[..., 3], 0.5, atol=1e-10) and np.allclose(tris[..., 0], 0.5, atol=1e-10)


def test_slice_unit_cube(tmp_path):
    sites = tmp_path / "one.txt"
    write_sites(sites, [[0.3, 0.6, 0.2, 0.45]])
    assert main(["slice", "--sites-file", str(sites), "--slice", "t=0.5", "--slice", "t=1.5",
                 "--out", str(tmp_path)]) == 0
    _, X, E = read_edges(tmp_path / "slice_0.edges.txt")
    assert X.shape == (8, 4) and E.shape == (12, 2)
    _, X, E = read_edges(tmp_path / "slice_1.edges.txt")
    assert len(X) == 0 and len(E) == 0
    assert _body(tmp_path / "slice_1.edges.txt")[0] == "4 0 0"


def test_results_do_not_depend_on_workers(tmp_path):
    for k in (1, 3):
        assert main(["diagram", "--dim", "3", "--num-sites", "150", "--seed", "2", "--workers", str(k),
                     "--out", str(tmp_path / f"w{k}.txt")]) == 0
    assert _body(tmp_path / "w1.txt") == _body(tmp_path / "w3.txt")


def test_bench_table(tmp_path):
    out = tmp_path / "bench.txt"
    assert main(["bench", "--dim", "2", "--num-sites", "100", "200", "--out", str(out)]) == 0
    lines = _body(out)
    assert lines[0].split()[:3] == ["noise", "N", "t_vor"]
    assert [ln.split()[0] for ln in lines[1:]] == ["white", "white", "blue", "blue"]


@pytest.mark.parametrize("argv", [
    ["diagram", "--dim", "9"],
    ["diagram", "--num-sites", "0"],
    ["diagram", "--order", "7"],
    ["diagram", "--bogus"],
    ["frobnicate"],
    ["slice", "--dim", "3"],
    ["sdot", "--density", "cone"],
    ["quantize", "--density", "sphere"],
])
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(main(argv))
    assert exc.value.code == 1
    assert capsys.readouterr().err


def test_runtime_errors(tmp_path, capsys):
    assert main(["diagram", "--sites-file", str(tmp_path / "missing.txt")]) == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("2 3\n0.1 0.2\n")
    assert main(["diagram", "--sites-file", str(bad)]) == 2
    assert "bad.txt" in capsys.readouterr().err


@pytest.mark.slow
def test_cone_slices_cluster_near_the_ring(tmp_path):
    assert main(["quantize", "--dim", "4", "--num-sites", "300", "--density", "cone", "--iters", "30",
                 "--slice", "t=0", "--slice", "t=1", "--out", str(tmp_path)]) == 0
    for k, t in enumerate((0.0, 1.0)):
        sites, X, _ = read_edges(tmp_path / f"slice_{k}.edges.txt")
        near, far = [], []
        for s in np.unique(sites):
            P = X[sites == s, :3]
            radius = np.linalg.norm(P.mean(axis=0))
            # the cone's spatial radius grows from 0.4 at t=0 to 0.7 at t=1
            (near if abs(radius - (0.4 + 0.3 * t)) < 0.1 else far).append(hull_volume(P))
        assert np.mean(near) < np.mean(far)


@pytest.mark.slow
def test_large_2d_diagram_is_fast(tmp_path, capsys):
    start = time.perf_counter()
    assert main(["diagram", "--dim", "2", "--num-sites", "10000"]) == 0
    assert time.perf_counter() - start < 60
    assert "total_mass 1" in capsys.readouterr().out
