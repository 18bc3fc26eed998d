"""Command-line front end: ``laguerre {generate,diagram,quantize,sdot,slice,bench}``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .densities import DENSITIES, make_density
from .diagram import SiteSet, compute_diagram, default_workers
from .geometry import MAX_DIM
from .quadrature import SUPPORTED_ORDERS
from .sampling import blue_noise, white_noise
from .sitefile import SiteFileError, read_sites, write_sites
from .slicer import SliceSpec, export_mesh, slice_diagram
from .transport import optimize_points, optimize_weights

log = logging.getLogger("laguerre")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    dim: int = 2
    num_sites: list = field(default_factory=lambda: [100])
    density: str = "uniform"
    order: int | None = None
    mode: str = "lbfgs"
    iters: int | None = None
    seed: int = 0
    workers: int = 1
    sites_file: str | None = None
    out: str | None = None
    slices: list = field(default_factory=list)
    noise: str = "white"
    format: str = "edges"

    @property
    def n(self) -> int:
        return self.num_sites[0]

    def validate(self) -> None:
        if not 2 <= self.dim <= MAX_DIM:
            raise UsageError(f"--dim must be in [2, {MAX_DIM}]")
        if any(n < 1 for n in self.num_sites):
            raise UsageError("--num-sites must be positive")
        if self.order is not None and self.order not in SUPPORTED_ORDERS:
            raise UsageError(f"--order must be one of {SUPPORTED_ORDERS}")
        if self.iters is not None and self.iters < 1:
            raise UsageError("--iters must be positive")
        if self.workers < 1:
            raise UsageError("--workers must be positive")

    def comments(self) -> list[str]:
        return [f"{k} = {v}" for k, v in dataclasses.asdict(self).items()]


def _density(cfg: RunConfig):
    return make_density(cfg.density)


def _initial_sites(cfg: RunConfig, n: int | None = None):
    """Sites (and weights) from ``--sites-file``, else seeded noise."""
    if cfg.sites_file:
        Y, w = read_sites(cfg.sites_file)
        cfg.dim = Y.shape[1]
        return Y, w
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n if n is None else n
    if cfg.noise == "blue":
        return blue_noise(n, cfg.dim, rng).points, None
    return white_noise(n, cfg.dim, rng), None


def _out_dir(cfg: RunConfig) -> Path:
    path = Path(cfg.out or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write(path: Path, text: str) -> None:
    path.write_text(text)
    print(f"wrote {path}")


def _table(columns, rows, comments) -> str:
    lines = [f"# {c}" for c in comments]
    lines.append(" ".join(columns))
    for row in rows:
        lines.append(" ".join(_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def _cell(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return f"{float(v):.10e}"


def _timing_lines(diagram) -> list[str]:
    t = diagram.timing
    return [f"t_vor {t['vor']:.6f}", f"t_knn {t['knn']:.6f}", f"t_tri {t['tri']:.6f}",
            f"t_q {t['quad']:.6f}", f"t_total {t['total']:.6f}",
            f"vertices {int(diagram.nvertices.sum())}", f"facets {int(diagram.nfacets.sum())}"]


def _export_slices(cfg: RunConfig, diagram, out: Path) -> None:
    for k, chain in enumerate(cfg.slices):
        spec = SliceSpec.parse(diagram.sites.d, chain.split(","))
        mesh = slice_diagram(diagram, spec)
        path = out / f"slice_{k}.{cfg.format}.txt"
        export_mesh(mesh, path, cfg.format, cfg.comments() + [f"slice = {chain}", f"cells = {len(mesh)}"])
        print(f"wrote {path} ({len(mesh)} cells)")


def cmd_generate(cfg: RunConfig) -> int:
    rng = np.random.default_rng(cfg.seed)
    status = "ok"
    if cfg.noise == "blue":
        result = blue_noise(cfg.n, cfg.dim, rng)
        Y, status = result.points, result.status
        extra = [f"radius = {result.radius:.17g}", f"status = {status}"]
        if result.stalled:
            print(f"warning: blue noise stalled at {len(Y)} of {cfg.n} sites", file=sys.stderr)
    else:
        Y, extra = white_noise(cfg.n, cfg.dim, rng), []
    path = Path(cfg.out or "sites.txt")
    write_sites(path, Y, comments=cfg.comments() + extra)
    print(f"wrote {path} ({len(Y)} sites, status {status})")
    return EXIT_OK


def cmd_diagram(cfg: RunConfig) -> int:
    Y, w = _initial_sites(cfg)
    density = _density(cfg)
    diagram = compute_diagram(SiteSet(Y, w), density=density, order=cfg.order, workers=cfg.workers)
    c = diagram.centroids
    cols = ["site", "mass"] + [f"c{k}" for k in range(diagram.sites.d)] + ["vertices", "facets"]
    rows = [[i, diagram.mass[i], *c[i], diagram.nvertices[i], diagram.nfacets[i]]
            for i in range(diagram.n)]
    report = _timing_lines(diagram) + [f"cells {diagram.n}", f"empty {int(diagram.empty.sum())}",
                                       f"total_mass {diagram.total_mass:.12g}"]
    print("\n".join(report))
    if cfg.out:
        _write(Path(cfg.out), _table(cols, rows, cfg.comments() + report))
    return EXIT_OK


def cmd_quantize(cfg: RunConfig) -> int:
    if cfg.density not in ("uniform", "gaussian", "cone"):
        raise UsageError("quantize supports uniform, gaussian and cone densities")
    density = _density(cfg)
    sites = _initial_sites(cfg)[0] if cfg.sites_file else None
    sites_out, conv, state = optimize_points(cfg.n, density, cfg.dim, cfg.mode, cfg.iters or 100,
                                             cfg.seed, cfg.order, cfg.workers, sites=sites)
    out = _out_dir(cfg)
    write_sites(out / "sites.txt", sites_out.Y, comments=cfg.comments())
    _write(out / "convergence.txt", conv.to_text(cfg.comments()))
    last = conv.rows[-1]
    print(f"evaluations {len(conv)} energy_norm {last['energy_norm']:.6e} gnorm_norm {last['gnorm_norm']:.6e}")
    if cfg.slices:
        diagram = compute_diagram(sites_out, density=density, order=cfg.order, workers=cfg.workers)
        _export_slices(cfg, diagram, out)
    return EXIT_OK


def cmd_sdot(cfg: RunConfig) -> int:
    if cfg.density not in ("uniform", "sphere"):
        raise UsageError("sdot supports uniform and sphere densities")
    density = _density(cfg)
    sites = _initial_sites(cfg)[0] if cfg.sites_file else None
    n = len(sites) if sites is not None else cfg.n
    result, conv, state = optimize_weights(n, density, cfg.dim, cfg.iters or 150, cfg.seed,
                                           cfg.order, cfg.workers, sites=sites)
    out = _out_dir(cfg)
    write_sites(out / "sites.txt", result.Y, result.w, comments=cfg.comments())
    _write(out / "convergence.txt", conv.to_text(cfg.comments() + ["target = 1 (normalized mass)"]))
    last = [r for r in conv.rows if r["accepted"]][-1]
    dev = max(1.0 - last["mass_min"], last["mass_max"] - 1.0)
    print(f"evaluations {state.calls} iterations {state.iterations} status {state.status}")
    print(f"max_mass_deviation {dev:.6e}")
    print(f"weight_gap {result.w.max() - result.w.min():.10f}")
    return EXIT_OK


def cmd_slice(cfg: RunConfig) -> int:
    if not cfg.sites_file:
        raise UsageError("slice needs --sites-file")
    if not cfg.slices:
        raise UsageError("slice needs at least one --slice")
    Y, w = _initial_sites(cfg)
    if Y.shape[1] < 2:
        raise UsageError("cannot slice one-dimensional sites")
    diagram = compute_diagram(SiteSet(Y, w), density=_density(cfg), order=cfg.order, workers=cfg.workers)
    _export_slices(cfg, diagram, _out_dir(cfg))
    return EXIT_OK


def cmd_bench(cfg: RunConfig) -> int:
    cols = ["noise", "N", "t_vor", "t_knn", "t_tri", "t_q", "t_total", "vertices", "facets"]
    rows = []
    density = _density(cfg)
    # load the compiled clipping kernel before anything is timed
    compute_diagram(SiteSet(np.random.default_rng(0).random((8, cfg.dim))), density=density)
    for noise in ("white", "blue"):
        for n in cfg.num_sites:
            rng = np.random.default_rng(cfg.seed)
            Y = white_noise(n, cfg.dim, rng) if noise == "white" else blue_noise(n, cfg.dim, rng).points
            D = compute_diagram(SiteSet(Y), density=density, order=cfg.order, workers=cfg.workers)
            t = D.timing
            rows.append([noise, n, t["vor"], t["knn"], t["tri"], t["quad"], t["total"],
                         int(D.nvertices.sum()), int(D.nfacets.sum())])
            print(" ".join(_cell(v) for v in rows[-1]))
    if cfg.out:
        _write(Path(cfg.out), _table(cols, rows, cfg.comments()))
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "diagram": cmd_diagram,
    "quantize": cmd_quantize,
    "sdot": cmd_sdot,
    "slice": cmd_slice,
    "bench": cmd_bench,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="laguerre", description="Restricted power diagrams and semi-discrete transport.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--dim", type=int, default=2)
        p.add_argument("--num-sites", type=int, nargs="+", default=[100])
        p.add_argument("--density", choices=sorted(DENSITIES), default="uniform")
        p.add_argument("--order", type=int)
        p.add_argument("--mode", choices=("lloyd", "lbfgs"), default="lbfgs")
        p.add_argument("--iters", type=int)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=default_workers())
        p.add_argument("--sites-file")
        p.add_argument("--out")
        p.add_argument("--slice", action="append", default=[], dest="slices",
                       help="axis=value, comma-separated for nested slices; repeatable")
        p.add_argument("--noise", choices=("white", "blue"), default="white")
        p.add_argument("--format", choices=("edges", "soup"), default="edges")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    fields = {f.name for f in dataclasses.fields(RunConfig)}
    cfg = RunConfig(**{k: v for k, v in vars(args).items() if k in fields})
    try:
        cfg.validate()
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"laguerre: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SiteFileError, ValueError, OSError) as exc:
        print(f"laguerre: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
