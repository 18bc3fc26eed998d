"""Transport energy, its gradients, and the quantization / weight solvers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .diagram import DomainMesh, PowerDiagram, SiteSet, compute_diagram
from .lbfgs import lbfgs_minimize


@dataclass
class TransportProblem:
    sites: SiteSet
    density: object
    targets: np.ndarray | None = None
    order: int | None = None
    mesh: DomainMesh | None = None
    workers: int = 1

    def __post_init__(self):
        if self.order is None:
            self.order = self.density.recommended_order

    def diagram(self) -> PowerDiagram:
        return compute_diagram(self.sites, self.mesh, self.density, self.order, self.workers)


def energy(problem: TransportProblem, diagram: PowerDiagram) -> float:
    """``sum_i int_{P_i} rho (|x - y_i|^2 - w_i) + sum_i nu_i w_i``."""
    w = problem.sites.w
    e = float(np.sum(diagram.quadratic - w * diagram.mass))
    if problem.targets is not None:
        e += float(np.dot(problem.targets, w))
    return e


def grad_sites(problem: TransportProblem, diagram: PowerDiagram) -> np.ndarray:
    """Rows ``2 m_i (y_i - c_i)``; zero for empty cells."""
    Y = problem.sites.Y
    return 2.0 * (diagram.mass[:, None] * Y - diagram.moment)


def grad_weights(problem: TransportProblem, diagram: PowerDiagram) -> np.ndarray:
    """``nu_i - m_i``."""
    if problem.targets is None:
        raise ValueError("weight gradient needs target masses")
    return np.asarray(problem.targets, dtype=float) - diagram.mass


def lloyd_step(problem: TransportProblem, diagram: PowerDiagram) -> np.ndarray:
    """Move every site with a nonempty cell to its centroid."""
    Y = problem.sites.Y.copy()
    ok = ~diagram.empty
    Y[ok] = diagram.moment[ok] / diagram.mass[ok, None]
    return Y


@dataclass
class ConvergenceLog:
    """One row per diagram evaluation."""

    columns: tuple
    rows: list = field(default_factory=list)

    def append(self, **row):
        self.rows.append(row)

    def column(self, name) -> np.ndarray:
        return np.array([r[name] for r in self.rows])

    def __len__(self):
        return len(self.rows)

    def to_text(self, comments=()) -> str:
        lines = [f"# {c}" for c in comments]
        lines.append(" ".join(self.columns))
        for r in self.rows:
            lines.append(" ".join(_fmt(r[c]) for c in self.columns))
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.10e}"


def random_sites(n: int, d: int, rng) -> np.ndarray:
    return rng.random((n, d))


def optimize_points(n: int, density, dim: int, mode: str = "lbfgs", iters: int = 100,
                    seed: int = 0, order: int | None = None, workers: int = 1,
                    sites=None, mesh: DomainMesh | None = None):
    """Optimise site positions for ``density`` by Lloyd relaxation or L-BFGS.

    Starts from ``sites`` or ``n`` uniform random points drawn with ``seed``.
    Returns ``(SiteSet, ConvergenceLog, OptimizerState | None)``; the log
    holds energy and gradient norm normalised by their initial values.
    """
    if mode not in ("lloyd", "lbfgs"):
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    Y0 = random_sites(n, dim, rng) if sites is None else np.array(sites, dtype=float)
    n, dim = Y0.shape
    problem = TransportProblem(SiteSet(Y0), density, None, order, mesh, workers)
    conv = ConvergenceLog(("iter", "energy", "gnorm", "energy_norm", "gnorm_norm", "accepted"))
    ref = {}

    def record(diagram, accepted=True):
        e = energy(problem, diagram)
        gn = float(np.linalg.norm(grad_sites(problem, diagram)))
        ref.setdefault("e", e if e != 0 else 1.0)
        ref.setdefault("g", gn if gn != 0 else 1.0)
        conv.append(iter=len(conv), energy=e, gnorm=gn, energy_norm=e / ref["e"],
                    gnorm_norm=gn / ref["g"], accepted=accepted)
        return e

    if mode == "lloyd":
        for _ in range(iters):
            diagram = problem.diagram()
            record(diagram)
            problem.sites = SiteSet(lloyd_step(problem, diagram))
        return problem.sites, conv, None

    first = problem.diagram()

    def evaluate(x):
        problem.sites = SiteSet(x.reshape(n, dim))
        diagram = first if evaluate.fresh else problem.diagram()
        evaluate.fresh = False
        evaluate.last = diagram
        return energy(problem, diagram), grad_sites(problem, diagram).ravel()

    evaluate.fresh = True

    def on_eval(state, x, f, g, accepted):
        record(evaluate.last, accepted)

    # the site Hessian is roughly 2 m_i I, so 1 / (2 m_i) makes the first step Lloyd-like
    step = n / (2.0 * first.total_mass) if first.total_mass > 0 else None
    state = lbfgs_minimize(evaluate, Y0.ravel(), max_calls=iters, gtol=0.0,
                           initial_step=step, callback=on_eval)
    problem.sites = SiteSet(state.x.reshape(n, dim))
    return problem.sites, conv, state


def optimize_weights(n: int, density, dim: int, iters: int = 150, seed: int = 0,
                     order: int | None = None, workers: int = 1, sites=None,
                     quantize_iters: int = 30, mass_tol: float = 1e-3,
                     mesh: DomainMesh | None = None):
    """Find weights giving every power cell the same mass under ``density``.

    Sites come from ``sites`` or from an L-BFGS quantization run of
    ``quantize_iters`` calls.  Weights start at zero and L-BFGS maximises the
    dual energy (minimises its negative) until the largest relative mass
    error drops below ``mass_tol`` or ``iters`` evaluations are spent.
    Returns ``(SiteSet, ConvergenceLog, OptimizerState)``.
    """
    if sites is None:
        site_set, _, _ = optimize_points(n, density, dim, "lbfgs", quantize_iters, seed,
                                         order, workers, mesh=mesh)
        Y = site_set.Y
    else:
        Y = np.array(sites, dtype=float)
    n, dim = Y.shape
    problem = TransportProblem(SiteSet(Y), density, None, order, mesh, workers)
    first = problem.diagram()
    total = first.total_mass
    target = total / n
    problem.targets = np.full(n, target)
    conv = ConvergenceLog(("iter", "energy", "gnorm", "mass_min", "mass_median", "mass_max",
                           "empty", "accepted"))

    def evaluate(w):
        problem.sites = SiteSet(Y, w)
        diagram = first if evaluate.fresh else problem.diagram()
        evaluate.fresh = False
        evaluate.last = diagram
        return -energy(problem, diagram), -grad_weights(problem, diagram)

    evaluate.fresh = True

    def on_eval(state, x, f, g, accepted):
        rel = evaluate.last.mass / target
        conv.append(iter=len(conv), energy=-f, gnorm=float(np.linalg.norm(g)),
                    mass_min=rel.min(), mass_median=float(np.median(rel)), mass_max=rel.max(),
                    empty=int(np.sum(evaluate.last.empty)), accepted=accepted)

    def converged(state):
        return np.max(np.abs(state.g)) / target < mass_tol

    state = lbfgs_minimize(evaluate, np.zeros(n), max_calls=iters, gtol=0.0,
                           initial_step=max(n, 2) ** (1.0 - 2.0 / dim) / (dim * total),
                           converged=converged, callback=on_eval)
    problem.sites = SiteSet(Y, state.x)
    return problem.sites, conv, state


def max_mass_deviation(diagram: PowerDiagram, target: float) -> float:
    return float(np.max(np.abs(diagram.mass - target)) / target)
