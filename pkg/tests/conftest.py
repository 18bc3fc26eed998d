import numpy as np
import pytest
from scipy.spatial import ConvexHull

from laguerre.diagram import SiteSet, compute_diagram
from laguerre.geometry import HalfSpace, clip, cube_polytope
from laguerre.transport import TransportProblem, energy, grad_sites, grad_weights


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def report(request):
    """Record and print one PASS/FAIL line for an acceptance criterion."""
    def emit(name, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
        print(line)
        request.config.stash[_ACCEPTANCE].append(line)
        return ok
    return emit


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_halfspace(rng, d, label):
    """A plane through a random interior point of the unit cube with a random normal."""
    return HalfSpace(rng.normal(size=d + 1) * np.r_[np.ones(d), 0.0], np.r_[rng.random(d), 0.0], label)


def random_cell(rng, d, nclips=6):
    """Unit cube clipped by random planes, each keeping the side that holds the centre."""
    P = cube_polytope(d)
    center = np.r_[np.full(d, 0.5), 0.0]
    applied = []
    for k in range(nclips):
        H = random_halfspace(rng, d, k)
        if H.signed_distance(center) < 0:
            H = H.flipped()
        P = clip(P, H)
        applied.append(H)
    return P, applied


def hull_volume(points):
    return ConvexHull(points).volume


def assign_power(X, Y, w=None):
    """Index of the power-nearest site and the gap to the runner-up."""
    w = np.zeros(len(Y)) if w is None else w
    pw = ((X[:, None, :] - Y[None, :, :]) ** 2).sum(axis=2) - w[None, :]
    order = np.argsort(pw, axis=1)
    best = order[:, 0]
    rows = np.arange(len(X))
    gap = pw[rows, order[:, 1]] - pw[rows, best] if len(Y) > 1 else np.full(len(X), np.inf)
    return best, gap


def contains(P, X, tol=1e-12):
    """Points of ``X`` inside the convex polytope ``P`` (hull of its vertices)."""
    hull = ConvexHull(P.coords)
    return np.all(X @ hull.equations[:, :-1].T + hull.equations[:, -1] <= tol, axis=1)


def transport_energy(Y, w, density, targets, order=None):
    p = TransportProblem(SiteSet(Y, w), density, targets, order)
    D = p.diagram()
    return energy(p, D), p, D


def fd_gradient_error(Y, w, density, h=1e-5, order=None):
    """Worst absolute gap between analytic site/weight gradients and central differences."""
    n, d = Y.shape
    nu = np.full(n, 1.0 / n) * compute_diagram(SiteSet(Y), density=density).total_mass
    _, p, D = transport_energy(Y, w, density, nu, order)
    gy, gw = grad_sites(p, D), grad_weights(p, D)
    worst = 0.0
    for i in range(n):
        for k in range(d):
            Yp, Ym = Y.copy(), Y.copy()
            Yp[i, k] += h
            Ym[i, k] -= h
            fd = (transport_energy(Yp, w, density, nu, order)[0]
                  - transport_energy(Ym, w, density, nu, order)[0]) / (2 * h)
            worst = max(worst, abs(fd - gy[i, k]))
        wp, wm = w.copy(), w.copy()
        wp[i] += h
        wm[i] -= h
        fd = (transport_energy(Y, wp, density, nu, order)[0]
              - transport_energy(Y, wm, density, nu, order)[0]) / (2 * h)
        worst = max(worst, abs(fd - gw[i]))
    return worst
