import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from laguerre.densities import Gaussian
from laguerre.geometry import cube_polytope, simplex_polytope
from laguerre.quadrature import (SUPPORTED_ORDERS, SimplexBatch, cell_integrals, decompose, integrate,
                                 integrate_energy_term, integrate_moments, quadrature_rule)

from conftest import hull_volume, random_cell
from oracles import exponents, monomial_exact, reference_batch


@pytest.mark.parametrize("d", range(1, 7))
@pytest.mark.parametrize("q", SUPPORTED_ORDERS)
def test_monomials_exact(d, q):
    batch = reference_batch(d)
    for alpha in exponents(d, q):
        got = integrate(batch, lambda x: np.prod(x ** np.array(alpha), axis=1), q)
        exact = monomial_exact(alpha)
        assert abs(got - exact) <= 1e-13 * exact, (alpha, got, exact)


@pytest.mark.parametrize("d", range(1, 7))
@pytest.mark.parametrize("q", SUPPORTED_ORDERS)
def test_rule_weights_sum_to_one(d, q):
    rule = quadrature_rule(d, q)
    assert rule.weights.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.allclose(rule.nodes.sum(axis=1), 1.0)


def test_unsupported_rule():
    with pytest.raises(ValueError):
        quadrature_rule(2, 5)
    with pytest.raises(ValueError):
        quadrature_rule(7, 2)


def test_x_squared_on_triangle():
    batch = decompose(simplex_polytope([[0, 0], [1, 0], [0, 1]]))
    assert integrate(batch, lambda x: x[:, 0] ** 2, 2) == pytest.approx(1 / 12, abs=1e-15)


def test_decompose_counts():
    tri = decompose(simplex_polytope([[0, 0], [1, 0], [0, 1]]))
    assert len(tri) == 3 and tri.volume == pytest.approx(0.5, abs=1e-15)
    sq = decompose(cube_polytope(2))
    assert len(sq) == 4 and sq.volume == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("d", range(2, 7))
def test_decompose_simplex_and_cube_volume(d):
    S = simplex_polytope(np.vstack([np.zeros(d), np.eye(d)]))
    assert decompose(S).volume == pytest.approx(1.0 / math.factorial(d), rel=1e-13)
    assert decompose(cube_polytope(d)).volume == pytest.approx(1.0, rel=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4), st.integers(0, 2 ** 32 - 1))
def test_volume_matches_hull(d, seed):
    P, _ = random_cell(np.random.default_rng(seed), d, 6)
    assert decompose(P).volume == pytest.approx(hull_volume(P.coords), rel=1e-9)


def test_moments_uniform_cube():
    for d in (2, 3, 4):
        m, mom = integrate_moments(decompose(cube_polytope(d)), lambda x: np.ones(len(x)), 2)
        assert m == pytest.approx(1.0, abs=1e-14)
        assert np.allclose(mom / m, 0.5, atol=1e-14)


def test_moments_linear_density():
    m, mom = integrate_moments(decompose(cube_polytope(2)), lambda x: x[:, 0], 2)
    assert m == pytest.approx(0.5, abs=1e-15)
    assert np.allclose(mom / m, [2 / 3, 1 / 2], atol=1e-14)


def test_energy_term_examples():
    batch = decompose(cube_polytope(2))
    one = lambda x: np.ones(len(x))
    assert integrate_energy_term(batch, one, [0.5, 0.5], 0.0, 2) == pytest.approx(1 / 6, abs=1e-15)
    shifted = integrate_energy_term(batch, one, [0.5, 0.5], 0.3, 2)
    assert shifted == pytest.approx(1 / 6 - 0.3, abs=1e-15)
    empty = SimplexBatch(2, np.zeros((0, 3, 2)), np.zeros(0))
    assert integrate_energy_term(empty, one, [0.5, 0.5], 0.0, 2) == 0.0
    m, mom, quad = cell_integrals(batch, one, [0.5, 0.5], 2)
    assert (m, quad) == pytest.approx((1.0, 1 / 6), abs=1e-15)


def test_gaussian_order_convergence():
    # off-centre box cell; the exact Gaussian mass factorises into erf differences
    lo, hi, s = 0.2, 0.4, math.sqrt(2 * 0.02)
    exact = ((math.erf((hi - 0.5) / s) - math.erf((lo - 0.5) / s)) / 2) ** 4
    batch = decompose(cube_polytope(4, np.full(4, lo), np.full(4, hi)))
    errs = [abs(integrate_moments(batch, Gaussian(), q)[0] - exact) for q in (2, 3, 4)]
    assert errs[0] >= errs[1] >= errs[2]
