import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frs.checks import random_measure
from frs.exceptions import DimensionError, DomainError
from frs.measures import (
    Grid,
    MatrixMeasure,
    TangentField,
    entropy,
    fisher_info,
    fr_norm_sq,
    grad_fr,
    make_measure,
    project_tangent,
    uniform_identity,
    von_neumann,
)
from frs.symmat import invm, sym

D15 = np.diag([1.5, 0.5])


@pytest.fixture
def single():
    """One cell, d = 2, weight 1/2, values diag(1.5, 0.5): unit mass."""
    grid = Grid.uniform(1, 2)
    return make_measure(grid, D15[None])


def test_grid_normalization():
    g = Grid.from_weights([1.0, 3.0], 2)
    np.testing.assert_allclose(g.weights, [0.125, 0.375])
    assert g.original_volume == 4.0
    assert g.weights.sum() == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(DomainError):
        Grid.from_weights([1.0, 0.0], 2)
    with pytest.raises(DomainError):
        Grid(np.array([0.5, 0.5]), 2)


def test_grid_is_immutable():
    g = Grid.uniform(3, 2)
    with pytest.raises(ValueError):
        g.weights[0] = 1.0


def test_make_measure_examples(single):
    assert single.grid.weights[0] == 0.5
    assert single.mass == pytest.approx(1.0)
    m = make_measure(single.grid, 2 * np.eye(2)[None], normalize=True)
    np.testing.assert_allclose(m.values[0], np.eye(2))
    assert m.mass == pytest.approx(1.0)
    with pytest.raises(DomainError, match="cell 0"):
        make_measure(single.grid, np.diag([1.0, -0.1])[None])
    with pytest.raises(DomainError):
        make_measure(single.grid, 2 * np.eye(2)[None])
    with pytest.raises(DomainError):
        make_measure(single.grid, np.zeros((1, 2, 2)), normalize=True)
    with pytest.raises(DimensionError):
        make_measure(single.grid, np.eye(3)[None])


def test_make_measure_unconstrained():
    grid = Grid.uniform(1, 1)
    m = make_measure(grid, np.full((1, 1, 1), np.e), unit_mass=False)
    assert not m.unit_mass
    assert m.mass == pytest.approx(np.e)


def test_uniform_identity():
    g = Grid.uniform(2, 2)
    I = uniform_identity(g)
    np.testing.assert_array_equal(I.values, np.broadcast_to(np.eye(2), (2, 2, 2)))
    assert I.mass == pytest.approx(1.0)
    s = uniform_identity(Grid.uniform(10, 1))
    assert np.all(s.values == 1.0) and s.mass == pytest.approx(1.0)
    assert entropy(I).value == 0.0


def test_entropy_examples(single):
    lam = np.array([1.5, 0.5])
    expected = 0.5 * 0.5 * np.sum(lam - np.log(lam) - 1)
    assert expected == pytest.approx(0.0719205, abs=1e-7)
    assert entropy(single).value == pytest.approx(expected, rel=1e-14)
    # reduced form -1/2 tr int log A, equal on unit-mass measures
    assert entropy(single).value == pytest.approx(-0.25 * np.sum(np.log(lam)), rel=1e-13)


def test_entropy_flags_singular_blocks():
    grid = Grid.uniform(2, 2)
    m = make_measure(grid, np.array([np.diag([2.0, 0.0]), np.eye(2)]), normalize=True)
    val = entropy(m)
    assert val.infinite and val.value == np.inf
    assert fisher_info(m).infinite


def test_fisher_examples(single, measure):
    assert fisher_info(uniform_identity(Grid.uniform(3, 2))).value == pytest.approx(0.0, abs=1e-15)
    assert fisher_info(single).value == pytest.approx(0.25 * (0.5 * (1 / 1.5 + 2) - 1), rel=1e-14)
    assert fisher_info(single).value == pytest.approx(0.083333, abs=1e-6)


def test_von_neumann_examples(single):
    assert von_neumann(uniform_identity(Grid.uniform(2, 3))).value == pytest.approx(0.0, abs=1e-15)
    probe = make_measure(Grid.uniform(1, 1), np.full((1, 1, 1), np.e), unit_mass=False)
    assert von_neumann(probe).value == pytest.approx(np.e, rel=1e-14)
    expected = 0.5 * (1.5 * np.log(1.5) + 0.5 * np.log(0.5))
    assert von_neumann(single).value == pytest.approx(expected, rel=1e-13)
    assert expected == pytest.approx(0.130812, abs=1e-6)
    zero_block = make_measure(Grid.uniform(1, 2), np.diag([2.0, 0.0])[None])
    assert von_neumann(zero_block).value == pytest.approx(0.5 * 2 * np.log(2))


def test_grad_fr_examples(single, measure):
    I = uniform_identity(Grid.uniform(3, 2))
    fprime = 0.5 * (np.eye(2) - invm(I.values))
    np.testing.assert_allclose(grad_fr(I, fprime), 0.0, atol=1e-15)
    G = grad_fr(single, np.diag([1 / 6, -0.5])[None])
    np.testing.assert_allclose(G[0], np.diag([0.25, -0.25]), atol=1e-15)
    A = measure(4, 2)
    np.testing.assert_allclose(grad_fr(A, np.broadcast_to(3.0 * np.eye(2), A.grid.shape)), 0.0, atol=1e-13)


def test_project_tangent_examples(single, measure, rng):
    A = measure(3, 2)
    U0 = project_tangent(A, sym(rng.standard_normal(A.grid.shape)))
    np.testing.assert_allclose(project_tangent(A, U0.potentials).potentials, U0.potentials, atol=1e-14)
    Z = project_tangent(A, np.broadcast_to(np.eye(2), A.grid.shape))
    np.testing.assert_allclose(Z.potentials, 0.0, atol=1e-14)
    U = project_tangent(single, np.diag([1.0, 0.0])[None])
    np.testing.assert_allclose(U.potentials[0], np.diag([0.25, -0.75]), atol=1e-15)
    assert U.average == pytest.approx(0.0, abs=1e-15)


def test_fr_norm_examples(single, measure):
    I = uniform_identity(Grid.uniform(1, 2))
    assert fr_norm_sq(I, TangentField(I, np.zeros((1, 2, 2)))) == 0.0
    U = project_tangent(I, np.diag([1.0, -1.0])[None])
    assert fr_norm_sq(I, U) == pytest.approx(1.0)
    A = measure(3, 2)
    with pytest.raises(DomainError):
        fr_norm_sq(single, project_tangent(A, np.zeros(A.grid.shape)))


def _directional_fd(functional, A, xi, h):
    grid = A.grid
    plus = functional(MatrixMeasure(grid, A.values + h * xi)).value
    minus = functional(MatrixMeasure(grid, A.values - h * xi)).value
    return (plus - minus) / (2 * h)


@pytest.mark.parametrize("functional", [entropy, von_neumann, fisher_info])
def test_gradient_matches_directional_derivative(functional, measure, rng):
    for _ in range(10):
        A = measure(3, 2)
        V = project_tangent(A, sym(rng.standard_normal(A.grid.shape)))
        xi = V.vector()
        assert abs(A.grid.integrate(np.trace(xi, axis1=-2, axis2=-1))) < 1e-13
        val = functional(A, gradient=True)
        paired = float(A.grid.integrate(np.sum(val.gradient * V.potentials, axis=(-2, -1))))
        for h in (1e-3, 1e-4, 1e-5):
            fd = _directional_fd(functional, A, xi, h)
            assert fd == pytest.approx(paired, rel=1e-4)


@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 3))
@settings(max_examples=60, deadline=None)
def test_gradients_are_mass_tangent(seed, K, d):
    rng = np.random.default_rng(seed)
    A = random_measure(rng, Grid.uniform(K, d))
    G = grad_fr(A, sym(rng.standard_normal(A.grid.shape)))
    assert abs(float(A.grid.integrate(np.trace(G, axis1=-2, axis2=-1)))) <= 1e-10


@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 3))
@settings(max_examples=60, deadline=None)
def test_entropy_and_fisher_nonnegative(seed, K, d):
    A = random_measure(np.random.default_rng(seed), Grid.uniform(K, d))
    assert entropy(A).value >= 0
    assert fisher_info(A).value >= -1e-15


def test_entropy_and_fisher_vanish_only_at_identity(measure):
    I = uniform_identity(Grid.uniform(4, 2))
    assert entropy(I).value == pytest.approx(0.0, abs=1e-15)
    assert fisher_info(I).value == pytest.approx(0.0, abs=1e-15)
    A = measure(4, 2, 0.9, 1.1)
    assert entropy(A).value > 1e-8
    assert fisher_info(A).value > 1e-8


def test_fisher_equals_squared_gradient_norm(measure):
    for _ in range(20):
        A = measure(3, 2)
        grad = entropy(A, gradient=True)
        assert grad.potential.average == pytest.approx(0.0, abs=1e-12)
        assert fr_norm_sq(A, grad.potential) == pytest.approx(fisher_info(A).value, rel=1e-8)


def test_measures_are_immutable(single):
    with pytest.raises(ValueError):
        single.values[0, 0, 0] = 3.0
