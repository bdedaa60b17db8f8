import numpy as np
import pytest

from frs.dynamics import (
    RK4_A,
    RK4_B,
    RK4_C,
    FlowTrace,
    dissipation_report,
    heat_flow_exact,
    heat_flow_integrate,
    rk4_step,
)
from frs.exceptions import DomainError
from frs.measures import Grid, entropy, fisher_info, make_measure, uniform_identity

TARGET = np.diag([1 + 0.5 / np.e, 1 - 0.5 / np.e])


@pytest.fixture
def diag_start():
    return make_measure(Grid.uniform(1, 2), np.diag([1.5, 0.5])[None])


def test_tableau_is_consistent():
    np.testing.assert_allclose(RK4_A.sum(axis=1), RK4_C)
    assert RK4_B.sum() == pytest.approx(1.0)
    assert RK4_B @ RK4_C == pytest.approx(0.5)
    assert RK4_B @ RK4_C**2 == pytest.approx(1 / 3)
    assert RK4_B @ RK4_C**3 == pytest.approx(0.25)


def test_rk4_step_on_scalar_exponential():
    # y' = -y, one step of size h reproduces the degree-4 Taylor polynomial
    h = 0.1
    y = rk4_step(np.array(1.0), h, rhs=lambda v: -v)
    assert y == pytest.approx(1 - h + h**2 / 2 - h**3 / 6 + h**4 / 24, rel=1e-15)


def test_exact_examples(diag_start):
    np.testing.assert_array_equal(heat_flow_exact(diag_start, 0.0).values, diag_start.values)
    I = uniform_identity(Grid.uniform(3, 2))
    np.testing.assert_allclose(heat_flow_exact(I, 7.3).values, I.values, atol=1e-15)
    final = heat_flow_exact(diag_start, 2.0).values[0]
    np.testing.assert_allclose(final, TARGET, atol=1e-15)
    np.testing.assert_allclose(np.diag(final), [1.183940, 0.816060], atol=1e-6)
    with pytest.raises(DomainError):
        heat_flow_exact(diag_start, -1.0)


def test_exponential_convergence(measure):
    A0 = measure(3, 2)
    dev0 = np.linalg.norm(A0.values - np.eye(2))
    for t in (0.1, 1.0, 5.0, 20.0):
        dev = np.linalg.norm(heat_flow_exact(A0, t).values - np.eye(2))
        assert dev == pytest.approx(np.exp(-t / 2) * dev0, rel=1e-12, abs=1e-15)


def test_exact_flow_conserves_mass(measure):
    A0 = measure(5, 3)
    for t in np.linspace(0, 10, 21):
        assert abs(heat_flow_exact(A0, t).mass - 1.0) <= 1e-10


def test_integrate_examples(diag_start):
    trace = heat_flow_integrate(diag_start, 0.0, 1e-3)
    assert len(trace) == 1 and trace.states[0] is diag_start
    I = uniform_identity(Grid.uniform(2, 2))
    flat = heat_flow_integrate(I, 0.5, 0.1)
    for s in flat.states:
        np.testing.assert_allclose(s.values, I.values, atol=1e-15)
    trace = heat_flow_integrate(diag_start, 2.0, 1e-3)
    assert len(trace) == 2001
    assert trace.times[-1] == pytest.approx(2.0)
    assert np.abs(trace.states[-1].values[0] - TARGET).max() <= 1e-8


def test_integrate_rejects_bad_steps(diag_start):
    with pytest.raises(DomainError):
        heat_flow_integrate(diag_start, 1.0, 0.0)
    with pytest.raises(DomainError):
        heat_flow_integrate(diag_start, 1.0, 0.3)
    with pytest.raises(DomainError):
        heat_flow_integrate(diag_start, -1.0, 0.1)


def test_integrated_flow_on_random_measures(measure):
    for _ in range(5):
        A0 = measure(4, 2)
        trace = heat_flow_integrate(A0, 1.0, 1e-2)
        assert np.abs(trace.states[-1].values - heat_flow_exact(A0, 1.0).values).max() <= 1e-8
        assert max(abs(s.mass - 1.0) for s in trace.states) <= 1e-10
        assert np.all(np.diff(trace.entropy_series) <= 1e-9)
        assert np.all(np.diff(trace.fisher_series) <= 1e-9)


def test_dissipation_examples(diag_start):
    I = uniform_identity(Grid.uniform(1, 2))
    assert all(r == 0.0 for _, r in dissipation_report(heat_flow_integrate(I, 0.1, 0.01)))
    fine = max(r for _, r in dissipation_report(heat_flow_integrate(diag_start, 2.0, 1e-3)))
    coarse = max(r for _, r in dissipation_report(heat_flow_integrate(diag_start, 2.0, 2e-3)))
    assert fine <= 1e-5
    assert 3.0 <= coarse / fine <= 5.0


def test_dissipation_against_closed_form_series(diag_start):
    # entropy and Fisher information along the exact flow, without the integrator
    times = np.arange(201) * 0.01
    states = [heat_flow_exact(diag_start, t) for t in times]
    trace = FlowTrace(
        times,
        states,
        np.array([entropy(s).value for s in states]),
        np.array([fisher_info(s).value for s in states]),
    )
    assert max(r for _, r in dissipation_report(trace)) <= 1e-4


def test_dissipation_errors(diag_start):
    short = heat_flow_integrate(diag_start, 0.1, 0.1)
    with pytest.raises(DomainError):
        dissipation_report(short)
    states = [diag_start] * 3
    ragged = FlowTrace(np.array([0.0, 0.1, 0.3]), states, np.zeros(3), np.zeros(3))
    with pytest.raises(DomainError):
        dissipation_report(ragged)
