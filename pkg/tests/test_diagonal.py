import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from phs.coeffs import AffineReciprocal, Constant
from phs.diagonal import DiagonalSystem, as_input, boundary_trace_solve, check_generation_diagonal, \
    diagonal_energy, evolve_diagonal, incoming_traces, max_workers, outgoing_traces, transport_plan, \
    upwind_evolve, verify_transfer_zero
from phs.errors import ClassificationError, ValidationError
from phs.fixtures import NETWORK_K_PLAIN, NETWORK_Q, network_diagonal_system
from phs.statespace import Grid, State


def _pair(K=1.0, Q=0.0, lam=None, theta=None):
    return DiagonalSystem([lam or Constant(1.0)], [theta or Constant(-1.0)], [[K]], [[Q]])


def test_generation_examples():
    net = DiagonalSystem([Constant(1.0)] * 3, [Constant(-1.0)] * 2, NETWORK_K_PLAIN, NETWORK_Q)
    assert check_generation_diagonal(net).generator
    assert not check_generation_diagonal(_pair(K=0.0, Q=1.0)).generator
    outflow = DiagonalSystem([Constant(1.0)], [], np.zeros((0, 0)), np.zeros((0, 1)))
    assert check_generation_diagonal(outflow).generator


def test_rank_condition_enforced():
    with pytest.raises(ValidationError):
        _pair(K=0.0, Q=0.0)
    with pytest.raises(ValidationError):
        DiagonalSystem([Constant(-1.0)], [Constant(-1.0)], [[1.0]], [[0.0]])


def test_boundary_trace_examples():
    ident = DiagonalSystem([Constant(1.0)] * 2, [Constant(-1.0)] * 2, np.eye(2), np.zeros((2, 2)))
    assert np.allclose(boundary_trace_solve(ident, [3.0, 4.0], [1.0, 2.0]), [1.0, 2.0])
    net = DiagonalSystem([Constant(1.0)] * 3, [Constant(-1.0)] * 2, NETWORK_K_PLAIN, NETWORK_Q)
    a, b, c = 0.3, -1.1, 2.0
    assert np.allclose(boundary_trace_solve(net, [a, b, c], [0.0, 0.0]), [b - c, b - a])
    assert np.allclose(boundary_trace_solve(net, [0.0, 0.0, 0.0], [0.0, 0.0]), 0.0)
    with pytest.raises(ClassificationError):
        boundary_trace_solve(_pair(K=0.0, Q=1.0), [1.0], [0.0])


@settings(max_examples=40, deadline=None)
@given(K=hnp.arrays(complex, (2, 2), elements=st.complex_numbers(max_magnitude=3, allow_nan=False,
                                                                   allow_infinity=False)),
       lam=hnp.arrays(complex, 3, elements=st.complex_numbers(max_magnitude=3, allow_nan=False,
                                                             allow_infinity=False)),
       u=hnp.arrays(complex, 2, elements=st.complex_numbers(max_magnitude=3, allow_nan=False,
                                                           allow_infinity=False)))
def test_boundary_trace_solves_the_coupling(K, lam, u):
    K = K + 4.0 * np.eye(2)   # keep it safely invertible
    system = DiagonalSystem([Constant(1.0)] * 3, [Constant(-1.0)] * 2, K, NETWORK_Q)
    y = boundary_trace_solve(system, lam, u)
    assert np.allclose(K @ y + NETWORK_Q @ lam, u, atol=1e-12)


def test_evolve_shifts_without_input():
    system = _pair()
    g = Grid.uniform(0.0, 20.0, 4001)
    bump = lambda xi: np.exp(-((xi - 8.0) / 0.8) ** 2)
    g0 = State.from_function(g, lambda xi: np.stack([bump(xi), 2.0 * bump(xi)], axis=1))
    out = evolve_diagonal(system, g0, 3.0)
    xi = g.nodes
    assert np.max(np.abs(out.values[:, 0] - bump(xi + 3.0))) <= 1e-8
    want = np.where(xi >= 3.0, 2.0 * bump(xi - 3.0), 0.0)
    assert np.max(np.abs(out.values[:, 1] - want)) <= 1e-8


def test_evolve_constant_inflow_ramp():
    # the coupling acts on Theta(0) g_minus(0) = -g_minus(0), so the inflow value is -c
    c = 0.7 - 0.2j
    g = Grid.uniform(0.0, 10.0, 2001)
    out = evolve_diagonal(_pair(), State.zeros(g, 2), 2.5, u=np.array([c]))
    xi = g.nodes
    assert np.allclose(out.values[xi < 2.5, 1], -c)
    assert np.allclose(out.values[xi > 2.5, 1], 0.0)
    assert not np.any(out.values[:, 0])


def test_evolve_feedback_reflection():
    # K = 1, Q = 1: incoming flux is minus the outgoing flux, a reflecting end
    system = _pair(K=1.0, Q=1.0)
    g = Grid.uniform(0.0, 20.0, 4001)
    bump = lambda xi: np.exp(-((xi - 4.0) / 0.8) ** 2)
    g0 = State.from_function(g, lambda xi: np.stack([bump(xi), 0 * xi], axis=1))
    out = evolve_diagonal(system, g0, 6.0)
    xi = g.nodes
    # Theta g_minus(xi, t) = -Lambda g_plus(0, t - xi) = -bump(t - xi)
    assert np.max(np.abs(out.values[:, 1] - bump(6.0 - xi))) <= 1e-8
    assert diagonal_energy(system, out) == pytest.approx(diagonal_energy(system, g0), rel=1e-8)


def test_evolve_varying_speed_preserves_energy_without_boundary_loss():
    system = DiagonalSystem([AffineReciprocal(1.0, 1.0)], [AffineReciprocal(-2.0, 1.0)], [[1.0]], [[0.0]])
    g = Grid.uniform(0.0, 30.0, 12001)
    g0 = State.from_function(g, lambda xi: np.stack([0 * xi, np.exp(-((xi - 3.0) / 0.7) ** 2)], axis=1))
    out = evolve_diagonal(system, g0, 1.0)
    assert diagonal_energy(system, out) == pytest.approx(diagonal_energy(system, g0), rel=1e-6)


def test_semigroup_law_with_plan_reuse():
    system = network_diagonal_system()
    g = Grid.uniform(0.0, 12.0, 2401)
    rng = np.random.default_rng(3)
    centers = rng.uniform(3.0, 8.0, 5)
    g0 = State.from_function(g, lambda xi: np.exp(-((xi[:, None] - centers) / 0.8) ** 2))
    u = lambda s: np.stack([np.sin(s), s ** 2], axis=-1) * (np.asarray(s)[..., None] ** 2)
    once = evolve_diagonal(system, g0, 1.0, u)
    plan = transport_plan(system, g.nodes, 0.5)
    half = evolve_diagonal(system, g0, 0.5, u, plan=plan)
    twice = evolve_diagonal(system, half, 0.5, u, t0=0.5, plan=plan)
    assert np.max(np.abs(once.values - twice.values)) <= 1e-6


def test_traces_and_input_forms():
    system = network_diagonal_system()
    g = Grid.uniform(0.0, 5.0, 101)
    st_ = State.from_function(g, lambda xi: np.tile(np.arange(1.0, 6.0), (xi.size, 1)))
    assert np.allclose(outgoing_traces(system, st_), [1.0, 2.0, 3.0])
    assert np.allclose(incoming_traces(system, st_), [-4.0, -5.0])
    samples = as_input((np.array([0.0, 1.0]), np.array([[0.0, 2.0], [1.0, 4.0]])), 2)
    assert np.allclose(samples(np.array([0.5])), [[0.5, 3.0]])
    assert np.allclose(as_input(None, 2)(np.array([0.1, 0.2])), 0.0)
    assert as_input([1.0, 2.0], 2)(np.zeros(3)).shape == (3, 2)


def test_transfer_examples():
    system = _pair()
    rep = verify_transfer_zero(system, 1.0, [1.0])
    assert rep.norms_squared[0] == pytest.approx(0.5, rel=1e-4)
    assert not np.any(rep.output) and rep.passed
    rng = np.random.default_rng(7)
    net = network_diagonal_system()
    rep = verify_transfer_zero(net, 2 + 3j, rng.normal(size=2) + 1j * rng.normal(size=2))
    assert rep.passed and np.max(rep.relative_errors) <= 1e-4
    zero = verify_transfer_zero(net, 1.0, [0.0, 0.0])
    assert not np.any(zero.norms_squared) and zero.passed
    with pytest.raises(ValidationError):
        verify_transfer_zero(net, -1.0 + 1j, [1.0, 0.0])


def test_upwind_is_first_order():
    system = _pair(K=1.0, Q=0.5)
    g0 = lambda xi: np.stack([np.exp(-((xi - 4.0) / 0.8) ** 2), 0 * xi], axis=-1)
    exact = evolve_diagonal(system, State.from_function(Grid.uniform(0.0, 10.0, 10001), g0), 2.0)
    errs = []
    for cells in (400, 800):
        fv = upwind_evolve(system, g0, 10.0, cells, 2.0)
        errs.append(np.max(np.abs(fv.values - exact(fv.nodes))))
    assert np.log2(errs[0] / errs[1]) >= 0.8


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("PHS_THREADS", "1")
    assert max_workers() == 1
    monkeypatch.setenv("PHS_THREADS", "3")
    assert max_workers() == 3
    monkeypatch.delenv("PHS_THREADS")
    assert max_workers() >= 1
    assert os.environ.get("PHS_THREADS") is None
