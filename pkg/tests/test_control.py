import json

import numpy as np
import pytest

from phs.coeffs import MatrixCoefficient
from phs.control import BoundaryControlSystem, _ratio, diagonal_system_of, dumps_report, energy_audit, prepare, \
    result_to_report, simulate, validate_bcs, well_posedness_certificate
from phs.diagonal import evolve_diagonal
from phs.errors import NotAGeneratorError, ValidationError
from phs.fixtures import fixture, vibrating_string_constant
from phs.hamiltonian import PortHamiltonianSystem, check_assumptions
from phs.statespace import Grid, State

from oracles import dalembert_wave_output, gaussian


def _pair_bcs(W_B1, W_C=((1.0, 0.0),)):
    H = MatrixCoefficient.diagonal_of([1.0, 1.0], hermitian=True, positive_definite=True)
    phs = PortHamiltonianSystem(np.diag([1.0, -1.0]), H, np.zeros((0, 2)))
    return BoundaryControlSystem(phs, np.atleast_2d(W_B1), None, np.asarray(W_C))


def _bumps(grid, *specs):
    """State with component k a Gaussian (center, width, amplitude) from specs[k]."""
    cols = [gaussian(*s) if s else (lambda xi: 0.0 * xi) for s in specs]
    return State.from_function(grid, lambda xi: np.stack([c(xi) for c in cols], axis=1))


def test_bcs_row_counts():
    f = fixture("transport-network-5")
    with pytest.raises(ValidationError):
        BoundaryControlSystem(f.phs, np.zeros((0, 5)))
    with pytest.raises(ValidationError):
        BoundaryControlSystem(f.phs, f.phs.W_B[:1])                     # one row short
    with pytest.raises(ValidationError):
        BoundaryControlSystem(f.phs, f.phs.W_B, None, np.eye(5))        # more outputs than n_plus
    split = BoundaryControlSystem(f.phs, f.phs.W_B[:1], f.phs.W_B[1:])
    assert split.p == 1 and split.q == 0


def test_validate_examples():
    f = fixture("transport-network-5")
    g = Grid.uniform(0.0, 10.0, 501)
    far = _bumps(g, None, (5.0, 1.0), None, None, None)
    assert validate_bcs(f.bcs, far, [0.0, 0.0]).status == "classical"
    near = _bumps(g, (0.0, 1.0), None, None, None, None)
    assert validate_bcs(f.bcs, near, [0.0, 0.0]).status == "mild"
    assert validate_bcs(f.bcs, far, [1.0, 0.0]).status == "mild"
    # compatible data that does not vanish at 0: x4 = x2 - x3 and x5 = x2 - x1 at the vertex
    ok = _bumps(g, (0.0, 1.0), None, None, None, (0.0, 1.0, -1.0))
    assert validate_bcs(f.bcs, ok, [0.0, 0.0]).status == "classical"


def test_zero_in_zero_out():
    f = fixture("transport-network-5")
    g = Grid.uniform(0.0, 10.0, 501)
    res = simulate(f.bcs, State.zeros(g, 5), None, T=1.0, dt=0.05)
    assert not np.any(res.y)
    assert not np.any(res.energy_x)


def test_network_vertex_coupling():
    f = fixture("transport-network-5")
    g = Grid.uniform(0.0, 10.0, 2001)
    bump = gaussian(0.5, 0.1)
    x0 = _bumps(g, None, (0.5, 0.1), None, None, None)
    res = simulate(f.bcs, x0, None, T=1.0, dt=0.01, snapshot_count=2)
    x2, x3 = res.y[:, 1], res.y[:, 2]
    assert np.max(np.abs(x2 - bump(res.times))) <= 1e-6
    # the incoming components enter with Theta(0) = -1
    x4 = -res.incoming[:, 0]
    assert np.max(np.abs(x4 - (x2 - x3))) <= 1e-6
    t_end, x_end = res.snapshots[-1]
    xi = g.nodes
    want = np.where(xi <= t_end, bump(t_end - xi), 0.0)
    assert np.max(np.abs(x_end.values[:, 3] - want)) <= 1e-6
    assert np.max(np.abs(x_end.values[:, 4] - want)) <= 1e-6


def test_dalembert_trace():
    f = vibrating_string_constant(1.0, 0.0)
    g = Grid.uniform(0.0, 20.0, 4001)
    b1, b2 = gaussian(6.0, 1.0), gaussian(8.0, 1.2, 0.4)
    x0 = State.from_function(g, lambda xi: np.stack([b1(xi), b2(xi)], axis=1))
    res = simulate(f.bcs, x0, None, T=5.0, dt=0.0037, snapshot_count=2, record_energy=False)
    ref = dalembert_wave_output(b1, b2, lambda t: 0.0 * t, res.times)
    assert np.max(np.abs(res.y[:, 0] - ref)) <= 1e-4


def test_causality():
    f = fixture("weighted-transport")
    g = Grid.uniform(0.0, 5.0, 1001)
    x0 = State.zeros(g, 1)
    ramp = lambda t: (np.sin(np.asarray(t)) ** 2)[..., None]
    late = lambda t: ramp(t) + (np.maximum(np.asarray(t) - 1.0, 0.0) ** 3)[..., None]
    a = simulate(f.bcs, x0, ramp, T=2.0, dt=0.01)
    b = simulate(f.bcs, x0, late, T=2.0, dt=0.01)
    early = a.times <= 1.0
    assert np.array_equal(a.energy_x[early], b.energy_x[early])
    assert not np.allclose(a.energy_x[~early], b.energy_x[~early])


def test_exact_mode_agrees_with_evolve_diagonal():
    bcs = _pair_bcs([[0.5, 1.0]])
    g = Grid.uniform(0.0, 20.0, 2001)
    x0 = _bumps(g, (6.0, 1.0), (9.0, 1.0, 0.7))
    res = simulate(bcs, x0, None, T=2.0, dt=0.01, snapshot_count=2)
    assert res.mode == "exact"
    prep = prepare(bcs, g)
    g0 = x0.with_values(np.einsum("nij,nj->ni", prep.diag.S, x0.values))
    direct = evolve_diagonal(prep.system, g0, 2.0)
    assert np.max(np.abs(res.final_g.values - direct.values)) <= 1e-10


def test_strang_splitting_is_second_order():
    f = fixture("vibrating-string-case3")
    g = Grid.uniform(0.0, 12.0, 1201)
    prep = prepare(f.bcs, g)
    x0 = _bumps(g, (4.0, 0.8), (5.0, 0.8, 0.5))
    finals = []
    for dt in (0.1, 0.05, 0.025):
        res = simulate(f.bcs, x0, None, T=1.0, dt=dt, snapshot_count=2, prep=prep, record_energy=False)
        assert res.mode == "strang"
        finals.append(res.final_g.values)
    e1 = np.max(np.abs(finals[0] - finals[1]))
    e2 = np.max(np.abs(finals[1] - finals[2]))
    assert np.log2(e1 / e2) >= 1.8


def test_refuses_non_generator():
    f = vibrating_string_constant(1.0, 1.0)
    with pytest.raises(NotAGeneratorError) as info:
        simulate(f.bcs, State.zeros(Grid.uniform(0.0, 5.0, 101), 2), None, T=1.0)
    assert info.value.report.verdict == "not-generator"


def test_audit_zero_input():
    bcs = _pair_bcs([[0.0, 1.0]])
    g = Grid.uniform(0.0, 20.0, 4001)
    res = simulate(bcs, _bumps(g, (6.0, 1.5), (8.0, 1.5)), None, T=2.0, dt=0.005)
    audit = energy_audit(res)
    assert audit.max_residual <= 1e-8
    assert audit.energy_nonincreasing and audit.passed


def test_audit_ramp_input_closed_form():
    # x0 = 0 and u = t: the incoming flux is t^2 and nothing leaves, so E(t) = t^3 / 3
    bcs = _pair_bcs([[0.0, 1.0]])
    g = Grid.uniform(0.0, 5.0, 2001)
    res = simulate(bcs, State.zeros(g, 2), lambda t: np.asarray(t)[..., None], T=1.0, dt=0.001)
    assert np.max(np.abs(res.energy_g - res.times ** 3 / 3)) <= 1e-6
    assert not np.any(res.y)
    audit = energy_audit(res)
    assert audit.max_residual <= 1e-6 and audit.passed


def test_audit_with_input_tracks_supply():
    bcs = _pair_bcs([[0.0, 1.0]])
    g = Grid.uniform(0.0, 20.0, 4001)
    u = lambda t: (np.sin(np.pi * np.asarray(t) / 2.0) ** 4)[..., None]
    x0 = _bumps(g, (3.0, 1.0), None)
    res = simulate(bcs, x0, u, T=2.0, dt=0.005)
    audit = energy_audit(res)
    assert audit.passed
    # the residual is the central difference error of E, second order in dt
    fine = energy_audit(simulate(bcs, x0, u, T=2.0, dt=0.0025))
    assert np.log2(audit.max_residual / fine.max_residual) >= 1.8
    # with this normalization the incoming flux is |u|^2 and the outgoing one |y|^2
    dE = np.gradient(res.energy_x, res.times)
    supply = np.abs(res.u[:, 0]) ** 2 - np.abs(res.y[:, 0]) ** 2
    assert np.max(np.abs(dE - supply)[1:-1]) <= 1e-3


def test_audit_case3_within_bound():
    f = fixture("vibrating-string-case3")
    g = Grid.uniform(0.0, 20.0, 2001)
    res = simulate(f.bcs, _bumps(g, (6.0, 1.0), None), None, T=2.0, dt=0.005)
    audit = energy_audit(res)
    assert audit.passed
    # the source term is bounded by 2 K1 times the energy
    K1 = check_assumptions(f.phs).K1
    assert np.max(np.abs(res.source)) <= 2.0 * K1 * np.max(res.energy_g) * (1 + 1e-6)


def test_certificate_examples():
    bcs = _pair_bcs([[0.0, 1.0]])
    cert = well_posedness_certificate(bcs, tau=1.0, trials=4, refine_check=False)
    assert np.isfinite(cert.m_tau) and cert.m_tau <= 1.0 + 1e-6
    net = well_posedness_certificate(fixture("transport-network-5").bcs, tau=1.0, trials=4)
    assert np.isfinite(net.m_tau) and net.stable
    g = Grid.uniform(0.0, 5.0, 101)
    zero = simulate(bcs, State.zeros(g, 2), None, T=1.0, dt=0.1)
    assert _ratio(zero, 0.0) == 0.0


def test_diagonal_system_of_network():
    f = fixture("transport-network-5")
    prep = prepare(f.bcs, Grid.uniform(0.0, 5.0, 51))
    system = diagonal_system_of(f.phs, prep.diag)
    assert (system.n_plus, system.n_minus) == (3, 2)
    assert np.allclose(system.K, -np.array([[0.0, 1.0], [1.0, 0.0]]))


def test_report_is_json():
    f = fixture("transport-network-5")
    g = Grid.uniform(0.0, 10.0, 501)
    res = simulate(f.bcs, _bumps(g, None, (5.0, 1.0), None, None, None), None, T=0.5, dt=0.05)
    data = json.loads(dumps_report(result_to_report(res, energy_audit(res))))
    assert data["mode"] == "exact" and data["status"] == "classical"
    assert data["generation"]["verdict"] == "generator"
