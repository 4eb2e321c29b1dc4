import numpy as np
import pytest

from phs.coeffs import AffineReciprocal, Constant, FunctionCoefficient
from phs.errors import TailTruncationWarning, ValidationError
from phs.fixtures import case3_wave_speed
from phs.semigroups import apply_group_line, apply_semigroup_left, apply_semigroup_right, barbalat_check, \
    resolvent, resolvent_line
from phs.statespace import Grid, State, derivative_on_grid, weighted_norm

import oracles


def _bump(center, width=0.5):
    return lambda xi: np.exp(-((np.asarray(xi) - center) / width) ** 2)


def _transport_oracle(w, f, nodes, t, floor=None):
    """(T(t) x)(xi) = w(foot) / w(xi) x(foot) with the foot from RK4 (step 1e-4)."""
    steps = max(1, int(round(abs(t) / 1e-4)))
    foot = oracles.flow(w, nodes, t, steps)
    out = w(foot) / w(nodes) * f(foot)
    if floor is not None:
        out = np.where(foot < floor, 0.0, out)
    return out


def test_group_unit_speed_shift():
    g = Grid.uniform(-20.0, 20.0, 4001)
    f = _bump(1.0)
    x = State.from_function(g, f)
    y = apply_group_line(Constant(1.0), x, 2.0)
    assert np.max(np.abs(y.values[:, 0] - f(g.nodes + 2.0))) <= 1e-6
    assert np.array_equal(apply_group_line(Constant(1.0), x, 0.0).values, x.values)


def test_group_symmetric_weight_matches_rk4():
    w = AffineReciprocal(1.0, 1.0, symmetric=True)
    g = Grid.uniform(-10.0, 10.0, 8001)
    f = _bump(0.5, 0.3)
    y = apply_group_line(w, State.from_function(g, f), 1.0)
    oracle_w = lambda xi: 1.0 / (1.0 + np.abs(xi))
    ref = _transport_oracle(oracle_w, f, g.nodes, 1.0)
    absw = oracle_w(g.nodes)
    err = weighted_norm(y.with_values(y.values[:, 0] - ref), absw) / weighted_norm(y, absw)
    assert err <= 1e-5


def test_group_needs_line_grid():
    with pytest.raises(ValidationError):
        apply_group_line(Constant(1.0), State.zeros(Grid.uniform(0, 1, 5), 1), 1.0)


def test_left_semigroup_examples():
    g = Grid.uniform(0.0, 10.0, 2001)
    f = _bump(2.5, 0.3)
    y = apply_semigroup_left(Constant(1.0), State.from_function(g, f), 1.0)
    assert np.max(np.abs(y.values[:, 0] - f(g.nodes + 1.0))) <= 1e-6
    with pytest.raises(ValidationError):
        apply_semigroup_left(Constant(-1.0), State.from_function(g, f), 1.0)
    with pytest.raises(ValidationError):
        apply_semigroup_left(Constant(1.0), State.from_function(g, f), -1.0)


def test_left_semigroup_case3_against_rk4():
    w = case3_wave_speed()
    g = Grid.uniform(0.0, 12.0, 6001)
    f = _bump(3.0, 0.7)
    y = apply_semigroup_left(w, State.from_function(g, f), 0.5)
    ref = _transport_oracle(oracles.case3_speed, f, g.nodes, 0.5)
    absw = oracles.case3_speed(g.nodes)
    assert weighted_norm(y.with_values(y.values[:, 0] - ref), absw) <= 1e-5


def test_right_semigroup_examples():
    g = Grid.uniform(0.0, 10.0, 2001)
    f = _bump(1.5, 0.3)
    x = State.from_function(g, f)
    y = apply_semigroup_right(Constant(-1.0), x, 0.5)
    want = np.where(g.nodes >= 0.5, f(g.nodes - 0.5), 0.0)
    assert np.max(np.abs(y.values[:, 0] - want)) <= 1e-6
    assert np.array_equal(apply_semigroup_right(Constant(-1.0), x, 0.0).values, x.values)


def test_right_semigroup_against_rk4():
    w = AffineReciprocal(-1.0, 1.0)
    g = Grid.uniform(0.0, 10.0, 4001)
    f = _bump(2.0, 0.5)
    y = apply_semigroup_right(w, State.from_function(g, f), 1.0)
    # the oracle weight is extended evenly so RK4 can step past 0; feet below 0 are zero-filled
    ref = _transport_oracle(lambda xi: -1.0 / (1.0 + np.abs(xi)), f, g.nodes, 1.0, floor=0.0)
    absw = 1.0 / (1.0 + g.nodes)
    assert weighted_norm(y.with_values(y.values[:, 0] - ref), absw) <= 1e-5


def test_semigroups_contract():
    g = Grid.uniform(0.0, 20.0, 4001)
    x = State.from_function(g, _bump(1.0, 0.5))
    for w in (AffineReciprocal(1.0, 1.0), case3_wave_speed()):
        absw = np.abs(np.asarray(w(g.nodes)))
        n0 = weighted_norm(x, absw)
        norms = [weighted_norm(apply_semigroup_left(w, x, t), absw) for t in (0.5, 1.0, 2.0, 4.0)]
        assert all(b <= a * (1 + 1e-9) for a, b in zip([n0] + norms, norms))


def test_resolvent_examples():
    g = Grid.uniform(0.0, 60.0, 6001)
    y = resolvent(Constant(1.0), 1.0, State.from_function(g, lambda xi: np.exp(-xi)), "half-line")
    mask = g.nodes <= 10
    assert np.max(np.abs(y.values[mask, 0] - 0.5 * np.exp(-g.nodes[mask]))) <= 1e-6
    zero = resolvent(Constant(1.0), 1.0, State.zeros(g, 1), "half-line")
    assert not np.any(zero.values)


def test_resolvent_weight_two_frozen_and_residual():
    g = Grid.uniform(0.0, 60.0, 12001)
    x = State.from_function(g, lambda xi: np.exp(-xi))
    y = resolvent(Constant(2.0), 1.0, x, "half-line")
    assert y(np.array([1.0]))[0, 0].real == pytest.approx(oracles.RESOLVENT_W2_AT_1, abs=1e-9)
    r = y.values[:, 0] - derivative_on_grid(2.0 * y.values, g.nodes)[:, 0] - x.values[:, 0]
    assert weighted_norm(x.with_values(r), 2.0 * np.ones(g.size)) <= 1e-5


def test_resolvent_line_and_truncation_warning():
    g = Grid.uniform(-20.0, 40.0, 6001)
    x = State.from_function(g, lambda xi: np.exp(-xi))
    y = resolvent_line(Constant(1.0), 1.0, x)
    mask = (g.nodes >= 0) & (g.nodes <= 10)
    assert np.max(np.abs(y.values[mask, 0] - 0.5 * np.exp(-g.nodes[mask]))) <= 1e-6
    short = Grid.uniform(0.0, 2.0, 401)
    with pytest.warns(TailTruncationWarning):
        out = resolvent(Constant(1.0), 1.0, State.from_function(short, lambda xi: np.exp(-xi)), "half-line")
    assert out.meta["tail_truncated"]


def test_resolvent_rejects_bad_input():
    g = Grid.uniform(0.0, 1.0, 11)
    with pytest.raises(ValidationError):
        resolvent(Constant(-1.0), 1.0, State.zeros(g, 1))
    with pytest.raises(ValidationError):
        resolvent(Constant(1.0), 0.0, State.zeros(g, 1))


def test_barbalat_examples():
    g = Grid.uniform(0.0, 12.0, 6001)
    gauss = barbalat_check(Constant(1.0), State.from_function(g, lambda xi: np.exp(-xi ** 2)))
    assert gauss["sup_wx_squared"] == pytest.approx(1.0)
    assert gauss["bound"] == pytest.approx(1.0 + 2.0 * oracles.GAUSS_NORM_SQ, rel=1e-6)
    assert gauss["holds"]
    zero = barbalat_check(Constant(1.0), State.zeros(g, 1))
    assert zero["sup_wx_squared"] == 0.0 and zero["bound"] == 0.0 and zero["holds"]
    g = Grid.uniform(0.0, 40.0, 8001)
    expo = barbalat_check(Constant(2.0), State.from_function(g, lambda xi: np.exp(-xi)))
    assert expo["sup_wx_squared"] == pytest.approx(4.0)
    assert expo["bound"] == pytest.approx(8.0, rel=1e-6)
    assert expo["holds"]


def test_barbalat_for_varying_weight():
    w = FunctionCoefficient(lambda xi: 1.0 + 0.5 * np.sin(xi), sign=1,
                            derivative=lambda xi: 0.5 * np.cos(xi))
    g = Grid.uniform(0.0, 30.0, 6001)
    rep = barbalat_check(w, State.from_function(g, lambda xi: np.exp(-(xi - 3.0) ** 2) * (1 + 1j)))
    assert rep["holds"]
