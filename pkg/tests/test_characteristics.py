import threading

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phs.characteristics import FULL_LINE, HALF_LINE, CharacteristicMap, characteristic_map, \
    richardson_limit, verify_characteristic_properties
from phs.coeffs import AffineReciprocal, Constant, FunctionCoefficient, PowerTail
from phs.errors import DomainError, OutOfRangeError
from phs.fixtures import case3_wave_speed

import oracles


def test_p_examples():
    assert characteristic_map(Constant(1.0)).p(5.0) == 5.0
    assert characteristic_map(AffineReciprocal(1.0, 1.0)).p(2.0) == pytest.approx(4.0, abs=1e-14)
    assert characteristic_map(Constant(-1.0)).p(3.0) == -3.0


def test_p_inverse_examples():
    assert characteristic_map(Constant(1.0)).p_inverse(5.0) == 5.0
    assert characteristic_map(AffineReciprocal(1.0, 1.0)).p_inverse(4.0) == pytest.approx(2.0, abs=1e-14)
    assert characteristic_map(Constant(2.0)).p_inverse(1.5) == 3.0


def test_mu_and_flow_examples():
    assert characteristic_map(Constant(1.0)).mu(0.7, 2.0) == 2.0
    assert characteristic_map(AffineReciprocal(1.0, 1.0)).mu(0.0, 1.5) == pytest.approx(1.0, abs=1e-14)
    assert characteristic_map(Constant(-1.0)).mu(3.0, 1.0) == -1.0
    assert characteristic_map(Constant(2.0)).flow(1.0, 3.0) == 7.0
    assert characteristic_map(AffineReciprocal(1.0, 1.0)).flow(0.0, 1.5) == pytest.approx(1.0, abs=1e-14)
    assert characteristic_map(Constant(1.0)).flow(4.0, 0.0) == 4.0


def test_out_of_range_on_half_line():
    cmap = characteristic_map(Constant(-1.0))
    # a right-moving foot from xi = 1 traced back 2 units leaves [0, inf)
    with pytest.raises(OutOfRangeError):
        cmap.p_inverse(1.0)
    assert np.isnan(cmap.p_inverse(1.0, out_of_range="nan"))
    assert cmap.flow(1.0, 2.0) == -np.inf
    with pytest.raises(DomainError):
        cmap.p(-1.0)


def test_quadrature_route_matches_closed_form():
    w = AffineReciprocal(1.3, 0.6)
    closed = CharacteristicMap(w, use_closed_form=True)
    quad = CharacteristicMap(w, use_closed_form=False)
    assert closed.closed_form and not quad.closed_form
    xi = np.linspace(0.0, 30.0, 301)
    assert np.max(np.abs(quad.p(xi) - closed.p(xi))) <= 1e-9 * (1 + closed.p(30.0))
    tau = np.linspace(0.0, 300.0, 301)
    assert np.max(np.abs(quad.p_inverse(tau) - closed.p_inverse(tau))) <= 1e-9 * 30


def test_case3_travel_time_frozen_values():
    cmap = characteristic_map(case3_wave_speed())
    for xi, want in oracles.CASE3_P.items():
        assert cmap.p(xi) == pytest.approx(want, abs=1e-9)
    assert cmap.flow(0.5, 1.0) == pytest.approx(oracles.CASE3_FLOW_HALF_T1, abs=1e-9)


def test_case3_against_rk4():
    cmap = characteristic_map(case3_wave_speed())
    xi = np.array([0.1, 0.9, 1.3, 4.0, 9.5])
    assert np.allclose(cmap.p(xi), oracles.travel_time(oracles.case3_speed, xi), atol=1e-9)
    feet = oracles.flow(oracles.case3_speed, xi, 2.5)
    assert np.allclose(cmap.flow(xi, 2.5), feet, atol=1e-8)


def test_power_tail_flow_against_rk4():
    w = PowerTail(2.0, -0.5, value0=1.0, slope0=0.5)
    cmap = characteristic_map(w)
    xi = np.array([0.0, 0.4, 2.0, 7.0])
    assert np.allclose(cmap.flow(xi, 1.7), oracles.flow(w, xi, 1.7), atol=1e-8)


def _wavy(amp):
    return FunctionCoefficient(lambda x: 1.0 + amp * np.sin(np.asarray(x)), sign=1,
                               derivative=lambda x: amp * np.cos(np.asarray(x)))


@settings(max_examples=60, deadline=None)
@given(amp=st.floats(0.0, 0.9), tau=st.floats(0.0, 60.0))
def test_inverse_is_exact_for_quadrature_weights(amp, tau):
    # regression: Newton used to stall at a bisection midpoint once the residual hit rounding level
    cmap = CharacteristicMap(_wavy(amp))
    xi = cmap.p_inverse(tau)
    assert cmap.p(xi) == pytest.approx(tau, abs=1e-10 * (1 + tau))


@settings(max_examples=30, deadline=None)
@given(xi=st.floats(0.0, 20.0), s=st.floats(0.0, 3.0), t=st.floats(0.0, 3.0))
def test_cocycle_for_affine_reciprocal(xi, s, t):
    cmap = characteristic_map(AffineReciprocal(2.0, 1.0))
    lhs = cmap.mu(xi, s + t)
    rhs = cmap.mu(xi, s) + cmap.mu(xi + cmap.mu(xi, s), t)
    assert lhs == pytest.approx(rhs, abs=1e-10 * (1 + abs(lhs)))


def test_full_line_map():
    w = AffineReciprocal(1.0, 1.0, symmetric=True)
    cmap = characteristic_map(w, FULL_LINE)
    assert cmap.p(-2.0) == pytest.approx(-4.0)
    assert cmap.p_inverse(-4.0) == pytest.approx(-2.0)
    assert cmap.flow(-2.0, 8.0) == pytest.approx(2.0)


def test_map_is_cached_per_weight():
    w = AffineReciprocal(1.0, 1.0)
    assert characteristic_map(w) is characteristic_map(w)
    assert characteristic_map(w, HALF_LINE) is not characteristic_map(w, HALF_LINE, use_closed_form=False)


def test_concurrent_extension_is_consistent():
    cmap = CharacteristicMap(_wavy(0.5))
    out = {}

    def work(k):
        out[k] = cmap.p(np.linspace(0, 10.0 * (k + 1), 50))

    threads = [threading.Thread(target=work, args=(k,)) for k in range(6)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    ref = CharacteristicMap(_wavy(0.5))
    for k, v in out.items():
        assert np.allclose(v, ref.p(np.linspace(0, 10.0 * (k + 1), 50)), atol=1e-10)


def test_richardson_limit_recovers_polynomial():
    ts = np.array([1e-2, 1e-3, 1e-4])
    vals = 3.0 + 2.0 * ts - 5.0 * ts ** 2
    assert richardson_limit(ts, vals) == pytest.approx(3.0, abs=1e-12)


def test_verify_examples():
    rep = verify_characteristic_properties(characteristic_map(Constant(1.0)), 100, seed=1)
    assert rep.passed
    assert max(r.max_residual for r in rep.results.values()) <= 1e-8
    rep = verify_characteristic_properties(characteristic_map(AffineReciprocal(1.0, 1.0)), 100, seed=1)
    assert rep.passed
    rep = verify_characteristic_properties(characteristic_map(Constant(-1.0)), 100, seed=1)
    assert rep.results["reflection"].max_residual == 0.0
    assert set(rep.results) == {"sign", "initial", "travel_time", "cocycle", "small_time", "derivatives",
                                "reflection"}


def test_verify_flags_a_broken_map():
    class Broken(CharacteristicMap):
        def p_inverse(self, tau, out_of_range="raise"):
            return 1.01 * np.asarray(super().p_inverse(tau, out_of_range))

    rep = verify_characteristic_properties(Broken(Constant(1.0)), 50, seed=0)
    assert not rep.passed
    assert not rep.results["travel_time"].passed
