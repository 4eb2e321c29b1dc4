import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phs.coeffs import AffineReciprocal, Constant, FunctionCoefficient, MatrixCoefficient, PowerTail, Tabulated
from phs.errors import DomainError, QuadratureError, SignError, ValidationError


def test_eval_examples():
    assert Constant(2.0)(7.0) == 2.0
    assert AffineReciprocal(1.0, 1.0)(1.0) == 0.5
    assert PowerTail(1.0, -3.0)(2.0) == 0.125


def test_derivative_examples():
    assert Constant(2.0).derivative(3.3) == 0.0
    assert AffineReciprocal(1.0, 1.0).derivative(0.0) == -1.0
    assert PowerTail(1.0, -1.0).derivative(2.0) == pytest.approx(-0.25, rel=1e-14)


def test_integrate_examples():
    assert Constant(2.0).integrate(0.0, 3.0) == pytest.approx(6.0, abs=1e-14)
    # reciprocal of 1/(1+xi) is 1+xi, with primitive xi + xi^2/2
    assert AffineReciprocal(1.0, 1.0).integrate(0.0, 2.0, reciprocal=True) == pytest.approx(4.0, abs=1e-13)
    assert PowerTail(1.0, 1.0).integrate(1.0, 3.0) == pytest.approx(4.0, abs=1e-13)


@pytest.mark.parametrize("coef", [
    AffineReciprocal(1.5, 0.7),
    PowerTail(1.0, -3.0),
    PowerTail(2.0, 0.5, value0=1.0, slope0=0.3),
])
@pytest.mark.parametrize("xi", [0.3, 1.7, 4.0, 11.0])
def test_derivative_matches_central_difference(coef, xi):
    h = 1e-5 * (1 + xi)
    fd = (coef(xi + h) - coef(xi - h)) / (2 * h)
    assert coef.derivative(xi) == pytest.approx(fd, rel=1e-6)


def test_power_tail_blend_is_c1_at_one():
    w = PowerTail(1.0, -3.0, value0=1.0, slope0=0.0)
    eps = 1e-9
    assert w(1.0 - eps) == pytest.approx(w(1.0 + eps), abs=1e-8)
    assert w.derivative(1.0 - eps) == pytest.approx(w.derivative(1.0 + eps), abs=1e-7)
    assert w(0.0) == 1.0
    assert w.derivative(0.0) == pytest.approx(0.0, abs=1e-14)


def test_power_tail_integral_across_breakpoint():
    w = PowerTail(1.0, -3.0)
    # blend 1 + 3 xi^2 - 3 xi^3 integrates to 1.25 on [0, 1]; xi^-3 to 3/8 on [1, 2]
    assert w.integrate(0.0, 2.0) == pytest.approx(1.25 + 0.375, abs=1e-12)


def test_sign_is_enforced():
    with pytest.raises(SignError):
        Constant(0.0)
    bad = FunctionCoefficient(lambda x: 1.0 - x, sign=1)
    assert bad(0.5) == 0.5
    with pytest.raises(SignError):
        bad(2.0)


def test_domain_is_enforced():
    with pytest.raises(DomainError):
        AffineReciprocal(1.0, 1.0)(-0.5)
    assert AffineReciprocal(1.0, 1.0, symmetric=True)(-1.0) == 0.5


def test_tabulated_monotone_and_sign_checked(tmp_path):
    w = Tabulated([0.0, 1.0, 2.0, 5.0], [1.0, 2.0, 2.5, 3.0])
    assert w(1.0) == pytest.approx(2.0)
    xs = np.linspace(0, 5, 101)
    assert np.all(np.diff(w(xs)) >= -1e-14)
    with pytest.raises(ValidationError):
        Tabulated([0.0, 0.0, 1.0], [1.0, 1.0, 2.0])
    with pytest.raises(SignError):
        Tabulated([0.0, 1.0, 2.0], [1.0, -1.0, 1.0])
    path = tmp_path / "w.csv"
    path.write_text("xi,w\n0,1\n1,2\n2,2.5\n5,3\n")
    assert Tabulated.from_csv(path)(2.0) == pytest.approx(2.5)


def test_quadrature_error_carries_estimate():
    spike = FunctionCoefficient(lambda x: 1.0 + 1e6 * np.exp(-1e8 * (x - 0.37) ** 2), sign=1)
    try:
        spike.integrate(0.0, 1.0, tol=1e-14)
    except QuadratureError as exc:
        assert np.isfinite(exc.estimate)
        assert exc.error > 0


def test_scaled_and_negated():
    w = AffineReciprocal(2.0, 1.0)
    n = w.negated()
    assert n.sign == -1
    assert n(1.0) == -1.0
    assert w.scaled(3.0)(1.0) == pytest.approx(3.0)


def test_reciprocal_nonintegrable_heuristic():
    assert Constant(1.0).check_reciprocal_nonintegrable()
    with pytest.warns(UserWarning):
        assert not FunctionCoefficient(lambda x: (1.0 + x) ** 2, sign=1).check_reciprocal_nonintegrable()


@settings(max_examples=40, deadline=None)
@given(c=st.floats(0.1, 10.0), a=st.floats(0.1, 10.0), tau=st.floats(0.0, 100.0))
def test_affine_reciprocal_primitive_inverse(c, a, tau):
    w = AffineReciprocal(c, a)
    xi = w.reciprocal_primitive_inverse(tau)
    assert w.reciprocal_primitive(xi) == pytest.approx(tau, rel=1e-12, abs=1e-12)


def test_matrix_coefficient_flags():
    H = MatrixCoefficient.diagonal_of([AffineReciprocal(1.0, 1.0), 2.0], hermitian=True, positive_definite=True)
    assert H.diagonal and not H.constant
    v = H(np.array([1.0]))[0]
    assert np.allclose(v, np.diag([0.5, 2.0]))
    dv = H.derivative(np.array([0.0]))[0]
    assert np.allclose(dv, np.diag([-1.0, 0.0]))
    with pytest.raises(ValidationError):
        MatrixCoefficient.constant_matrix([[1.0, 2.0], [0.0, 1.0]], hermitian=True)
    with pytest.raises(ValidationError):
        MatrixCoefficient.constant_matrix([[1.0, 0.0], [0.0, -1.0]], hermitian=True, positive_definite=True)
    full = MatrixCoefficient.constant_matrix(np.array([[2.0, 1j], [-1j, 2.0]]), hermitian=True,
                                             positive_definite=True)
    assert full.constant and not full.diagonal
    assert full.sup_norm(np.array([0.0, 1.0])) == pytest.approx(3.0)
