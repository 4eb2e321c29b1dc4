"""Scalar and matrix coefficient functions of the spatial variable.

A scalar coefficient is a real function of xi that never vanishes and keeps
one declared sign. Every kind provides values, derivatives and definite
integrals of itself and of its reciprocal; closed forms are used whenever the
kind admits them and adaptive Gauss-Kronrod quadrature otherwise.

Example:
    >>> w = AffineReciprocal(1.0, 1.0)       # 1 / (1 + xi)
    >>> float(w(1.0))
    0.5
    >>> w.integrate(0.0, 2.0, reciprocal=True)
    4.0
"""

from __future__ import annotations

import csv
import math
import warnings
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as _spi
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, HeuristicWarning, QuadratureError, SignError, ValidationError

DEFAULT_TOL = 1e-10
PANEL_BUDGET = 10_000

POSITIVE = 1
NEGATIVE = -1


def _sign_value(sign) -> int:
    if sign in (1, "+", "positive", "strictly-positive"):
        return POSITIVE
    if sign in (-1, "-", "negative", "strictly-negative"):
        return NEGATIVE
    raise ValidationError(f"unknown sign declaration {sign!r}")


class ScalarCoefficient:
    """Base class for sign-definite real coefficients w(xi).

    Subclasses implement ``_value`` and ``_derivative`` on float arrays and may
    override ``_antiderivative`` / ``_reciprocal_antiderivative`` (closed-form
    primitives) and ``_reciprocal_antiderivative_inverse``.

    Attributes:
        sign: +1 or -1, the declared sign.
        reciprocal_nonintegrable: user declaration that 1/|w| is not
            integrable on the relevant half-line.
        domain: closed interval (lo, hi) on which the coefficient is defined.
        breakpoints: interior points where the formula changes (derivatives
            may have lower smoothness there).
    """

    kind = "abstract"
    domain: tuple[float, float] = (0.0, math.inf)
    breakpoints: tuple[float, ...] = ()

    def __init__(self, sign=None, reciprocal_nonintegrable: bool = True):
        if sign is None:
            sign = self._default_sign()
        self.sign = _sign_value(sign)
        self.reciprocal_nonintegrable = bool(reciprocal_nonintegrable)

    # -- hooks ---------------------------------------------------------
    def _default_sign(self) -> int:
        raise ValidationError("sign must be declared for this coefficient kind")

    def _value(self, xi: np.ndarray) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def _derivative(self, xi: np.ndarray) -> np.ndarray:
        h = 1e-6 * (1.0 + np.abs(xi))
        lo, hi = self.domain
        left = np.maximum(xi - h, lo)
        right = np.minimum(xi + h, hi)
        return (self._value(right) - self._value(left)) / (right - left)

    def _antiderivative(self, xi: np.ndarray):
        return None

    def _reciprocal_antiderivative(self, xi: np.ndarray):
        return None

    def _reciprocal_antiderivative_inverse(self, tau: np.ndarray):
        return None

    def params(self) -> dict:
        return {}

    # -- public API ----------------------------------------------------
    def _check_domain(self, xi: np.ndarray) -> None:
        lo, hi = self.domain
        if xi.size and (np.nanmin(xi) < lo or np.nanmax(xi) > hi):
            raise DomainError(
                f"{self.kind} coefficient evaluated outside its domain [{lo}, {hi}]"
            )

    def __call__(self, xi):
        """Evaluate the coefficient; the declared sign is checked on every call."""
        arr = np.asarray(xi, dtype=float)
        self._check_domain(arr)
        vals = np.asarray(self._value(arr), dtype=float)
        if vals.shape != arr.shape:
            vals = np.broadcast_to(vals, arr.shape).copy()
        if not np.all(self.sign * vals > 0):
            raise SignError(f"{self.kind} coefficient violated its declared sign")
        return vals if vals.ndim else float(vals)

    eval = __call__

    def derivative(self, xi):
        """Derivative w'(xi): analytic where available, interpolant derivative otherwise."""
        arr = np.asarray(xi, dtype=float)
        self._check_domain(arr)
        vals = np.asarray(self._derivative(arr), dtype=float)
        if vals.shape != arr.shape:
            vals = np.broadcast_to(vals, arr.shape).copy()
        return vals if vals.ndim else float(vals)

    def reciprocal(self, xi):
        """Evaluate 1/w(xi)."""
        return 1.0 / np.asarray(self(xi))

    def has_closed_form_reciprocal_primitive(self) -> bool:
        return self._reciprocal_antiderivative(np.zeros(1)) is not None

    def reciprocal_primitive(self, xi):
        """Closed-form integral of 1/w from 0 to xi, or None if unavailable."""
        arr = np.asarray(xi, dtype=float)
        out = self._reciprocal_antiderivative(arr)
        if out is None:
            return None
        return out - self._reciprocal_antiderivative(np.zeros(()))

    def reciprocal_primitive_inverse(self, tau):
        """Closed-form inverse of ``reciprocal_primitive``, or None if unavailable."""
        return self._reciprocal_antiderivative_inverse(np.asarray(tau, dtype=float))

    def integrate(self, a: float, b: float, tol: float = DEFAULT_TOL, reciprocal: bool = False) -> float:
        """Definite integral of w (or 1/w when ``reciprocal``) over [a, b].

        Closed-form primitives are used when the kind has one; otherwise
        adaptive Gauss-Kronrod quadrature with a budget of 10^4 panels.

        Raises:
            QuadratureError: if the tolerance is not met; carries the best
                estimate and the achieved error.
        """
        a = float(a)
        b = float(b)
        if a > b:
            raise ValidationError("integrate requires a <= b")
        self._check_domain(np.array([a, b]))
        if a == b:
            return 0.0
        prim = self._reciprocal_antiderivative if reciprocal else self._antiderivative
        fa = prim(np.array(a))
        if fa is not None:
            return float(prim(np.array(b)) - fa)
        func = self.reciprocal if reciprocal else self
        return adaptive_integral(lambda s: float(func(s)), a, b, tol, self.breakpoints)

    def negated(self) -> "ScalarCoefficient":
        return self.scaled(-1.0)

    def scaled(self, factor: float) -> "ScalarCoefficient":
        """Return the coefficient factor * w as a coefficient of the same kind when possible."""
        return Scaled(self, factor)

    def check_reciprocal_nonintegrable(self, radius: float = 1e6, threshold: float = 1e3) -> bool:
        """Heuristic sanity check of the declared non-integrability of 1/|w|.

        Returns True if the integral of 1/|w| over [0, radius] exceeds
        ``threshold``; emits a HeuristicWarning otherwise.
        """
        lo, hi = self.domain
        right = min(hi, radius)
        left = max(lo, 0.0)
        try:
            total = abs(self.integrate(left, right, tol=1e-6, reciprocal=True))
        except QuadratureError as exc:
            total = abs(exc.estimate)
        ok = total > threshold
        if not ok and self.reciprocal_nonintegrable:
            warnings.warn(
                f"integral of 1/|w| over [0, {radius:g}] is only {total:.3g}; the "
                "declared non-integrability of 1/|w| looks doubtful",
                HeuristicWarning,
                stacklevel=2,
            )
        return ok

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({inner})"


def adaptive_integral(f: Callable[[float], float], a: float, b: float, tol: float = DEFAULT_TOL,
                      breakpoints: Sequence[float] = ()) -> float:
    """Adaptive Gauss-Kronrod (QUADPACK) integral with a fixed panel budget."""
    points = [p for p in breakpoints if a < p < b]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _spi.IntegrationWarning)
        res = _spi.quad(
            f, a, b, epsabs=tol, epsrel=0.0, limit=PANEL_BUDGET,
            points=points or None, full_output=1,
        )
    value, err = res[0], res[1]
    failed = len(res) > 3
    if (failed and err > tol) or not np.isfinite(value):
        raise QuadratureError("adaptive quadrature did not reach tolerance", value, err)
    return float(value)


class Constant(ScalarCoefficient):
    """The constant coefficient w(xi) = c on the whole real line."""

    kind = "constant"
    domain = (-math.inf, math.inf)

    def __init__(self, c: float, sign=None, reciprocal_nonintegrable: bool = True):
        self.c = float(c)
        if self.c == 0:
            raise SignError("constant coefficient must be nonzero")
        super().__init__(sign, reciprocal_nonintegrable)

    def _default_sign(self):
        return POSITIVE if self.c > 0 else NEGATIVE

    def params(self):
        return {"c": self.c}

    def _value(self, xi):
        return np.full_like(xi, self.c, dtype=float)

    def _derivative(self, xi):
        return np.zeros_like(xi, dtype=float)

    def _antiderivative(self, xi):
        return self.c * xi

    def _reciprocal_antiderivative(self, xi):
        return xi / self.c

    def _reciprocal_antiderivative_inverse(self, tau):
        return tau * self.c

    def scaled(self, factor):
        return Constant(self.c * factor, reciprocal_nonintegrable=self.reciprocal_nonintegrable)


class AffineReciprocal(ScalarCoefficient):
    """w(xi) = c / (a + xi) on [0, inf), or c / (a + |xi|) on the line if ``symmetric``."""

    kind = "affine-reciprocal"

    def __init__(self, c: float, a: float = 1.0, symmetric: bool = False, sign=None,
                 reciprocal_nonintegrable: bool = True):
        self.c = float(c)
        self.a = float(a)
        self.symmetric = bool(symmetric)
        if self.c == 0 or self.a <= 0:
            raise ValidationError("affine-reciprocal needs c != 0 and a > 0")
        self.domain = (-math.inf, math.inf) if self.symmetric else (0.0, math.inf)
        self.breakpoints = (0.0,) if self.symmetric else ()
        super().__init__(sign, reciprocal_nonintegrable)

    def _default_sign(self):
        return POSITIVE if self.c > 0 else NEGATIVE

    def params(self):
        return {"c": self.c, "a": self.a, "symmetric": self.symmetric}

    def _r(self, xi):
        return np.abs(xi) if self.symmetric else xi

    def _value(self, xi):
        return self.c / (self.a + self._r(xi))

    def _derivative(self, xi):
        sgn = np.where(xi < 0, -1.0, 1.0) if self.symmetric else 1.0
        return -self.c * sgn / (self.a + self._r(xi)) ** 2

    def _antiderivative(self, xi):
        if self.symmetric:
            return np.sign(xi) * self.c * (np.log(self.a + np.abs(xi)) - math.log(self.a))
        return self.c * np.log(self.a + xi)

    def _reciprocal_antiderivative(self, xi):
        r = self._r(xi)
        val = (r * self.a + 0.5 * r * r) / self.c
        return np.sign(xi) * val if self.symmetric else val

    def _reciprocal_antiderivative_inverse(self, tau):
        # solve a r + r^2 / 2 = |tau c| for r >= 0 (sign of tau c gives direction)
        s = tau * self.c
        r = np.abs(s)
        root = 2.0 * r / (self.a + np.sqrt(self.a * self.a + 2.0 * r))
        if self.symmetric:
            return np.sign(s) * root
        return np.where(s >= 0, root, np.nan)

    def scaled(self, factor):
        return AffineReciprocal(self.c * factor, self.a, self.symmetric,
                                reciprocal_nonintegrable=self.reciprocal_nonintegrable)


class PowerTail(ScalarCoefficient):
    """c * xi**alpha for xi >= 1 with a cubic Hermite blend on [0, 1].

    The blend matches ``value0`` and ``slope0`` at xi = 0 and the value and
    derivative of the tail at xi = 1, so the coefficient is C^1.
    """

    kind = "power-tail"
    breakpoints = (1.0,)

    def __init__(self, c: float, alpha: float, value0: float | None = None, slope0: float = 0.0,
                 sign=None, reciprocal_nonintegrable: bool = True):
        self.c = float(c)
        self.alpha = float(alpha)
        self.value0 = self.c if value0 is None else float(value0)
        self.slope0 = float(slope0)
        if self.c == 0:
            raise ValidationError("power-tail needs c != 0")
        c, a = self.c, self.alpha
        d0 = self.value0
        self._cubic = np.array([
            d0,
            self.slope0,
            3.0 * (c - d0) - 2.0 * self.slope0 - c * a,
            -2.0 * (c - d0) + self.slope0 + c * a,
        ])
        super().__init__(sign, reciprocal_nonintegrable)
        probe = np.linspace(0.0, 1.0, 2001)
        if not np.all(self.sign * self._blend(probe) > 0):
            raise SignError("power-tail blend on [0, 1] changes sign; adjust value0/slope0")

    def _default_sign(self):
        return POSITIVE if self.c > 0 else NEGATIVE

    def params(self):
        return {"c": self.c, "alpha": self.alpha, "value0": self.value0, "slope0": self.slope0}

    def _blend(self, s):
        a0, a1, a2, a3 = self._cubic
        return a0 + s * (a1 + s * (a2 + s * a3))

    def _value(self, xi):
        tail = self.c * np.power(np.maximum(xi, 1.0), self.alpha)
        return np.where(xi < 1.0, self._blend(np.minimum(xi, 1.0)), tail)

    def _derivative(self, xi):
        a0, a1, a2, a3 = self._cubic
        s = np.minimum(xi, 1.0)
        blend = a1 + s * (2.0 * a2 + 3.0 * a3 * s)
        tail = self.c * self.alpha * np.power(np.maximum(xi, 1.0), self.alpha - 1.0)
        return np.where(xi < 1.0, blend, tail)

    def _antiderivative(self, xi):
        a0, a1, a2, a3 = self._cubic
        s = np.minimum(xi, 1.0)
        head = s * (a0 + s * (a1 / 2.0 + s * (a2 / 3.0 + s * a3 / 4.0)))
        t = np.maximum(xi, 1.0)
        if self.alpha == -1.0:
            tail = self.c * np.log(t)
        else:
            tail = self.c * (np.power(t, self.alpha + 1.0) - 1.0) / (self.alpha + 1.0)
        return head + tail

    def _tail_reciprocal_primitive(self, t):
        # integral of xi^{-alpha} / c from 1 to t
        if self.alpha == 1.0:
            return np.log(t) / self.c
        return (np.power(t, 1.0 - self.alpha) - 1.0) / (self.c * (1.0 - self.alpha))

    def integrate(self, a, b, tol=DEFAULT_TOL, reciprocal=False):
        if not reciprocal or a >= 1.0:
            if reciprocal:
                self._check_domain(np.array([a, b]))
                return float(self._tail_reciprocal_primitive(np.array(b))
                             - self._tail_reciprocal_primitive(np.array(a)))
            return super().integrate(a, b, tol, reciprocal)
        # blend part has no closed-form reciprocal primitive
        mid = min(b, 1.0)
        head = adaptive_integral(lambda s: 1.0 / float(self._blend(s)), a, mid, tol)
        self._check_domain(np.array([a, b]))
        tail = 0.0
        if b > 1.0:
            tail = float(self._tail_reciprocal_primitive(np.array(b)))
        return head + tail

    def scaled(self, factor):
        return PowerTail(self.c * factor, self.alpha, self.value0 * factor, self.slope0 * factor,
                         reciprocal_nonintegrable=self.reciprocal_nonintegrable)


class Tabulated(ScalarCoefficient):
    """Monotone-cubic (PCHIP) interpolant through tabulated (node, value) pairs."""

    kind = "tabulated"

    def __init__(self, nodes, values, sign=None, reciprocal_nonintegrable: bool = True):
        self.nodes = np.asarray(nodes, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.nodes.ndim != 1 or self.nodes.shape != self.values.shape or self.nodes.size < 2:
            raise ValidationError("tabulated coefficient needs matching 1-d nodes and values")
        if np.any(np.diff(self.nodes) <= 0):
            raise ValidationError("tabulated nodes must be strictly increasing")
        self.domain = (float(self.nodes[0]), float(self.nodes[-1]))
        self.breakpoints = tuple(float(v) for v in self.nodes[1:-1])
        self._interp = PchipInterpolator(self.nodes, self.values, extrapolate=False)
        self._dinterp = self._interp.derivative()
        self._prim = self._interp.antiderivative()
        super().__init__(sign, reciprocal_nonintegrable)
        mids = 0.5 * (self.nodes[1:] + self.nodes[:-1])
        probe = np.concatenate([self.nodes, mids])
        if not np.all(self.sign * self._interp(probe) > 0):
            raise SignError("tabulated data does not keep the declared sign")

    @classmethod
    def from_csv(cls, path, sign=None, reciprocal_nonintegrable: bool = True) -> "Tabulated":
        """Read a two-column CSV file (header line, then xi,value rows)."""
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if len(rows) < 3:
            raise ValidationError(f"{path}: need a header and at least two rows")
        data = np.array([[float(r[0]), float(r[1])] for r in rows[1:] if r], dtype=float)
        return cls(data[:, 0], data[:, 1], sign, reciprocal_nonintegrable)

    def _default_sign(self):
        return POSITIVE if self.values[0] > 0 else NEGATIVE

    def params(self):
        return {"nodes": self.nodes.tolist(), "values": self.values.tolist()}

    def _value(self, xi):
        return self._interp(xi)

    def _derivative(self, xi):
        return self._dinterp(xi)

    def _antiderivative(self, xi):
        return self._prim(xi)

    def scaled(self, factor):
        return Tabulated(self.nodes, self.values * factor,
                         reciprocal_nonintegrable=self.reciprocal_nonintegrable)


class FunctionCoefficient(ScalarCoefficient):
    """A coefficient given by a vectorized callable (and optionally its derivative).

    Used for derived quantities such as eigenvalue branches of P1 H(xi), which
    have no closed form but can be evaluated exactly pointwise.
    """

    kind = "function"

    def __init__(self, func, derivative=None, sign=None, domain=(0.0, math.inf),
                 breakpoints=(), reciprocal_nonintegrable: bool = True, label: str = "f"):
        self._func = func
        self._dfunc = derivative
        self.domain = (float(domain[0]), float(domain[1]))
        self.breakpoints = tuple(breakpoints)
        self.label = label
        super().__init__(sign, reciprocal_nonintegrable)

    def _default_sign(self):
        lo, hi = self.domain
        probe = lo if np.isfinite(lo) else (0.0 if hi > 0 else hi)
        return POSITIVE if float(self._func(np.array([probe]))[0]) > 0 else NEGATIVE

    def params(self):
        return {"label": self.label}

    def _value(self, xi):
        return np.asarray(self._func(xi), dtype=float)

    def _derivative(self, xi):
        if self._dfunc is not None:
            return np.asarray(self._dfunc(xi), dtype=float)
        return super()._derivative(xi)


class Scaled(ScalarCoefficient):
    """factor * base, for kinds without a native scaling rule."""

    kind = "scaled"

    def __init__(self, base: ScalarCoefficient, factor: float):
        self.base = base
        self.factor = float(factor)
        if self.factor == 0:
            raise SignError("scale factor must be nonzero")
        self.domain = base.domain
        self.breakpoints = base.breakpoints
        super().__init__(base.sign * (1 if self.factor > 0 else -1), base.reciprocal_nonintegrable)

    def params(self):
        return {"base": self.base, "factor": self.factor}

    def _value(self, xi):
        return self.factor * self.base._value(xi)

    def _derivative(self, xi):
        return self.factor * self.base._derivative(xi)

    def _antiderivative(self, xi):
        out = self.base._antiderivative(xi)
        return None if out is None else self.factor * out

    def _reciprocal_antiderivative(self, xi):
        out = self.base._reciprocal_antiderivative(xi)
        return None if out is None else out / self.factor

    def _reciprocal_antiderivative_inverse(self, tau):
        return self.base._reciprocal_antiderivative_inverse(np.asarray(tau) * self.factor)

    def integrate(self, a, b, tol=DEFAULT_TOL, reciprocal=False):
        val = self.base.integrate(a, b, tol * abs(self.factor) if reciprocal else tol / abs(self.factor),
                                  reciprocal)
        return val / self.factor if reciprocal else val * self.factor


# ---------------------------------------------------------------------------
# Matrix coefficients
# ---------------------------------------------------------------------------


class MatrixCoefficient:
    """An n x n matrix function of xi.

    Each entry is a number (constant), a ScalarCoefficient, or a pair
    ``(f, df)`` of vectorized complex callables for the entry and its
    derivative. Flags ``hermitian`` and ``positive_definite`` are checked on
    sample points at construction; ``diagonal`` and ``constant`` are detected
    from the entry structure.
    """

    def __init__(self, entries, hermitian: bool = False, positive_definite: bool = False,
                 samples=None):
        rows = [list(r) for r in entries]
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ValidationError("matrix coefficient entries must form a square grid")
        self.n = n
        self.entries = rows
        self.hermitian = bool(hermitian)
        self.positive_definite = bool(positive_definite)
        self.diagonal = all(
            _is_number(rows[i][j]) and rows[i][j] == 0 for i in range(n) for j in range(n) if i != j
        )
        self.constant = all(_is_number(e) or isinstance(e, Constant) for r in rows for e in r)
        lo, hi = -math.inf, math.inf
        bps: set[float] = set()
        for r in rows:
            for e in r:
                if isinstance(e, ScalarCoefficient):
                    lo = max(lo, e.domain[0])
                    hi = min(hi, e.domain[1])
                    bps.update(e.breakpoints)
        self.domain = (lo, hi)
        self.breakpoints = tuple(sorted(b for b in bps if lo < b < hi))
        if samples is None:
            samples = self.default_samples()
        self.validate(samples)

    @classmethod
    def constant_matrix(cls, M, **flags) -> "MatrixCoefficient":
        M = np.asarray(M)
        return cls([[complex(v) if np.iscomplexobj(M) else float(v) for v in row] for row in M], **flags)

    @classmethod
    def diagonal_of(cls, diag: Sequence, **flags) -> "MatrixCoefficient":
        n = len(diag)
        return cls([[diag[i] if i == j else 0.0 for j in range(n)] for i in range(n)], **flags)

    def default_samples(self) -> np.ndarray:
        lo, hi = self.domain
        left = lo if np.isfinite(lo) else -1e4
        right = hi if np.isfinite(hi) else 1e4
        if left >= 0:
            pts = np.concatenate([[left], left + np.logspace(-3, np.log10(max(right - left, 1e-3)), 63)])
        else:
            pts = np.linspace(left, right, 64)
        pts = np.concatenate([pts, np.asarray(self.breakpoints, dtype=float)])
        return np.clip(pts, left, right)

    def validate(self, samples) -> None:
        vals = self(np.asarray(samples, dtype=float))
        if self.hermitian:
            diff = np.linalg.norm(vals - np.conj(np.swapaxes(vals, -1, -2)), axis=(-2, -1))
            scale = np.linalg.norm(vals, axis=(-2, -1))
            if np.any(diff > 1e-12 * np.maximum(scale, 1e-300)):
                raise ValidationError("matrix coefficient is flagged Hermitian but is not")
        if self.positive_definite:
            herm = 0.5 * (vals + np.conj(np.swapaxes(vals, -1, -2)))
            if np.any(np.linalg.eigvalsh(herm)[..., 0] <= 0):
                raise ValidationError("matrix coefficient is flagged positive definite but is not")

    def _entry(self, e, xi, deriv: bool):
        if _is_number(e):
            return np.full(xi.shape, 0.0 if deriv else complex(e), dtype=complex)
        if isinstance(e, ScalarCoefficient):
            return np.asarray(e.derivative(xi) if deriv else e(xi), dtype=complex)
        f, df = e
        return np.asarray((df if deriv else f)(xi), dtype=complex) * np.ones(xi.shape)

    def _build(self, xi, deriv: bool):
        arr = np.asarray(xi, dtype=float)
        out = np.zeros(arr.shape + (self.n, self.n), dtype=complex)
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                if deriv or not (_is_number(e) and e == 0):
                    out[..., i, j] = self._entry(e, arr, deriv)
        return out

    def __call__(self, xi) -> np.ndarray:
        """Values M(xi) with shape xi.shape + (n, n), complex."""
        return self._build(xi, deriv=False)

    def derivative(self, xi) -> np.ndarray:
        """Entrywise derivative M'(xi)."""
        return self._build(xi, deriv=True)

    def diagonal_entries(self) -> list:
        return [self.entries[i][i] for i in range(self.n)]

    def sup_norm(self, probe) -> float:
        """Largest spectral norm over the probe points."""
        return float(np.max(np.linalg.norm(self(probe), ord=2, axis=(-2, -1))))


def _is_number(e) -> bool:
    return isinstance(e, (int, float, complex, np.number))


def as_matrix_coefficient(obj, hermitian=False, positive_definite=False) -> MatrixCoefficient:
    """Coerce an array, a list of entries or a MatrixCoefficient into a MatrixCoefficient."""
    if isinstance(obj, MatrixCoefficient):
        return obj
    if isinstance(obj, np.ndarray):
        return MatrixCoefficient.constant_matrix(obj, hermitian=hermitian,
                                                 positive_definite=positive_definite)
    return MatrixCoefficient(obj, hermitian=hermitian, positive_definite=positive_definite)
