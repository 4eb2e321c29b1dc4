"""Grids, grid-sampled states and weighted L^2 norms.

A ``State`` stores C^n-valued samples on a ``Grid`` of the half-line [0, R]
(or of an interval of the real line) and interpolates between the nodes.
Beyond the last node the state is extended by zero (``tail="zero"``) or by
its last value (``tail="hold-last"``).

Weighted norms ||x||_W^2 = integral x* W x are computed with composite
Simpson quadrature on the (possibly nonuniform) grid.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline, PchipInterpolator

from .coeffs import MatrixCoefficient, ScalarCoefficient
from .errors import ExtrapolationError, ValidationError

INTERPOLATIONS = ("linear", "monotone-cubic", "cubic")
TAILS = ("zero", "hold-last")


@dataclass(frozen=True, eq=False)
class Grid:
    """Strictly increasing nodes with a layout label."""

    nodes: np.ndarray
    layout: str = "custom"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 3:
            raise ValidationError("a grid needs at least three nodes")
        if np.any(np.diff(nodes) <= 0):
            raise ValidationError("grid nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, left: float, right: float, count: int) -> "Grid":
        return cls(np.linspace(left, right, count), "uniform")

    @classmethod
    def log_stretched(cls, r_max: float = 50.0, count: int = 2048, stretch: float = 3.0,
                      full_line: bool = False) -> "Grid":
        """Nodes r_max * expm1(stretch * s) / expm1(stretch), fine near 0 and coarse far out."""
        if full_line:
            half = count // 2 + 1
            s = np.linspace(0.0, 1.0, half)
            pos = r_max * np.expm1(stretch * s) / np.expm1(stretch)
            return cls(np.concatenate([-pos[:0:-1], pos]), "log-stretched")
        s = np.linspace(0.0, 1.0, count)
        return cls(r_max * np.expm1(stretch * s) / np.expm1(stretch), "log-stretched")

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    @property
    def left(self) -> float:
        return float(self.nodes[0])

    @property
    def right(self) -> float:
        return float(self.nodes[-1])

    @property
    def max_spacing(self) -> float:
        return float(np.max(np.diff(self.nodes)))

    @property
    def min_spacing(self) -> float:
        return float(np.min(np.diff(self.nodes)))

    def refine(self) -> "Grid":
        """Insert all cell midpoints (2N - 1 nodes)."""
        mids = 0.5 * (self.nodes[1:] + self.nodes[:-1])
        out = np.empty(2 * self.size - 1)
        out[0::2] = self.nodes
        out[1::2] = mids
        return Grid(out, self.layout)

    def to_dict(self) -> dict:
        return {"layout": self.layout, "count": self.size, "left": self.left, "right": self.right}


def default_grid() -> Grid:
    return Grid.log_stretched(50.0, 2048)


@dataclass(frozen=True, eq=False)
class State:
    """Grid samples of a C^n-valued function.

    Attributes:
        grid: the sampling grid.
        values: complex array of shape (N, n).
        interpolation: "linear", "monotone-cubic" (PCHIP on real and
            imaginary parts) or "cubic" (not-a-knot spline).
        tail: "zero" or "hold-last" extension beyond the last node.
        meta: free-form diagnostics (norm drift, truncation notes, ...).
    """

    grid: Grid
    values: np.ndarray
    interpolation: str = "cubic"
    tail: str = "zero"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.ndim != 2 or vals.shape[0] != self.grid.size:
            raise ValidationError("state values must have shape (grid size, n)")
        if self.interpolation not in INTERPOLATIONS:
            raise ValidationError(f"interpolation must be one of {INTERPOLATIONS}")
        if self.tail not in TAILS:
            raise ValidationError(f"tail must be one of {TAILS}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid: Grid, func: Callable, **kwargs) -> "State":
        """Sample func(nodes) -> (N,) or (N, n) on the grid."""
        return cls(grid, np.asarray(func(grid.nodes), dtype=complex), **kwargs)

    @classmethod
    def zeros(cls, grid: Grid, n: int, **kwargs) -> "State":
        return cls(grid, np.zeros((grid.size, n), dtype=complex), **kwargs)

    @property
    def n(self) -> int:
        return int(self.values.shape[1])

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    def with_values(self, values, **meta) -> "State":
        new_meta = dict(self.meta)
        new_meta.update(meta)
        return State(self.grid, values, self.interpolation, self.tail, new_meta)

    @cached_property
    def _interpolant(self):
        x = self.grid.nodes
        stacked = np.concatenate([self.values.real, self.values.imag], axis=1)
        if self.interpolation == "monotone-cubic":
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                return PchipInterpolator(x, stacked, axis=0, extrapolate=False)
        if self.interpolation == "cubic":
            return CubicSpline(x, stacked, axis=0, bc_type="not-a-knot", extrapolate=False)
        return None

    def __call__(self, xi) -> np.ndarray:
        """Interpolated values at xi, shape xi.shape + (n,)."""
        xi = np.asarray(xi, dtype=float)
        flat = xi.ravel()
        x = self.grid.nodes
        n = self.n
        out = np.zeros((flat.size, n), dtype=complex)
        inside = (flat >= x[0]) & (flat <= x[-1])
        if inside.any():
            pts = flat[inside]
            if self.interpolation == "linear":
                for j in range(n):
                    out[inside, j] = (np.interp(pts, x, self.values[:, j].real)
                                      + 1j * np.interp(pts, x, self.values[:, j].imag))
            else:
                vals = self._interpolant(pts)
                out[inside] = vals[:, :n] + 1j * vals[:, n:]
        if self.tail == "hold-last":
            out[flat > x[-1]] = self.values[-1]
            out[flat < x[0]] = self.values[0]
        return out.reshape(xi.shape + (n,))

    def component(self, k: int) -> "State":
        """Column k as a scalar state; cached so its interpolant is built once."""
        cache = self.__dict__.setdefault("_components", {})
        if k not in cache:
            cache[k] = State(self.grid, self.values[:, k], self.interpolation, self.tail)
        return cache[k]

    def evaluate_with_zero_tail_check(self, xi) -> np.ndarray:
        """Like ``__call__`` but raise if a point beyond the grid would need a non-zero tail."""
        xi = np.asarray(xi, dtype=float)
        outside = (xi > self.grid.right) | (xi < self.grid.left)
        if self.tail != "zero" and np.any(outside & np.isfinite(xi)):
            raise ExtrapolationError("evaluation beyond the grid of a state without zero tail")
        return self(xi)


# ---------------------------------------------------------------------------
# Weighted norms
# ---------------------------------------------------------------------------


def weight_samples(weight, nodes: np.ndarray, n: int) -> np.ndarray:
    """Evaluate a norm weight at the nodes as an (N, n, n) Hermitian array.

    ``weight`` may be None (identity), a ScalarCoefficient (scalar times the
    identity), a MatrixCoefficient, an array of shape (N,), (N, n) (diagonal)
    or (N, n, n), or a callable returning one of those.
    """
    N = nodes.size
    if weight is None:
        return np.broadcast_to(np.eye(n), (N, n, n))
    if isinstance(weight, ScalarCoefficient):
        vals = np.asarray(weight(nodes), dtype=float)
        return vals[:, None, None] * np.eye(n)
    if isinstance(weight, MatrixCoefficient):
        return weight(nodes)
    if callable(weight):
        return weight_samples(np.asarray(weight(nodes)), nodes, n)
    arr = np.asarray(weight)
    if arr.ndim == 0:
        return arr * np.broadcast_to(np.eye(n), (N, n, n))
    if arr.shape == (N,):
        return arr[:, None, None] * np.eye(n)
    if arr.shape == (N, n):
        out = np.zeros((N, n, n), dtype=arr.dtype)
        idx = np.arange(n)
        out[:, idx, idx] = arr
        return out
    if arr.shape == (N, n, n):
        return arr
    raise ValidationError(f"cannot interpret weight of shape {arr.shape} for n = {n}")


def integrate_nodes(values: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    """Composite Simpson rule on a nonuniform grid along axis 0."""
    return simpson(values, x=nodes, axis=0)


def _density(x: State, y: State, weight) -> np.ndarray:
    """Pointwise y* W x, with a fast path for diagonal weights given as (N,) or (N, n)."""
    N, n = x.values.shape
    if weight is not None and not isinstance(weight, (ScalarCoefficient, MatrixCoefficient)) \
            and not callable(weight):
        arr = np.asarray(weight)
        if arr.shape == (N,):
            return np.sum(np.conj(y.values) * x.values, axis=1) * arr
        if arr.shape == (N, n):
            return np.sum(np.conj(y.values) * arr * x.values, axis=1)
    if weight is None:
        return np.sum(np.conj(y.values) * x.values, axis=1)
    if isinstance(weight, MatrixCoefficient) and weight.diagonal:
        d = np.diagonal(weight(x.nodes), axis1=1, axis2=2)
        return np.sum(np.conj(y.values) * d * x.values, axis=1)
    W = weight_samples(weight, x.nodes, n)
    return np.einsum("ni,nij,nj->n", np.conj(y.values), W, x.values)


def weighted_inner(x: State, y: State, weight=None) -> complex:
    """<x, y>_W = integral y* W x over the grid (zero tail contributes nothing)."""
    if x.grid is not y.grid and not np.array_equal(x.grid.nodes, y.grid.nodes):
        raise ValidationError("weighted_inner needs states on the same grid")
    return complex(integrate_nodes(_density(x, y, weight), x.nodes))


def weighted_norm_squared(x: State, weight=None) -> float:
    return float(integrate_nodes(_density(x, x, weight).real, x.nodes))


def weighted_norm(x: State, weight=None) -> float:
    """||x||_W, the square root of integral x* W x."""
    return float(np.sqrt(max(weighted_norm_squared(x, weight), 0.0)))


def resample(x: State, grid: Grid, weight=None) -> State:
    """Interpolate onto another grid; records the relative norm drift in meta."""
    new = State(grid, x(grid.nodes), x.interpolation, x.tail, dict(x.meta))
    before = weighted_norm(x, weight)
    after = weighted_norm(new, weight)
    drift = abs(after - before) / before if before > 0 else abs(after)
    new.meta["norm_drift"] = drift
    return new


# ---------------------------------------------------------------------------
# CSV snapshots
# ---------------------------------------------------------------------------


def snapshot_header(n: int) -> list[str]:
    cols = ["xi"]
    for j in range(n):
        cols += [f"re_{j}", f"im_{j}"]
    return cols


def write_snapshot_csv(path, state: State) -> None:
    """Write ``xi,re_0,im_0,...`` rows, one per grid node."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(snapshot_header(state.n))
        for xi, row in zip(state.nodes, state.values):
            line = [repr(float(xi))]
            for v in row:
                line += [repr(float(v.real)), repr(float(v.imag))]
            writer.writerow(line)


def read_snapshot_csv(path, **kwargs) -> State:
    """Read a snapshot written by ``write_snapshot_csv``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], [r for r in rows[1:] if r]
    if header[0] != "xi" or (len(header) - 1) % 2:
        raise ValidationError(f"{path}: not a snapshot file")
    data = np.array(body, dtype=float)
    vals = data[:, 1::2] + 1j * data[:, 2::2]
    return State(Grid(data[:, 0]), vals, **kwargs)


# ---------------------------------------------------------------------------
# Finite differences on nonuniform grids
# ---------------------------------------------------------------------------


def fornberg_weights(z: float, x: np.ndarray, order: int) -> np.ndarray:
    """Finite-difference weights at z for derivatives 0..order on stencil x."""
    n = x.size
    c = np.zeros((n, order + 1))
    c1 = 1.0
    c4 = x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c


def derivative_on_grid(values: np.ndarray, nodes: np.ndarray, width: int = 5) -> np.ndarray:
    """First derivative along axis 0 with ``width``-point stencils (one-sided at the ends)."""
    values = np.asarray(values)
    N = nodes.size
    half = width // 2
    out = np.zeros_like(values, dtype=np.result_type(values, float))
    for i in range(N):
        start = min(max(i - half, 0), N - width)
        idx = np.arange(start, start + width)
        wts = fornberg_weights(nodes[i], nodes[idx], 1)[:, 1]
        out[i] = np.tensordot(wts, values[idx], axes=(0, 0))
    return out
