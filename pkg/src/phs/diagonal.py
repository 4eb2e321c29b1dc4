"""Diagonal transport systems g_t = (Delta g)' on the half-line with boundary coupling.

The state splits into n_plus components moving towards xi = 0 (positive
speeds lambda_k) and n_minus components moving away from it (negative speeds
theta_j). The outgoing traces Lambda(0) g_plus(0) and the incoming traces
Theta(0) g_minus(0) are coupled by

    K Theta(0) g_minus(0, t) + Q Lambda(0) g_plus(0, t) = u(t),

and the operator generates a C0-semigroup exactly when the
n_minus x n_minus matrix K is invertible (equivalently rank [K Q] = n_minus
with K nonsingular). ``evolve_diagonal`` advances the system exactly along
characteristics; ``upwind_evolve`` is an independent first-order
finite-volume scheme used as a cross-check.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .characteristics import HALF_LINE, CharacteristicMap, characteristic_map
from .coeffs import ScalarCoefficient
from .errors import ClassificationError, ValidationError
from .statespace import Grid, State, weighted_norm, weighted_norm_squared

RANK_TOL = 1e-10


def max_workers() -> int:
    """Worker cap from the PHS_THREADS environment variable (default: CPU count, at most 8)."""
    env = os.environ.get("PHS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)


def _map_parallel(func, items):
    items = list(items)
    workers = min(max_workers(), len(items))
    if workers <= 1:
        return [func(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


@dataclass
class DiagonalSystem:
    """Speeds, boundary coupling and boundedness flag of a diagonal transport system.

    Attributes:
        lambdas: positive speed coefficients (components moving towards 0).
        thetas: negative speed coefficients (components moving away from 0).
        K: n_minus x n_minus coupling of the incoming traces.
        Q: n_minus x n_plus coupling of the outgoing traces.
        bounded: whether all speeds are bounded (recorded for diagnostics).
    """

    lambdas: Sequence[ScalarCoefficient]
    thetas: Sequence[ScalarCoefficient]
    K: np.ndarray
    Q: np.ndarray
    bounded: bool = True

    def __post_init__(self):
        self.lambdas = list(self.lambdas)
        self.thetas = list(self.thetas)
        if any(c.sign <= 0 for c in self.lambdas):
            raise ValidationError("lambdas must be strictly positive coefficients")
        if any(c.sign >= 0 for c in self.thetas):
            raise ValidationError("thetas must be strictly negative coefficients")
        npl, nmi = self.n_plus, self.n_minus
        self.K = np.asarray(self.K, dtype=complex).reshape(nmi, nmi)
        self.Q = np.asarray(self.Q, dtype=complex).reshape(nmi, npl)
        if nmi:
            KQ = np.hstack([self.K, self.Q])
            sv = np.linalg.svd(KQ, compute_uv=False)
            if sv.size == 0 or sv[-1] <= RANK_TOL * max(sv[0], 1.0) or sv.size < nmi:
                raise ValidationError("rank [K Q] must equal n_minus")

    @property
    def n_plus(self) -> int:
        return len(self.lambdas)

    @property
    def n_minus(self) -> int:
        return len(self.thetas)

    @property
    def n(self) -> int:
        return self.n_plus + self.n_minus

    @property
    def speeds(self) -> list:
        return self.lambdas + self.thetas

    def speed_values(self, xi) -> np.ndarray:
        """Delta(xi) diagonal entries, shape xi.shape + (n,)."""
        xi = np.asarray(xi, dtype=float)
        return np.stack([np.asarray(c(xi), dtype=float) for c in self.speeds], axis=-1)

    def maps(self) -> list[CharacteristicMap]:
        return [characteristic_map(c, HALF_LINE) for c in self.speeds]


@dataclass
class DiagonalVerdict:
    generator: bool
    sigma_min: float
    sigma_max: float
    n_plus: int
    n_minus: int
    note: str = ""

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def check_generation_diagonal(system: DiagonalSystem) -> DiagonalVerdict:
    """Contraction-semigroup verdict for the diagonal system: K must be invertible."""
    nmi = system.n_minus
    if nmi == 0:
        return DiagonalVerdict(True, np.inf, 0.0, system.n_plus, 0,
                               "no incoming components: no boundary condition is needed")
    sv = np.linalg.svd(system.K, compute_uv=False)
    smin, smax = float(sv[-1]), float(sv[0])
    ok = smin > RANK_TOL * max(smax, 1.0)
    note = "K invertible" if ok else "K singular"
    if system.n_plus == 0:
        note += "; no outgoing components, the condition reads K Theta(0) g(0) = 0"
    return DiagonalVerdict(bool(ok), smin, smax, system.n_plus, nmi, note)


def boundary_trace_solve(system: DiagonalSystem, lambda_trace, u) -> np.ndarray:
    """Incoming traces Theta(0) g_minus(0) from K y = u - Q Lambda(0) g_plus(0).

    Args:
        lambda_trace: outgoing traces Lambda(0) g_plus(0), shape (n_plus,) or (m, n_plus).
        u: boundary input, shape (n_minus,) or (m, n_minus).

    Raises:
        ClassificationError: if K is singular.
    """
    nmi, npl = system.n_minus, system.n_plus
    lt = np.asarray(lambda_trace, dtype=complex)
    uu = np.asarray(u, dtype=complex)
    single = lt.ndim <= 1 and uu.ndim <= 1
    m_l = 1 if lt.ndim <= 1 else lt.shape[0]
    m_u = 1 if uu.ndim <= 1 else uu.shape[0]
    m = max(m_l, m_u)
    lt = np.broadcast_to(lt.reshape(m_l, npl), (m, npl))
    uu = np.broadcast_to(uu.reshape(m_u, nmi), (m, nmi))
    if nmi == 0:
        out = np.zeros((m, 0), dtype=complex)
        return out[0] if single else out
    verdict = check_generation_diagonal(system)
    if not verdict.generator:
        raise ClassificationError("K is singular; incoming traces are not determined")
    rhs = uu - lt @ system.Q.T
    y = np.linalg.solve(system.K, rhs.T).T
    resid = np.max(np.abs(y @ system.K.T - rhs)) if m else 0.0
    scale = max(float(np.max(np.abs(rhs))) if m else 0.0, 1.0)
    if resid > 1e-10 * scale * max(1.0, np.linalg.cond(system.K)):
        raise ClassificationError(f"boundary solve residual {resid:.2e} too large")
    return y[0] if single else y


def as_input(u, n_minus: int) -> Callable[[np.ndarray], np.ndarray]:
    """Normalize a boundary input to a vectorized callable s -> (len(s), n_minus).

    Accepts None (zero input), a constant vector, a callable, or a pair
    (times, values) of samples which is interpolated linearly (held constant
    outside the sampled interval).
    """
    if u is None:
        return lambda s: np.zeros(np.shape(s) + (n_minus,), dtype=complex)
    if callable(u):
        def f(s):
            s = np.asarray(s, dtype=float)
            vals = np.asarray(u(s), dtype=complex)
            return np.broadcast_to(vals.reshape(s.shape + (-1,)) if vals.ndim else vals,
                                   s.shape + (n_minus,))
        return f
    if isinstance(u, tuple) and len(u) == 2:
        times = np.asarray(u[0], dtype=float)
        vals = np.asarray(u[1], dtype=complex).reshape(times.size, n_minus)

        def g(s):
            s = np.asarray(s, dtype=float)
            out = np.empty(s.shape + (n_minus,), dtype=complex)
            for j in range(n_minus):
                out[..., j] = np.interp(s, times, vals[:, j].real) + 1j * np.interp(s, times, vals[:, j].imag)
            return out
        return g
    const = np.asarray(u, dtype=complex).reshape(n_minus)
    return lambda s: np.broadcast_to(const, np.shape(s) + (n_minus,)).copy()


@dataclass
class TransportPlan:
    """Precomputed characteristic data for one time step on fixed nodes.

    For every component: the foot of the characteristic and the speed ratio
    where it stays in the domain; for incoming components, the entry time of
    characteristics that started on the boundary during the step and the
    feet of the outgoing components at that entry time.
    """

    t: float
    nodes: np.ndarray
    feet: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    alive: list = field(default_factory=list)
    entry_times: list = field(default_factory=list)
    entry_speed: list = field(default_factory=list)
    entry_feet: list = field(default_factory=list)
    entry_factor: list = field(default_factory=list)


def transport_plan(system: DiagonalSystem, nodes: np.ndarray, t: float) -> TransportPlan:
    """Characteristic data for advancing the system by time t on the given nodes."""
    if t < 0:
        raise ValidationError("time step must be nonnegative")
    nodes = np.asarray(nodes, dtype=float)
    plan = TransportPlan(float(t), nodes)
    maps = system.maps()
    lam_maps = maps[: system.n_plus]

    def component(idx):
        coef, cmap = system.speeds[idx], maps[idx]
        foot = np.asarray(cmap.flow(nodes, np.full(nodes.shape, float(t))))
        alive = np.isfinite(foot)
        ratio = np.zeros(nodes.shape)
        if alive.any():
            ratio[alive] = np.asarray(coef(foot[alive])) / np.asarray(coef(nodes[alive]))
        entry = efeet = efac = espeed = None
        if idx >= system.n_plus and (~alive).any():
            dead = ~alive
            entry = float(t) + np.asarray(cmap.p(nodes[dead]))   # p < 0 for negative speeds
            entry = np.clip(entry, 0.0, float(t))
            espeed = np.asarray(coef(nodes[dead]))
            efeet, efac = [], []
            for lc, lm in zip(system.lambdas, lam_maps):
                fk = np.asarray(lm.flow(np.zeros(entry.shape), entry))
                efeet.append(fk)
                efac.append(np.asarray(lc(fk)))
        return foot, ratio, alive, entry, espeed, efeet, efac

    for foot, ratio, alive, entry, espeed, efeet, efac in _map_parallel(component, range(system.n)):
        plan.feet.append(foot)
        plan.ratios.append(ratio)
        plan.alive.append(alive)
        plan.entry_times.append(entry)
        plan.entry_speed.append(espeed)
        plan.entry_feet.append(efeet)
        plan.entry_factor.append(efac)
    return plan


def evolve_diagonal(system: DiagonalSystem, g: State, t: float, u=None, t0: float = 0.0,
                    plan: TransportPlan | None = None) -> State:
    """Exact solution of the diagonal system after time t, starting from g at time t0.

    Outgoing components are transported along their characteristics. Incoming
    components are transported where the characteristic stays inside the
    domain; elsewhere they are fed by the boundary: at entry time s the
    incoming trace solves K y = u(t0 + s) - Q Lambda(0) g_plus(0, s), where
    the outgoing traces at time s come from the initial data, and
    g_minus_j(xi, t) = y_j(s) / theta_j(xi).
    """
    if g.n != system.n:
        raise ValidationError("state dimension does not match the system")
    if plan is None or plan.t != float(t) or plan.nodes is not g.nodes and not np.array_equal(plan.nodes, g.nodes):
        plan = transport_plan(system, g.nodes, t)
    uf = as_input(u, system.n_minus)
    out = np.zeros_like(g.values)
    comps = [g.component(k) for k in range(system.n)]
    for k in range(system.n):
        alive = plan.alive[k]
        if alive.any():
            out[alive, k] = plan.ratios[k][alive] * comps[k].evaluate_with_zero_tail_check(plan.feet[k][alive])[:, 0]
    for j in range(system.n_minus):
        k = system.n_plus + j
        entry = plan.entry_times[k]
        if entry is None:
            continue
        lam_trace = np.zeros((entry.size, system.n_plus), dtype=complex)
        for i in range(system.n_plus):
            lam_trace[:, i] = plan.entry_factor[k][i] * comps[i](plan.entry_feet[k][i])[:, 0]
        y = boundary_trace_solve(system, lam_trace, uf(t0 + entry))
        dead = ~plan.alive[k]
        out[dead, k] = y[:, j] / plan.entry_speed[k]
    return g.with_values(out)


def outgoing_traces(system: DiagonalSystem, g: State) -> np.ndarray:
    """Lambda(0) g_plus(0) from the state values at xi = 0 (first node)."""
    lam0 = np.array([float(c(0.0)) for c in system.lambdas])
    return lam0 * g(np.array([0.0]))[0, : system.n_plus]


def incoming_traces(system: DiagonalSystem, g: State) -> np.ndarray:
    """Theta(0) g_minus(0) from the state values at xi = 0."""
    th0 = np.array([float(c(0.0)) for c in system.thetas])
    return th0 * g(np.array([0.0]))[0, system.n_plus:]


def diagonal_energy(system: DiagonalSystem, g: State) -> float:
    """||g||^2 in the |Delta|-weighted norm."""
    return weighted_norm_squared(g, np.abs(system.speed_values(g.nodes)))


# ---------------------------------------------------------------------------
# Transfer function zero
# ---------------------------------------------------------------------------


@dataclass
class TransferReport:
    s: complex
    u0: np.ndarray
    output: np.ndarray
    boundary_residual: float
    norms_squared: np.ndarray
    expected_norms_squared: np.ndarray
    relative_errors: np.ndarray
    eigen_residual: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "s": [self.s.real, self.s.imag],
            "output": [[v.real, v.imag] for v in np.atleast_1d(self.output)],
            "boundary_residual": self.boundary_residual,
            "norms_squared": self.norms_squared.tolist(),
            "expected_norms_squared": self.expected_norms_squared.tolist(),
            "relative_errors": self.relative_errors.tolist(),
            "eigen_residual": self.eigen_residual,
            "passed": self.passed,
        }


def verify_transfer_zero(system: DiagonalSystem, s: complex, u0, tol: float = 1e-4,
                         nodes_per_component: int = 4001) -> TransferReport:
    """Check that the transfer function of the diagonal system vanishes at s.

    Builds x_plus = 0 and x_minus_j = u0_j / theta_j * exp(s p_theta_j), the
    element of ker(s - A) with incoming traces u0. Its output
    Lambda(0) x_plus(0) is zero; each component's squared |theta|-weighted norm
    must equal |u0_j|^2 / (2 Re s), checked by Simpson quadrature on a grid
    reaching travel time 40 / Re s.
    """
    s = complex(s)
    if s.real <= 0:
        raise ValidationError("Re s must be positive")
    u0 = np.asarray(u0, dtype=complex).reshape(system.n_minus)
    norms = np.zeros(system.n_minus)
    expected = np.abs(u0) ** 2 / (2.0 * s.real)
    traces = np.zeros(system.n_minus, dtype=complex)
    eig_res = 0.0
    for j, (theta, cmap) in enumerate(zip(system.thetas, system.maps()[system.n_plus:])):
        reach = cmap.p_inverse(-40.0 / s.real)
        grid = Grid.uniform(0.0, float(reach), nodes_per_component)
        xi = grid.nodes
        th = np.asarray(theta(xi))
        comp = u0[j] / th * np.exp(s * np.asarray(cmap.p(xi)))
        st = State(grid, comp)
        norms[j] = weighted_norm(st, np.abs(th)) ** 2
        traces[j] = th[0] * comp[0]
        # s x - (theta x)' must vanish; (theta x) = u0 exp(s p) has derivative s/theta * (theta x)
        flux = th * comp
        dflux = np.gradient(flux, xi, edge_order=2)
        scale = max(np.max(np.abs(s * comp)), 1e-300)
        eig_res = max(eig_res, float(np.max(np.abs(s * comp - dflux)[2:-2]) / scale))
    output = np.zeros(system.n_plus, dtype=complex)   # x_plus = 0 identically
    bres = float(np.max(np.abs(traces - u0))) if system.n_minus else 0.0
    rel = np.abs(norms - expected) / np.where(expected > 0, expected, 1.0)
    passed = bool(np.all(rel <= tol) and bres <= 1e-12 * max(1.0, np.max(np.abs(u0), initial=0))
                  and np.all(output == 0))
    return TransferReport(s, u0, output, bres, norms, expected, rel, eig_res, passed)


# ---------------------------------------------------------------------------
# Upwind finite-volume cross-check
# ---------------------------------------------------------------------------


def upwind_evolve(system: DiagonalSystem, g0: Callable[[np.ndarray], np.ndarray], length: float,
                  cells: int, t_final: float, u=None, cfl: float = 0.5) -> State:
    """First-order upwind finite-volume solution on [0, length] with uniform cells.

    Fluxes are evaluated at cell faces with the upwind value. Components moving
    towards 0 leave through the left face and see zero inflow at the right end;
    incoming components receive the flux Theta(0) g_minus(0) solved from the
    boundary coupling with the outgoing flux of the first cell.

    Returns:
        State on the cell centers at time t_final.
    """
    h = length / cells
    centers = (np.arange(cells) + 0.5) * h
    faces = np.arange(cells + 1) * h
    speeds_f = system.speed_values(faces)                 # (cells+1, n)
    vmax = float(np.max(np.abs(speeds_f)))
    steps = max(1, int(np.ceil(t_final / (cfl * h / vmax))))
    dt = t_final / steps
    g = np.asarray(g0(centers), dtype=complex).reshape(cells, system.n).copy()
    uf = as_input(u, system.n_minus)
    npl = system.n_plus
    for step in range(steps):
        t = step * dt
        flux = np.zeros((cells + 1, system.n), dtype=complex)
        # positive speeds: upwind value is the cell to the right of the face
        flux[:-1, :npl] = speeds_f[:-1, :npl] * g[:, :npl]
        flux[-1, :npl] = 0.0
        # negative speeds: upwind value is the cell to the left of the face
        flux[1:, npl:] = speeds_f[1:, npl:] * g[:, npl:]
        if system.n_minus:
            flux[0, npl:] = boundary_trace_solve(system, flux[0, :npl], uf(np.array(t))).reshape(-1)
        g = g + dt / h * (flux[1:] - flux[:-1])
    return State(Grid(centers), g, interpolation="linear")
