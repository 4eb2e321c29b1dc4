"""Seeded property suites run by ``phs properties``.

Suites:

* ``lemma1``: structural properties of the characteristic maps of every
  distinct characteristic speed of the system (closed-form and quadrature
  routes where both exist).
* ``semigroup``: isometry, group law and inverse of the transport group on
  the real line for random smooth weights, and the semigroup law plus
  contractivity on the half-line for the system's own speeds.
* ``resolvent``: (theta - A)^{-1} e^{-xi} = e^{-xi}/2 for unit speed, and the
  residual of (theta - A) R(theta) x = x on random cases.
* ``transfer``: the transfer function of the diagonal system vanishes at
  random points of the right half-plane.
* ``criterion``: the generation verdict from the diagonalization agrees with
  the rank test on the independently computed negative eigenspace, on random
  systems.

Each suite returns a :class:`SuiteResult` with per-property residuals.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .characteristics import FULL_LINE, HALF_LINE, CharacteristicMap, verify_characteristic_properties
from .coeffs import AffineReciprocal, Constant, FunctionCoefficient, MatrixCoefficient
from .control import diagonal_system_of
from .diagonal import verify_transfer_zero
from .errors import PHSError
from .hamiltonian import PortHamiltonianSystem, check_generation, delta_coefficients, diagonalize_pointwise
from .semigroups import _transport, apply_group_line, resolvent
from .statespace import Grid, State, derivative_on_grid, weighted_norm

SUITES = ("lemma1", "semigroup", "resolvent", "transfer", "criterion")
CLOSED_FORM_TOL = 1e-6
QUADRATURE_TOL = 1e-5


@dataclass
class SuiteResult:
    suite: str
    properties: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, name: str, residual: float, tol: float, passed: bool | None = None, **extra) -> None:
        residual = float(residual)
        ok = bool(np.isfinite(residual) and residual <= tol) if passed is None else bool(passed)
        self.properties.append({"name": name, "residual": residual, "tol": float(tol), "passed": ok, **extra})

    @property
    def passed(self) -> bool:
        return all(p["passed"] for p in self.properties)

    def to_dict(self) -> dict:
        return {"suite": self.suite, "passed": self.passed, "meta": self.meta, "properties": self.properties}


def distinct_speeds(phs: PortHamiltonianSystem) -> list:
    """Characteristic speeds of the system, without repeats of identical constants."""
    out, seen = [], set()
    for d in delta_coefficients(phs.P1, phs.H):
        key = ("const", round(float(d(0.0)), 14)) if isinstance(d, Constant) else ("id", id(d))
        if key not in seen:
            seen.add(key)
            out.append(d)
    return out


# ---------------------------------------------------------------------------
# lemma1
# ---------------------------------------------------------------------------


def lemma1_suite(weights, seed: int = 0, samples: int = 200) -> SuiteResult:
    res = SuiteResult("lemma1", meta={"seed": seed, "samples": samples})
    for k, w in enumerate(weights):
        routes = [True, False] if w.has_closed_form_reciprocal_primitive else [False]
        for closed in routes:
            tol = CLOSED_FORM_TOL if closed else QUADRATURE_TOL
            cmap = CharacteristicMap(w, HALF_LINE, use_closed_form=closed)
            rep = verify_characteristic_properties(cmap, samples, seed + k, tol)
            route = "closed-form" if closed else "quadrature"
            for r in rep.results.values():
                res.add(f"{r.name}[{k}:{route}]", r.max_residual, tol, r.passed, weight=repr(w))
    return res


# ---------------------------------------------------------------------------
# semigroup
# ---------------------------------------------------------------------------


def random_line_weight(rng) -> FunctionCoefficient:
    """Smooth signed weight on the real line, bounded away from zero."""
    c = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
    a = rng.uniform(0.1, 1.0)
    b = rng.uniform(-0.5, 0.5)
    amp = rng.uniform(0.0, 0.4)

    def f(xi):
        xi = np.asarray(xi, dtype=float)
        return c * (1.0 + amp * np.tanh(a * (xi - b))) / np.sqrt(1.0 + (a * xi) ** 2 / 4.0)

    def df(xi):
        xi = np.asarray(xi, dtype=float)
        th = np.tanh(a * (xi - b))
        r = np.sqrt(1.0 + (a * xi) ** 2 / 4.0)
        return c * (amp * a * (1 - th ** 2) / r - (1.0 + amp * th) * (a * a * xi / 4.0) / r ** 3)

    # 1/|w| grows like |xi|, so its integral diverges at both ends
    return FunctionCoefficient(f, df, sign=int(np.sign(c)), domain=(-np.inf, np.inf),
                               label=f"random line weight c={c:.3f}")


def _bump_state(grid: Grid, rng, spread: float = 4.0) -> State:
    centers = rng.uniform(-spread, spread, 2)
    widths = rng.uniform(0.7, 1.5, 2)
    amps = rng.normal(size=2) + 1j * rng.normal(size=2)

    def f(xi):
        return np.sum(amps * np.exp(-((xi[:, None] - centers) / widths) ** 2), axis=1)

    return State.from_function(grid, f)


def _bump_on_half_line(grid: Grid, rng) -> State:
    center = rng.uniform(4.0, 10.0)
    width = rng.uniform(0.7, 1.5)
    amp = rng.normal() + 1j * rng.normal()
    return State.from_function(grid, lambda xi: amp * np.exp(-((xi - center) / width) ** 2))


def group_law_cases(count: int = 20, seed: int = 0, grid: Grid | None = None):
    """Relative isometry, group-law and inverse residuals on random (w, x, s, t)."""
    rng = np.random.default_rng(seed)
    grid = grid or Grid.uniform(-30.0, 30.0, 6001)
    rows = []
    for _ in range(count):
        w = random_line_weight(rng)
        x = _bump_state(grid, rng)
        s, t = rng.uniform(-2.0, 2.0, 2)
        cmap = CharacteristicMap(w, FULL_LINE)
        absw = np.abs(np.asarray(w(grid.nodes)))
        nx = weighted_norm(x, absw)
        Tt = apply_group_line(w, x, t, cmap)
        iso = abs(weighted_norm(Tt, absw) - nx) / nx
        TsTt = apply_group_line(w, Tt, s, cmap)
        Tst = apply_group_line(w, x, s + t, cmap)
        law = weighted_norm(TsTt.with_values(TsTt.values - Tst.values), absw) / nx
        back = apply_group_line(w, Tt, -t, cmap)
        inv = weighted_norm(back.with_values(back.values - x.values), absw) / nx
        rows.append({"weight": w.label, "s": float(s), "t": float(t), "isometry": iso,
                     "group_law": law, "inverse": inv})
    return rows


def semigroup_suite(weights, seed: int = 0, count: int = 20, tol: float = 1e-6) -> SuiteResult:
    res = SuiteResult("semigroup", meta={"seed": seed, "cases": count})
    rows = group_law_cases(count, seed)
    for key in ("isometry", "group_law", "inverse"):
        res.add(f"line_{key}", max(r[key] for r in rows), tol)
    rng = np.random.default_rng(seed + 1)
    grid = Grid.uniform(0.0, 30.0, 6001)
    for k, w in enumerate(weights):
        absw = np.abs(np.asarray(w(grid.nodes)))
        cmap = CharacteristicMap(w, HALF_LINE)
        worst_law = worst_growth = 0.0
        for _ in range(3):
            x = _bump_on_half_line(grid, rng)
            s, t = rng.uniform(0.0, 2.0, 2)
            nx = weighted_norm(x, absw)
            Tt = _transport(w, x, t, HALF_LINE, cmap)
            two = _transport(w, Tt, s, HALF_LINE, cmap)
            one = _transport(w, x, s + t, HALF_LINE, cmap)
            worst_law = max(worst_law, weighted_norm(two.with_values(two.values - one.values), absw) / nx)
            worst_growth = max(worst_growth, weighted_norm(Tt, absw) / nx - 1.0)
        res.add(f"half_line_semigroup_law[{k}]", worst_law, tol, weight=repr(w))
        res.add(f"half_line_contraction[{k}]", max(worst_growth, 0.0), tol, weight=repr(w))
    return res


# ---------------------------------------------------------------------------
# resolvent
# ---------------------------------------------------------------------------


def resolvent_exponential_error(grid: Grid | None = None) -> float:
    """Sup error on [0, 10] of R(1) e^{-xi} against e^{-xi}/2 for unit speed."""
    grid = grid or Grid.uniform(0.0, 60.0, 6001)
    x = State.from_function(grid, lambda xi: np.exp(-xi))
    r = resolvent(Constant(1.0), 1.0, x, HALF_LINE)
    mask = grid.nodes <= 10.0
    return float(np.max(np.abs(r.values[mask, 0] - 0.5 * np.exp(-grid.nodes[mask]))))


def resolvent_residuals(count: int = 10, seed: int = 0, grid: Grid | None = None) -> list[float]:
    """Weighted-norm residuals of (theta - A) R(theta) x - x on random half-line cases."""
    rng = np.random.default_rng(seed)
    grid = grid or Grid.uniform(0.0, 40.0, 8001)
    out = []
    for _ in range(count):
        c = rng.uniform(0.5, 2.0)
        a = rng.uniform(0.2, 2.0)
        w = AffineReciprocal(c * a, a) if rng.random() < 0.5 else Constant(c)
        theta = rng.uniform(0.5, 3.0)
        x = _bump_on_half_line(grid, rng)
        y = resolvent(w, theta, x, HALF_LINE)
        wv = np.asarray(w(grid.nodes))
        Ay = derivative_on_grid(wv[:, None] * y.values, grid.nodes)
        r = theta * y.values - Ay - x.values
        absw = np.abs(wv)
        out.append(weighted_norm(x.with_values(r), absw) / weighted_norm(x, absw))
    return out


def resolvent_suite(seed: int = 0) -> SuiteResult:
    res = SuiteResult("resolvent", meta={"seed": seed})
    res.add("exponential_oracle", resolvent_exponential_error(), 1e-6)
    res.add("generic_residual", max(resolvent_residuals(10, seed)), 1e-4)
    return res


# ---------------------------------------------------------------------------
# transfer
# ---------------------------------------------------------------------------


def transfer_suite(phs: PortHamiltonianSystem, seed: int = 0, count: int = 10, tol: float = 1e-4) -> SuiteResult:
    res = SuiteResult("transfer", meta={"seed": seed, "points": count})
    report = check_generation(phs, with_assumptions=False)
    if not report.generator or report.n_minus == 0:
        res.add("applicable", np.inf, 0.0, False,
                note="needs a generator with at least one incoming component")
        return res
    diag = diagonalize_pointwise(phs.P1, phs.H, np.array([0.0, 1e-3, 2e-3]))
    system = diagonal_system_of(phs, diag)
    rng = np.random.default_rng(seed)
    worst_norm = worst_trace = worst_out = 0.0
    for _ in range(count):
        s = complex(rng.uniform(0.1, 5.0), rng.uniform(-5.0, 5.0))
        u0 = rng.normal(size=system.n_minus) + 1j * rng.normal(size=system.n_minus)
        rep = verify_transfer_zero(system, s, u0, tol)
        worst_norm = max(worst_norm, float(np.max(rep.relative_errors)))
        worst_trace = max(worst_trace, rep.boundary_residual)
        worst_out = max(worst_out, float(np.max(np.abs(rep.output), initial=0.0)))
    res.add("output_zero", worst_out, 0.0)
    res.add("incoming_trace", worst_trace, 1e-12)
    res.add("component_norms", worst_norm, tol)
    return res


# ---------------------------------------------------------------------------
# criterion
# ---------------------------------------------------------------------------


def random_system(rng, n: int | None = None, singular: bool = False) -> PortHamiltonianSystem:
    """Random system with a constant or varying diagonal H and a random boundary matrix.

    With ``singular`` the boundary matrix annihilates one vector of H(0) Z,
    so the rank test must report a deficient rank.
    """
    n = n or int(rng.integers(2, 6))
    n_minus = int(rng.integers(1, n))
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Qm, _ = np.linalg.qr(A)
    ev = np.concatenate([rng.uniform(0.5, 2.0, n - n_minus), -rng.uniform(0.5, 2.0, n_minus)])
    P1 = Qm @ np.diag(ev) @ Qm.conj().T
    P1 = 0.5 * (P1 + P1.conj().T)
    h = rng.uniform(0.5, 2.0, n)
    if rng.random() < 0.3:
        # a common profile keeps the eigenvectors of P1 H fixed, so no eigenvalues cross
        a = rng.uniform(0.5, 2.0)
        entries = [AffineReciprocal(float(v) * a, a) for v in h]
    else:
        entries = [float(v) for v in h]
    H = MatrixCoefficient.diagonal_of(entries, hermitian=True, positive_definite=True)
    W = rng.normal(size=(n_minus, n)) + 1j * rng.normal(size=(n_minus, n))
    if singular:
        H0 = H(np.array([0.0]))[0]
        w, V = np.linalg.eig(P1 @ H0)
        Z = V[:, w.real < 0]
        v = H0 @ Z @ (rng.normal(size=Z.shape[1]) + 1j * rng.normal(size=Z.shape[1]))
        v = v / np.linalg.norm(v)
        W = W - np.outer(W @ v, v.conj())
    return PortHamiltonianSystem(P1, H, W, H_bounded=True)


def criterion_suite(seed: int = 0, count: int = 50) -> SuiteResult:
    rng = np.random.default_rng(seed)
    agree = 0
    verdicts = {"generator": 0, "not-generator": 0}
    failures = []
    for k in range(count):
        phs = random_system(rng, singular=bool(k % 2))
        try:
            rep = check_generation(phs, with_assumptions=False)
        except PHSError as exc:
            failures.append(f"case {k}: {exc}")
            continue
        agree += int(rep.cross_check_agrees)
        verdicts[rep.verdict] = verdicts.get(rep.verdict, 0) + 1
    res = SuiteResult("criterion", meta={"seed": seed, "cases": count, "verdicts": verdicts,
                                         "errors": failures})
    res.add("agreement", count - agree, 0.0, note=f"{agree}/{count} cases agree")
    return res


def run_suite(name: str, phs: PortHamiltonianSystem | None = None, seed: int = 0) -> list[SuiteResult]:
    """Run one suite (or ``all``) for a system; suites that need no system ignore it."""
    names = SUITES if name == "all" else (name,)
    out = []
    for s in names:
        if s not in SUITES:
            raise ValueError(f"unknown suite {s!r}; expected one of {', '.join(SUITES + ('all',))}")
        weights = distinct_speeds(phs) if phs is not None else [Constant(1.0)]
        if s == "lemma1":
            out.append(lemma1_suite(weights, seed))
        elif s == "semigroup":
            out.append(semigroup_suite(weights, seed))
        elif s == "resolvent":
            out.append(resolvent_suite(seed))
        elif s == "transfer":
            if phs is None:
                raise ValueError("the transfer suite needs a system")
            out.append(transfer_suite(phs, seed))
        else:
            out.append(criterion_suite(seed))
    return out
