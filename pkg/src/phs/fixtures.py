"""Built-in example systems.

* ``weighted-transport``: x_t = -(h x)_xi with h(xi) = 1 / (1 + xi). The
  single component is incoming and is controlled by (h x)(0, t) = u(t).
* ``transport-network-5``: five unit-speed transport equations on edges
  glued at a common vertex, three edges moving towards the vertex and two
  moving away, with x4(0) = x2(0) - x3(0) and x5(0) = x2(0) - x1(0).
* ``vibrating-string-constant``: the wave equation with unit density and
  stiffness, state (rho * velocity, strain), boundary condition
  w1 * velocity(0) + w2 * force(0) = u with (w1, w2) = (1, 0) by default.
* ``vibrating-string-case3``: density 1/xi and stiffness 1/xi^3 for xi >= 1,
  joined to the values rho(0) = T(0) = 1 by cubic blends. The wave speed
  is 1/xi there, so the characteristic speed is bounded but H is not.

Each fixture is a :class:`SystemConfig`; the library objects are built from it,
so ``phs fixtures show <name>`` prints a config file that reproduces it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coeffs import Constant, FunctionCoefficient, MatrixCoefficient, PowerTail
from .config import SystemConfig, build_control_system, build_system
from .control import BoundaryControlSystem
from .diagonal import DiagonalSystem
from .errors import ValidationError
from .hamiltonian import PortHamiltonianSystem

WAVE_P1 = np.array([[0.0, 1.0], [1.0, 0.0]])
NETWORK_P1 = np.diag([1.0, 1.0, 1.0, -1.0, -1.0])
NETWORK_WB = np.array([[1.0, -1.0, 0.0, 0.0, 1.0], [0.0, -1.0, 1.0, 1.0, 0.0]])
NETWORK_Q = np.array([[1.0, -1.0, 0.0], [0.0, -1.0, 1.0]])
NETWORK_K_PLAIN = np.array([[0.0, 1.0], [1.0, 0.0]])

# 1/rho and T of the case-3 string: xi and xi^-3 beyond xi = 1, value 1 and slope 0 at xi = 0
CASE3_INV_DENSITY = {"c": 1.0, "alpha": 1.0, "value0": 1.0, "slope0": 0.0}
CASE3_STIFFNESS = {"c": 1.0, "alpha": -3.0, "value0": 1.0, "slope0": 0.0}


@dataclass
class Fixture:
    name: str
    description: str
    config: SystemConfig
    phs: PortHamiltonianSystem
    bcs: BoundaryControlSystem | None
    r_max: float = 20.0


def _make(name: str, description: str, cfg: SystemConfig) -> Fixture:
    phs = build_system(cfg)
    return Fixture(name, description, cfg, phs, build_control_system(cfg, phs), cfg.grid["r_max"])


def _const(i, j, v) -> dict:
    return {"row": i, "col": j, "kind": "constant", "value": complex(v)}


def _rows(M, n) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    return M.reshape(-1, n) if M.size else np.zeros((0, n), dtype=complex)


def string_hamiltonian(inv_density, stiffness) -> MatrixCoefficient:
    """H = diag(1/rho, T) for the string with state (momentum density, strain)."""
    return MatrixCoefficient.diagonal_of([inv_density, stiffness], hermitian=True, positive_definite=True)


def case3_coefficients():
    """(1/rho, T) for the case-3 string: 1/rho = xi and T = xi^-3 on [1, inf)."""
    return PowerTail(**CASE3_INV_DENSITY), PowerTail(**CASE3_STIFFNESS)


def case3_wave_speed() -> FunctionCoefficient:
    """gamma = sqrt(T / rho) for the case-3 string (equal to 1/xi for xi >= 1)."""
    inv_density, stiffness = case3_coefficients()

    def speed(xi):
        xi = np.asarray(xi, dtype=float)
        return np.sqrt(inv_density._value(xi) * stiffness._value(xi))

    def dspeed(xi):
        xi = np.asarray(xi, dtype=float)
        a, b = inv_density._value(xi), stiffness._value(xi)
        da, db = inv_density._derivative(xi), stiffness._derivative(xi)
        return 0.5 * (da * b + a * db) / np.sqrt(a * b)

    return FunctionCoefficient(speed, dspeed, sign=1, breakpoints=(1.0,), label="case-3 wave speed")


def weighted_transport() -> Fixture:
    cfg = SystemConfig(
        "weighted-transport", 1, np.array([[-1.0 + 0j]]),
        W_B1=np.array([[1.0 + 0j]]), W_B2=_rows([], 1), W_C=_rows([], 1),
        H=[{"row": 0, "col": 0, "kind": "affine-reciprocal", "c": 1.0, "a": 1.0}],
        grid={"r_max": 5.0, "nodes": 2001, "layout": "uniform", "stretch": 3.0},
        simulation={"T": 8.0, "dt": 0.005, "snapshots": 9, "x0": [],
                    "input": {"knots": [0.0, 2.0, 4.0, 6.0, 8.0],
                              "values": np.array([[0.0], [1.0], [0.0], [-0.5], [0.0]], dtype=complex)}},
    )
    return _make("weighted-transport", "x_t = -(h x)' with h = 1/(1+xi), (h x)(0) = u", cfg)


def transport_network() -> Fixture:
    cfg = SystemConfig(
        "transport-network-5", 5, NETWORK_P1.astype(complex),
        W_B1=NETWORK_WB.astype(complex), W_B2=_rows([], 5),
        W_C=np.hstack([np.eye(3), np.zeros((3, 2))]).astype(complex),
        H=[_const(i, i, 1.0) for i in range(5)], grid={"r_max": 10.0, "nodes": 2001,
                                                       "layout": "uniform", "stretch": 3.0},
        simulation={"T": 4.0, "dt": 0.005, "snapshots": 9,
                    "x0": [{"component": 1, "center": 5.0, "width": 1.0, "amplitude": 1.0 + 0j}],
                    "input": None},
    )
    return _make("transport-network-5", "five transport equations coupled at a vertex", cfg)


def network_diagonal_system() -> DiagonalSystem:
    """The network as a diagonal system acting on the incoming traces Theta(0) g_minus(0)."""
    one, minus = Constant(1.0), Constant(-1.0)
    # Theta(0) = -I folds a sign into K when the coupling is written on traces
    return DiagonalSystem([one] * 3, [minus] * 2, -NETWORK_K_PLAIN, NETWORK_Q)


def _string_config(name, entries, w1, w2) -> SystemConfig:
    WB = np.array([[w1, w2]], dtype=complex)
    # observe the port variable that is not controlled
    WC = np.array([[0.0, 1.0]] if w1 != 0 else [[1.0, 0.0]], dtype=complex)
    return SystemConfig(
        name, 2, WAVE_P1.astype(complex), W_B1=WB, W_B2=_rows([], 2), W_C=WC, H=entries,
        simulation={"T": 5.0, "dt": 0.005, "snapshots": 11,
                    "x0": [{"component": 0, "center": 6.0, "width": 1.0, "amplitude": 1.0 + 0j}],
                    "input": None},
    )


def vibrating_string_constant(w1: float = 1.0, w2: float = 0.0) -> Fixture:
    if abs(w1) + abs(w2) == 0:
        raise ValidationError("the boundary row (w1, w2) must be nonzero")
    cfg = _string_config("vibrating-string-constant", [_const(0, 0, 1.0), _const(1, 1, 1.0)], w1, w2)
    return _make("vibrating-string-constant", "wave equation, rho = T = 1", cfg)


def vibrating_string_case3(w1: float = 0.0, w2: float = 1.0) -> Fixture:
    if abs(w1) + abs(w2) == 0:
        raise ValidationError("the boundary row (w1, w2) must be nonzero")
    entries = [dict(row=0, col=0, kind="power-tail", **CASE3_INV_DENSITY),
               dict(row=1, col=1, kind="power-tail", **CASE3_STIFFNESS)]
    cfg = _string_config("vibrating-string-case3", entries, w1, w2)
    return _make("vibrating-string-case3", "string with density 1/xi and stiffness 1/xi^3 beyond xi = 1", cfg)


FIXTURES = {
    "weighted-transport": weighted_transport,
    "transport-network-5": transport_network,
    "vibrating-string-constant": vibrating_string_constant,
    "vibrating-string-case3": vibrating_string_case3,
}


def fixture(name: str) -> Fixture:
    try:
        return FIXTURES[name]()
    except KeyError:
        raise ValidationError(f"unknown fixture {name!r}; available: {', '.join(FIXTURES)}") from None


def list_fixtures() -> list[tuple[str, str]]:
    return [(name, fixture(name).description) for name in FIXTURES]
