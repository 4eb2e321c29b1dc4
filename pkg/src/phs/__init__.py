"""Port-Hamiltonian systems on the half-line.

Scalar and matrix coefficients, characteristic maps of signed weights, exact
transport semigroups, diagonal boundary systems, the diagonalization of
P1 (H x)' + P0 H x with a generation test, and simulation of boundary
control systems with an energy audit.
"""

from .characteristics import CharacteristicMap, characteristic_map, verify_characteristic_properties
from .coeffs import (AffineReciprocal, Constant, FunctionCoefficient, MatrixCoefficient, PowerTail,
                     ScalarCoefficient, Tabulated)
from .config import SystemConfig, dumps_config, load_config, parse_config
from .control import (BoundaryControlSystem, energy_audit, prepare, simulate,
                      well_posedness_certificate)
from .diagonal import (DiagonalSystem, boundary_trace_solve, check_generation_diagonal, evolve_diagonal,
                       upwind_evolve, verify_transfer_zero)
from .errors import (ConfigError, NotAGeneratorError, PHSError, RefinementError, ValidationError)
from .fixtures import fixture, list_fixtures
from .hamiltonian import (PortHamiltonianSystem, check_assumptions, check_generation, diagonalize_pointwise,
                          from_diagonal, to_diagonal)
from .semigroups import apply_group_line, apply_semigroup_left, apply_semigroup_right, resolvent
from .statespace import Grid, State, read_snapshot_csv, weighted_norm, write_snapshot_csv

__version__ = "0.1.0"
