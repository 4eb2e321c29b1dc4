"""Port-Hamiltonian operators x -> P1 (H x)' + P0 H x on the half-line.

The matrix P1 H(xi) is similar to the Hermitian matrix H^{1/2} P1 H^{1/2}, so
it is diagonalizable with real eigenvalues:

    P1 H(xi) = S(xi)^{-1} Delta(xi) S(xi),   Delta = diag(Lambda, Theta),

with the n_plus positive eigenvalues first (descending) and the n_minus
negative ones after (descending). With V the unitary eigenvector matrix of
H^{1/2} P1 H^{1/2}, S^{-1} = H^{-1/2} V D and S = D^{-1} V* H^{1/2} for a
positive diagonal scaling D. The default ``half-energy`` scaling
D = (2 |Delta|)^{1/2} makes S* |Delta| S = H / 2, so the |Delta|-weighted norm
of g = S x is half the energy norm of x. When P1 and H are both diagonal the
permutation that puts positive entries first is used instead (S = I up to
ordering).

In the diagonal variable g the operator becomes (Delta g)' + B g with
B = S (S^{-1})' Delta. Writing W_B H(0) S(0)^{-1} = [U1 U2] (outgoing and
incoming columns), the boundary condition W_B H(0) x(0) = 0 reads
U1 g_plus(0) + U2 g_minus(0) = 0, and the operator generates a C0-semigroup
exactly when U2 is invertible.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .coeffs import (Constant, FunctionCoefficient, MatrixCoefficient, ScalarCoefficient,
                     as_matrix_coefficient, _is_number)
from .errors import InertiaError, RefinementError, ValidationError
from .statespace import Grid, State

OVERLAP_THRESHOLD = 0.7
CLUSTER_TOL = 1e-8
ZERO_EIG_TOL = 1e-12
GENERATION_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-8
FINITE_BOUND = 1e8
NORMALIZATIONS = ("auto", "half-energy", "unit")


@dataclass
class PortHamiltonianSystem:
    """The data (P1, H, W_B, P0) of a port-Hamiltonian operator on [0, inf).

    Attributes:
        P1: invertible Hermitian n x n matrix.
        H: Hermitian positive definite matrix coefficient.
        W_B: n_minus x n boundary matrix (the condition is W_B H(0) x(0) = 0);
            may be None or empty when n_minus = 0.
        P0: optional n x n matrix for the lower-order term P0 H x.
        H_bounded: declared boundedness of H; detected on a probe grid when None.
    """

    P1: np.ndarray
    H: MatrixCoefficient
    W_B: np.ndarray | None = None
    P0: np.ndarray | None = None
    H_bounded: bool | None = None

    def __post_init__(self):
        self.P1 = np.asarray(self.P1, dtype=complex)
        n = self.P1.shape[0]
        if self.P1.shape != (n, n):
            raise ValidationError("P1 must be square")
        if np.max(np.abs(self.P1 - self.P1.conj().T)) > 1e-12 * max(np.max(np.abs(self.P1)), 1.0):
            raise ValidationError("P1 must be Hermitian")
        if np.min(np.abs(np.linalg.eigvalsh(self.P1))) <= ZERO_EIG_TOL * np.max(np.abs(self.P1)):
            raise ValidationError("P1 must be invertible")
        self.H = as_matrix_coefficient(self.H, hermitian=True, positive_definite=True)
        if self.H.n != n:
            raise ValidationError("H and P1 dimensions differ")
        if self.P0 is not None:
            self.P0 = np.asarray(self.P0, dtype=complex).reshape(n, n)
            if not np.any(self.P0):
                self.P0 = None
        if self.W_B is None:
            self.W_B = np.zeros((0, n), dtype=complex)
        self.W_B = np.atleast_2d(np.asarray(self.W_B, dtype=complex))
        if self.W_B.size == 0:
            self.W_B = np.zeros((0, n), dtype=complex)
        if self.W_B.shape[1] != n:
            raise ValidationError("W_B must have n columns")
        if self.H_bounded is None:
            probe = probe_grid(self.H)
            self.H_bounded = bool(self.H.sup_norm(probe) <= FINITE_BOUND and
                                  _tail_is_flat(self.H, probe))

    @property
    def n(self) -> int:
        return int(self.P1.shape[0])

    @property
    def inertia(self) -> tuple[int, int]:
        return inertia(self.P1, self.H, 0.0)

    def with_boundary(self, W_B) -> "PortHamiltonianSystem":
        return PortHamiltonianSystem(self.P1, self.H, W_B, self.P0, self.H_bounded)


def _tail_is_flat(H: MatrixCoefficient, probe: np.ndarray) -> bool:
    # growth of ||H|| over the last decade of the probe signals unboundedness
    norms = np.linalg.norm(H(probe), ord=2, axis=(-2, -1))
    far = norms[probe >= probe[-1] / 10]
    return bool(far[-1] <= 2.0 * far[0])


def probe_grid(H: MatrixCoefficient | None = None, r_max: float = 50.0, count: int = 256) -> np.ndarray:
    """Log-spaced probe points on [0, 10 r_max] plus 0 and the coefficient breakpoints."""
    pts = np.concatenate([[0.0], np.logspace(-3, np.log10(10.0 * r_max), count - 1)])
    if H is not None:
        lo, hi = H.domain
        pts = np.concatenate([pts, np.asarray(H.breakpoints, dtype=float)])
        pts = pts[(pts >= max(lo, 0.0)) & (pts <= hi)]
    return np.unique(pts)


# ---------------------------------------------------------------------------
# Pointwise linear algebra
# ---------------------------------------------------------------------------


def _hermitian_sqrt(Hv: np.ndarray):
    """H^{1/2} and H^{-1/2} for a stack of Hermitian positive definite matrices."""
    Hv = 0.5 * (Hv + np.conj(np.swapaxes(Hv, -1, -2)))
    w, U = np.linalg.eigh(Hv)
    if np.any(w <= 0):
        raise ValidationError("H is not positive definite at some point")
    Uh = np.conj(np.swapaxes(U, -1, -2))
    sq = np.sqrt(w)
    return (U * sq[..., None, :]) @ Uh, (U / sq[..., None, :]) @ Uh


def _symmetric_form(P1: np.ndarray, Hv: np.ndarray):
    hh, hmh = _hermitian_sqrt(Hv)
    M = hh @ P1 @ hh
    M = 0.5 * (M + np.conj(np.swapaxes(M, -1, -2)))
    return M, hh, hmh


def _sort_order(lam: np.ndarray) -> np.ndarray:
    """Index order: positive eigenvalues descending, then negative ones descending."""
    return np.argsort(-lam, axis=-1, kind="stable")


def sorted_eigh(M: np.ndarray):
    """Eigen-decomposition of a stack of Hermitian matrices in the package order."""
    lam, V = np.linalg.eigh(M)
    order = _sort_order(lam)
    lam = np.take_along_axis(lam, order, axis=-1)
    V = np.take_along_axis(V, order[..., None, :], axis=-1)
    return lam, V


def inertia(P1, H: MatrixCoefficient, xi: float = 0.0) -> tuple[int, int]:
    """(n_plus, n_minus) of P1 H(xi); raises InertiaError if P1 H(xi) is singular."""
    M, _, _ = _symmetric_form(np.asarray(P1, dtype=complex), H(np.array([xi]))[0])
    lam = np.linalg.eigvalsh(M)
    scale = max(np.max(np.abs(lam)), 1e-300)
    if np.min(np.abs(lam)) <= ZERO_EIG_TOL * scale:
        raise InertiaError(f"P1 H is singular at xi = {xi}")
    return int(np.sum(lam > 0)), int(np.sum(lam < 0))


def check_inertia_constant(P1, H: MatrixCoefficient, probe=None) -> tuple[int, int]:
    """Inertia on 16 log-spaced probe points; raises InertiaError if it changes."""
    if probe is None:
        lo, hi = H.domain
        right = min(hi, 1e4)
        probe = np.concatenate([[max(lo, 0.0)], np.logspace(-3, np.log10(right), 15)])
        probe = probe[probe <= hi]
    ref = None
    for xi in probe:
        cur = inertia(P1, H, float(xi))
        if ref is None:
            ref = cur
        elif cur != ref:
            raise InertiaError(f"inertia of P1 H changes from {ref} to {cur} at xi = {xi}")
    return ref


def _clusters(lam: np.ndarray) -> list[np.ndarray]:
    """Groups of (sorted) indices whose eigenvalues coincide up to CLUSTER_TOL."""
    groups, start = [], 0
    scale = max(np.max(np.abs(lam)), 1e-300)
    for i in range(1, lam.size + 1):
        if i == lam.size or abs(lam[i] - lam[i - 1]) > CLUSTER_TOL * scale:
            groups.append(np.arange(start, i))
            start = i
    return groups


def _canonical_phase(V: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of every column real positive (ties: last index)."""
    V = V.copy()
    for j in range(V.shape[1]):
        mags = np.abs(V[:, j])
        top = mags.max()
        idx = np.nonzero(mags >= top * (1.0 - 1e-8))[0][-1]
        V[:, j] *= np.conj(V[idx, j]) / abs(V[idx, j])
    return V


def _align(V: np.ndarray, ref: np.ndarray, groups, where: float, check: bool = True) -> np.ndarray:
    """Rotate eigenvectors (within each eigenvalue cluster) to best match ref."""
    V = V.copy()
    for g in groups:
        O = np.conj(V[:, g].T) @ ref[:, g]
        U, sv, Wh = np.linalg.svd(O)
        if check and sv.min() < OVERLAP_THRESHOLD:
            raise RefinementError(
                f"eigenvector overlap {sv.min():.3f} below {OVERLAP_THRESHOLD} near xi = {where:.6g}; "
                "refine the grid"
            )
        V[:, g] = V[:, g] @ (U @ Wh)
    return V


# ---------------------------------------------------------------------------
# Diagonalization
# ---------------------------------------------------------------------------


@dataclass
class Diagonalization:
    """Node-wise S, S^{-1}, Delta and their derivatives.

    Attributes:
        nodes: sample points.
        S, S_inv, dS, dS_inv: arrays of shape (N, n, n).
        delta: real eigenvalues of P1 H, shape (N, n), positive ones first.
        H: H at the nodes, shape (N, n, n).
        P1: the matrix P1.
        n_plus, n_minus: inertia.
        route: "diagonal" or "hermitian".
        normalization: scaling used for the Hermitian route.
    """

    nodes: np.ndarray
    S: np.ndarray
    S_inv: np.ndarray
    dS: np.ndarray
    dS_inv: np.ndarray
    delta: np.ndarray
    H: np.ndarray
    P1: np.ndarray
    n_plus: int
    n_minus: int
    route: str
    normalization: str

    @property
    def abs_delta(self) -> np.ndarray:
        return np.abs(self.delta)

    @property
    def B(self) -> np.ndarray:
        """B = S (S^{-1})' Delta, the zeroth-order term in the diagonal variable."""
        return self.S @ self.dS_inv * self.delta[:, None, :]

    @property
    def C(self) -> np.ndarray:
        """C = S' P1 H."""
        return self.dS @ self.P1 @ self.H

    def reconstruction_error(self) -> np.ndarray:
        rec = self.S_inv @ (self.delta[..., None] * self.S)
        target = self.P1 @ self.H
        return (np.linalg.norm(rec - target, axis=(-2, -1))
                / np.maximum(np.linalg.norm(target, axis=(-2, -1)), 1e-300))

    def at(self, index: int) -> dict:
        return {"S": self.S[index], "S_inv": self.S_inv[index], "delta": self.delta[index]}


def _use_diagonal_route(P1: np.ndarray, H: MatrixCoefficient, normalization: str) -> bool:
    return normalization == "auto" and H.diagonal and np.count_nonzero(P1 - np.diag(np.diag(P1))) == 0


def _diagonal_permutation(P1: np.ndarray) -> np.ndarray:
    d = np.diag(P1).real
    return np.concatenate([np.nonzero(d > 0)[0], np.nonzero(d < 0)[0]])


def _frames(P1, Hv, normalization, ref_V=None, groups=None, where=None):
    """S, S^{-1}, delta, V for a stack of H values, aligned to ref_V if given."""
    M, hh, hmh = _symmetric_form(P1, Hv)
    lam, V = sorted_eigh(M)
    if ref_V is not None:
        for i in range(V.shape[0]):
            V[i] = _align(V[i], ref_V[i], groups[i], where[i])
    return lam, V, hh, hmh


def _scale(lam: np.ndarray, normalization: str) -> np.ndarray:
    if normalization == "unit":
        return np.ones_like(lam)
    return np.sqrt(2.0 * np.abs(lam))


def _assemble(lam, V, hh, hmh, normalization):
    d = _scale(lam, normalization)
    Vh = np.conj(np.swapaxes(V, -1, -2))
    S_inv = hmh @ V * d[..., None, :]
    S = (Vh / d[..., :, None]) @ hh
    return S, S_inv


def _stencils(nodes: np.ndarray, breakpoints: Sequence[float], lower: float):
    """Offsets (in units of h) and weights of 5-point first-derivative stencils per node."""
    h = 1e-3 * (1.0 + np.abs(nodes))
    central = (np.array([-2.0, -1.0, 1.0, 2.0]), np.array([1.0, -8.0, 8.0, -1.0]) / 12.0, 0.0)
    forward = (np.array([1.0, 2.0, 3.0, 4.0]), np.array([48.0, -36.0, 16.0, -3.0]) / 12.0, -25.0 / 12.0)
    backward = (-forward[0], -forward[1], -forward[2])
    kinds = []
    bps = np.asarray(breakpoints, dtype=float)
    for x, hx in zip(nodes, h):
        near = bps[np.abs(bps - x) < 2.5 * hx]
        if x - 2.5 * hx < lower:
            kinds.append(forward)
        elif near.size:
            kinds.append(forward if x >= near[0] else backward)
        else:
            kinds.append(central)
    return h, kinds


def diagonalize_pointwise(P1, H: MatrixCoefficient, nodes, normalization: str = "auto") -> Diagonalization:
    """Diagonalize P1 H(xi) at every node with continuous eigenvector frames.

    Eigenvectors are oriented at the first node (largest entry real positive)
    and then rotated node by node to maximize the overlap with the previous
    frame; an overlap below 0.7 raises RefinementError. Derivatives of S and
    S^{-1} use 5-point stencils with step 1e-3 (1 + |xi|) around each node,
    one-sided next to xi = 0 and to breakpoints of H.
    """
    if normalization not in NORMALIZATIONS:
        raise ValidationError(f"normalization must be one of {NORMALIZATIONS}")
    P1 = np.asarray(P1, dtype=complex)
    H = as_matrix_coefficient(H, hermitian=True, positive_definite=True)
    nodes = np.asarray(nodes.nodes if isinstance(nodes, Grid) else nodes, dtype=float)
    n = P1.shape[0]
    N = nodes.size
    Hv = H(nodes)
    if _use_diagonal_route(P1, H, normalization):
        perm = _diagonal_permutation(P1)
        Pm = np.eye(n)[perm]
        delta = (np.diag(P1).real[None, :] * np.diagonal(Hv, axis1=1, axis2=2).real)[:, perm]
        if np.any(delta[:, : int(np.sum(np.diag(P1).real > 0))] <= 0):
            raise InertiaError("sign pattern of the diagonal of P1 H changes")
        S = np.broadcast_to(Pm, (N, n, n)).astype(complex)
        S_inv = np.broadcast_to(Pm.T, (N, n, n)).astype(complex)
        zeros = np.zeros((N, n, n), dtype=complex)
        npl = int(np.sum(delta[0] > 0))
        diag = Diagonalization(nodes, S.copy(), S_inv.copy(), zeros, zeros.copy(), delta, Hv, P1,
                               npl, n - npl, "diagonal", "permutation")
    else:
        norm = "half-energy" if normalization == "auto" else normalization
        M, hh, hmh = _symmetric_form(P1, Hv)
        lam, V = sorted_eigh(M)
        npl = int(np.sum(lam[0] > 0))
        if np.any(np.sum(lam > 0, axis=-1) != npl):
            raise InertiaError("inertia of P1 H changes on the grid")
        V[0] = _canonical_phase(V[0])
        groups = [_clusters(lam[i]) for i in range(N)]
        for i in range(1, N):
            V[i] = _align(V[i], V[i - 1], groups[i], nodes[i])
        S, S_inv = _assemble(lam, V, hh, hmh, norm)
        # derivatives by off-grid stencils aligned to the node frames
        h, kinds = _stencils(nodes, H.breakpoints, max(H.domain[0], 0.0) if H.domain[0] >= 0 else -np.inf)
        offsets = np.stack([k[0] for k in kinds])                     # (N, 4)
        weights = np.stack([k[1] for k in kinds])
        center_w = np.array([k[2] for k in kinds])
        pts = nodes[:, None] + offsets * h[:, None]
        Hp = H(pts.ravel())
        Mp, hhp, hmhp = _symmetric_form(P1, Hp)
        lamp, Vp = sorted_eigh(Mp)
        ref = np.repeat(V, 4, axis=0)
        gp = [groups[i // 4] for i in range(N * 4)]
        for i in range(N * 4):
            Vp[i] = _align(Vp[i], ref[i], gp[i], pts.ravel()[i], check=False)
        Sp, Sip = _assemble(lamp, Vp, hhp, hmhp, norm)
        Sp = Sp.reshape(N, 4, n, n)
        Sip = Sip.reshape(N, 4, n, n)
        dS = (np.einsum("nk,nkij->nij", weights, Sp) + center_w[:, None, None] * S) / h[:, None, None]
        dS_inv = (np.einsum("nk,nkij->nij", weights, Sip) + center_w[:, None, None] * S_inv) / h[:, None, None]
        diag = Diagonalization(nodes, S, S_inv, dS, dS_inv, lam, Hv, P1, npl, n - npl, "hermitian", norm)
    err = diag.reconstruction_error()
    if np.any(err > RECONSTRUCTION_TOL):
        raise ValidationError(f"reconstruction of P1 H failed (error {err.max():.2e})")
    return diag


def z_minus_space(diag: Diagonalization, index: int = 0) -> np.ndarray:
    """Columns of S^{-1} at a node spanning the eigenvectors of P1 H with negative eigenvalues."""
    return diag.S_inv[index][:, diag.n_plus:]


def compute_U(W_B, diag: Diagonalization, index: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Split W_B H(0) S(0)^{-1} = [U1 U2] into outgoing and incoming columns."""
    W = np.atleast_2d(np.asarray(W_B, dtype=complex))
    U = W @ diag.H[index] @ diag.S_inv[index]
    return U[:, : diag.n_plus], U[:, diag.n_plus:]


def delta_coefficients(P1, H: MatrixCoefficient, normalization: str = "auto") -> list[ScalarCoefficient]:
    """Eigenvalue branches of P1 H(xi) as scalar coefficients in the package order."""
    P1 = np.asarray(P1, dtype=complex)
    n = P1.shape[0]
    if _use_diagonal_route(P1, H, normalization):
        out = []
        for k in _diagonal_permutation(P1):
            p = float(P1[k, k].real)
            e = H.entries[k][k]
            out.append(Constant(p * float(np.real(e))) if _is_number(e) else e.scaled(p))
        return out
    if H.constant:
        M, _, _ = _symmetric_form(P1, H(np.array([0.0]))[0])
        lam, _ = sorted_eigh(M)
        return [Constant(float(v)) for v in lam]

    def branch(k):
        def f(xi):
            xi = np.asarray(xi, dtype=float)
            M, _, _ = _symmetric_form(P1, H(xi.ravel()))
            lam = np.linalg.eigvalsh(M)[:, ::-1]
            return lam[:, k].reshape(xi.shape)
        return f

    return [FunctionCoefficient(branch(k), domain=H.domain, breakpoints=H.breakpoints,
                                label=f"eigenvalue {k} of P1 H") for k in range(n)]


# ---------------------------------------------------------------------------
# Assumptions and generation verdict
# ---------------------------------------------------------------------------


def _generalized_max_min(A: np.ndarray, Bm: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Extreme generalized eigenvalues of Hermitian pencils (A, Bm), Bm positive definite."""
    _, bmh = _hermitian_sqrt(Bm)
    C = bmh @ A @ bmh
    C = 0.5 * (C + np.conj(np.swapaxes(C, -1, -2)))
    ev = np.linalg.eigvalsh(C)
    return ev[..., -1], ev[..., 0]


@dataclass
class AssumptionReport:
    """Sampled checks of the structural hypotheses (all heuristic: finite probe)."""

    probe_count: int
    probe_max: float
    sup_delta: float
    bounded_delta: bool
    energy_equivalence_min: float
    energy_equivalence_max: float
    energy_equivalence: bool
    K1: float
    K1_finite: bool
    K2: float
    K2_finite: bool
    W_B_rank: int
    W_B_full_rank: bool
    heuristic: bool = True

    @property
    def all_hold(self) -> bool:
        return (self.bounded_delta and self.energy_equivalence and self.K1_finite and self.K2_finite
                and self.W_B_full_rank)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["all_hold"] = self.all_hold
        return d


def energy_form(diag: Diagonalization) -> np.ndarray:
    """S* |Delta| S at each node; equals H / 2 under the half-energy scaling."""
    AD = diag.abs_delta[..., None] * np.eye(diag.delta.shape[1])
    return np.conj(np.swapaxes(diag.S, -1, -2)) @ AD @ diag.S


def k1_profile(diag: Diagonalization) -> np.ndarray:
    """Largest generalized eigenvalue of the pencil (B* |Delta| B, |Delta|) at each node."""
    AD = diag.abs_delta[..., None] * np.eye(diag.delta.shape[1])
    B = diag.B
    k1, _ = _generalized_max_min(np.conj(np.swapaxes(B, -1, -2)) @ AD @ B, AD)
    return k1


def check_assumptions(phs: PortHamiltonianSystem, diag: Diagonalization | None = None,
                      probe=None) -> AssumptionReport:
    """Check on a probe grid: Delta bounded, S* |Delta| S equivalent to H, finite
    K1 = sup max-eig(B* |Delta| B, |Delta|), finite K2 = sup max-eig(C* |Delta| C, H)
    and full row rank of W_B.
    """
    if diag is None:
        probe = probe_grid(phs.H) if probe is None else np.asarray(probe, dtype=float)
        diag = diagonalize_pointwise(phs.P1, phs.H, probe)
    ad = diag.abs_delta
    AD = ad[..., None] * np.eye(phs.n)
    emax, emin = _generalized_max_min(energy_form(diag), diag.H)
    k1 = k1_profile(diag)
    C = diag.C
    Ch = np.conj(np.swapaxes(C, -1, -2))
    k2, _ = _generalized_max_min(Ch @ AD @ C, diag.H)
    W = phs.W_B
    rank = int(np.linalg.matrix_rank(W)) if W.size else 0
    sup_delta = float(np.max(ad))
    n_minus = diag.n_minus
    return AssumptionReport(
        probe_count=int(diag.nodes.size), probe_max=float(diag.nodes.max()),
        sup_delta=sup_delta, bounded_delta=bool(np.isfinite(sup_delta) and sup_delta <= FINITE_BOUND),
        energy_equivalence_min=float(emin.min()), energy_equivalence_max=float(emax.max()),
        energy_equivalence=bool(emin.min() > 1e-12 and emax.max() <= FINITE_BOUND),
        K1=float(k1.max()), K1_finite=bool(np.isfinite(k1.max()) and k1.max() <= FINITE_BOUND),
        K2=float(k2.max()), K2_finite=bool(np.isfinite(k2.max()) and k2.max() <= FINITE_BOUND),
        W_B_rank=rank, W_B_full_rank=bool(rank == n_minus and W.shape[0] == n_minus),
    )


def _complex_json(a):
    a = np.asarray(a)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [_complex_json(v) for v in a]


@dataclass
class GenerationReport:
    """Verdict on whether the boundary condition yields a C0-semigroup."""

    verdict: str
    n_plus: int
    n_minus: int
    U1: np.ndarray
    U2: np.ndarray
    sigma_min_U2: float
    sigma_max_U2: float
    Z_minus: np.ndarray
    K: np.ndarray
    Q: np.ndarray
    cross_check_rank: int
    cross_check_agrees: bool
    assumptions: AssumptionReport | None
    notes: list = field(default_factory=list)

    @property
    def generator(self) -> bool:
        return self.verdict == "generator"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "generator": self.generator,
            "n_plus": self.n_plus,
            "n_minus": self.n_minus,
            "U1": _complex_json(self.U1),
            "U2": _complex_json(self.U2),
            "sigma_min_U2": self.sigma_min_U2,
            "sigma_max_U2": self.sigma_max_U2,
            "Z_minus": _complex_json(self.Z_minus),
            "K": _complex_json(self.K),
            "Q": _complex_json(self.Q),
            "cross_check_rank": self.cross_check_rank,
            "cross_check_agrees": self.cross_check_agrees,
            "assumptions": None if self.assumptions is None else self.assumptions.to_dict(),
            "notes": list(self.notes),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def negative_eigenspace(P1, H0) -> np.ndarray:
    """Basis of the negative eigenspace of P1 H(0) from a general (non-Hermitian) eigensolver."""
    A = np.asarray(P1, dtype=complex) @ np.asarray(H0, dtype=complex)
    w, V = scipy.linalg.eig(A)
    return V[:, w.real < 0]


def check_generation(phs: PortHamiltonianSystem, probe=None, with_assumptions: bool = True) -> GenerationReport:
    """Decide whether the operator with W_B H(0) x(0) = 0 generates a C0-semigroup.

    The verdict uses sigma_min(U2) > 1e-10 max(sigma_max(U2), 1). It is cross
    checked by the rank of W_B H(0) Z, where Z spans the negative eigenspace
    of P1 H(0) computed independently of the diagonalization.
    """
    probe = probe_grid(phs.H) if probe is None else np.asarray(probe, dtype=float)
    npl, nmi = check_inertia_constant(phs.P1, phs.H)
    notes = []
    if phs.W_B.shape[0] != nmi:
        raise ValidationError(f"W_B has {phs.W_B.shape[0]} rows but n_minus = {nmi}")
    diag = diagonalize_pointwise(phs.P1, phs.H, probe)
    assumptions = check_assumptions(phs, diag) if with_assumptions else None
    U1, U2 = compute_U(phs.W_B, diag)
    Zm = z_minus_space(diag)
    lam0 = diag.delta[0, :npl]
    th0 = diag.delta[0, npl:]
    if nmi == 0:
        notes.append("n_minus = 0: no boundary condition is imposed")
        smin, smax, ok = math.inf, 0.0, True
        rank, agrees = 0, True
        K = np.zeros((0, 0), dtype=complex)
        Q = np.zeros((0, npl), dtype=complex)
    else:
        sv = np.linalg.svd(U2, compute_uv=False)
        smin, smax = float(sv[-1]), float(sv[0])
        ok = smin > GENERATION_TOL * max(smax, 1.0)
        Zc = negative_eigenspace(phs.P1, diag.H[0])
        R = phs.W_B @ diag.H[0] @ Zc
        svr = np.linalg.svd(R, compute_uv=False)
        rank = int(np.sum(svr > GENERATION_TOL * max(svr[0], 1.0)))
        agrees = (rank == nmi) == ok
        if not agrees:
            notes.append("rank cross-check disagrees with the U2 verdict")
        K = U2 / th0[None, :]
        Q = U1 / lam0[None, :] if npl else np.zeros((nmi, 0), dtype=complex)
    if npl == 0:
        notes.append("n_plus = 0: the condition only involves incoming traces")
    verdict = "generator" if ok else "not-generator"
    if phs.P0 is not None:
        if phs.H_bounded:
            notes.append("P0 H is a bounded perturbation; the verdict covers the generator property")
        else:
            notes.append("P0 is present but H is not bounded: the perturbation argument does not apply")
            if ok:
                verdict = "undetermined"
    if assumptions is not None and not assumptions.all_hold:
        notes.append("some sampled structural assumptions fail; see the assumptions block")
    return GenerationReport(verdict, npl, nmi, U1, U2, smin, smax, Zm, K, Q, rank, bool(agrees),
                            assumptions, notes)


# ---------------------------------------------------------------------------
# Change of variables
# ---------------------------------------------------------------------------


def _diag_for(x: State, diag: Diagonalization | None, P1, H) -> Diagonalization:
    if diag is not None and diag.nodes.size == x.grid.size and np.array_equal(diag.nodes, x.nodes):
        return diag
    if P1 is None or H is None:
        raise ValidationError("need P1 and H to diagonalize on the state grid")
    return diagonalize_pointwise(P1, H, x.nodes)


def to_diagonal(x: State, diag: Diagonalization | None = None, P1=None, H=None) -> State:
    """g = S x node by node."""
    d = _diag_for(x, diag, P1, H)
    return x.with_values(np.einsum("nij,nj->ni", d.S, x.values))


def from_diagonal(g: State, diag: Diagonalization | None = None, P1=None, H=None) -> State:
    """x = S^{-1} g node by node."""
    d = _diag_for(g, diag, P1, H)
    return g.with_values(np.einsum("nij,nj->ni", d.S_inv, g.values))
