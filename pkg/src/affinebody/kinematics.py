"""Body states on the frame bundle and every derived kinematic quantity.

A state is (x, e) with e[i, A] = e^i_A (legs as columns, det e > 0) plus a
fibre that is either velocities (v^i, de^i_A/dt) or canonical momenta
(p_i, P^A_i).  Conversions between the fibres go through the Legendre map
only.  Conventions pinned here:

    internal velocity   V^i_A = de^i_A/dt + Gamma^i_jk e^j_A v^k
    affine velocity     Omega^i_j = V^i_A e^A_j,  OmegaHat^A_B = e^A_i V^i_B
    covariant momentum  P_i = p_i - e^j_A P^A_k Gamma^k_ji
    affine spin         Sigma^i_j = e^i_A P^A_j,  SigmaHat^A_B = P^A_i e^i_B
    Green / Cauchy      G_AB = g_ij e^i_A e^j_B,  C_ij = eta_AB e^A_i e^B_j
    spin / vorticity    S^i_j = Sigma^i_j - g^ik g_jl Sigma^l_k,
                        VHat^A_B = SigmaHat^A_B - eta^AC eta_BD SigmaHat^D_C

The micromaterial metric eta defaults to the identity; every operation
that depends on it takes an optional override.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    ConstraintViolationError,
    SingularFrameError,
    SingularInertiaError,
)
from .frames import FrameField, nonholonomic_coeffs, relative_configuration
from .geometry import ManifoldModel

__all__ = [
    "Velocity",
    "Momentum",
    "BodyState",
    "KinematicSnapshot",
    "MomentumSnapshot",
    "Decomposition",
    "internal_velocity",
    "affine_velocity",
    "comoving_velocity",
    "split_relative_drive",
    "deformation",
    "deformation_invariants",
    "decompose",
    "legendre",
    "inverse_legendre",
    "momentum_snapshot",
    "spin_and_vorticity",
    "snapshot",
    "gyroscopic_residual",
    "retract_orthonormal",
    "TensorField",
    "MatrixField",
    "transform_spatial",
    "transform_material",
]


@dataclass(frozen=True)
class Velocity:
    v: np.ndarray
    edot: np.ndarray


@dataclass(frozen=True)
class Momentum:
    p: np.ndarray
    P: np.ndarray  # P^A_i, rows A, columns i


@dataclass(frozen=True)
class BodyState:
    """Configuration (x, e) plus a velocity or momentum fibre."""

    x: np.ndarray
    e: np.ndarray
    fibre: "Velocity | Momentum"

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        e = np.asarray(self.e, dtype=float)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "e", e)
        n = x.shape[0]
        if e.shape != (n, n):
            raise SingularFrameError(f"internal frame must be {n}x{n}, got {e.shape}")
        if np.linalg.det(e) <= 0:
            raise SingularFrameError("internal frame must have det(e) > 0")

    @property
    def dim(self) -> int:
        return self.x.shape[0]

    @property
    def is_velocity(self) -> bool:
        return isinstance(self.fibre, Velocity)

    def coframe(self) -> np.ndarray:
        return np.linalg.inv(self.e)

    # flat record used by the trajectory CSV: (t is prepended by the writer)
    def to_record(self) -> list:
        kind = "velocity" if self.is_velocity else "momentum"
        if self.is_velocity:
            a, b = self.fibre.v, self.fibre.edot
        else:
            a, b = self.fibre.p, self.fibre.P
        return (
            list(np.asarray(self.x, dtype=float))
            + list(self.e.flatten())
            + [kind]
            + list(np.asarray(a, dtype=float))
            + list(np.asarray(b).flatten())
        )

    @staticmethod
    def from_record(fields: list, dim: int) -> "BodyState":
        n = dim
        x = np.array(fields[:n], dtype=float)
        e = np.array(fields[n : n + n * n], dtype=float).reshape(n, n)
        kind = fields[n + n * n]
        rest = np.array(fields[n + n * n + 1 :], dtype=float)
        a, b = rest[:n], rest[n:].reshape(n, n)
        fibre = Velocity(a, b) if kind == "velocity" else Momentum(a, b)
        return BodyState(x, e, fibre)


@dataclass(frozen=True)
class KinematicSnapshot:
    V: np.ndarray
    Omega: np.ndarray
    OmegaHat: np.ndarray
    vhat: np.ndarray
    Green: np.ndarray
    Cauchy: np.ndarray
    GreenInv: np.ndarray
    CauchyInv: np.ndarray
    invariants: np.ndarray
    spin: Optional[np.ndarray] = None
    vorticity: Optional[np.ndarray] = None


@dataclass(frozen=True)
class MomentumSnapshot:
    p_hol: np.ndarray
    P_cov: np.ndarray
    P_int: np.ndarray
    Sigma: np.ndarray
    SigmaHat: np.ndarray
    Phat: np.ndarray


@dataclass(frozen=True)
class Decomposition:
    O: np.ndarray
    Sym: np.ndarray
    SigmaSym: np.ndarray
    U: np.ndarray
    D: np.ndarray
    V: np.ndarray


# ---------------------------------------------------------------------------
# velocities
# ---------------------------------------------------------------------------


def _require_velocity(state: BodyState) -> Velocity:
    if not state.is_velocity:
        raise ValueError("operation requires a velocity-fibre state")
    return state.fibre


def _require_momentum(state: BodyState) -> Momentum:
    if state.is_velocity:
        raise ValueError("operation requires a momentum-fibre state")
    return state.fibre


def internal_velocity(state: BodyState, model: ManifoldModel) -> np.ndarray:
    """V^i_A = de^i_A/dt + Gamma^i_jk e^j_A v^k."""
    fib = _require_velocity(state)
    gamma = model.connection(state.x)
    return fib.edot + np.einsum("ijk,jA,k->iA", gamma, state.e, fib.v)


def affine_velocity(state: BodyState, model: ManifoldModel):
    """(Omega^i_j, OmegaHat^A_B); Omega = V e^-1 and OmegaHat = e^-1 V."""
    V = internal_velocity(state, model)
    cof = state.coframe()
    return V @ cof, cof @ V


def comoving_velocity(state: BodyState) -> np.ndarray:
    """vhat^A = e^A_i v^i, translational velocity in body axes."""
    fib = _require_velocity(state)
    return state.coframe() @ fib.v


def split_relative_drive(
    state: BodyState, field: FrameField, model: ManifoldModel
):
    """(OmegaHat_rl, OmegaHat_dr) with OmegaHat = OmegaHat_rl + OmegaHat_dr.

    The relative part comes from L = E(x)^-1 e differentiated by the product
    rule using the frame field's spatial partials; the drive part is the
    conjugated contraction of the non-holonomic connection coefficients with
    the translational velocity in E-axes:

        OmegaHat_dr^A_B = (L^-1)^A_F Gamma^F_DC L^D_B vE^C,  vE^C = E^C_i v^i.
    """
    fib = _require_velocity(state)
    Ecof = field.coframe(state.x)
    L = relative_configuration(state.e, field, state.x)
    Linv = np.linalg.inv(L)

    Edot = field.frame_time_derivative(state.x, fib.v)
    # d/dt E^-1 = -E^-1 (dE/dt) E^-1
    Ldot = -Ecof @ Edot @ Ecof @ state.e + Ecof @ fib.edot
    omega_rl = Linv @ Ldot

    gnh = nonholonomic_coeffs(field, model, state.x)
    vE = Ecof @ fib.v
    drive = np.einsum("FDC,C->FD", gnh, vE)
    omega_dr = Linv @ drive @ L
    return omega_rl, omega_dr


# ---------------------------------------------------------------------------
# deformation measures
# ---------------------------------------------------------------------------


def deformation(state: BodyState, model: ManifoldModel, eta: Optional[np.ndarray] = None):
    """Green and Cauchy tensors, their reciprocals, and the trace invariants.

    Returns (G_AB, C_ij, Ginv^AB, Cinv^ij, invariants) where
    invariants[a-1] = Tr((eta^-1 G)^a) for a = 1..n.  The reciprocals are
    matrix inverses, deliberately distinct from the eta/g index-shifted
    tensors.
    """
    n = state.dim
    eta = np.eye(n) if eta is None else np.asarray(eta)
    g = model.metric(state.x)
    e = state.e
    cof = state.coframe()
    G = e.T @ g @ e
    C = cof.T @ eta @ cof
    Ginv = np.linalg.inv(G)
    Cinv = np.linalg.inv(C)
    Ghat = np.linalg.inv(eta) @ G
    invariants = np.array([np.trace(np.linalg.matrix_power(Ghat, a)) for a in range(1, n + 1)])
    return G, C, Ginv, Cinv, invariants


def deformation_invariants(state: BodyState, model: ManifoldModel, eta=None) -> np.ndarray:
    return deformation(state, model, eta)[4]


def decompose(L: np.ndarray) -> Decomposition:
    """Polar and two-polar factors of an internal configuration matrix.

    L = O Sym = SigmaSym O with Sym, SigmaSym symmetric positive definite,
    and L = U D V^-1 with U, V special orthogonal and D diagonal with
    descending positive entries.  Degeneracies in D are resolved by a
    deterministic eigenvector sign fix so round-trips are reproducible.
    """
    L = np.asarray(L, dtype=float)
    det = np.linalg.det(L)
    if det <= 0:
        raise SingularFrameError(f"two-polar factors need det(L) > 0, got {det:.3e}")
    n = L.shape[0]

    gram = L.T @ L
    w, vecs = np.linalg.eigh(gram)       # ascending eigenvalues of L^T L
    order = np.argsort(w)[::-1]
    w = w[order]
    vecs = vecs[:, order]
    # deterministic signs: largest-magnitude entry of each column positive
    for k in range(n):
        j = int(np.argmax(np.abs(vecs[:, k])))
        if vecs[j, k] < 0:
            vecs[:, k] = -vecs[:, k]
    if np.linalg.det(vecs) < 0:
        vecs[:, -1] = -vecs[:, -1]
    d = np.sqrt(np.maximum(w, 0.0))
    V = vecs
    U = L @ V @ np.diag(1.0 / d)
    D = np.diag(d)

    Sym = V @ D @ V.T
    O = U @ V.T
    SigmaSym = O @ Sym @ O.T
    return Decomposition(O=O, Sym=Sym, SigmaSym=SigmaSym, U=U, D=D, V=V)


# ---------------------------------------------------------------------------
# Legendre transform and momenta
# ---------------------------------------------------------------------------


def _check_inertia(m: float, J: np.ndarray):
    J = np.asarray(J, dtype=float)
    if m <= 0:
        raise SingularInertiaError("mass must be positive")
    if not np.allclose(J, J.T, atol=1e-12):
        raise SingularInertiaError("inertia tensor must be symmetric")
    if np.any(np.linalg.eigvalsh(J) <= 0):
        raise SingularInertiaError("inertia tensor must be positive definite")
    return J


def legendre(state: BodyState, J: np.ndarray, m: float, model: ManifoldModel) -> BodyState:
    """Velocity fibre -> canonical momentum fibre.

    P^A_i = g_ij V^j_B J^BA and P_i = m g_ij v^j, then the canonical
    p_i = P_i + e^j_A P^A_k Gamma^k_ji restores the holonomic momentum.
    """
    J = _check_inertia(m, J)
    fib = _require_velocity(state)
    g = model.metric(state.x)
    gamma = model.connection(state.x)
    V = internal_velocity(state, model)
    P_int = (g @ V @ J).T          # P^A_i = g_ij V^j_B J^BA
    P_cov = m * g @ fib.v
    p = P_cov + np.einsum("jA,Ak,kji->i", state.e, P_int, gamma)
    return BodyState(state.x, state.e, Momentum(p, P_int))


def inverse_legendre(state: BodyState, J: np.ndarray, m: float, model: ManifoldModel) -> BodyState:
    """Canonical momentum fibre -> velocity fibre (exact inverse of legendre)."""
    J = _check_inertia(m, J)
    fib = _require_momentum(state)
    g_inv = model.metric_inverse(state.x)
    gamma = model.connection(state.x)
    Jinv = np.linalg.inv(J)
    P_cov = fib.p - np.einsum("jA,Ak,kji->i", state.e, fib.P, gamma)
    v = g_inv @ P_cov / m
    V = g_inv @ fib.P.T @ Jinv      # V^i_A = g^ij P^B_j Jtilde_BA
    edot = V - np.einsum("ijk,jA,k->iA", gamma, state.e, v)
    return BodyState(state.x, state.e, Velocity(v, edot))


def momentum_snapshot(state: BodyState, model: ManifoldModel) -> MomentumSnapshot:
    """All momentum-level quantities of a canonical-momentum state."""
    fib = _require_momentum(state)
    gamma = model.connection(state.x)
    e = state.e
    P_cov = fib.p - np.einsum("jA,Ak,kji->i", e, fib.P, gamma)
    Sigma = e @ fib.P
    SigmaHat = fib.P @ e
    Phat = P_cov @ e
    return MomentumSnapshot(
        p_hol=np.asarray(fib.p),
        P_cov=P_cov,
        P_int=np.asarray(fib.P),
        Sigma=Sigma,
        SigmaHat=SigmaHat,
        Phat=Phat,
    )


def spin_and_vorticity(
    mom: MomentumSnapshot, state: BodyState, model: ManifoldModel, eta=None
):
    """(S^i_j, VHat^A_B): doubled g-skew part of Sigma and eta-skew part of SigmaHat."""
    n = state.dim
    eta = np.eye(n) if eta is None else np.asarray(eta)
    g = model.metric(state.x)
    g_inv = model.metric_inverse(state.x)
    eta_inv = np.linalg.inv(eta)
    S = mom.Sigma - g_inv @ mom.Sigma.T @ g
    VHat = mom.SigmaHat - eta_inv @ mom.SigmaHat.T @ eta
    return S, VHat


def snapshot(
    state: BodyState,
    model: ManifoldModel,
    J: Optional[np.ndarray] = None,
    m: Optional[float] = None,
    eta=None,
) -> KinematicSnapshot:
    """Full kinematic snapshot; spin/vorticity filled when inertia is supplied."""
    if state.is_velocity:
        vel_state = state
        mom_state = (
            legendre(state, J, m, model) if J is not None and m is not None else None
        )
    else:
        if J is None or m is None:
            raise ValueError("momentum states need (J, m) to recover velocities")
        vel_state = inverse_legendre(state, J, m, model)
        mom_state = state

    V = internal_velocity(vel_state, model)
    Omega, OmegaHat = affine_velocity(vel_state, model)
    vhat = comoving_velocity(vel_state)
    G, C, Ginv, Cinv, invariants = deformation(vel_state, model, eta)

    spin = vorticity = None
    if mom_state is not None:
        mom = momentum_snapshot(mom_state, model)
        spin, vorticity = spin_and_vorticity(mom, mom_state, model, eta)
    return KinematicSnapshot(
        V=V,
        Omega=Omega,
        OmegaHat=OmegaHat,
        vhat=vhat,
        Green=G,
        Cauchy=C,
        GreenInv=Ginv,
        CauchyInv=Cinv,
        invariants=invariants,
        spin=spin,
        vorticity=vorticity,
    )


# ---------------------------------------------------------------------------
# gyroscopic constraint helpers
# ---------------------------------------------------------------------------


def gyroscopic_residual(state: BodyState, model: ManifoldModel, eta=None) -> float:
    """max |eta_AB e^A_i e^B_j - g_ij| at the state."""
    n = state.dim
    eta = np.eye(n) if eta is None else np.asarray(eta)
    g = model.metric(state.x)
    cof = state.coframe()
    return float(np.max(np.abs(cof.T @ eta @ cof - g)))


def retract_orthonormal(state: BodyState, model: ManifoldModel) -> BodyState:
    """Polar retraction of e onto the g-orthonormal set, velocity projected g-skew.

    The retracted frame is e M^{-1/2} with M = e^T g e, the closest
    g-orthonormal frame in the polar-decomposition sense; a velocity fibre
    is then projected so the affine velocity is exactly g-skew.
    """
    g = model.metric(state.x)
    M = state.e.T @ g @ state.e
    w, vecs = np.linalg.eigh(M)
    if np.any(w <= 0):
        raise ConstraintViolationError("frame Gram matrix not positive definite")
    M_invsqrt = vecs @ np.diag(w**-0.5) @ vecs.T
    e_new = state.e @ M_invsqrt
    if not state.is_velocity:
        return BodyState(state.x, e_new, state.fibre)

    tmp = BodyState(state.x, e_new, state.fibre)
    V = internal_velocity(tmp, model)
    Omega = V @ np.linalg.inv(e_new)
    g_inv = np.linalg.inv(g)
    Omega_skew = 0.5 * (Omega - g_inv @ Omega.T @ g)
    V_new = Omega_skew @ e_new
    gamma = model.connection(state.x)
    edot = V_new - np.einsum("ijk,jA,k->iA", gamma, e_new, state.fibre.v)
    return BodyState(state.x, e_new, Velocity(state.fibre.v, edot))


# ---------------------------------------------------------------------------
# transformation laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TensorField:
    """Mixed tensor field T^i_j(x) acting on internal frames from the left."""

    value_fn: "callable"
    partials_fn: Optional["callable"] = None
    fd_step: float = 1e-6

    def value(self, x) -> np.ndarray:
        return np.asarray(self.value_fn(np.asarray(x)))

    def partials(self, x) -> np.ndarray:
        if self.partials_fn is not None:
            return np.asarray(self.partials_fn(np.asarray(x)))
        from .geometry import _fd4

        return _fd4(self.value_fn, np.asarray(x), self.fd_step)

    def covariant_partials(self, x, model: ManifoldModel) -> np.ndarray:
        """nabla_k T^i_j = d_k T^i_j + Gamma^i_lk T^l_j - Gamma^l_jk T^i_l."""
        T = self.value(x)
        dT = self.partials(x)
        gamma = model.connection(x)
        return (
            np.einsum("ijk->ijk", dT)
            + np.einsum("ilk,lj->ijk", gamma, T)
            - np.einsum("ljk,il->ijk", gamma, T)
        )


class MatrixField(TensorField):
    """Micromaterial matrix field L^A_B(x) acting on internal frames from the right."""


def transform_spatial(state: BodyState, T: TensorField, model: ManifoldModel):
    """Apply e -> T(x) e and return (new_state, rule-predicted quantities).

    The new fibre is the honest transport of the old one (product rule for a
    velocity fibre, cotangent lift for a momentum fibre).  The returned dict
    carries the closed-form transformation rules

        Omega'    = T Omega T^-1 + (nabla_v T) T^-1
        OmegaHat' = OmegaHat + e^-1 T^-1 (nabla_v T) e
        Sigma'    = T Sigma T^-1,   SigmaHat' = SigmaHat,
        P'_i      = P_i - Sigma^k_l (T^-1)^l_j nabla_i T^j_k

    so callers can check them against snapshots of the new state.
    """
    Tm = T.value(state.x)
    Tinv = np.linalg.inv(Tm)
    dT = T.partials(state.x)
    e_new = Tm @ state.e

    rules: dict = {}
    if state.is_velocity:
        v, edot = state.fibre.v, state.fibre.edot
        edot_new = np.einsum("ijk,k->ij", dT, v) @ state.e + Tm @ edot
        new_state = BodyState(state.x, e_new, Velocity(v, edot_new))

        nablaT = T.covariant_partials(state.x, model)
        nabla_v_T = np.einsum("ijk,k->ij", nablaT, v)
        Omega, OmegaHat = affine_velocity(state, model)
        rules["Omega"] = Tm @ Omega @ Tinv + nabla_v_T @ Tinv
        rules["OmegaHat"] = OmegaHat + state.coframe() @ Tinv @ nabla_v_T @ state.e
    else:
        p, P = state.fibre.p, state.fibre.P
        P_new = P @ Tinv
        # cotangent lift: p'_k = p_k - (P T^-1)^A_i d_k T^i_j e^j_A
        p_new = p - np.einsum("Ai,ijk,jA->k", P_new, dT, state.e)
        new_state = BodyState(state.x, e_new, Momentum(p_new, P_new))

        mom = momentum_snapshot(state, model)
        nablaT = T.covariant_partials(state.x, model)
        rules["Sigma"] = Tm @ mom.Sigma @ Tinv
        rules["SigmaHat"] = mom.SigmaHat
        rules["P_cov"] = mom.P_cov - np.einsum("kl,lj,jki->i", mom.Sigma, Tinv, nablaT)
    return new_state, rules


def transform_material(state: BodyState, Lf: MatrixField, model: ManifoldModel):
    """Apply e -> e L(x) and return (new_state, rule-predicted quantities).

        Omega'    = Omega + e (dL L^-1 contracted with v) e^-1
        OmegaHat' = L^-1 OmegaHat L + L^-1 (d_k L v^k)
        Sigma'    = Sigma,   SigmaHat' = L^-1 SigmaHat L,
        P'_i      = P_i - SigmaHat^A_C (d_i L)^C_B (L^-1)^B_A
    """
    Lm = Lf.value(state.x)
    Linv = np.linalg.inv(Lm)
    dL = Lf.partials(state.x)
    e_new = state.e @ Lm

    rules: dict = {}
    if state.is_velocity:
        v, edot = state.fibre.v, state.fibre.edot
        edot_new = edot @ Lm + state.e @ np.einsum("ABk,k->AB", dL, v)
        new_state = BodyState(state.x, e_new, Velocity(v, edot_new))

        Omega, OmegaHat = affine_velocity(state, model)
        dL_v = np.einsum("ABk,k->AB", dL, v)
        rules["Omega"] = Omega + state.e @ dL_v @ Linv @ state.coframe()
        rules["OmegaHat"] = Linv @ OmegaHat @ Lm + Linv @ dL_v
    else:
        p, P = state.fibre.p, state.fibre.P
        P_new = Linv @ P
        # cotangent lift: p'_k = p_k - P'^A_i e^i_B d_k L^B_A
        p_new = p - np.einsum("Ai,iB,BAk->k", P_new, state.e, dL)
        new_state = BodyState(state.x, e_new, Momentum(p_new, P_new))

        mom = momentum_snapshot(state, model)
        rules["Sigma"] = mom.Sigma
        rules["SigmaHat"] = Linv @ mom.SigmaHat @ Lm
        rules["P_cov"] = mom.P_cov - np.einsum("AC,CBi,BA->i", mom.SigmaHat, dL, Linv)
    return new_state, rules
