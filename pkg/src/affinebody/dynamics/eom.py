"""Balance-form equations of motion and constraint projection.

Metric-compatible (possibly torsional) connection:

    m Dv^i/Dt = 2m v^a v^b S_ab^i + (1/2) S^a_b R^b_a^i_j v^j + F^i
    e^i_A (D^2 e^j_B / Dt^2) J^AB = N^ij

equivalently, as balance laws for p^i = m v^i and Sigma^ij = e^i_A V^j_B J^AB,

    Dp^i/Dt     = 2m v^a v^b S_ab^i + (1/2) S^a_b R^b_a^i_j v^j + F^i
    DSigma^ij/Dt = Jt[e]_ab Sigma^ai Sigma^bj + N^ij .

The general (g, Gamma)-independent pair instead reads, with the difference
tensor Kd^a_bc = Gamma^a_bc - LC(g)^a_bc,

    m Dv^i/Dt = m Kd^i_jk v^j v^k + Sigma^m_n R^n_m^i_j v^j
                - Kd_mn^i V^m_K V^n_L J^KL + F^i
    e^i_K (D^2 e^j_L/Dt^2) J^KL = -e^i_K g^jm (Dg_mn/Dt) V^n_L J^KL + N^ij

where Dg/Dt = (nabla_k g) v^k vanishes under metricity.  Both geometric
forces are g-orthogonal to v (index skewness), so they do no work.

Gyroscopic constraint (eta_AB e^A_i e^B_j = g_ij): d'Alembert reactions have
F_R = 0 and N_R g-symmetric; the reaction keeping the acceleration on the
constraint surface solves a small linear system per evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..errors import ConstraintViolationError
from ..geometry import ManifoldModel
from ..kinematics import (
    BodyState,
    affine_velocity,
    gyroscopic_residual,
    internal_velocity,
    momentum_snapshot,
    retract_orthonormal,
)
from .models import ForceSnapshot, InertiaModel

__all__ = [
    "Rates",
    "eom_riemann_cartan",
    "eom_general",
    "eom_comoving",
    "geometric_force",
    "project_gyroscopic",
    "project_incompressible",
    "project_rotationless",
    "constraint_reaction",
    "Constraint",
    "get_constraint",
]


@dataclass(frozen=True)
class Rates:
    """Covariant accelerations plus the induced balance rates."""

    Dv_Dt: np.ndarray          # Dv^i/Dt
    DV_Dt: np.ndarray          # D^2 e^i_A / Dt^2
    Dp_up: np.ndarray          # Dp^i/Dt = m Dv^i/Dt
    DSigma_uu: np.ndarray      # DSigma^ij/Dt
    F_geom: np.ndarray         # the curvature + torsion force, vector form


def geometric_force(
    state: BodyState, inertia: InertiaModel, model: ManifoldModel
) -> np.ndarray:
    """2m v^a v^b S_ab^i + (1/2) S^a_b R^b_a^i_j v^j (momentum-torsion and
    spin-curvature couplings); g-orthogonal to v."""
    g = model.metric(state.x)
    g_inv = model.metric_inverse(state.x)
    v = state.fibre.v
    S_tor = model.torsion(state.x)
    R = model.curvature(state.x)

    # spin S^a_b from the instantaneous momenta
    from ..kinematics import legendre, spin_and_vorticity

    mom_state = legendre(state, inertia.J, inertia.m, model)
    mom = momentum_snapshot(mom_state, model)
    spin, _ = spin_and_vorticity(mom, mom_state, model)

    # S_ab^i = g_am S^m_bn g^ni
    tor_low = np.einsum("am,mbn,ni->abi", g, S_tor, g_inv)
    f_tor = 2.0 * inertia.m * np.einsum("a,b,abi->i", v, v, tor_low)
    # R^b_a^i_j = R^b_akj g^ki
    f_cur = 0.5 * np.einsum("ab,bakj,ki,j->i", spin, R, g_inv, v)
    return f_tor + f_cur


def _solve_internal(N_uu: np.ndarray, state: BodyState, inertia: InertiaModel) -> np.ndarray:
    """W^j_B with e^i_A W^j_B J^AB = N^ij, i.e. W = N^T e^-T Jt."""
    cof = state.coframe()
    return N_uu.T @ cof.T @ inertia.Jinv


def eom_riemann_cartan(
    state: BodyState,
    inertia: InertiaModel,
    forces: ForceSnapshot,
    model: ManifoldModel,
    V: Optional[np.ndarray] = None,
) -> Rates:
    """Balance rates for a metric-compatible (possibly torsional) connection.

    ``V`` may carry a precomputed internal velocity to avoid recomputation
    inside integrator stages.
    """
    if V is None:
        V = internal_velocity(state, model)
    g = model.metric(state.x)
    g_inv = model.metric_inverse(state.x)
    v = state.fibre.v
    R = model.curvature(state.x)

    # Sigma^ij = e^i_A V^j_B J^AB; the curvature force sees its g-skew part
    Sigma_uu = state.e @ inertia.J @ V.T
    spin_mixed = (Sigma_uu - Sigma_uu.T) @ g
    f_cur = 0.5 * np.einsum("ab,bakj,ki,j->i", spin_mixed, R, g_inv, v)
    f_geom = f_cur
    if model.torsion_fn is not None:
        S_tor = model.torsion(state.x)
        tor_low = np.einsum("am,mbn,ni->abi", g, S_tor, g_inv)
        f_geom = f_cur + 2.0 * inertia.m * np.einsum("a,b,abi->i", v, v, tor_low)

    Dv_Dt = (f_geom + forces.F_vec) / inertia.m
    DV_Dt = _solve_internal(forces.N_uu, state, inertia)
    DSigma_uu = V @ inertia.J @ V.T + forces.N_uu
    return Rates(
        Dv_Dt=Dv_Dt,
        DV_Dt=DV_Dt,
        Dp_up=inertia.m * Dv_Dt,
        DSigma_uu=DSigma_uu,
        F_geom=f_geom,
    )


def eom_general(
    state: BodyState,
    inertia: InertiaModel,
    forces: ForceSnapshot,
    model: ManifoldModel,
    connection_fn: Callable[[np.ndarray], np.ndarray],
) -> Rates:
    """The academic pair (g, Gamma) with no compatibility assumed.

    ``model`` supplies the metric g; ``connection_fn`` the independent
    connection Gamma used for all covariant derivatives.  Curvature of
    Gamma is taken by finite differences of ``connection_fn``.
    """
    from ..geometry import curvature_of_connection

    g = model.metric(state.x)
    g_inv = model.metric_inverse(state.x)
    v = state.fibre.v
    gamma = np.asarray(connection_fn(state.x))
    lc = model.levi_civita(state.x)
    Kd = gamma - lc

    # internal velocity w.r.t. Gamma
    V = state.fibre.edot + np.einsum("ijk,jA,k->iA", gamma, state.e, v)
    P_int = (g @ V @ inertia.J).T
    Sigma = state.e @ P_int

    R = curvature_of_connection(model, connection_fn, state.x)
    f_cur = np.einsum("mn,nmkj,ki,j->i", Sigma, R, g_inv, v)
    f_K1 = inertia.m * np.einsum("ijk,j,k->i", Kd, v, v)
    # Kd_mn^i = g_ma Kd^a_nc g^ci
    Kd_low = np.einsum("ma,anc,ci->mni", g, Kd, g_inv)
    f_K2 = -np.einsum("mni,mK,nL,KL->i", Kd_low, V, V, inertia.J)
    Dv_Dt = (f_K1 + f_cur + f_K2 + forces.F_vec) / inertia.m

    # Dg_mn/Dt = (nabla_k g_mn) v^k for the Gamma-covariant derivative
    dg = model.metric_partials(state.x)
    nabla_g = (
        dg
        - np.einsum("lmk,ln->mnk", gamma, g)
        - np.einsum("lnk,ml->mnk", gamma, g)
    )
    Dg_Dt = np.einsum("mnk,k->mn", nabla_g, v)
    rhs = forces.N_uu - np.einsum(
        "iK,jm,mn,nL,KL->ij", state.e, g_inv, Dg_Dt, V, inertia.J
    )
    DV_Dt = _solve_internal(rhs, state, inertia)

    DSigma_uu = np.einsum("iA,jB,AB->ij", V, V, inertia.J) + rhs
    return Rates(
        Dv_Dt=Dv_Dt,
        DV_Dt=DV_Dt,
        Dp_up=inertia.m * Dv_Dt,
        DSigma_uu=DSigma_uu,
        F_geom=f_cur + f_K1 + f_K2,
    )


def eom_comoving(
    state: BodyState,
    inertia: InertiaModel,
    forces: ForceSnapshot,
    model: ManifoldModel,
) -> dict:
    """Euler-like co-moving rates: time derivatives of vhat^A and SigmaHat.

    Exact frame conversion of the spatial balance rates; co-moving components
    are scalars, so plain d/dt appears on the left:

        d vhat^A/dt = e^A_i Dv^i/Dt - OmHat^A_B vhat^B
        d SigmaHat^A_B/dt = e^A_i (DSigma^i_j/Dt) e^j_B
                            - OmHat^A_C SigmaHat^C_B + SigmaHat^A_C OmHat^C_B
    """
    rates = eom_riemann_cartan(state, inertia, forces, model)
    g = model.metric(state.x)
    cof = state.coframe()
    _, OmegaHat = affine_velocity(state, model)
    vhat = cof @ state.fibre.v
    dvhat = cof @ rates.Dv_Dt - OmegaHat @ vhat

    DSigma_mixed = rates.DSigma_uu @ g
    V = internal_velocity(state, model)
    SigmaHat = (g @ V @ inertia.J).T @ state.e
    dSigmaHat = cof @ DSigma_mixed @ state.e - OmegaHat @ SigmaHat + SigmaHat @ OmegaHat
    return {"dvhat_dt": dvhat, "dSigmaHat_dt": dSigmaHat, "vhat": vhat, "SigmaHat": SigmaHat}


# ---------------------------------------------------------------------------
# constraints
# ---------------------------------------------------------------------------


def project_gyroscopic(
    forces: ForceSnapshot,
    state: BodyState,
    model: ManifoldModel,
    tol: float = 1e-6,
) -> ForceSnapshot:
    """d'Alembert-effective forces for the orthonormality constraint.

    The translational force is unchanged (F_R = 0); the hyperforce is
    replaced by its g-skew part, so only the torque survives and the
    propagated internal equation is the spin balance DS^ij/Dt = N^ij - N^ji.
    """
    res = gyroscopic_residual(state, model)
    if res > tol:
        raise ConstraintViolationError(
            f"orthonormality residual {res:.3e} exceeds tolerance {tol:.1e}"
        )
    N_skew = 0.5 * (forces.N_uu - forces.N_uu.T)
    return ForceSnapshot.from_parts(forces.F_cov, N_skew, model, state.x)


def project_incompressible(forces, state, model, tol: float = 1e-6):
    """Effective forces for volume-preserving motion: N loses its g-trace part."""
    g = model.metric(state.x)
    g_inv = np.linalg.inv(g)
    n = state.dim
    trace = np.einsum("ij,ij->", forces.N_uu, g)
    N_eff = forces.N_uu - (trace / n) * g_inv
    return ForceSnapshot.from_parts(forces.F_cov, N_eff, model, state.x)


def project_rotationless(forces, state, model, tol: float = 1e-6):
    """Effective forces for rotation-free motion: N loses its g-skew part."""
    N_eff = 0.5 * (forces.N_uu + forces.N_uu.T)
    return ForceSnapshot.from_parts(forces.F_cov, N_eff, model, state.x)


def _reaction_basis(kind: str, n: int, g_inv: np.ndarray):
    """Span of the admissible reaction hyperforces N_R^{ij}."""
    basis = []
    if kind == "gyroscopic":
        for i in range(n):
            for j in range(i, n):
                b = np.zeros((n, n))
                b[i, j] = b[j, i] = 1.0
                basis.append(b)
    elif kind == "rotationless":
        for i in range(n):
            for j in range(i + 1, n):
                b = np.zeros((n, n))
                b[i, j], b[j, i] = 1.0, -1.0
                basis.append(b)
    elif kind == "incompressible":
        basis.append(g_inv.copy())
    else:
        raise ValueError(f"unknown constraint kind {kind!r}")
    return basis


def _constraint_rows(kind: str, M_mixed: np.ndarray, g_inv: np.ndarray) -> np.ndarray:
    """Flatten the constrained part of a mixed matrix M^i_j.

    The gyroscopic and rotationless constraints act on the g-raised object
    (its symmetric respectively antisymmetric part); the incompressible one
    on the mixed trace.
    """
    n = M_mixed.shape[0]
    if kind == "incompressible":
        return np.array([np.trace(M_mixed)])
    raised = M_mixed @ g_inv
    if kind == "gyroscopic":
        sym = raised + raised.T
        return sym[np.triu_indices(n)]
    if kind == "rotationless":
        skew = raised - raised.T
        return skew[np.triu_indices(n, k=1)]
    raise ValueError(kind)


def constraint_reaction(
    kind: str,
    state: BodyState,
    inertia: InertiaModel,
    N_uu: np.ndarray,
    model: ManifoldModel,
) -> np.ndarray:
    """Reaction hyperforce N_R^{ij} keeping the acceleration on the constraint.

    With W(N) the internal acceleration induced by a total hyperforce N, the
    velocity-level constraint differentiates to rows of

        X(N) - Omega^2-term,   X(N)^{jn} = N^{kj} Jt[e]_km g^mn,

    and N_R is solved for in the d'Alembert-admissible span.
    """
    g = model.metric(state.x)
    g_inv = np.linalg.inv(g)
    n = state.dim
    cof = state.coframe()
    Jt_e = cof.T @ inertia.Jinv @ cof  # Jt[e]_km

    V = internal_velocity(state, model)
    Omega = V @ cof
    Y = Omega @ Omega                  # (Omega^2)^j_m, mixed

    def X(N):
        # (W e^-1)^j_m = N^{kj} Jt[e]_km, mixed
        return np.einsum("kj,km->jm", N, Jt_e)

    target = _constraint_rows(kind, Y, g_inv) - _constraint_rows(kind, X(N_uu), g_inv)
    basis = _reaction_basis(kind, n, g_inv)
    A = np.column_stack([_constraint_rows(kind, X(b), g_inv) for b in basis])
    coeffs = np.linalg.solve(A, target)
    N_R = sum(c * b for c, b in zip(coeffs, basis))
    return N_R


@dataclass(frozen=True)
class Constraint:
    """Named constraint bundle used by the integrator."""

    kind: str

    def residual(self, state: BodyState, model: ManifoldModel) -> float:
        if self.kind == "gyroscopic":
            return gyroscopic_residual(state, model)
        Omega, _ = affine_velocity(state, model)
        g = model.metric(state.x)
        g_inv = np.linalg.inv(g)
        raised = Omega @ g_inv
        if self.kind == "incompressible":
            return float(abs(np.trace(Omega)))
        if self.kind == "rotationless":
            return float(np.max(np.abs(raised - raised.T)))
        return 0.0

    def project_forces(self, forces, state, model, tol):
        if self.kind == "gyroscopic":
            return project_gyroscopic(forces, state, model, tol)
        if self.kind == "incompressible":
            return project_incompressible(forces, state, model, tol)
        if self.kind == "rotationless":
            return project_rotationless(forces, state, model, tol)
        return forces

    def reaction(self, state, inertia, N_uu, model) -> np.ndarray:
        return constraint_reaction(self.kind, state, inertia, N_uu, model)

    def retract(self, state: BodyState, model: ManifoldModel) -> BodyState:
        if self.kind == "gyroscopic":
            return retract_orthonormal(state, model)
        # incompressible/rotationless rely on the reaction alone; their
        # configuration drift stays at integrator accuracy
        return state


def get_constraint(kind: Optional[str]) -> Optional[Constraint]:
    if kind in (None, "none"):
        return None
    if kind not in ("gyroscopic", "incompressible", "rotationless"):
        raise ValueError(f"unknown constraint {kind!r}")
    return Constraint(kind)
