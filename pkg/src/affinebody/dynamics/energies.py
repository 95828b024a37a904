"""Kinetic energy models and their equivalent forms.

Primary forms (all evaluate to the same number on the same state):

    T = (m/2) g_ij v^i v^j + (1/2) g_ij V^i_A V^j_B J^AB                (velocity)
      = (m/2) G_AB vhat^A vhat^B + (1/2) G_KL OmHat^K_A OmHat^L_B J^AB  (co-moving)
      = (m/2) g_ij v^i v^j + (1/2) g_ij Om^i_k Om^j_l J[e]^kl           (spatial)

    T* = (1/2m) g^ij P_i P_j + (1/2) Jt_AB P^A_i P^B_j g^ij             (momentum)
       = (1/2m) Gt^AB Ph_A Ph_B + (1/2) Jt_AB ShA_C ShB_D Gt^CD        (co-moving)
       = (1/2m) g^ij P_i P_j + (1/2) Jt[e]_kl S^k_i S^l_j g^ij          (spatial)

with P_i the covariant translational momentum, Jt the matrix inverse of J,
J[e]^kl = e^k_A e^l_B J^AB and Jt[e]_kl = e^A_k e^B_l Jt_AB.

The two-polar evaluator uses, for symmetric factor S and total co-moving
angular rate om = om_dr + om_rl of the orthogonal polar factor,

    T_int = -Tr(S J S om^2)/2 + Tr(S J dS/dt om) + Tr(J (dS/dt)^2)/2

and, for the doubly isotropic case J = I 1 with stretches D and the rates
chi (U-factor, drive included) and tht (V-factor),

    T_int = -I Tr(D^2 chi^2)/2 - I Tr(D^2 tht^2)/2 + I Tr(D chi D tht)
            + I Tr((dD/dt)^2)/2 .
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..errors import DegenerateDeformationError
from ..frames import FrameField, nonholonomic_coeffs, relative_configuration
from ..geometry import ManifoldModel
from ..kinematics import (
    BodyState,
    affine_velocity,
    comoving_velocity,
    decompose,
    deformation,
    internal_velocity,
    momentum_snapshot,
)
from .models import InertiaModel, PotentialModel

__all__ = [
    "kinetic_energy",
    "kinetic_energy_forms",
    "kinetic_hamiltonian",
    "kinetic_hamiltonian_forms",
    "total_energy",
    "two_polar_rates",
    "two_polar_kinetic",
    "alt_kinetic_energies",
]


def kinetic_energy(state: BodyState, inertia: InertiaModel, model: ManifoldModel) -> float:
    g = model.metric(state.x)
    v = state.fibre.v
    V = internal_velocity(state, model)
    t_tr = 0.5 * inertia.m * float(v @ g @ v)
    t_int = 0.5 * float(np.einsum("ij,iA,jB,AB->", g, V, V, inertia.J))
    return t_tr + t_int


def kinetic_energy_forms(state: BodyState, inertia: InertiaModel, model: ManifoldModel) -> dict:
    """All equivalent displayed forms of the kinetic energy, for cross-checks."""
    g = model.metric(state.x)
    v = state.fibre.v
    V = internal_velocity(state, model)
    Omega, OmegaHat = affine_velocity(state, model)
    vhat = comoving_velocity(state)
    G = state.e.T @ g @ state.e
    J = inertia.J
    m = inertia.m

    velocity = 0.5 * m * float(v @ g @ v) + 0.5 * float(
        np.einsum("ij,iA,jB,AB->", g, V, V, J)
    )
    comoving = 0.5 * m * float(vhat @ G @ vhat) + 0.5 * float(
        np.einsum("KL,KA,LB,AB->", G, OmegaHat, OmegaHat, J)
    )
    J_spatial = state.e @ J @ state.e.T  # J[e]^kl = e^k_A e^l_B J^AB
    spatial = 0.5 * m * float(v @ g @ v) + 0.5 * float(
        np.einsum("ij,ik,jl,kl->", g, Omega, Omega, J_spatial)
    )
    return {"velocity": velocity, "comoving": comoving, "spatial": spatial}


def kinetic_hamiltonian(
    state: BodyState, inertia: InertiaModel, model: ManifoldModel
) -> float:
    """Kinetic part of the Hamiltonian on a canonical-momentum state."""
    mom = momentum_snapshot(state, model)
    g_inv = model.metric_inverse(state.x)
    t_tr = 0.5 / inertia.m * float(mom.P_cov @ g_inv @ mom.P_cov)
    t_int = 0.5 * float(
        np.einsum("AB,Ai,Bj,ij->", inertia.Jinv, mom.P_int, mom.P_int, g_inv)
    )
    return t_tr + t_int


def kinetic_hamiltonian_forms(
    state: BodyState, inertia: InertiaModel, model: ManifoldModel
) -> dict:
    mom = momentum_snapshot(state, model)
    g = model.metric(state.x)
    g_inv = model.metric_inverse(state.x)
    G = state.e.T @ g @ state.e
    Gt = np.linalg.inv(G)
    Jt = inertia.Jinv
    m = inertia.m

    momentum = 0.5 / m * float(mom.P_cov @ g_inv @ mom.P_cov) + 0.5 * float(
        np.einsum("AB,Ai,Bj,ij->", Jt, mom.P_int, mom.P_int, g_inv)
    )
    comoving = 0.5 / m * float(mom.Phat @ Gt @ mom.Phat) + 0.5 * float(
        np.einsum("AB,AC,BD,CD->", Jt, mom.SigmaHat, mom.SigmaHat, Gt)
    )
    cof = state.coframe()
    Jt_spatial = cof.T @ Jt @ cof  # Jt[e]_kl = e^A_k e^B_l Jt_AB
    spatial = 0.5 / m * float(mom.P_cov @ g_inv @ mom.P_cov) + 0.5 * float(
        np.einsum("kl,ki,lj,ij->", Jt_spatial, mom.Sigma, mom.Sigma, g_inv)
    )
    return {"momentum": momentum, "comoving": comoving, "spatial": spatial}


def total_energy(
    state: BodyState,
    inertia: InertiaModel,
    potential: Optional[PotentialModel],
    model: ManifoldModel,
) -> float:
    if state.is_velocity:
        t = kinetic_energy(state, inertia, model)
    else:
        t = kinetic_hamiltonian(state, inertia, model)
    u = potential.value(state.x, state.e) if potential is not None else 0.0
    return t + u


# ---------------------------------------------------------------------------
# decomposition-based evaluators
# ---------------------------------------------------------------------------


def two_polar_rates(state: BodyState, field: FrameField, model: ManifoldModel):
    """Decomposition factors and their rates along the motion.

    Returns (dec, Ddot, chi_rl, tht_rl, drive) where chi_rl = U^-1 dU/dt,
    tht_rl = V^-1 dV/dt, Ddot = dD/dt, and drive = Gamma^A_BC vE^C is the
    frame-induced rate in E-axes; all from L = E^-1 e and its product-rule
    time derivative (no numerical differentiation along trajectories).
    """
    if not state.is_velocity:
        raise ValueError("two-polar rates need a velocity-fibre state")
    fib = state.fibre
    Ecof = field.coframe(state.x)
    L = relative_configuration(state.e, field, state.x)
    Edot = field.frame_time_derivative(state.x, fib.v)
    Ldot = -Ecof @ Edot @ Ecof @ state.e + Ecof @ fib.edot

    dec = decompose(L)
    d = np.diag(dec.D)
    n = L.shape[0]
    M = dec.U.T @ Ldot @ dec.V
    Ddot = np.diag(np.diag(M))
    chi_rl = np.zeros((n, n))
    tht_rl = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            det = d[b] ** 2 - d[a] ** 2
            if abs(det) < 1e-12 * max(1.0, d[a] ** 2):
                raise DegenerateDeformationError(
                    "two-polar rates undefined at equal stretches"
                )
            # M_ab = chi_ab d_b - d_a tht_ab ; M_ba = -chi_ab d_a + d_b tht_ab
            chi = (d[b] * M[a, b] + d[a] * M[b, a]) / det
            tht = (d[a] * M[a, b] + d[b] * M[b, a]) / det
            chi_rl[a, b], chi_rl[b, a] = chi, -chi
            tht_rl[a, b], tht_rl[b, a] = tht, -tht

    gnh = nonholonomic_coeffs(field, model, state.x)
    vE = Ecof @ fib.v
    drive = np.einsum("FDC,C->FD", gnh, vE)
    return dec, Ddot, chi_rl, tht_rl, drive


def two_polar_kinetic(
    state: BodyState,
    inertia: InertiaModel,
    field: FrameField,
    model: ManifoldModel,
    form: str = "auto",
) -> float:
    """Internal kinetic energy from the decomposition variables.

    ``form`` selects the polar evaluator ("polar", valid for any J), the
    doubly isotropic two-polar evaluator ("isotropic", J = I 1), or picks
    automatically.
    """
    dec, Ddot, chi_rl, tht_rl, drive = two_polar_rates(state, field, model)
    iso = inertia.isotropy_scalar
    if form == "auto":
        form = "isotropic" if iso is not None else "polar"

    if form == "isotropic":
        if iso is None:
            raise ValueError("isotropic two-polar form needs J = I * identity")
        chi = dec.U.T @ drive @ dec.U + chi_rl
        tht = tht_rl
        D = dec.D
        return float(
            iso
            * (
                -0.5 * np.trace(D @ D @ chi @ chi)
                - 0.5 * np.trace(D @ D @ tht @ tht)
                + np.trace(D @ chi @ D @ tht)
                + 0.5 * np.trace(Ddot @ Ddot)
            )
        )

    if form != "polar":
        raise ValueError(f"unknown two-polar form {form!r}")
    S = dec.Sym
    omega = dec.O.T @ drive @ dec.O + dec.V @ (chi_rl - tht_rl) @ dec.V.T
    Sdot = dec.V @ (tht_rl @ dec.D + Ddot - dec.D @ tht_rl) @ dec.V.T
    J = inertia.J
    return float(
        -0.5 * np.trace(S @ J @ S @ omega @ omega)
        + np.trace(S @ J @ Sdot @ omega)
        + 0.5 * np.trace(J @ Sdot @ Sdot)
    )


def alt_kinetic_energies(
    state: BodyState,
    inertia_constants,
    model: ManifoldModel,
    eta: Optional[np.ndarray] = None,
) -> dict:
    """The alternative kinetic energy forms built from C, eta or G alone.

    ``inertia_constants`` is (m, I, A, B).  Returns the three energies:

      "cauchy"            (m/2) C_ij v^i v^j + (1/2) C_ij V^i_A V^j_B J^AB
                          with J^AB = I eta^AB
      "affine-spatial"    (m/2) eta vhat vhat + (I/2) eta eta^-1 OmHat OmHat
                          + (A/2) Tr(OmHat^2) + (B/2) Tr(OmHat)^2
      "metric-spatial"    same with G, Gt in place of eta, eta^-1
    """
    m, I, A, B = inertia_constants
    n = state.dim
    eta = np.eye(n) if eta is None else np.asarray(eta)
    eta_inv = np.linalg.inv(eta)
    v = state.fibre.v
    V = internal_velocity(state, model)
    Omega, OmegaHat = affine_velocity(state, model)
    vhat = comoving_velocity(state)
    G, C, Gt, Ct, _ = deformation(state, model, eta)

    J_iso = I * eta_inv  # J^AB = I eta^AB
    cauchy = 0.5 * m * float(v @ C @ v) + 0.5 * float(
        np.einsum("ij,iA,jB,AB->", C, V, V, J_iso)
    )
    affine_spatial = (
        0.5 * m * float(vhat @ eta @ vhat)
        + 0.5 * I * float(np.einsum("KL,MN,KM,LN->", eta, eta_inv, OmegaHat, OmegaHat))
        + 0.5 * A * float(np.trace(OmegaHat @ OmegaHat))
        + 0.5 * B * float(np.trace(OmegaHat)) ** 2
    )
    metric_spatial = (
        0.5 * m * float(vhat @ G @ vhat)
        + 0.5 * I * float(np.einsum("KL,MN,KM,LN->", G, Gt, OmegaHat, OmegaHat))
        + 0.5 * A * float(np.trace(OmegaHat @ OmegaHat))
        + 0.5 * B * float(np.trace(OmegaHat)) ** 2
    )
    return {
        "cauchy": cauchy,
        "affine-spatial": affine_spatial,
        "metric-spatial": metric_spatial,
        "Omega": Omega,
        "OmegaHat": OmegaHat,
    }
