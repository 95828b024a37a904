"""Inertia, potential energy models, and generalized force snapshots.

Potential-derived forces follow the horizontal-derivative convention

    N^i_k = -e^i_A dU/de^k_A
    F_k   = -dU/dx^k + Gamma^a_bk e^b_B dU/de^a_B
          = -dU/dx^k - N^a_b Gamma^b_ak

so F is the covariant exterior derivative of -U projected on translations.

Built-in potential families (the scenario-config vocabulary):

    "none"            U = 0
    "radial-det"      U = gamma * R^2 * det g^ij  (= gamma / sin^2(r/R) on the
                      sphere, gamma / sinh^2(r/R) on the pseudosphere)
    "separable-xy"    radial part plus A/x^2 + B/y^2 + C (x^2 + y^2) in the
                      deformation-plane coordinates x = (lam - mu)/sqrt(2),
                      y = (lam + mu)/sqrt(2) of the two-polar stretches
    "separable-polar" radial part plus gamma_tilde/sig + gamma_hat
                      cot^2(2 eps)/sig^2 in polar deformation coordinates
                      x = sig sin(eps), y = sig cos(eps)
    "custom-table"    radial spline through user-supplied (r, V) samples

Deformation-plane coordinates are recovered algebraically from
L = E(x)^-1 e: with t = tr(L^T L) and d = det L,

    x = sqrt((t - 2 d)/2),   y = sqrt((t + 2 d)/2),

which makes the e- and x-gradients analytic (no finite differences in the
force path).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..errors import DegenerateDeformationError, SingularInertiaError
from ..frames import FrameField
from ..geometry import ManifoldModel
from ..kinematics import BodyState, affine_velocity

__all__ = [
    "InertiaModel",
    "PotentialModel",
    "ForceSnapshot",
    "forces_from_potential",
    "zero_potential",
    "radial_det_potential",
    "separable_xy_potential",
    "separable_polar_potential",
    "custom_table_potential",
    "make_potential",
    "deformation_coordinates",
    "viscous_damping",
]


@dataclass(frozen=True)
class InertiaModel:
    """Mass m and micromaterial inertia J^AB with its matrix inverse."""

    m: float
    J: np.ndarray
    Jinv: np.ndarray = field(init=False)

    def __post_init__(self):
        J = np.asarray(self.J, dtype=float)
        if np.ndim(J) == 0:
            J = float(J) * np.eye(2)
        object.__setattr__(self, "J", J)
        if self.m <= 0:
            raise SingularInertiaError("mass must be positive")
        if not np.allclose(J, J.T, atol=1e-12):
            raise SingularInertiaError("inertia tensor must be symmetric")
        if np.any(np.linalg.eigvalsh(J) <= 0):
            raise SingularInertiaError("inertia tensor must be positive definite")
        # matrix inverse, not the eta-lowered tensor
        object.__setattr__(self, "Jinv", np.linalg.inv(J))

    @staticmethod
    def isotropic(m: float, scalar: float, dim: int = 2) -> "InertiaModel":
        return InertiaModel(m=m, J=scalar * np.eye(dim))

    @property
    def isotropy_scalar(self) -> Optional[float]:
        """The scalar I when J = I * identity, else None."""
        n = self.J.shape[0]
        i0 = self.J[0, 0]
        if np.allclose(self.J, i0 * np.eye(n), rtol=0, atol=1e-13 * max(1.0, abs(i0))):
            return float(i0)
        return None


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PotentialModel:
    """Scalar potential U(x, e) with analytic partials.

    ``value(x, e)`` returns U; ``gradients(x, e)`` returns
    (dU/dx^k, dU/de^i_A) with the e-gradient indexed [i, A].
    """

    name: str
    value_fn: Callable
    gradients_fn: Callable
    spatially_isotropic: bool = False
    doubly_isotropic: bool = False

    def value(self, x, e) -> float:
        return float(self.value_fn(np.asarray(x), np.asarray(e)))

    def gradients(self, x, e):
        dU_dx, dU_de = self.gradients_fn(np.asarray(x), np.asarray(e))
        return np.asarray(dU_dx, dtype=float), np.asarray(dU_de, dtype=float)


def zero_potential(dim: int = 2) -> PotentialModel:
    z = np.zeros(dim)
    ze = np.zeros((dim, dim))
    return PotentialModel(
        name="none",
        value_fn=lambda x, e: 0.0,
        gradients_fn=lambda x, e: (z, ze),
        spatially_isotropic=True,
        doubly_isotropic=True,
    )


def _det_ginv_and_grad(model: ManifoldModel, x):
    """det g^ij and its x-gradient via Jacobi's formula."""
    g = model.metric(x)
    g_inv = np.linalg.inv(g)
    dg = model.metric_partials(x)
    det_ginv = 1.0 / np.linalg.det(g)
    # d_k det(g^-1) = -det(g^-1) tr(g^-1 d_k g)
    grad = -det_ginv * np.einsum("ij,jik->k", g_inv, dg)
    return det_ginv, grad


def radial_det_potential(model: ManifoldModel, gamma: float, radius: float) -> PotentialModel:
    """U = gamma * R^2 * det g^ij; purely positional, isotropic in e."""
    scale = gamma * radius**2

    def value(x, e):
        det_ginv, _ = _det_ginv_and_grad(model, x)
        return scale * det_ginv

    def gradients(x, e):
        _, grad = _det_ginv_and_grad(model, x)
        n = model.dim
        return scale * grad, np.zeros((n, n))

    return PotentialModel(
        name="radial-det",
        value_fn=value,
        gradients_fn=gradients,
        spatially_isotropic=True,
        doubly_isotropic=True,
    )


def deformation_coordinates(L: np.ndarray):
    """(x, y) deformation-plane coordinates of a 2x2 configuration matrix.

    x = (lam - mu)/sqrt(2) >= 0 and y = (lam + mu)/sqrt(2) where lam >= mu > 0
    are the singular values of L; algebraic in tr(L^T L) and det L.
    """
    L = np.asarray(L)
    if L.shape != (2, 2):
        raise DegenerateDeformationError("deformation-plane coordinates need n = 2")
    t = float(np.trace(L.T @ L))
    d = float(np.linalg.det(L))
    if d <= 0:
        raise DegenerateDeformationError("det L must be positive")
    xsq = max((t - 2.0 * d) / 2.0, 0.0)
    ysq = (t + 2.0 * d) / 2.0
    return np.sqrt(xsq), np.sqrt(ysq)


def _deformation_grads(L: np.ndarray):
    """(x, y, dx/dL, dy/dL); raises near the lam = mu and det L = 0 edges."""
    x, y = deformation_coordinates(L)
    d = float(np.linalg.det(L))
    Linv_T = np.linalg.inv(L).T
    if x < 1e-12 or y < 1e-12:
        raise DegenerateDeformationError(
            f"deformation coordinates degenerate: x={x:.3e}, y={y:.3e}"
        )
    dx_dL = (L - d * Linv_T) / (2.0 * x)
    dy_dL = (L + d * Linv_T) / (2.0 * y)
    return x, y, dx_dL, dy_dL


def _deformation_potential(
    model: ManifoldModel,
    frame: FrameField,
    radial: PotentialModel,
    plane_value: Callable[[float, float], float],
    plane_grad: Callable[[float, float], tuple],
    name: str,
) -> PotentialModel:
    """Compose a radial potential with a deformation-plane potential V(x_d, y_d)."""

    def _parts(x, e):
        Ecof = frame.coframe(x)
        L = Ecof @ e
        xd, yd, dx_dL, dy_dL = _deformation_grads(L)
        dVx, dVy = plane_grad(xd, yd)
        W = dVx * dx_dL + dVy * dy_dL  # dV/dL^B_A
        return Ecof, L, xd, yd, W

    def value(x, e):
        Ecof = frame.coframe(x)
        L = Ecof @ e
        xd, yd = deformation_coordinates(L)
        return radial.value(x, e) + plane_value(xd, yd)

    def gradients(x, e):
        Ecof, L, xd, yd, W = _parts(x, e)
        # dU/de^j_C = W_BA * Ecof^B_j delta^C_A
        dU_de = (Ecof.T @ W)
        # dL/dx^k = d_k(E^-1) e = -E^-1 (d_k E) L
        dE = frame.frame_partials(x)
        dL_dx = -np.einsum("Bi,iCk,CA->BAk", Ecof, dE, L)
        dU_dx_def = np.einsum("BA,BAk->k", W, dL_dx)
        dU_dx_rad, _ = radial.gradients(x, e)
        return dU_dx_rad + dU_dx_def, dU_de

    # x_d, y_d are symmetric functions of the singular values of L, hence of
    # the deformation invariants: isotropic on both sides.
    return PotentialModel(
        name=name,
        value_fn=value,
        gradients_fn=gradients,
        spatially_isotropic=True,
        doubly_isotropic=True,
    )


def separable_xy_potential(
    model: ManifoldModel,
    frame: FrameField,
    radius: float,
    gamma: float = 0.0,
    A: float = 0.0,
    B: float = 0.0,
    C: float = 0.0,
    perturbation: float = 0.0,
) -> PotentialModel:
    """Radial part plus A/x^2 + B/y^2 + C (x^2 + y^2) in deformation coordinates.

    ``perturbation`` adds kappa * x^2 y^2, which destroys separability; it is
    the negative control for the separation-constant conservation tests.
    """
    radial = radial_det_potential(model, gamma, radius)

    def plane_value(xd, yd):
        base = A / xd**2 + B / yd**2 + C * (xd**2 + yd**2)
        return base + perturbation * xd**2 * yd**2

    def plane_grad(xd, yd):
        dVx = -2.0 * A / xd**3 + 2.0 * C * xd + 2.0 * perturbation * xd * yd**2
        dVy = -2.0 * B / yd**3 + 2.0 * C * yd + 2.0 * perturbation * yd * xd**2
        return dVx, dVy

    return _deformation_potential(
        model, frame, radial, plane_value, plane_grad, "separable-xy"
    )


def separable_polar_potential(
    model: ManifoldModel,
    frame: FrameField,
    radius: float,
    gamma: float = 0.0,
    gamma_hat: float = 0.0,
    gamma_tilde: float = 0.0,
) -> PotentialModel:
    """Radial part plus gamma_tilde/sig + gamma_hat cot^2(2 eps)/sig^2.

    Polar deformation coordinates: x = sig sin(eps), y = sig cos(eps); the
    angular term is the separable shape potential, the 1/sig term the radial
    one (attractive for gamma_tilde < 0).
    """
    radial = radial_det_potential(model, gamma, radius)

    def plane_value(xd, yd):
        sig2 = xd**2 + yd**2
        sig = np.sqrt(sig2)
        # cot(2 eps) = (y^2 - x^2) / (2 x y)
        cot2e = (yd**2 - xd**2) / (2.0 * xd * yd)
        return gamma_tilde / sig + gamma_hat * cot2e**2 / sig2

    def plane_grad(xd, yd):
        sig2 = xd**2 + yd**2
        sig = np.sqrt(sig2)
        cot2e = (yd**2 - xd**2) / (2.0 * xd * yd)
        dcot_dx = (-2.0 * xd * (2.0 * xd * yd) - (yd**2 - xd**2) * 2.0 * yd) / (
            2.0 * xd * yd
        ) ** 2
        dcot_dy = (2.0 * yd * (2.0 * xd * yd) - (yd**2 - xd**2) * 2.0 * xd) / (
            2.0 * xd * yd
        ) ** 2
        dVx = (
            -gamma_tilde * xd / sig**3
            + gamma_hat * (2.0 * cot2e * dcot_dx / sig2 - cot2e**2 * 2.0 * xd / sig2**2)
        )
        dVy = (
            -gamma_tilde * yd / sig**3
            + gamma_hat * (2.0 * cot2e * dcot_dy / sig2 - cot2e**2 * 2.0 * yd / sig2**2)
        )
        return dVx, dVy

    return _deformation_potential(
        model, frame, radial, plane_value, plane_grad, "separable-polar"
    )


def custom_table_potential(model: ManifoldModel, table) -> PotentialModel:
    """Radial potential interpolated through (r, V) samples with a cubic spline."""
    from scipy.interpolate import CubicSpline

    table = np.asarray(table, dtype=float)
    if table.ndim != 2 or table.shape[1] != 2 or table.shape[0] < 4:
        raise ValueError("custom-table potential needs >= 4 rows of (r, V)")
    spline = CubicSpline(table[:, 0], table[:, 1])
    dspline = spline.derivative()
    n = model.dim

    def value(x, e):
        return float(spline(x[0]))

    def gradients(x, e):
        grad = np.zeros(n)
        grad[0] = float(dspline(x[0]))
        return grad, np.zeros((n, n))

    return PotentialModel(
        name="custom-table",
        value_fn=value,
        gradients_fn=gradients,
        spatially_isotropic=True,
        doubly_isotropic=True,
    )


def make_potential(
    family: str,
    model: ManifoldModel,
    frame: Optional[FrameField],
    radius: float,
    params: dict,
) -> PotentialModel:
    """Build a potential from the scenario-config vocabulary."""
    if family == "none":
        return zero_potential(model.dim)
    if family == "radial-det":
        return radial_det_potential(model, params.get("gamma", 0.0), radius)
    if family == "separable-xy":
        return separable_xy_potential(
            model,
            frame,
            radius,
            gamma=params.get("gamma", 0.0),
            A=params.get("A", 0.0),
            B=params.get("B", 0.0),
            C=params.get("C", 0.0),
            perturbation=params.get("perturbation", 0.0),
        )
    if family == "separable-polar":
        return separable_polar_potential(
            model,
            frame,
            radius,
            gamma=params.get("gamma", 0.0),
            gamma_hat=params.get("gamma_hat", 0.0),
            gamma_tilde=params.get("gamma_tilde", 0.0),
        )
    if family == "custom-table":
        return custom_table_potential(model, params["table"])
    raise ValueError(f"unknown potential family {family!r}")


# ---------------------------------------------------------------------------
# forces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ForceSnapshot:
    """Translational force and hyperforce at a state.

    F_cov[k] = F_k, F_vec[i] = g^ik F_k, N_mixed[i, j] = N^i_j,
    N_uu[i, j] = N^ij, torque[i, j] = N^ij - N^ji.
    """

    F_cov: np.ndarray
    F_vec: np.ndarray
    N_mixed: np.ndarray
    N_uu: np.ndarray
    torque: np.ndarray

    @staticmethod
    def zero(dim: int) -> "ForceSnapshot":
        z, zz = np.zeros(dim), np.zeros((dim, dim))
        return ForceSnapshot(z, z, zz, zz, zz)

    @staticmethod
    def from_parts(F_cov, N_uu, model: ManifoldModel, x) -> "ForceSnapshot":
        g = model.metric(x)
        g_inv = np.linalg.inv(g)
        F_cov = np.asarray(F_cov, dtype=float)
        N_uu = np.asarray(N_uu, dtype=float)
        return ForceSnapshot(
            F_cov=F_cov,
            F_vec=g_inv @ F_cov,
            N_mixed=N_uu @ g,
            N_uu=N_uu,
            torque=N_uu - N_uu.T,
        )

    def plus(self, other: "ForceSnapshot") -> "ForceSnapshot":
        return ForceSnapshot(
            F_cov=self.F_cov + other.F_cov,
            F_vec=self.F_vec + other.F_vec,
            N_mixed=self.N_mixed + other.N_mixed,
            N_uu=self.N_uu + other.N_uu,
            torque=self.torque + other.torque,
        )


def forces_from_potential(
    pot: PotentialModel, state: BodyState, model: ManifoldModel
) -> ForceSnapshot:
    """Potential force and hyperforce:

    N^i_k = -e^i_A dU/de^k_A and F_k = -dU/dx^k + Gamma^a_bk e^b_B dU/de^a_B.
    """
    dU_dx, dU_de = pot.gradients(state.x, state.e)
    gamma = model.connection(state.x)
    g_inv = model.metric_inverse(state.x)
    N_mixed = -state.e @ dU_de.T  # N^i_k = -e^i_A dU/de^k_A
    F_cov = -dU_dx + np.einsum("abk,bB,aB->k", gamma, state.e, dU_de)
    N_uu = N_mixed @ g_inv
    return ForceSnapshot(
        F_cov=F_cov,
        F_vec=g_inv @ F_cov,
        N_mixed=N_mixed,
        N_uu=N_uu,
        torque=N_uu - N_uu.T,
    )


def viscous_damping(c_translational: float = 0.0, c_internal: float = 0.0):
    """Linear viscous force callback.

    F_k = -c_tr g_kj v^j and N^ij = -c_int g^ik Omega^j_k (the g-adjoint of
    the affine velocity), so the dissipated power is
    -c_tr |v|^2_g - c_int |Omega|^2_g <= 0.
    """

    def extra(state: BodyState, model: ManifoldModel) -> ForceSnapshot:
        g = model.metric(state.x)
        F_cov = -c_translational * g @ state.fibre.v
        Omega, _ = affine_velocity(state, model)
        N_uu = -c_internal * np.linalg.inv(g) @ Omega.T
        return ForceSnapshot.from_parts(F_cov, N_uu, model, state.x)

    return extra
