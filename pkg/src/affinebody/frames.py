"""Reference frame fields, non-holonomy, teleparallelism, relative configurations.

A frame field stores the legs as matrix columns, E[i, A] = E^i_A, so the
coframe is the matrix inverse, Ecof[A, i] = E^A_i.  On the 2D built-in
surfaces the "polar-orthonormal" field is

    E_(r) = d/dr,     E_(phi) = (1 / (R sin(r/R))) d/dphi      (sphere)
    E_(r) = d/dr,     E_(phi) = (1 / (R sinh(r/R))) d/dphi     (pseudosphere)

with the (r)-leg stored first.  Conventions pinned here:

    non-holonomy      [E_A, E_B] = Omega^C_AB E_C,   Om[C, A, B]
    teleparallel      Gtel^i_jk = E^i_A d_k E^A_j
    non-holonomic     Gamma^i_jk - Gtel^i_jk = E^i_A Gamma^A_BC E^B_j E^C_k
    relative config   e_A = E_B L^B_A,  L = E(x)^-1 e
    relative rates    Omega_rl = (dL/dt) L^-1,  OmegaHat_rl = L^-1 (dL/dt)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import SingularFrameError
from .geometry import ManifoldModel, _fd4

__all__ = [
    "FrameField",
    "coordinate_frame",
    "polar_orthonormal_frame",
    "make_frame",
    "nonholonomy_at",
    "teleparallel_connection_at",
    "teleparallel_torsion_at",
    "nonholonomic_coeffs",
    "relative_configuration",
    "relative_velocities",
]


@dataclass(frozen=True)
class FrameField:
    """Smooth field of reference frames over one chart."""

    name: str
    dim: int
    frame_fn: Callable[[np.ndarray], np.ndarray]
    frame_partials_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    orthonormal: bool = False
    fd_step: float = 1e-5

    def frame(self, x) -> np.ndarray:
        return np.asarray(self.frame_fn(np.asarray(x)))

    def coframe(self, x) -> np.ndarray:
        e = self.frame(x)
        try:
            return np.linalg.inv(e)
        except np.linalg.LinAlgError as exc:
            raise SingularFrameError(f"{self.name}: frame singular at {x}") from exc

    def frame_partials(self, x) -> np.ndarray:
        """dE[i, A, k] = d E^i_A / d x^k."""
        if self.frame_partials_fn is not None:
            return np.asarray(self.frame_partials_fn(np.asarray(x)))
        return _fd4(self.frame_fn, np.asarray(x), self.fd_step)

    def frame_time_derivative(self, x, v) -> np.ndarray:
        """dE^i_A/dt along a curve with velocity v, i.e. (d_k E^i_A) v^k."""
        return np.einsum("iAk,k->iA", self.frame_partials(x), np.asarray(v))


def coordinate_frame(dim: int) -> FrameField:
    """The holonomic chart frame, E^i_A = delta^i_A."""
    eye = np.eye(dim)
    zeros = np.zeros((dim, dim, dim))
    return FrameField(
        name="coordinate",
        dim=dim,
        frame_fn=lambda x: eye,
        frame_partials_fn=lambda x: zeros,
        orthonormal=False,
    )


def polar_orthonormal_frame(model: ManifoldModel) -> FrameField:
    """g-orthonormal frame adapted to the polar chart of the 2D built-ins."""
    if model.name.startswith("flat"):
        # The flat chart is Cartesian; the orthonormal frame is the chart frame.
        return FrameField(
            name="polar-orthonormal",
            dim=model.dim,
            frame_fn=lambda x, n=model.dim: np.eye(n),
            frame_partials_fn=lambda x, n=model.dim: np.zeros((n, n, n)),
            orthonormal=True,
        )
    if not (model.name.startswith("sphere") or model.name.startswith("pseudosphere")):
        raise ValueError(f"no polar-orthonormal frame for model {model.name!r}")

    # Both surfaces are handled by one evaluator: the phi-leg is normalized
    # against whatever g_phiphi the model reports, so user radii are respected.
    def frame(x):
        g = model.metric(x)
        out = np.zeros((2, 2), dtype=np.result_type(x, float))
        out[0, 0] = 1.0
        out[1, 1] = 1.0 / np.sqrt(g[1, 1])
        return out

    def frame_partials(x):
        g = model.metric(x)
        dg = model.metric_partials(x)
        out = np.zeros((2, 2, 2), dtype=np.result_type(x, float))
        # d/dr of g_phiphi^{-1/2}
        out[1, 1, 0] = -0.5 * dg[1, 1, 0] * g[1, 1] ** -1.5
        return out

    return FrameField(
        name="polar-orthonormal",
        dim=2,
        frame_fn=frame,
        frame_partials_fn=frame_partials,
        orthonormal=True,
    )


def make_frame(kind: str, model: ManifoldModel) -> FrameField:
    if kind == "coordinate":
        return coordinate_frame(model.dim)
    if kind == "polar-orthonormal":
        return polar_orthonormal_frame(model)
    raise ValueError(f"unknown frame kind {kind!r}")


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def nonholonomy_at(field: FrameField, x) -> np.ndarray:
    """Omega^C_AB from the Lie brackets of the legs, [E_A, E_B] = Omega^C_AB E_C."""
    e = field.frame(x)
    de = field.frame_partials(x)
    cof = field.coframe(x)
    # [E_A, E_B]^i = E^j_A d_j E^i_B - E^j_B d_j E^i_A
    bracket = np.einsum("jA,iBj->iAB", e, de) - np.einsum("jB,iAj->iAB", e, de)
    return np.einsum("Ci,iAB->CAB", cof, bracket)


def teleparallel_connection_at(field: FrameField, x) -> np.ndarray:
    """Gtel^i_jk = E^i_A d_k E^A_j, the connection making every leg parallel."""
    e = field.frame(x)
    de = field.frame_partials(x)
    cof = field.coframe(x)
    # d_k E^A_j from d_k E^i_A via d(E^-1) = -E^-1 dE E^-1
    dcof = -np.einsum("Ai,iBk,Bj->Ajk", cof, de, cof)
    return np.einsum("iA,Ajk->ijk", e, dcof)


def teleparallel_torsion_at(field: FrameField, x) -> np.ndarray:
    """S[E]^i_jk = E^i_A (d_k E^A_j - d_j E^A_k) / 2, torsion of the teleparallel connection."""
    gtel = teleparallel_connection_at(field, x)
    return 0.5 * (gtel - np.einsum("ikj->ijk", gtel))


def nonholonomic_coeffs(field: FrameField, model: ManifoldModel, x) -> np.ndarray:
    """Coefficients Gamma^A_BC of the model's connection in the frame E.

    Defined by nabla_{E_C} E_B = Gamma^A_BC E_A; equivalently
    Gamma^i_jk - Gtel^i_jk = E^i_A Gamma^A_BC E^B_j E^C_k, so the
    coefficients of the teleparallel connection in its own frame vanish.
    """
    e = field.frame(x)
    de = field.frame_partials(x)
    cof = field.coframe(x)
    gamma = model.connection(x)
    # nabla_k E^i_B = d_k E^i_B + Gamma^i_jk E^j_B, then project on E_A and E_C.
    nabla = np.einsum("iBk->iBk", de) + np.einsum("ijk,jB->iBk", gamma, e)
    return np.einsum("Ai,iBk,kC->ABC", cof, nabla, e)


def relative_configuration(e: np.ndarray, field: FrameField, x) -> np.ndarray:
    """L with e_A = E_B L^B_A, i.e. L = E(x)^-1 e."""
    e = np.asarray(e)
    if e.shape != (field.dim, field.dim):
        raise SingularFrameError(f"internal frame must be {field.dim}x{field.dim}")
    det = np.linalg.det(e)
    if not np.iscomplexobj(e) and det <= 0:
        raise SingularFrameError(f"internal frame has det {det:.3e} <= 0")
    return field.coframe(x) @ e


def relative_velocities(L: np.ndarray, Ldot: np.ndarray):
    """(Omega_rl, OmegaHat_rl) = ((dL/dt) L^-1, L^-1 (dL/dt))."""
    L = np.asarray(L)
    Ldot = np.asarray(Ldot)
    try:
        Linv = np.linalg.inv(L)
    except np.linalg.LinAlgError as exc:
        raise SingularFrameError("relative configuration L is singular") from exc
    return Ldot @ Linv, Linv @ Ldot
