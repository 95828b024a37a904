"""Assemble runnable scenario bundles from validated configurations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .analytic2d import Scenario2D, SeparationConstants
from .config import ScenarioConfig
from .dynamics.models import InertiaModel, PotentialModel, make_potential, viscous_damping
from .errors import ValidationError
from .frames import FrameField, make_frame
from .geometry import ManifoldModel, make_manifold, vector_torsion
from .integrate import IntegratorConfig
from .kinematics import BodyState, Momentum, Velocity

__all__ = ["ScenarioBundle", "build_bundle"]


@dataclass
class ScenarioBundle:
    """Everything needed to run and analyze one configured scenario."""

    name: str
    config: ScenarioConfig
    model: ManifoldModel
    frame: FrameField
    inertia: InertiaModel
    potential: Optional[PotentialModel]
    initial: BodyState
    integrator: IntegratorConfig
    extra_forces: Optional[Callable] = None
    analytic: Optional[Scenario2D] = None

    def separation_constants(self) -> Optional[SeparationConstants]:
        v = self.config.get
        if v("E") is None:
            return None
        return SeparationConstants(
            E=float(v("E")),
            Cx=float(v("Cx") or 0.0),
            Cy=float(v("Cy") or 0.0),
            l=float(v("l") or 0.0),
            Calpha=float(v("Calpha") or 0.0),
            Cbeta=float(v("Cbeta") or 0.0),
            Asep=None if v("Asep") is None else float(v("Asep")),
            Cdef=None if v("Cdef") is None else float(v("Cdef")),
        )


def _analytic_scenario(cfg: ScenarioConfig) -> Optional[Scenario2D]:
    if cfg.get("manifold") not in ("sphere", "pseudosphere"):
        return None
    if cfg.get("torsion") != "none":
        return None  # the integrable models assume the Levi-Civita connection
    J = cfg.get("J")
    if not isinstance(J, (int, float)):
        arr = np.asarray(J, dtype=float)
        if not np.allclose(arr, arr[0, 0] * np.eye(arr.shape[0])):
            return None
        J = float(arr[0, 0])
    family = cfg.get("potential")
    params = cfg.potential_params()
    deformation = {"separable-xy": "xy", "separable-polar": "polar"}.get(family, "none")
    return Scenario2D(
        space=cfg.get("manifold"),
        R=float(cfg.get("radius")),
        m=float(cfg.get("m")),
        J=float(J),
        deformation_family=deformation,
        gamma=float(params.get("gamma", 0.0)),
        A=float(params.get("A", 0.0)),
        B=float(params.get("B", 0.0)),
        C=float(params.get("C", 0.0)),
        gamma_hat=float(params.get("gamma_hat", 0.0)),
        gamma_tilde=float(params.get("gamma_tilde", 0.0)),
    )


def build_bundle(cfg: ScenarioConfig) -> ScenarioBundle:
    """Construct models and the initial state from a validated config."""
    n = 2 if cfg.get("manifold") != "flatN" else int(cfg.get("dimension"))
    model = make_manifold(
        cfg.get("manifold"), radius=float(cfg.get("radius")), dimension=n
    )
    if cfg.get("torsion") == "vector":
        model = vector_torsion(model, np.asarray(cfg.get("torsion_vector"), dtype=float))
    frame = make_frame(cfg.get("frame"), model)

    J = cfg.get("J")
    J = float(J) * np.eye(n) if isinstance(J, (int, float)) else np.asarray(J, dtype=float)
    inertia = InertiaModel(m=float(cfg.get("m")), J=J)

    potential = None
    if cfg.get("potential") != "none":
        potential = make_potential(
            cfg.get("potential"), model, frame, float(cfg.get("radius")), cfg.potential_params()
        )

    analytic = _analytic_scenario(cfg)
    if cfg.get("q0") is not None:
        from .analytic2d import state_from_coords

        if analytic is None:
            raise ValidationError(["q0: six-coordinate initialization needs an isotropic 2D scenario"])
        qdot0 = cfg.get("qdot0")
        initial = state_from_coords(
            analytic,
            np.asarray(cfg.get("q0"), dtype=float),
            qdot=np.zeros(6) if qdot0 is None else np.asarray(qdot0, dtype=float),
        )
    else:
        coords0 = cfg.get("coords0")
        if coords0 is None:
            raise ValidationError(["coords0: an initial position is required to run"])
        x0 = np.asarray(coords0, dtype=float)

        e0 = cfg.get("e0")
        e0 = frame.frame(x0).copy() if e0 == "frame" else np.asarray(e0, dtype=float)

        if cfg.get("p0") is not None or cfg.get("P0") is not None:
            p0 = np.asarray(cfg.get("p0") or np.zeros(n), dtype=float)
            P0 = np.asarray(
                cfg.get("P0") if cfg.get("P0") is not None else np.zeros((n, n)), dtype=float
            )
            initial = BodyState(x0, e0, Momentum(p0, P0))
        else:
            v0 = np.asarray(
                cfg.get("v0") if cfg.get("v0") is not None else np.zeros(n), dtype=float
            )
            edot0 = np.asarray(
                cfg.get("edot0") if cfg.get("edot0") is not None else np.zeros((n, n)),
                dtype=float,
            )
            if cfg.get("spin0") is not None:
                # co-moving angular rate about the body axes: V = e (w eps)
                w = float(cfg.get("spin0"))
                eps = np.array([[0.0, -1.0], [1.0, 0.0]])
                gamma = model.connection(x0)
                edot0 = e0 @ (w * eps) - np.einsum("ijk,jA,k->iA", gamma, e0, v0)
            initial = BodyState(x0, e0, Velocity(v0, edot0))

    integrator = IntegratorConfig(
        method=cfg.get("method"),
        dt=float(cfg.get("dt")),
        t_end=float(cfg.get("t_end")),
        stride=int(cfg.get("stride")),
        constraint=cfg.get("constraint"),
        constraint_tol=float(cfg.get("constraint_tol")),
        retraction=bool(cfg.get("retraction")),
    )

    extra = None
    c_tr = float(cfg.get("damping_translational"))
    c_int = float(cfg.get("damping_internal"))
    if c_tr != 0.0 or c_int != 0.0:
        extra = viscous_damping(c_tr, c_int)

    return ScenarioBundle(
        name=cfg.get("name"),
        config=cfg,
        model=model,
        frame=frame,
        inertia=inertia,
        potential=potential,
        initial=initial,
        integrator=integrator,
        extra_forces=extra,
        analytic=analytic,
    )
