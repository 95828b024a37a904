"""Named per-sample observables recorded along trajectories.

All six-coordinate momenta are evaluated through the rate-free canonical
pairings, so they remain defined on rigid (equal-stretch) states.
"""

from __future__ import annotations

import math
from typing import Callable, Dict, Iterable, Optional

import numpy as np

from .analytic2d import momenta_from_state
from .errors import ValidationError
from .kinematics import legendre, momentum_snapshot, spin_and_vorticity

__all__ = ["build_observables", "default_observable_names"]


def default_observable_names(bundle) -> list:
    names = []
    if bundle.model.name.startswith("flat"):
        names += [f"p_{i + 1}" for i in range(bundle.model.dim)]
    elif bundle.model.dim == 2:
        names.append("spin")
    if bundle.analytic is not None:
        names.append("p_phi")
        family = bundle.analytic.deformation_family
        if family == "xy":
            names += ["p_alpha", "p_beta", "C_x", "C_y"]
        elif family == "polar":
            names += ["p_alpha", "p_beta", "A_sep", "C_def"]
    return names


def build_observables(names: Optional[Iterable[str]], bundle) -> Dict[str, Callable]:
    """Resolve observable names against a scenario bundle."""
    if names is None:
        names = default_observable_names(bundle)
    out: Dict[str, Callable] = {}
    scn = bundle.analytic
    model, inertia = bundle.model, bundle.inertia

    def qp(state):
        return momenta_from_state(scn, state, inertia_J=inertia.J)

    def need_scn(name):
        if scn is None:
            raise ValidationError(
                [f"observables: {name!r} needs an integrable 2D scenario"]
            )

    for name in names:
        if name.startswith("p_") and name[2:].isdigit():
            i = int(name[2:]) - 1

            def lin_mom(t, state, i=i):
                mom = momentum_snapshot(
                    legendre(state, inertia.J, inertia.m, model), model
                )
                return mom.P_cov[i]

            out[name] = lin_mom
        elif name == "spin":

            def spin_scalar(t, state):
                mom_state = legendre(state, inertia.J, inertia.m, model)
                mom = momentum_snapshot(mom_state, model)
                S, _ = spin_and_vorticity(mom, mom_state, model)
                g = model.metric(state.x)
                # the single component of the 2D spin bivector, as a scalar
                S_uu = S @ np.linalg.inv(g)
                return 0.5 * (S_uu[0, 1] - S_uu[1, 0]) * math.sqrt(np.linalg.det(g))

            out[name] = spin_scalar
        elif name == "p_phi":
            need_scn(name)
            out[name] = lambda t, state: qp(state)[1][1]
        elif name == "p_r":
            need_scn(name)
            out[name] = lambda t, state: qp(state)[1][0]
        elif name == "p_gamma":
            need_scn(name)
            out[name] = lambda t, state: qp(state)[1][2]
        elif name == "p_delta":
            need_scn(name)
            out[name] = lambda t, state: qp(state)[1][3]
        elif name == "p_alpha":
            need_scn(name)
            out[name] = lambda t, state: (lambda p: p[2] + p[3])(qp(state)[1])
        elif name == "p_beta":
            need_scn(name)
            out[name] = lambda t, state: (lambda p: p[2] - p[3])(qp(state)[1])
        elif name == "C_x":
            need_scn(name)

            def c_x(t, state):
                q, p = qp(state)
                return (
                    p[4] ** 2 / (2 * scn.J)
                    + p[2] ** 2 / (2 * scn.J * q[4] ** 2)
                    + scn.V_x(q[4])
                )

            out[name] = c_x
        elif name == "C_y":
            need_scn(name)

            def c_y(t, state):
                q, p = qp(state)
                return (
                    p[5] ** 2 / (2 * scn.J)
                    + p[3] ** 2 / (2 * scn.J * q[5] ** 2)
                    + scn.V_y(q[5])
                )

            out[name] = c_y
        elif name in ("A_sep", "C_def"):
            need_scn(name)

            def polar_consts(t, state, which=name):
                q, p = qp(state)
                x, y = q[4], q[5]
                p_alf, p_bet = p[2] + p[3], p[2] - p[3]
                sig = math.hypot(x, y)
                eps = math.atan2(x, y)
                se, ce = math.sin(eps), math.cos(eps)
                p_sig = se * p[4] + ce * p[5]
                p_eps = sig * (ce * p[4] - se * p[5])
                num = p_alf**2 + 2 * math.cos(2 * eps) * p_alf * p_bet + p_bet**2
                a_sep = (
                    p_eps**2 / (2 * scn.J)
                    + num / (2 * scn.J * math.sin(2 * eps) ** 2)
                    + scn.V_polar_eps(eps)
                )
                if which == "A_sep":
                    return a_sep
                return p_sig**2 / (2 * scn.J) + a_sep / sig**2 + scn.V_polar_sig(sig)

            out[name] = polar_consts
        else:
            raise ValidationError([f"observables: unknown name {name!r}"])
    return out
