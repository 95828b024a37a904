"""Poisson brackets of the canonical observable set, implemented twice.

The observables over the canonical coordinates z = (x^i, e^i_A, p_i, p^A_i):

    "x"         x^i
    "e"         e^i_A
    "P"         P_i      = p_i - e^j_A p^A_k Gamma^k_ji      (covariant momentum)
    "Pint"      P^A_i    = p^A_i
    "Sigma"     Sigma^i_j    = e^i_A p^A_j
    "SigmaHat"  SigmaHat^A_B = p^A_i e^i_B
    "Phat"      Phat_A   = P_i e^i_A

Route one: the closed forms, e.g.

    {P_i, P_j} = Sigma^k_l R^l_kij
    {P_i, P^A_j} = -P^A_k Gamma^k_ji          {P_i, e^j_A} = e^k_A Gamma^j_ki
    {Sigma^a_b, Sigma^i_j} = d^a_j Sigma^i_b - d^i_b Sigma^a_j
    {Phat_A, Phat_B} = SigmaHat^K_L R^L_KAB - 2 Phat_K S^K_AB
    {SigmaHat^A_B, Phat_C} = -Phat_B d^A_C
    {SigmaHat^A_B, SigmaHat^C_D} = d^C_B SigmaHat^A_D - d^A_D SigmaHat^C_B
    {Sigma^i_j, SigmaHat^A_B} = 0

with co-moving components R^L_KAB = e^L_l R^l_kab e^k_K e^a_A e^b_B and
S^K_AB = e^K_i S^i_jm e^j_A e^m_B.

Route two: analytic phase-space gradients of each observable contracted
through the canonical bracket

    {F, G} = dF/dx^i dG/dp_i - dF/dp_i dG/dx^i
             + dF/de^i_A dG/dp^A_i - dF/dp^A_i dG/de^i_A .

The two routes share only the connection coefficients; curvature and
torsion enter route one alone, which is what makes the comparison a real
consistency check on those tensors and their signs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import UnknownObservableError
from ..geometry import ManifoldModel
from ..kinematics import BodyState, Momentum
from .models import InertiaModel, PotentialModel

__all__ = [
    "PhasePoint",
    "OBSERVABLE_IDS",
    "observable_value",
    "observable_gradients",
    "canonical_bracket",
    "closed_form_bracket",
    "BracketTable",
    "bracket",
    "hamiltonian_observable",
    "bracket_with_hamiltonian",
    "jacobi_residual",
]

OBSERVABLE_IDS = ("x", "e", "P", "Pint", "Sigma", "SigmaHat", "Phat")


@dataclass(frozen=True)
class PhasePoint:
    """Canonical coordinates (x, e, p, q) with q[A, i] = p^A_i."""

    x: np.ndarray
    e: np.ndarray
    p: np.ndarray
    q: np.ndarray

    @staticmethod
    def from_state(state: BodyState) -> "PhasePoint":
        if state.is_velocity:
            raise ValueError("phase points are built from momentum-fibre states")
        return PhasePoint(state.x, state.e, state.fibre.p, state.fibre.P)

    def to_state(self) -> BodyState:
        return BodyState(self.x, self.e, Momentum(self.p, self.q))

    @property
    def dim(self) -> int:
        return self.x.shape[0]

    def flat(self) -> np.ndarray:
        return np.concatenate(
            [self.x, self.e.flatten(), self.p, self.q.flatten()]
        )

    @staticmethod
    def from_flat(vec: np.ndarray, n: int) -> "PhasePoint":
        k = n * n
        return PhasePoint(
            x=vec[:n],
            e=vec[n : n + k].reshape(n, n),
            p=vec[n + k : 2 * n + k],
            q=vec[2 * n + k :].reshape(n, n),
        )


def _check_id(fid: str):
    if fid not in OBSERVABLE_IDS:
        raise UnknownObservableError(
            f"{fid!r} is not in the canonical set {OBSERVABLE_IDS}"
        )


# ---------------------------------------------------------------------------
# observable values and analytic phase-space gradients
# ---------------------------------------------------------------------------


def observable_value(fid: str, z: PhasePoint, model: ManifoldModel) -> np.ndarray:
    _check_id(fid)
    if fid == "x":
        return z.x
    if fid == "e":
        return z.e
    if fid == "Pint":
        return z.q
    if fid == "Sigma":
        return z.e @ z.q
    if fid == "SigmaHat":
        return z.q @ z.e
    gamma = model.connection(z.x)
    P = z.p - np.einsum("jA,Ak,kji->i", z.e, z.q, gamma)
    if fid == "P":
        return P
    return P @ z.e  # Phat


def observable_gradients(fid: str, z: PhasePoint, model: ManifoldModel) -> dict:
    """Gradients w.r.t. (x, e, p, q); keys "dx", "de", "dp", "dq".

    Shapes are value_shape + coordinate_shape.  All formulas are analytic,
    using the model's connection and its coordinate partials.
    """
    _check_id(fid)
    n = z.dim
    dt = np.result_type(z.x, z.e, z.p, z.q, float)
    eye = np.eye(n, dtype=dt)

    def zero(*shape):
        return np.zeros(shape, dtype=dt)

    if fid == "x":
        return {"dx": eye, "de": zero(n, n, n), "dp": zero(n, n), "dq": zero(n, n, n)}
    if fid == "e":
        de = np.einsum("ij,AB->iAjB", eye, eye)
        return {
            "dx": zero(n, n, n),
            "de": de,
            "dp": zero(n, n, n),
            "dq": zero(n, n, n, n),
        }
    if fid == "Pint":
        dq = np.einsum("AB,ij->AiBj", eye, eye)
        return {
            "dx": zero(n, n, n),
            "de": zero(n, n, n, n),
            "dp": zero(n, n, n),
            "dq": dq,
        }
    if fid == "Sigma":
        # Sigma^i_j = e^i_A q^A_j
        de = np.einsum("ik,Bj->ijkB", eye, z.q)
        dq = np.einsum("iB,jk->ijBk", z.e, eye)
        return {"dx": zero(n, n, n), "de": de, "dp": zero(n, n, n), "dq": dq}
    if fid == "SigmaHat":
        # SigmaHat^A_B = q^A_i e^i_B
        de = np.einsum("Ak,BC->ABkC", z.q, eye)
        dq = np.einsum("AC,kB->ABCk", eye, z.e)
        return {"dx": zero(n, n, n), "de": de, "dp": zero(n, n, n), "dq": dq}

    gamma = model.connection(z.x)
    dgamma = model.connection_partials(z.x)
    # P_i = p_i - e^j_A q^A_k Gamma^k_ji
    dP_dx = -np.einsum("jA,Ak,kjim->im", z.e, z.q, dgamma)
    dP_de = -np.einsum("Ak,kji->ijA", z.q, gamma)  # d P_i / d e^j_A
    dP_dp = eye
    dP_dq = -np.einsum("jB,kji->iBk", z.e, gamma)  # d P_i / d q^B_k
    if fid == "P":
        return {"dx": dP_dx, "de": dP_de, "dp": dP_dp, "dq": dP_dq}

    # Phat_A = P_i e^i_A
    P = z.p - np.einsum("jA,Ak,kji->i", z.e, z.q, gamma)
    dF_dx = np.einsum("im,iA->Am", dP_dx, z.e)
    dF_de = np.einsum("ijB,iA->AjB", dP_de, z.e) + np.einsum("j,AB->AjB", P, eye)
    dF_dp = np.einsum("ij,iA->Aj", dP_dp, z.e)
    dF_dq = np.einsum("iBk,iA->ABk", dP_dq, z.e)
    return {"dx": dF_dx, "de": dF_de, "dp": dF_dp, "dq": dF_dq}


def _contract(gf: dict, gg: dict) -> np.ndarray:
    """Canonical bracket contraction of two gradient dictionaries."""
    fx, fe, fp, fq = gf["dx"], gf["de"], gf["dp"], gf["dq"]
    gx, ge, gp, gq = gg["dx"], gg["de"], gg["dp"], gg["dq"]
    # contract trailing coordinate axes; leading axes are the value shapes
    out = np.tensordot(fx, gp, axes=([-1], [-1]))
    out = out - np.tensordot(fp, gx, axes=([-1], [-1]))
    out = out + np.tensordot(fe, gq, axes=([-2, -1], [-1, -2]))
    out = out - np.tensordot(fq, ge, axes=([-2, -1], [-1, -2]))
    return out


def canonical_bracket(
    fid: str, gid: str, z: PhasePoint, model: ManifoldModel
) -> np.ndarray:
    """Brute-force bracket from analytic phase-space gradients."""
    gf = observable_gradients(fid, z, model)
    gg = observable_gradients(gid, z, model)
    return _contract(gf, gg)


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


def closed_form_bracket(
    fid: str, gid: str, z: PhasePoint, model: ManifoldModel
) -> np.ndarray:
    """The closed-form bracket table; result shape = f_shape + g_shape."""
    _check_id(fid)
    _check_id(gid)
    order = {k: i for i, k in enumerate(OBSERVABLE_IDS)}
    if order[fid] > order[gid]:
        fwd = closed_form_bracket(gid, fid, z, model)
        f_nd = np.ndim(observable_value(fid, z, model))
        g_nd = np.ndim(observable_value(gid, z, model))
        # {F,G} = -{G,F} with index groups swapped
        axes = tuple(range(g_nd, g_nd + f_nd)) + tuple(range(g_nd))
        return -np.transpose(fwd, axes)

    n = z.dim
    eye = np.eye(n)
    e = z.e
    q = z.q
    gamma = model.connection(z.x)

    def zeros_for(a, b):
        sa = observable_value(a, z, model).shape
        sb = observable_value(b, z, model).shape
        return np.zeros(sa + sb)

    pair = (fid, gid)
    if pair in {("x", "x"), ("x", "e"), ("x", "Pint"), ("x", "Sigma"), ("x", "SigmaHat"),
                ("e", "e"), ("Pint", "Pint"), ("P", "SigmaHat"), ("Sigma", "SigmaHat")}:
        return zeros_for(fid, gid)

    if pair == ("x", "P"):
        return eye.copy()
    if pair == ("x", "Phat"):
        return e.copy()
    if pair == ("e", "P"):
        # {e^i_A, P_j} = -e^k_A Gamma^i_kj
        return -np.einsum("kA,ikj->iAj", e, gamma)
    if pair == ("e", "Pint"):
        return np.einsum("ij,AB->iABj", eye, eye)
    if pair == ("e", "Sigma"):
        # {e^i_A, Sigma^k_j} = e^k_A d^i_j
        return np.einsum("kA,ij->iAkj", e, eye)
    if pair == ("e", "SigmaHat"):
        # {e^i_A, SigmaHat^B_C} = d^B_A e^i_C
        return np.einsum("BA,iC->iABC", eye, e)
    if pair == ("e", "Phat"):
        # {e^i_A, Phat_B} = -e^m_A Gamma^i_mk e^k_B
        return -np.einsum("mA,imk,kB->iAB", e, gamma, e)

    Sigma = e @ q
    P = observable_value("P", z, model)
    Phat = P @ e

    if pair == ("P", "P"):
        R = model.curvature(z.x)
        return np.einsum("kl,lkij->ij", Sigma, R)
    if pair == ("P", "Pint"):
        # {P_i, q^A_j} = -q^A_k Gamma^k_ji
        return -np.einsum("Ak,kji->iAj", q, gamma)
    if pair == ("P", "Sigma"):
        # {P_i, Sigma^k_j} = Sigma^l_j Gamma^k_li - Sigma^k_l Gamma^l_ji
        return np.einsum("lj,kli->ikj", Sigma, gamma) - np.einsum(
            "kl,lji->ikj", Sigma, gamma
        )
    if pair == ("P", "Phat"):
        R = model.curvature(z.x)
        return np.einsum("ml,lmik,kA->iA", Sigma, R, e) + np.einsum(
            "k,mA,kmi->iA", P, e, gamma
        )
    if pair == ("Pint", "Sigma"):
        # {q^A_i, Sigma^k_j} = -d^k_i q^A_j
        return -np.einsum("ki,Aj->Aikj", eye, q)
    if pair == ("Pint", "SigmaHat"):
        # {q^A_i, SigmaHat^B_C} = -q^B_i d^A_C
        return -np.einsum("Bi,AC->AiBC", q, eye)
    if pair == ("Pint", "Phat"):
        # {q^A_i, Phat_B} = q^A_m Gamma^m_ik e^k_B - P_i d^A_B
        return np.einsum("Am,mik,kB->AiB", q, gamma, e) - np.einsum(
            "i,AB->AiB", P, eye
        )
    if pair == ("Sigma", "Sigma"):
        return np.einsum("aj,ib->abij", eye, Sigma) - np.einsum(
            "ib,aj->abij", eye, Sigma
        )
    if pair == ("Sigma", "Phat"):
        # -{Phat_A, Sigma^i_j} with
        # {Phat_A, Sigma^i_j} = e^k_A Sigma^l_j Gamma^i_lk
        #                       - e^k_A Sigma^i_l Gamma^l_jk + P_j e^i_A
        fwd = (
            np.einsum("kA,lj,ilk->Aij", e, Sigma, gamma)
            - np.einsum("kA,il,ljk->Aij", e, Sigma, gamma)
            + np.einsum("j,iA->Aij", P, e)
        )
        return -np.transpose(fwd, (1, 2, 0))
    if pair == ("SigmaHat", "SigmaHat"):
        SigmaHat = q @ e
        return np.einsum("CB,AD->ABCD", eye, SigmaHat) - np.einsum(
            "AD,CB->ABCD", eye, SigmaHat
        )
    if pair == ("SigmaHat", "Phat"):
        return -np.einsum("B,AC->ABC", Phat, eye)
    if pair == ("Phat", "Phat"):
        R = model.curvature(z.x)
        S = model.torsion(z.x)
        cof = np.linalg.inv(e)
        R_com = np.einsum("Ll,lkab,kK,aA,bB->LKAB", cof, R, e, e, e)
        S_com = np.einsum("Ki,ijm,jA,mB->KAB", cof, S, e, e)
        SigmaHat = q @ e
        return np.einsum("KL,LKAB->AB", SigmaHat, R_com) - 2.0 * np.einsum(
            "K,KAB->AB", Phat, S_com
        )
    raise UnknownObservableError(f"no closed form registered for pair {pair}")


@dataclass(frozen=True)
class BracketTable:
    """Pairwise bracket evaluator bound to one model.

    ``closed`` evaluates the closed-form table, ``brute`` the
    canonical-coordinate chain-rule route; both return arrays shaped
    f_shape + g_shape.
    """

    model: ManifoldModel

    def closed(self, fid: str, gid: str, state_or_z) -> np.ndarray:
        z = self._z(state_or_z)
        return closed_form_bracket(fid, gid, z, self.model)

    def brute(self, fid: str, gid: str, state_or_z) -> np.ndarray:
        z = self._z(state_or_z)
        return canonical_bracket(fid, gid, z, self.model)

    def _z(self, state_or_z) -> PhasePoint:
        if isinstance(state_or_z, PhasePoint):
            return state_or_z
        return PhasePoint.from_state(state_or_z)


def bracket(fid: str, gid: str, state: BodyState, model: ManifoldModel) -> np.ndarray:
    """Closed-form bracket of two canonical observables at a momentum state."""
    return BracketTable(model).closed(fid, gid, state)


# ---------------------------------------------------------------------------
# Hamiltonian as an observable; Jacobi identity
# ---------------------------------------------------------------------------


def hamiltonian_observable(
    inertia: InertiaModel, potential: Optional[PotentialModel], model: ManifoldModel
):
    """H(z) and its analytic phase-space gradients as closures."""

    def value(z: PhasePoint) -> float:
        g_inv = model.metric_inverse(z.x)
        P = observable_value("P", z, model)
        t_tr = 0.5 / inertia.m * np.einsum("ij,i,j->", g_inv, P, P)
        t_int = 0.5 * np.einsum("AB,Ai,Bj,ij->", inertia.Jinv, z.q, z.q, g_inv)
        u = potential.value(z.x, z.e) if potential is not None else 0.0
        return float(t_tr + t_int + u)

    def gradients(z: PhasePoint) -> dict:
        n = z.dim
        g_inv = model.metric_inverse(z.x)
        dg = model.metric_partials(z.x)
        dginv = -np.einsum("ia,abk,bj->ijk", g_inv, dg, g_inv)
        P = observable_value("P", z, model)
        gP = observable_gradients("P", z, model)

        w = g_inv @ P / inertia.m            # dH/dP_i
        dx = 0.5 / inertia.m * np.einsum("ijk,i,j->k", dginv, P, P)
        dx = dx + 0.5 * np.einsum("AB,Ai,Bj,ijk->k", inertia.Jinv, z.q, z.q, dginv)
        dx = dx + np.einsum("i,ik->k", w, gP["dx"])
        de = np.einsum("i,ijB->jB", w, gP["de"])
        dp = np.einsum("i,ij->j", w, gP["dp"])
        dq = np.einsum("i,iBk->Bk", w, gP["dq"])
        dq = dq + np.einsum("AB,Ai,ij->Bj", inertia.Jinv, z.q, g_inv)
        if potential is not None:
            dU_dx, dU_de = potential.gradients(z.x, z.e)
            dx = dx + dU_dx
            de = de + dU_de
        return {"dx": dx, "de": de, "dp": dp, "dq": dq}

    return value, gradients


def bracket_with_hamiltonian(
    fid: str,
    z: PhasePoint,
    inertia: InertiaModel,
    potential: Optional[PotentialModel],
    model: ManifoldModel,
) -> np.ndarray:
    """{F, H} for a canonical observable F: the exact rate dF/dt along the flow."""
    _, h_grads = hamiltonian_observable(inertia, potential, model)
    gf = observable_gradients(fid, z, model)
    gh = h_grads(z)
    return _contract(gf, gh)


def jacobi_residual(
    triple, components, z: PhasePoint, model: ManifoldModel, step: float = 1e-20
) -> float:
    """|{F,{G,H}} + {G,{H,F}} + {H,{F,G}}| for scalar components of the set.

    Inner brackets are the analytic brute-force ones; the outer gradient of
    the inner bracket is taken by complex-step differentiation, so the
    residual is limited only by floating-point rounding.
    """
    (fid, f_idx), (gid, g_idx), (hid, h_idx) = zip(triple, components)

    def scalar_obs(aid, a_idx):
        def fn(zz: PhasePoint):
            return observable_value(aid, zz, model)[a_idx]

        return fn

    def scalar_bracket(aid, a_idx, bid, b_idx):
        def fn(zz: PhasePoint):
            return canonical_bracket(aid, bid, zz, model)[a_idx + b_idx]

        return fn

    def cstep_grads(fn, zz: PhasePoint) -> dict:
        n = zz.dim
        flat = zz.flat().astype(complex)
        out = np.zeros(flat.shape[0])
        h = step
        for k in range(flat.shape[0]):
            pert = flat.copy()
            pert[k] += 1j * h
            out[k] = np.imag(fn(PhasePoint.from_flat(pert, n))) / h
        k2 = n * n
        return {
            "dx": out[:n],
            "de": out[n : n + k2].reshape(n, n),
            "dp": out[n + k2 : 2 * n + k2],
            "dq": out[2 * n + k2 :].reshape(n, n),
        }

    def outer(aid, a_idx, inner_fn, zz):
        ga = observable_gradients(aid, zz, model)
        sel = tuple(a_idx)
        ga_sel = {k: v[sel] for k, v in ga.items()}
        g_inner = cstep_grads(inner_fn, zz)
        return float(_contract(ga_sel, g_inner))

    t1 = outer(fid, f_idx, scalar_bracket(gid, g_idx, hid, h_idx), z)
    t2 = outer(gid, g_idx, scalar_bracket(hid, h_idx, fid, f_idx), z)
    t3 = outer(hid, h_idx, scalar_bracket(fid, f_idx, gid, g_idx), z)
    return abs(t1 + t2 + t3)
