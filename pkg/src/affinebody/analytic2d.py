"""Exactly integrable planar models on the sphere and pseudosphere.

Six generalized coordinates q = [r, phi, gam, dlt, x, y]: polar chart
coordinates, the rotation sums gam = alf + bet, dlt = alf - bet of the
two-polar angles, and the deformation-plane coordinates
x = (lam - mu)/sqrt(2), y = (lam + mu)/sqrt(2) of the stretches.  With
c = cos(r/R) (cosh on the pseudosphere) and s2 = R^2 sin^2(r/R) (sinh^2),
the kinetic energy is T = (m/2) G_ij qdot^i qdot^j with

    G = [ 1                                                      ]
        [    s2 + (J/m) c^2 (x^2+y^2)   (J/m)c x^2   (J/m)c y^2  ]
        [    (J/m)c x^2                 (J/m)x^2                 ]
        [    (J/m)c y^2                              (J/m)y^2    ]
        [                                                  J/m   ]
        [                                                    J/m ]

and the kinetic Hamiltonian separates exactly as

    T* = p_r^2/2m + (p_phi - c (p_gam + p_dlt))^2 / (2 m s2)
         + p_gam^2/(2 J x^2) + p_dlt^2/(2 J y^2) + (p_x^2 + p_y^2)/(2 J).

Separable potentials U = V_r(r) + V_x(x) + V_y(y) (or the polar-plane
variant) give one-dimensional action integrals

    J_r   = loop sqrt(2m(E - C_x - C_y - V_r)
                      - (J_phi - J_alf c)^2 / (4 pi^2 R^2 s^2)) dr
    J_x   = loop sqrt(2J(C_x - V_x) - (J_alf + J_bet)^2/(16 pi^2 x^2)) dx
    J_y   = loop sqrt(2J(C_y - V_y) - (J_alf - J_bet)^2/(16 pi^2 y^2)) dy

with J_phi = 2 pi l, J_alf = 2 pi C_alf, J_bet = 2 pi C_bet, and closed
forms for the shipped potential families (inverse-square radial, the
deformation-plane family A/x^2 + B/y^2 + C(x^2+y^2), and the polar-plane
family gamma_tilde/sig + gamma_hat cot^2(2 eps)/sig^2).  Quadrature of the
loop integrals is the ground truth the closed forms are tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import (
    DegenerateDeformationError,
    DomainError,
    QuadratureError,
    RegimeError,
    SchemaError,
    UnboundMotionError,
)
from .frames import FrameField, polar_orthonormal_frame
from .geometry import ManifoldModel, make_manifold
from .kinematics import BodyState, Velocity, decompose

__all__ = [
    "Scenario2D",
    "SeparationConstants",
    "ActionSet",
    "mass_matrix",
    "hamiltonian_2d",
    "kinetic_closed_form",
    "state_from_coords",
    "coords_from_state",
    "momenta_from_state",
    "action_variables_quadrature",
    "closed_form_actions",
    "energy_from_actions",
    "separable_check",
]

_EPS = np.array([[0.0, -1.0], [1.0, 0.0]])


def _rot(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class Scenario2D:
    """An integrable planar scenario: space, inertia, and potential family."""

    space: str = "sphere"            # "sphere" | "pseudosphere"
    R: float = 1.0
    m: float = 1.0
    J: float = 1.0                   # isotropic scalar internal inertia
    deformation_family: str = "none" # "none" | "xy" | "polar"
    gamma: float = 0.0               # radial strength: V_r = gamma / s^2
    A: float = 0.0
    B: float = 0.0
    C: float = 0.0
    gamma_hat: float = 0.0
    gamma_tilde: float = 0.0

    def __post_init__(self):
        if self.space not in ("sphere", "pseudosphere"):
            raise ValueError("space must be 'sphere' or 'pseudosphere'")
        if self.deformation_family not in ("none", "xy", "polar"):
            raise ValueError("deformation_family must be 'none', 'xy', or 'polar'")
        if self.R <= 0 or self.m <= 0 or self.J <= 0:
            raise ValueError("R, m, J must be positive")

    # hyperbolic/trigonometric pair of the space
    def _sc(self, r: float):
        t = r / self.R
        if self.space == "sphere":
            return math.sin(t), math.cos(t)
        return math.sinh(t), math.cosh(t)

    def r_domain(self):
        if self.space == "sphere":
            return 1e-9 * self.R, math.pi * self.R * (1.0 - 1e-9)
        return 1e-9 * self.R, math.inf

    def check_r(self, r: float):
        lo, hi = self.r_domain()
        if not (lo < r < hi):
            raise DomainError(f"r = {r} outside chart range of the {self.space}")

    # potentials -----------------------------------------------------------

    def V_r(self, r: float) -> float:
        if self.gamma == 0.0:
            return 0.0
        s, _ = self._sc(r)
        return self.gamma / s**2

    def V_x(self, x: float) -> float:
        if self.deformation_family != "xy":
            return 0.0
        return self.A / x**2 + self.C * x**2

    def V_y(self, y: float) -> float:
        if self.deformation_family != "xy":
            return 0.0
        return self.B / y**2 + self.C * y**2

    def V_polar_sig(self, sig: float) -> float:
        return self.gamma_tilde / sig

    def V_polar_eps(self, eps: float) -> float:
        return self.gamma_hat / math.tan(2.0 * eps) ** 2

    def deformation_potential(self, x: float, y: float) -> float:
        if self.deformation_family == "xy":
            return self.V_x(x) + self.V_y(y)
        if self.deformation_family == "polar":
            sig = math.hypot(x, y)
            eps = math.atan2(x, y)
            return self.V_polar_sig(sig) + self.V_polar_eps(eps) / sig**2
        return 0.0

    def potential(self, q) -> float:
        return self.V_r(q[0]) + self.deformation_potential(q[4], q[5])

    def manifold(self) -> ManifoldModel:
        return make_manifold(self.space, radius=self.R)

    def frame(self) -> FrameField:
        return polar_orthonormal_frame(self.manifold())


@dataclass(frozen=True)
class SeparationConstants:
    """Constants splitting the Hamilton-Jacobi equation.

    E is total energy, (Cx, Cy) the deformation-plane separation energies,
    l the phi-momentum, (Calpha, Cbeta) the rotation momenta.  For the
    polar-plane family, Asep and Cdef = Cx + Cy replace (Cx, Cy).
    """

    E: float
    Cx: float = 0.0
    Cy: float = 0.0
    l: float = 0.0
    Calpha: float = 0.0
    Cbeta: float = 0.0
    Asep: Optional[float] = None
    Cdef: Optional[float] = None

    @property
    def deformation_energy(self) -> float:
        return self.Cdef if self.Cdef is not None else self.Cx + self.Cy


@dataclass(frozen=True)
class ActionSet:
    J_r: float
    J_phi: float
    J_alpha: float
    J_beta: float
    J_x: Optional[float] = None
    J_y: Optional[float] = None
    J_eps: Optional[float] = None
    J_sig: Optional[float] = None
    constants: Optional[SeparationConstants] = None


# ---------------------------------------------------------------------------
# mass matrix and Hamiltonian
# ---------------------------------------------------------------------------


def _check_q(scn: Scenario2D, q):
    q = np.asarray(q, dtype=float)
    if q.shape != (6,):
        raise DomainError("expected six generalized coordinates [r,phi,gam,dlt,x,y]")
    scn.check_r(q[0])
    if abs(q[4]) < 1e-12 or abs(q[5]) < 1e-12:
        raise DegenerateDeformationError(
            f"deformation coordinates x={q[4]:.3e}, y={q[5]:.3e} degenerate"
        )
    return q


def mass_matrix(scn: Scenario2D, q):
    """(G_ij, G^ab) of the six-coordinate kinetic energy; both closed form."""
    q = _check_q(scn, q)
    r, x, y = q[0], q[4], q[5]
    s, c = scn._sc(r)
    s2 = scn.R**2 * s**2
    Jm = scn.J / scn.m

    G = np.zeros((6, 6))
    G[0, 0] = 1.0
    G[1, 1] = s2 + Jm * c**2 * (x**2 + y**2)
    G[1, 2] = G[2, 1] = Jm * c * x**2
    G[1, 3] = G[3, 1] = Jm * c * y**2
    G[2, 2] = Jm * x**2
    G[3, 3] = Jm * y**2
    G[4, 4] = G[5, 5] = Jm

    Ginv = np.zeros((6, 6))
    Ginv[0, 0] = 1.0
    Ginv[1, 1] = 1.0 / s2
    Ginv[1, 2] = Ginv[2, 1] = -c / s2
    Ginv[1, 3] = Ginv[3, 1] = -c / s2
    Ginv[2, 2] = scn.m / (scn.J * x**2) + c**2 / s2
    Ginv[2, 3] = Ginv[3, 2] = c**2 / s2
    Ginv[3, 3] = scn.m / (scn.J * y**2) + c**2 / s2
    Ginv[4, 4] = Ginv[5, 5] = scn.m / scn.J
    return G, Ginv


def kinetic_closed_form(scn: Scenario2D, q, p) -> float:
    """The separated kinetic term of the Hamiltonian.

    T* = p_r^2/2m + (p_phi - c(p_gam+p_dlt))^2/(2 m R^2 s^2)
         + p_gam^2/(2 J x^2) + p_dlt^2/(2 J y^2) + (p_x^2+p_y^2)/(2J).
    """
    q = _check_q(scn, q)
    p = np.asarray(p, dtype=float)
    s, c = scn._sc(q[0])
    s2 = scn.R**2 * s**2
    pr, pphi, pgam, pdlt, px, py = p
    x, y = q[4], q[5]
    return (
        pr**2 / (2.0 * scn.m)
        + (pphi - c * (pgam + pdlt)) ** 2 / (2.0 * scn.m * s2)
        + pgam**2 / (2.0 * scn.J * x**2)
        + pdlt**2 / (2.0 * scn.J * y**2)
        + (px**2 + py**2) / (2.0 * scn.J)
    )


def hamiltonian_2d(scn: Scenario2D, q, p) -> float:
    """Kinetic closed form plus the scenario potential."""
    return kinetic_closed_form(scn, q, p) + scn.potential(np.asarray(q, dtype=float))


# ---------------------------------------------------------------------------
# coordinate bridge to frame-bundle states
# ---------------------------------------------------------------------------


def state_from_coords(scn: Scenario2D, q, qdot=None, p=None) -> BodyState:
    """Build the frame-bundle BodyState carried by six-coordinate data.

    Exactly one of ``qdot``, ``p`` must be given; momenta are converted via
    qdot = G^-1 p / m.  The internal frame is e = E(x) U(alf) D V(bet)^T
    with the polar-orthonormal reference frame E.
    """
    q = _check_q(scn, q)
    if (qdot is None) == (p is None):
        raise ValueError("provide exactly one of qdot, p")
    if p is not None:
        _, Ginv = mass_matrix(scn, q)
        qdot = Ginv @ np.asarray(p, dtype=float) / scn.m
    qdot = np.asarray(qdot, dtype=float)

    r, phi, gam, dlt, x, y = q
    alf, bet = 0.5 * (gam + dlt), 0.5 * (gam - dlt)
    lam, mu = (x + y) / math.sqrt(2.0), (y - x) / math.sqrt(2.0)
    if lam <= 0 or mu <= 0:
        raise DegenerateDeformationError("stretches must be positive (y > |x|)")
    U, V, D = _rot(alf), _rot(bet), np.diag([lam, mu])
    L = U @ D @ V.T

    frame = scn.frame()
    xc = np.array([r, phi])
    E = frame.frame(xc)
    e = E @ L

    rdot, phidot, gamdot, dltdot, xdot, ydot = qdot
    alfdot, betdot = 0.5 * (gamdot + dltdot), 0.5 * (gamdot - dltdot)
    lamdot, mudot = (xdot + ydot) / math.sqrt(2.0), (ydot - xdot) / math.sqrt(2.0)
    Ddot = np.diag([lamdot, mudot])
    Ldot = alfdot * U @ _EPS @ D @ V.T + U @ Ddot @ V.T - betdot * U @ D @ _EPS @ V.T

    v = np.array([rdot, phidot])
    Edot = frame.frame_time_derivative(xc, v)
    edot = Edot @ L + E @ Ldot
    return BodyState(xc, e, Velocity(v, edot))


def momenta_from_state(scn: Scenario2D, state: BodyState, inertia_J=None):
    """(q, p) of a state via canonical pairings; works at degenerate stretches.

    The six-coordinate momenta are the contractions of the canonical momenta
    (p_i, P^A_i) with the coordinate directions de/dq, which need the
    two-polar factors but none of their rates:

        p_r   = p_1 + P . (dE/dr L),      p_phi = p_2 + P . (dE/dphi L),
        p_alf = P . (E U eps D V^T),      p_bet = -P . (E U D eps V^T),
        p_x   = P . (E U diag(1,-1)/sqrt2 V^T),
        p_y   = P . (E U diag(1, 1)/sqrt2 V^T).
    """
    from .kinematics import legendre

    if state.is_velocity:
        J = scn.J * np.eye(2) if inertia_J is None else inertia_J
        state = legendre(state, J, scn.m, scn.manifold())
    frame = scn.frame()
    Ecof = frame.coframe(state.x)
    L = Ecof @ state.e
    dec = decompose(L)
    alf = math.atan2(dec.U[1, 0], dec.U[0, 0])
    bet = math.atan2(dec.V[1, 0], dec.V[0, 0])
    lam, mu = dec.D[0, 0], dec.D[1, 1]
    q = np.array(
        [state.x[0], state.x[1], alf + bet, alf - bet,
         (lam - mu) / math.sqrt(2.0), (lam + mu) / math.sqrt(2.0)]
    )

    E = frame.frame(state.x)
    dE = frame.frame_partials(state.x)
    P = state.fibre.P
    p_hol = state.fibre.p

    def pair(direction):
        return float(np.einsum("Ai,iA->", P, direction))

    rt2 = math.sqrt(2.0)
    p_r = p_hol[0] + pair(dE[:, :, 0] @ L)
    p_phi = p_hol[1] + pair(dE[:, :, 1] @ L)
    p_alf = pair(E @ dec.U @ _EPS @ dec.D @ dec.V.T)
    p_bet = -pair(E @ dec.U @ dec.D @ _EPS @ dec.V.T)
    p_x = pair(E @ dec.U @ np.diag([1.0, -1.0]) @ dec.V.T) / rt2
    p_y = pair(E @ dec.U @ np.diag([1.0, 1.0]) @ dec.V.T) / rt2
    p = np.array(
        [p_r, p_phi, 0.5 * (p_alf + p_bet), 0.5 * (p_alf - p_bet), p_x, p_y]
    )
    return q, p


def coords_from_state(scn: Scenario2D, state: BodyState):
    """(q, qdot, p) of a velocity-fibre state; inverse of state_from_coords.

    The two-polar angles are recovered from the deterministic decomposition,
    so they agree with the construction up to the harmless multivaluedness
    of the two-polar split.
    """
    frame = scn.frame()
    Ecof = frame.coframe(state.x)
    L = Ecof @ state.e
    dec = decompose(L)
    alf = math.atan2(dec.U[1, 0], dec.U[0, 0])
    bet = math.atan2(dec.V[1, 0], dec.V[0, 0])
    lam, mu = dec.D[0, 0], dec.D[1, 1]
    x, y = (lam - mu) / math.sqrt(2.0), (lam + mu) / math.sqrt(2.0)
    q = np.array([state.x[0], state.x[1], alf + bet, alf - bet, x, y])

    fib = state.fibre
    Edot = frame.frame_time_derivative(state.x, fib.v)
    Ldot = -Ecof @ Edot @ Ecof @ state.e + Ecof @ fib.edot
    M = dec.U.T @ Ldot @ dec.V
    lamdot, mudot = M[0, 0], M[1, 1]
    det = mu**2 - lam**2
    if abs(det) < 1e-14 * max(1.0, lam**2):
        raise DegenerateDeformationError("two-polar rates undefined at lam = mu")
    # M01 = -alfdot mu + betdot lam, M10 = alfdot lam - betdot mu
    alfdot = -(mu * M[0, 1] + lam * M[1, 0]) / det
    betdot = -(lam * M[0, 1] + mu * M[1, 0]) / det

    qdot = np.array(
        [
            fib.v[0],
            fib.v[1],
            alfdot + betdot,
            alfdot - betdot,
            (lamdot - mudot) / math.sqrt(2.0),
            (lamdot + mudot) / math.sqrt(2.0),
        ]
    )
    G, _ = mass_matrix(scn, q)
    return q, qdot, scn.m * G @ qdot


# ---------------------------------------------------------------------------
# action variables: quadrature
# ---------------------------------------------------------------------------


def _turning_points(f, lo, hi, scan=512, expand_cap=250.0):
    """Classical turning points of a radicand f on (lo, hi).

    Unbounded upper ends are handled by widening the scan window until the
    allowed region is enclosed; hyperbolic radicands overflow past the cap,
    which is likewise reported as unbound motion.
    """

    def safe_f(qq):
        try:
            return f(qq)
        except OverflowError:
            raise UnboundMotionError(
                "radicand overflows at large coordinate; motion unbound"
            ) from None

    finite_hi = hi if math.isfinite(hi) else max(10.0 * max(lo, 1.0), 1.0)
    while True:
        grid = np.linspace(lo, finite_hi, scan)
        vals = np.array([safe_f(qq) for qq in grid])
        if np.all(vals <= 0):
            raise UnboundMotionError("no classically allowed region found")
        k = int(np.argmax(vals))
        if vals[-1] > 0:
            if math.isfinite(hi) or finite_hi > expand_cap:
                raise UnboundMotionError("allowed region reaches the domain edge")
            finite_hi *= 4.0
            continue
        if vals[0] > 0:
            raise UnboundMotionError("allowed region reaches the inner domain edge")
        break

    q_star = grid[k]
    i_lo = k
    while vals[i_lo] > 0 and i_lo > 0:
        i_lo -= 1
    i_hi = k
    while vals[i_hi] > 0 and i_hi < scan - 1:
        i_hi += 1
    try:
        q1 = brentq(f, grid[i_lo], q_star, xtol=1e-14, rtol=1e-15)
        q2 = brentq(f, q_star, grid[i_hi], xtol=1e-14, rtol=1e-15)
    except ValueError as exc:
        raise UnboundMotionError(f"turning-point bracketing failed: {exc}") from exc
    return q1, q2


def _loop_action(f, q1, q2) -> float:
    """2 * integral_{q1}^{q2} sqrt(max(f, 0)) dq with endpoint regularization.

    The substitution q = q1 + (q2 - q1) sin^2(th) absorbs the inverse
    square-root endpoint behaviour of action integrands.
    """
    width = q2 - q1
    if width <= 0:
        raise UnboundMotionError("empty libration interval")

    def integrand(th):
        qq = q1 + width * math.sin(th) ** 2
        val = f(qq)
        return math.sqrt(max(val, 0.0)) * width * math.sin(2.0 * th)

    val, err = quad(integrand, 0.0, 0.5 * math.pi, limit=300, epsabs=1e-12, epsrel=1e-11)
    if abs(err) > 1e-7 * max(1.0, abs(val)):
        raise QuadratureError(f"loop integral error estimate {err:.3e} too large")
    return 2.0 * val


def _radial_radicand(scn: Scenario2D, const: SeparationConstants):
    two_pi = 2.0 * math.pi
    J_phi, J_alf = two_pi * const.l, two_pi * const.Calpha
    Edef = const.deformation_energy

    def f(r):
        s, c = scn._sc(r)
        return (
            2.0 * scn.m * (const.E - Edef - scn.V_r(r))
            - (J_phi - J_alf * c) ** 2 / (4.0 * math.pi**2 * scn.R**2 * s**2)
        )

    # in action units: (J_phi - J_alf c)^2/(4 pi^2) = (l - Calpha c)^2
    return f


def action_variables_quadrature(scn: Scenario2D, const: SeparationConstants) -> ActionSet:
    """Loop-integral action variables by turning-point quadrature."""
    two_pi = 2.0 * math.pi
    J_phi = two_pi * const.l
    J_alf = two_pi * const.Calpha
    J_bet = two_pi * const.Cbeta

    lo, hi = scn.r_domain()
    f_r = _radial_radicand(scn, const)
    r1, r2 = _turning_points(f_r, lo + 1e-9, hi)
    J_r = _loop_action(f_r, r1, r2)

    out = dict(J_r=J_r, J_phi=J_phi, J_alpha=J_alf, J_beta=J_bet, constants=const)
    J = scn.J

    if scn.deformation_family == "xy":
        Kg = (J_alf + J_bet) / (4.0 * math.pi)
        Kd = (J_alf - J_bet) / (4.0 * math.pi)

        def f_x(x):
            return 2.0 * J * (const.Cx - scn.V_x(x)) - Kg**2 / x**2

        def f_y(y):
            return 2.0 * J * (const.Cy - scn.V_y(y)) - Kd**2 / y**2

        x1, x2 = _turning_points(f_x, 1e-12, math.inf)
        y1, y2 = _turning_points(f_y, 1e-12, math.inf)
        out["J_x"] = _loop_action(f_x, x1, x2)
        out["J_y"] = _loop_action(f_y, y1, y2)
    elif scn.deformation_family == "polar":
        if const.Asep is None or const.Cdef is None:
            raise RegimeError("polar family needs Asep and Cdef constants")

        def f_eps(eps):
            num = (
                J_alf**2
                + 2.0 * math.cos(2.0 * eps) * J_alf * J_bet
                + J_bet**2
            )
            return (
                2.0 * J * (const.Asep - scn.V_polar_eps(eps))
                - num / (4.0 * math.pi**2 * math.sin(2.0 * eps) ** 2)
            )

        def f_sig(sig):
            return (
                2.0 * J * (const.Cdef - scn.V_polar_sig(sig))
                - 2.0 * J * const.Asep / sig**2
            )

        e1, e2 = _turning_points(f_eps, 1e-9, 0.5 * math.pi - 1e-9)
        s1, s2 = _turning_points(f_sig, 1e-12, math.inf)
        out["J_eps"] = _loop_action(f_eps, e1, e2)
        out["J_sig"] = _loop_action(f_sig, s1, s2)
    return ActionSet(**out)


# ---------------------------------------------------------------------------
# action variables: closed forms
# ---------------------------------------------------------------------------


def _sqrt_or_regime(val: float, what: str) -> float:
    if val < 0:
        raise RegimeError(f"imaginary radical in {what}: {val:.6e} < 0")
    return math.sqrt(val)


def closed_form_actions(scn: Scenario2D, const: SeparationConstants) -> ActionSet:
    """Closed-form action variables of the shipped potential families.

    The signs are fixed so every expression equals the positively oriented
    loop integral; quadrature remains the authority in tests.
    """
    two_pi = 2.0 * math.pi
    J_phi = two_pi * const.l
    J_alf = two_pi * const.Calpha
    J_bet = two_pi * const.Cbeta
    m, R, J, gamma = scn.m, scn.R, scn.J, scn.gamma
    Edef = const.deformation_energy
    eight = 8.0 * m * math.pi**2 * R**2

    plus = _sqrt_or_regime(eight * gamma + (J_phi + J_alf) ** 2, "radial action")
    minus = _sqrt_or_regime(eight * gamma + (J_phi - J_alf) ** 2, "radial action")
    if scn.space == "sphere":
        head = _sqrt_or_regime(eight * (const.E - Edef) + J_alf**2, "radial action")
        J_r = head - 0.5 * plus - 0.5 * minus
    else:
        head = _sqrt_or_regime(eight * (Edef - const.E) + J_alf**2, "radial action")
        J_r = 0.5 * plus - 0.5 * minus - head
    if J_r < -1e-12:
        raise RegimeError(f"radial action negative: {J_r:.6e}")

    out = dict(J_r=J_r, J_phi=J_phi, J_alpha=J_alf, J_beta=J_bet, constants=const)

    if scn.deformation_family == "xy":
        if scn.C <= 0:
            raise RegimeError("deformation-plane family needs C > 0 for bound motion")
        scale = math.pi * math.sqrt(J / (2.0 * scn.C))
        out["J_x"] = const.Cx * scale - 0.25 * _sqrt_or_regime(
            32.0 * math.pi**2 * J * scn.A + (J_alf + J_bet) ** 2, "J_x"
        )
        out["J_y"] = const.Cy * scale - 0.25 * _sqrt_or_regime(
            32.0 * math.pi**2 * J * scn.B + (J_alf - J_bet) ** 2, "J_y"
        )
        for k in ("J_x", "J_y"):
            if out[k] < -1e-12:
                raise RegimeError(f"{k} negative: {out[k]:.6e}")
    elif scn.deformation_family == "polar":
        if const.Asep is None or const.Cdef is None:
            raise RegimeError("polar family needs Asep and Cdef constants")
        gh, gt = scn.gamma_hat, scn.gamma_tilde
        out["J_eps"] = 0.25 * (
            4.0 * math.pi * _sqrt_or_regime(2.0 * J * (const.Asep + gh), "J_eps")
            - _sqrt_or_regime(8.0 * J * gh * math.pi**2 + (J_alf - J_bet) ** 2, "J_eps")
            - _sqrt_or_regime(8.0 * J * gh * math.pi**2 + (J_alf + J_bet) ** 2, "J_eps")
        )
        if gt >= 0 or const.Cdef >= 0 or const.Asep <= 0:
            raise RegimeError(
                "polar radial family is bound only for gamma_tilde < 0, Cdef < 0, Asep > 0"
            )
        out["J_sig"] = (
            math.sqrt(2.0)
            * math.pi
            * (
                math.sqrt(J) * abs(gt) / _sqrt_or_regime(-const.Cdef, "J_sig")
                - 2.0 * _sqrt_or_regime(J * const.Asep, "J_sig")
            )
        )
        for k in ("J_eps", "J_sig"):
            if out[k] < -1e-12:
                raise RegimeError(f"{k} negative: {out[k]:.6e}")
    return ActionSet(**out)


def energy_from_actions(scn: Scenario2D, actions: ActionSet) -> float:
    """Invert the closed-form chain back to the energy.

    Raises RegimeError outside the admissible region; RootFindError is
    reserved for potential families without closed-form inverses.
    """
    two_pi = 2.0 * math.pi
    J_phi, J_alf, J_bet = actions.J_phi, actions.J_alpha, actions.J_beta
    m, R, J = scn.m, scn.R, scn.J
    eight = 8.0 * m * math.pi**2 * R**2

    if scn.deformation_family == "xy":
        if scn.C <= 0:
            raise RegimeError("deformation-plane family needs C > 0")
        scale = math.pi * math.sqrt(J / (2.0 * scn.C))
        Cx = (
            actions.J_x
            + 0.25 * math.sqrt(32.0 * math.pi**2 * J * scn.A + (J_alf + J_bet) ** 2)
        ) / scale
        Cy = (
            actions.J_y
            + 0.25 * math.sqrt(32.0 * math.pi**2 * J * scn.B + (J_alf - J_bet) ** 2)
        ) / scale
        Edef = Cx + Cy
    elif scn.deformation_family == "polar":
        gh, gt = scn.gamma_hat, scn.gamma_tilde
        root = (
            4.0 * actions.J_eps
            + math.sqrt(8.0 * J * gh * math.pi**2 + (J_alf - J_bet) ** 2)
            + math.sqrt(8.0 * J * gh * math.pi**2 + (J_alf + J_bet) ** 2)
        ) / (4.0 * math.pi)
        Asep = root**2 / (2.0 * J) - gh
        denom = actions.J_sig + 2.0 * math.sqrt(2.0) * math.pi * math.sqrt(J * Asep)
        if denom <= 0 or Asep <= 0:
            raise RegimeError("polar actions outside the bound regime")
        sqrt_negC = math.sqrt(2.0) * math.pi * math.sqrt(J) * abs(gt) / denom
        Edef = -(sqrt_negC**2)
    else:
        # no deformation potential: the plane energies are free constants and
        # cannot be recovered from actions; take them from the echoed set
        Edef = actions.constants.deformation_energy if actions.constants else 0.0

    plus = math.sqrt(eight * scn.gamma + (J_phi + J_alf) ** 2)
    minus = math.sqrt(eight * scn.gamma + (J_phi - J_alf) ** 2)
    if scn.space == "sphere":
        head = actions.J_r + 0.5 * plus + 0.5 * minus
        return Edef + (head**2 - J_alf**2) / eight
    head = 0.5 * plus - 0.5 * minus - actions.J_r
    if head < 0:
        raise RegimeError("pseudosphere radial action outside the bound regime")
    return Edef - (head**2 - J_alf**2) / eight


# ---------------------------------------------------------------------------
# trajectory-level separability report
# ---------------------------------------------------------------------------


def separable_check(trajectory, scn: Scenario2D) -> dict:
    """Per-sample separation constants along a simulated trajectory.

    Returns the series and max relative drifts of p_phi, p_alpha, p_beta and
    the family separation constants; raises SchemaError when the trajectory
    does not carry full states.
    """
    samples = getattr(trajectory, "samples", None)
    if not samples:
        raise SchemaError("trajectory carries no samples")

    series: dict = {
        "t": [], "p_phi": [], "p_alpha": [], "p_beta": [], "E": [],
    }
    if scn.deformation_family == "xy":
        series["C_x"] = []
        series["C_y"] = []
    elif scn.deformation_family == "polar":
        series["A_sep"] = []
        series["C_def"] = []

    for smp in samples:
        state = smp.state
        if not isinstance(state, BodyState) or not state.is_velocity:
            raise SchemaError("separable check needs velocity-fibre body states")
        q, p = momenta_from_state(scn, state)
        pr, pphi, pgam, pdlt, px, py = p
        x, y = q[4], q[5]
        p_alf, p_bet = pgam + pdlt, pgam - pdlt

        series["t"].append(smp.t)
        series["p_phi"].append(pphi)
        series["p_alpha"].append(p_alf)
        series["p_beta"].append(p_bet)
        series["E"].append(hamiltonian_2d(scn, q, p))
        if scn.deformation_family == "xy":
            series["C_x"].append(
                px**2 / (2.0 * scn.J) + pgam**2 / (2.0 * scn.J * x**2) + scn.V_x(x)
            )
            series["C_y"].append(
                py**2 / (2.0 * scn.J) + pdlt**2 / (2.0 * scn.J * y**2) + scn.V_y(y)
            )
        elif scn.deformation_family == "polar":
            sig = math.hypot(x, y)
            eps = math.atan2(x, y)
            se, ce = math.sin(eps), math.cos(eps)
            p_sig = se * px + ce * py
            p_eps = sig * (ce * px - se * py)
            num = (
                p_alf**2
                + 2.0 * math.cos(2.0 * eps) * p_alf * p_bet
                + p_bet**2
            )
            Asep = (
                p_eps**2 / (2.0 * scn.J)
                + num / (2.0 * scn.J * math.sin(2.0 * eps) ** 2)
                + scn.V_polar_eps(eps)
            )
            series["A_sep"].append(Asep)
            series["C_def"].append(
                p_sig**2 / (2.0 * scn.J) + Asep / sig**2 + scn.V_polar_sig(sig)
            )

    report = {"series": {k: np.asarray(v) for k, v in series.items()}}
    drifts = {}
    for name, vals in report["series"].items():
        if name == "t":
            continue
        vals = np.asarray(vals)
        scale = abs(vals[0]) if abs(vals[0]) > 1e-12 else 1.0
        drifts[name] = float(np.max(np.abs(vals - vals[0])) / scale)
    report["drifts"] = drifts
    return report
