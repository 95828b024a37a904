import math

import numpy as np
import pytest

from affinebody.analytic2d import (
    Scenario2D,
    SeparationConstants,
    action_variables_quadrature,
    closed_form_actions,
    coords_from_state,
    energy_from_actions,
    hamiltonian_2d,
    kinetic_closed_form,
    mass_matrix,
    momenta_from_state,
    separable_check,
    state_from_coords,
)
from affinebody.dynamics.energies import kinetic_hamiltonian
from affinebody.dynamics.models import InertiaModel
from affinebody.errors import (
    DegenerateDeformationError,
    DomainError,
    RegimeError,
    SchemaError,
    UnboundMotionError,
)
from affinebody.kinematics import legendre


def random_q(rng, space="sphere"):
    r = rng.uniform(0.4, 2.6) if space == "sphere" else rng.uniform(0.4, 2.2)
    return np.array(
        [
            r,
            rng.uniform(0, 2 * np.pi),
            rng.uniform(-1, 1),
            rng.uniform(-1, 1),
            rng.uniform(0.2, 0.8),
            rng.uniform(1.0, 1.8),
        ]
    )


def test_mass_matrix_structure_and_inverse(rng):
    for space in ("sphere", "pseudosphere"):
        scn = Scenario2D(space=space, R=1.4, m=1.7, J=0.6)
        for _ in range(100):
            q = random_q(rng, space)
            G, Ginv = mass_matrix(scn, q)
            assert np.max(np.abs(G @ Ginv - np.eye(6))) < 1e-10
            assert np.max(np.abs(G - G.T)) == 0.0
        # equatorial decoupling on the sphere: cos term vanishes
        if space == "sphere":
            q = random_q(rng)
            q[0] = np.pi * scn.R / 2
            G, _ = mass_matrix(scn, q)
            assert abs(G[1, 2]) < 1e-12 and abs(G[1, 3]) < 1e-12


def test_sphere_to_pseudosphere_entrywise_map(rng):
    # replacing (sin, cos) by (sinh, cosh) maps the mass matrices entrywise
    scn_s = Scenario2D(space="sphere", R=1.3, m=1.1, J=0.7)
    scn_p = Scenario2D(space="pseudosphere", R=1.3, m=1.1, J=0.7)
    q = random_q(rng)
    G_s, _ = mass_matrix(scn_s, q)
    G_p, _ = mass_matrix(scn_p, q)
    t = q[0] / 1.3
    s2s, cs = 1.3**2 * math.sin(t) ** 2, math.cos(t)
    s2p, cp = 1.3**2 * math.sinh(t) ** 2, math.cosh(t)
    Jm = 0.7 / 1.1
    assert np.isclose(G_s[1, 1] - s2s - Jm * cs**2 * (q[4] ** 2 + q[5] ** 2), 0.0, atol=1e-12)
    assert np.isclose(G_p[1, 1] - s2p - Jm * cp**2 * (q[4] ** 2 + q[5] ** 2), 0.0, atol=1e-12)
    assert np.isclose(G_s[1, 2] / cs, G_p[1, 2] / cp, atol=1e-12)


def test_hamiltonian_two_code_paths(rng):
    for space in ("sphere", "pseudosphere"):
        scn = Scenario2D(space=space, R=1.2, m=1.3, J=0.8)
        for _ in range(50):
            q = random_q(rng, space)
            p = rng.uniform(-1, 1, 6)
            _, Ginv = mass_matrix(scn, q)
            quad = 0.5 / scn.m * p @ Ginv @ p
            assert abs(kinetic_closed_form(scn, q, p) - quad) < 1e-11
        # p = 0 gives the bare potential
        scn_pot = Scenario2D(space=space, R=1.2, m=1.3, J=0.8, gamma=0.3)
        q = random_q(rng, space)
        assert np.isclose(hamiltonian_2d(scn_pot, q, np.zeros(6)), scn_pot.potential(q))


def test_hamiltonian_errors(rng):
    scn = Scenario2D()
    q = random_q(rng)
    q[4] = 0.0
    with pytest.raises(DegenerateDeformationError):
        kinetic_closed_form(scn, q, np.zeros(6))
    q = random_q(rng)
    q[0] = -0.1
    with pytest.raises(DomainError):
        kinetic_closed_form(scn, q, np.zeros(6))


def test_bridge_matches_generic_hamiltonian(rng):
    for space in ("sphere", "pseudosphere"):
        scn = Scenario2D(space=space, R=1.4, m=1.7, J=0.6)
        model = scn.manifold()
        inertia = InertiaModel(m=scn.m, J=scn.J * np.eye(2))
        for _ in range(50):
            q = random_q(rng, space)
            p = rng.uniform(-1, 1, 6)
            st = state_from_coords(scn, q, p=p)
            mom = legendre(st, inertia.J, inertia.m, model)
            h_gen = kinetic_hamiltonian(mom, inertia, model)
            assert abs(h_gen - kinetic_closed_form(scn, q, p)) < 1e-10


def test_bridge_roundtrip(rng):
    scn = Scenario2D(space="sphere", R=1.2, m=1.0, J=0.8)
    for _ in range(20):
        q = random_q(rng)
        qd = rng.uniform(-1, 1, 6)
        st = state_from_coords(scn, q, qdot=qd)
        q2, qd2, p2 = coords_from_state(scn, st)
        assert np.max(np.abs(qd2 - qd)) < 1e-11
        # angles may come back shifted by pi with the stretch signs fixed
        dq = np.mod(q2 - q + np.pi, 2 * np.pi) - np.pi
        dq[4:] = q2[4:] - q[4:]
        dq[0] = q2[0] - q[0]
        assert np.max(np.abs(dq)) < 1e-11
        # the rate-free momentum route agrees
        q3, p3 = momenta_from_state(scn, st)
        assert np.max(np.abs(p3 - p2)) < 1e-11


def test_actions_trivial_rotational(rng):
    scn = Scenario2D(space="sphere", R=1.0, m=1.0, J=1.0, gamma=0.1)
    const = SeparationConstants(E=4.0, Cx=0.3, Cy=0.2, l=0.7, Calpha=0.4, Cbeta=-0.3)
    acts = action_variables_quadrature(scn, const)
    assert np.isclose(acts.J_phi, 2 * np.pi * 0.7)
    assert np.isclose(acts.J_alpha, 2 * np.pi * 0.4)
    assert np.isclose(acts.J_beta, -2 * np.pi * 0.3)


def test_free_sphere_paper_value():
    scn = Scenario2D(space="sphere", R=1.0, m=1.0, J=1.0)
    const = SeparationConstants(E=1.0, Cx=0.0, Cy=0.0, l=1.0, Calpha=0.0, Cbeta=0.0)
    acts = closed_form_actions(scn, const)
    assert np.isclose(acts.J_r, 2 * np.pi * np.sqrt(2.0) - 2 * np.pi, atol=1e-12)
    quad = action_variables_quadrature(scn, const)
    assert abs(quad.J_r - acts.J_r) / acts.J_r < 1e-6


def test_radial_families_quadrature_vs_closed(rng):
    # sphere with the inverse-square radial potential
    worst = 0.0
    for _ in range(20):
        scn = Scenario2D(space="sphere", R=rng.uniform(0.7, 2.0), m=rng.uniform(0.5, 2.0),
                         J=1.0, gamma=rng.uniform(0.05, 0.6))
        const = SeparationConstants(
            E=rng.uniform(2.0, 6.0), Cx=0.3, Cy=0.2,
            l=rng.uniform(-1.2, 1.2), Calpha=rng.uniform(-0.9, 0.9), Cbeta=rng.uniform(-0.9, 0.9),
        )
        qa = action_variables_quadrature(scn, const)
        cf = closed_form_actions(scn, const)
        worst = max(worst, abs(qa.J_r - cf.J_r) / max(abs(qa.J_r), 1e-12))
    assert worst < 1e-6

    # pseudosphere bound regime: l > Calpha > 0, 0 < E' < Calpha^2/(2 m R^2)
    worst = 0.0
    count = 0
    while count < 20:
        m, R = rng.uniform(0.5, 1.5), rng.uniform(0.7, 1.4)
        Ca = rng.uniform(0.3, 0.8)
        l = Ca + rng.uniform(0.4, 1.2)
        Eprime = rng.uniform(0.15, 0.85) * Ca**2 / (2 * m * R**2)
        scn = Scenario2D(space="pseudosphere", R=R, m=m, J=1.0, gamma=rng.uniform(0.0, 0.1) * Ca**2)
        const = SeparationConstants(E=Eprime + 0.5, Cx=0.3, Cy=0.2, l=l, Calpha=Ca, Cbeta=0.1)
        try:
            qa = action_variables_quadrature(scn, const)
            cf = closed_form_actions(scn, const)
        except (UnboundMotionError, RegimeError):
            continue
        count += 1
        worst = max(worst, abs(qa.J_r - cf.J_r) / max(abs(qa.J_r), 1e-12))
    assert worst < 1e-6


def test_deformation_families_quadrature_vs_closed(rng):
    worst = 0.0
    for _ in range(20):
        F = rng.uniform(0.3, 1.5)
        scn = Scenario2D(space="sphere", R=1.2, m=1.0, J=rng.uniform(0.4, 1.2),
                         deformation_family="xy", gamma=0.1,
                         A=rng.uniform(0.0, 0.4), B=F, C=F / 4.0)
        const = SeparationConstants(
            E=9.0, Cx=rng.uniform(1.2, 2.2), Cy=rng.uniform(2.2, 4.0),
            l=0.4, Calpha=rng.uniform(-0.6, 0.6), Cbeta=rng.uniform(-0.6, 0.6),
        )
        qa = action_variables_quadrature(scn, const)
        cf = closed_form_actions(scn, const)
        for nm in ("J_x", "J_y"):
            worst = max(worst, abs(getattr(qa, nm) - getattr(cf, nm)) / max(abs(getattr(qa, nm)), 1e-12))
    assert worst < 1e-6

    worst = 0.0
    for _ in range(20):
        scn = Scenario2D(space="sphere", R=1.2, m=1.0, J=rng.uniform(0.4, 1.2),
                         deformation_family="polar", gamma=0.1,
                         gamma_hat=rng.uniform(0.05, 0.5), gamma_tilde=-rng.uniform(1.0, 3.0))
        Asep = rng.uniform(0.3, 0.8)
        Cdef = -rng.uniform(0.1, 0.9) * scn.gamma_tilde**2 / (4 * Asep)
        const = SeparationConstants(E=2.0 + Cdef, l=0.4, Calpha=rng.uniform(-0.4, 0.4),
                                    Cbeta=rng.uniform(-0.4, 0.4), Asep=Asep, Cdef=Cdef)
        qa = action_variables_quadrature(scn, const)
        cf = closed_form_actions(scn, const)
        for nm in ("J_eps", "J_sig"):
            worst = max(worst, abs(getattr(qa, nm) - getattr(cf, nm)) / max(abs(getattr(qa, nm)), 1e-12))
    assert worst < 1e-6


def test_gamma_hat_zero_limit(rng):
    # J_eps reduces to (4 pi sqrt(2 J A) - |Ja - Jb| - |Ja + Jb|) / 4
    scn = Scenario2D(space="sphere", deformation_family="polar", gamma_hat=0.0, gamma_tilde=-2.0)
    Ja, Jb = 2 * np.pi * 0.5, 2 * np.pi * -0.3
    const = SeparationConstants(E=1.0, l=0.2, Calpha=0.5, Cbeta=-0.3, Asep=0.7, Cdef=-0.5)
    cf = closed_form_actions(scn, const)
    expected = 0.25 * (4 * np.pi * np.sqrt(2 * scn.J * 0.7) - abs(Ja - Jb) - abs(Ja + Jb))
    assert np.isclose(cf.J_eps, expected, atol=1e-12)


def test_energy_from_actions_roundtrips(rng):
    scn = Scenario2D(space="sphere", R=1.2, m=1.0, J=0.8, deformation_family="xy",
                     gamma=0.15, A=0.0, B=0.7, C=0.175)
    const = SeparationConstants(E=9.0, Cx=1.4, Cy=2.8, l=0.4, Calpha=0.3, Cbeta=-0.2)
    cf = closed_form_actions(scn, const)
    assert abs(energy_from_actions(scn, cf) - const.E) < 1e-10

    # free sphere family
    scn = Scenario2D(space="sphere", R=1.0, m=1.0, J=1.0)
    const = SeparationConstants(E=3.0, Cx=0.4, Cy=0.3, l=0.8, Calpha=0.2, Cbeta=0.1)
    cf = closed_form_actions(scn, const)
    assert abs(energy_from_actions(scn, cf) - const.E) < 1e-10

    # polar family roundtrip
    scn = Scenario2D(space="sphere", R=1.2, m=1.0, J=0.8, deformation_family="polar",
                     gamma=0.1, gamma_hat=0.3, gamma_tilde=-2.0)
    const = SeparationConstants(E=2.0, l=0.4, Calpha=0.3, Cbeta=-0.2, Asep=0.7, Cdef=-0.9)
    cf = closed_form_actions(scn, const)
    assert abs(energy_from_actions(scn, cf) - const.E) < 1e-10

    # harmonic subclass: J_x is affine in C_x with slope pi sqrt(2 J / F)
    F = 0.9
    scn = Scenario2D(space="sphere", R=1.0, m=1.0, J=0.8, deformation_family="xy",
                     A=0.0, B=F, C=F / 4)
    c1 = SeparationConstants(E=9.0, Cx=1.0, Cy=3.0, l=0.4, Calpha=0.3, Cbeta=-0.2)
    c2 = SeparationConstants(E=9.0, Cx=2.0, Cy=3.0, l=0.4, Calpha=0.3, Cbeta=-0.2)
    a1, a2 = closed_form_actions(scn, c1), closed_form_actions(scn, c2)
    slope = (a2.J_x - a1.J_x) / (c2.Cx - c1.Cx)
    assert np.isclose(slope, np.pi * np.sqrt(2 * scn.J / F), atol=1e-12)

    # degenerate Ja = Jb = 0: deformation actions decouple from rotation
    const0 = SeparationConstants(E=9.0, Cx=1.0, Cy=3.0, l=0.4, Calpha=0.0, Cbeta=0.0)
    acts0 = closed_form_actions(scn, const0)
    assert np.isclose(acts0.J_x, np.pi * np.sqrt(2 * scn.J / F) * 1.0, atol=1e-12)


def test_unbound_and_regime_errors():
    scn = Scenario2D(space="pseudosphere", R=1.0, m=1.0, J=1.0)
    # energy far above the centrifugal ceiling: motion escapes to r -> inf
    const = SeparationConstants(E=10.0, Cx=0.0, Cy=0.0, l=1.0, Calpha=0.4, Cbeta=0.0)
    with pytest.raises(UnboundMotionError):
        action_variables_quadrature(scn, const)

    scn = Scenario2D(space="sphere", deformation_family="xy", A=0.0, B=0.5, C=0.0)
    const = SeparationConstants(E=2.0, Cx=0.5, Cy=0.5, l=0.1, Calpha=0.1, Cbeta=0.0)
    with pytest.raises((RegimeError, UnboundMotionError)):
        closed_form_actions(scn, const)

    scn = Scenario2D(space="sphere", deformation_family="polar", gamma_hat=0.1, gamma_tilde=2.0)
    const = SeparationConstants(E=2.0, l=0.1, Calpha=0.1, Cbeta=0.0, Asep=0.5, Cdef=0.3)
    with pytest.raises(RegimeError):
        closed_form_actions(scn, const)


def test_separable_check_schema_error():
    scn = Scenario2D()

    class Fake:
        samples = []

    with pytest.raises(SchemaError):
        separable_check(Fake(), scn)


def test_literal_kinetic_formula_matches_mass_matrix(rng):
    # T = m/2 (rdot^2 + R^2 s^2 phidot^2) + J/2 (lamdot^2 + mudot^2)
    #     + J/2 (lam^2 + mu^2)(chi^2 + tht^2) - 2 J lam mu chi tht
    # with chi = alfdot + c(r/R) phidot and tht = betdot, against the
    # quadratic form in the six-coordinate mass matrix
    for space in ("sphere", "pseudosphere"):
        scn = Scenario2D(space=space, R=1.3, m=1.4, J=0.7)
        for _ in range(25):
            q = random_q(rng, space)
            qd = rng.uniform(-1, 1, 6)
            G, _ = mass_matrix(scn, q)
            t_quad = 0.5 * scn.m * qd @ G @ qd

            r, _, gam, dlt, x, y = q
            rdot, phidot, gamdot, dltdot, xdot, ydot = qd
            s, c = scn._sc(r)
            alfdot, betdot = 0.5 * (gamdot + dltdot), 0.5 * (gamdot - dltdot)
            lam, mu = (x + y) / math.sqrt(2), (y - x) / math.sqrt(2)
            lamdot, mudot = (xdot + ydot) / math.sqrt(2), (ydot - xdot) / math.sqrt(2)
            chi = alfdot + c * phidot
            tht = betdot
            t_lit = (
                0.5 * scn.m * (rdot**2 + scn.R**2 * s**2 * phidot**2)
                + 0.5 * scn.J * (lamdot**2 + mudot**2)
                + 0.5 * scn.J * (lam**2 + mu**2) * (chi**2 + tht**2)
                - 2.0 * scn.J * lam * mu * chi * tht
            )
            assert abs(t_quad - t_lit) < 1e-11


def test_momentum_fibre_bridge(rng):
    # building the state from momenta and converting back through the
    # canonical pairings closes the loop
    scn = Scenario2D(space="sphere", R=1.1, m=1.2, J=0.9)
    for _ in range(10):
        q = random_q(rng)
        p = rng.uniform(-1, 1, 6)
        st = state_from_coords(scn, q, p=p)
        q2, p2 = momenta_from_state(scn, st)
        assert np.max(np.abs(p2 - p)) < 1e-11
