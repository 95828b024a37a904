import numpy as np
import pytest

from affinebody import geometry
from affinebody.errors import SingularFrameError
from affinebody.frames import (
    FrameField,
    coordinate_frame,
    nonholonomic_coeffs,
    nonholonomy_at,
    polar_orthonormal_frame,
    relative_configuration,
    relative_velocities,
    teleparallel_connection_at,
    teleparallel_torsion_at,
)
from affinebody.geometry import curvature_of_connection
from affinebody.verify import random_interior_point


def lie_bracket_oracle(field, x, h=1e-6):
    """Brute-force non-holonomy from the Lie bracket by finite differences."""
    n = field.dim
    E = field.frame(x)

    def leg(xx, A):
        return field.frame(xx)[:, A]

    out = np.zeros((n, n, n))
    for A in range(n):
        for B in range(n):
            brk = np.zeros(n)
            for j in range(n):
                xp, xm = x.copy(), x.copy()
                xp[j] += h
                xm[j] -= h
                dB = (leg(xp, B) - leg(xm, B)) / (2 * h)
                dA = (leg(xp, A) - leg(xm, A)) / (2 * h)
                brk += E[j, A] * dB - E[j, B] * dA
            out[:, A, B] = field.coframe(x) @ brk
    return out


def test_duality_and_orthonormality(sphere, sphere_frame, rng):
    for _ in range(100):
        x = random_interior_point(sphere, rng)
        E = sphere_frame.frame(x)
        cof = sphere_frame.coframe(x)
        assert np.max(np.abs(cof @ E - np.eye(2))) < 1e-12
        g = sphere.metric(x)
        assert np.max(np.abs(E.T @ g @ E - np.eye(2))) < 1e-10


def test_nonholonomy_coordinate_frame_is_zero(flat):
    fr = coordinate_frame(2)
    assert np.allclose(nonholonomy_at(fr, np.array([0.2, 0.4])), 0.0)


def test_nonholonomy_sphere_value_and_oracle(sphere, sphere_frame, rng):
    x = np.array([0.8, 0.2])
    om = nonholonomy_at(sphere_frame, x)
    # [E_r, E_phi] = -cot(r) E_phi for R = 1
    assert np.isclose(om[1, 0, 1], -1.0 / np.tan(0.8), atol=1e-10)
    assert np.max(np.abs(om - lie_bracket_oracle(sphere_frame, x))) < 1e-8
    assert np.max(np.abs(om + np.einsum("CBA->CAB", om))) < 1e-12  # antisymmetry


def test_nonholonomy_scaled_flat_frame(rng):
    # a constant rescaling of a holonomic frame stays holonomic
    fr = FrameField("scaled", 2, lambda x: 2.0 * np.eye(2))
    assert np.max(np.abs(nonholonomy_at(fr, np.array([0.1, 0.2])))) < 1e-9


def test_nonholonomy_is_nonzero_on_curved_frames(sphere, pseudosphere):
    for model in (sphere, pseudosphere):
        fr = polar_orthonormal_frame(model)
        x = np.array([1.0, 0.0])  # r = R
        assert np.max(np.abs(nonholonomy_at(fr, x))) > 0.1


def test_teleparallel_connection(sphere, sphere_frame, rng):
    fr_const = FrameField("const", 2, lambda x: np.array([[1.0, 0.3], [0.0, 2.0]]))
    assert np.allclose(teleparallel_connection_at(fr_const, np.zeros(2)), 0.0)

    for _ in range(10):
        x = random_interior_point(sphere, rng)
        gtel = teleparallel_connection_at(sphere_frame, x)
        # the frame legs are parallel for their own connection
        dE = sphere_frame.frame_partials(x)
        E = sphere_frame.frame(x)
        nabla = dE + np.einsum("ijk,jA->iAk", gtel, E)
        assert np.max(np.abs(nabla)) < 1e-10
        # torsion equals the antisymmetrized coframe-derivative formula
        S = teleparallel_torsion_at(sphere_frame, x)
        cofE = sphere_frame.coframe(x)
        dcof = -np.einsum("Ai,iBk,Bj->Ajk", cofE, dE, cofE)
        S_direct = 0.5 * np.einsum("iA,Ajk->ijk", E, dcof - np.einsum("Akj->Ajk", dcof))
        assert np.max(np.abs(S - S_direct)) < 1e-8
        # curvature of any teleparallel connection vanishes
        telR = curvature_of_connection(
            sphere, lambda xx: teleparallel_connection_at(sphere_frame, xx), x
        )
        assert np.max(np.abs(telR)) < 1e-7


def test_nonholonomic_coeffs(sphere, sphere_frame, rng):
    # the teleparallel connection has vanishing coefficients in its own frame
    x = random_interior_point(sphere, rng)
    import dataclasses

    tel_model = dataclasses.replace(
        sphere,
        christoffel_fn=lambda xx: teleparallel_connection_at(sphere_frame, xx),
        christoffel_partials_fn=None,
    )
    coeffs = nonholonomic_coeffs(sphere_frame, tel_model, x)
    assert np.max(np.abs(coeffs)) < 1e-9

    # reconstruction identity for the Levi-Civita connection of a rotated frame
    def rot_frame(xx):
        th = 0.7 * xx[0] - 0.4 * xx[1]
        return np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])

    fr = FrameField("rotated", 2, rot_frame)
    flat = geometry.flat_plane()
    xf = np.array([0.3, -0.2])
    coeffs = nonholonomic_coeffs(fr, flat, xf)
    gtel = teleparallel_connection_at(fr, xf)
    E = fr.frame(xf)
    cof = fr.coframe(xf)
    recon = np.einsum("iA,ABC,Bj,Ck->ijk", E, coeffs, cof, cof)
    assert np.max(np.abs((flat.connection(xf) - gtel) - recon)) < 1e-10

    # drive term of the polar frame: cos(r/R) d(phi)/dt
    x = np.array([0.9, 0.1])
    coeffs = nonholonomic_coeffs(sphere_frame, sphere, x)
    v = np.array([0.0, 0.8])
    vE = sphere_frame.coframe(x) @ v
    drive = np.einsum("FDC,C->FD", coeffs, vE)
    assert np.isclose(drive[1, 0], np.cos(0.9) * 0.8, atol=1e-10)
    assert np.isclose(drive[0, 1], -np.cos(0.9) * 0.8, atol=1e-10)


def test_relative_configuration(sphere, sphere_frame, rng):
    x = random_interior_point(sphere, rng)
    E = sphere_frame.frame(x)
    assert np.allclose(relative_configuration(E, sphere_frame, x), np.eye(2))

    th = 0.6
    rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    assert np.allclose(relative_configuration(E @ rot, sphere_frame, x), rot)

    e = E @ (rot + 0.2 * np.eye(2))
    L = relative_configuration(e, sphere_frame, x)
    assert np.max(np.abs(E @ L - e)) < 1e-12

    with pytest.raises(SingularFrameError):
        relative_configuration(np.array([[1.0, 0.0], [0.0, -1.0]]), sphere_frame, x)


def test_relative_velocities(rng):
    Om, OmHat = relative_velocities(np.eye(2), np.zeros((2, 2)))
    assert np.allclose(Om, 0.0) and np.allclose(OmHat, 0.0)

    # planar rotations: spatial and co-moving rates coincide
    th, thdot = 0.4, 1.3
    L = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    eps = np.array([[0.0, -1.0], [1.0, 0.0]])
    Ldot = thdot * L @ eps
    Om, OmHat = relative_velocities(L, Ldot)
    assert np.allclose(Om, thdot * eps, atol=1e-12)
    assert np.allclose(OmHat, thdot * eps, atol=1e-12)

    # conjugation identity on random data
    L = rng.uniform(-1, 1, (3, 3)) + 2 * np.eye(3)
    Ldot = rng.uniform(-1, 1, (3, 3))
    Om, OmHat = relative_velocities(L, Ldot)
    assert np.max(np.abs(OmHat - np.linalg.inv(L) @ Om @ L)) < 1e-12
