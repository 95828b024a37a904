"""One state, many kinetic energies.

Builds a deformed body state on the sphere, splits its internal
configuration into the polar and two-polar factors, and evaluates the
internal kinetic energy through four routes that must agree: the covariant
definition, the co-moving form, the polar-factor trace formula, and the
doubly isotropic two-polar formula with the drive term supplied by the
curved reference frame.  The alternative metric-free energies built from
the Cauchy tensor are evaluated alongside.
"""

import numpy as np

from affinebody import geometry
from affinebody.dynamics.energies import (
    alt_kinetic_energies,
    kinetic_energy,
    kinetic_energy_forms,
    two_polar_kinetic,
)
from affinebody.dynamics.models import InertiaModel
from affinebody.frames import polar_orthonormal_frame, relative_configuration
from affinebody.kinematics import BodyState, Velocity, decompose


def main():
    sphere = geometry.sphere(1.0)
    frame = polar_orthonormal_frame(sphere)
    inertia = InertiaModel(m=1.0, J=0.7 * np.eye(2))

    x = np.array([1.05, 0.4])
    E = frame.frame(x)
    stretch = np.diag([1.3, 0.8])
    th = 0.5
    rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    e = E @ rot @ stretch
    st = BodyState(x, e, Velocity(np.array([0.25, 0.4]), 0.15 * np.ones((2, 2))))

    L = relative_configuration(e, frame, x)
    dec = decompose(L)
    print("two-polar split of the internal configuration L = E^-1 e")
    print(f"  stretches      : {np.diag(dec.D)}")
    print(f"  left rotation  : {np.degrees(np.arctan2(dec.U[1, 0], dec.U[0, 0])):.2f} deg")
    print(f"  right rotation : {np.degrees(np.arctan2(dec.V[1, 0], dec.V[0, 0])):.2f} deg")

    g = sphere.metric(x)
    t_tr = 0.5 * inertia.m * float(st.fibre.v @ g @ st.fibre.v)
    forms = kinetic_energy_forms(st, inertia, sphere)
    print("\ninternal kinetic energy, four routes")
    print(f"  covariant definition : {forms['velocity'] - t_tr:.15f}")
    print(f"  co-moving form       : {forms['comoving'] - t_tr:.15f}")
    print(f"  polar trace formula  : {two_polar_kinetic(st, inertia, frame, sphere, 'polar'):.15f}")
    print(f"  two-polar isotropic  : {two_polar_kinetic(st, inertia, frame, sphere, 'isotropic'):.15f}")

    alt = alt_kinetic_energies(st, (1.0, 0.7, 0.2, 0.1), sphere)
    print("\nalternative kinetic energies at the same state")
    print(f"  Cauchy-metric form     : {alt['cauchy']:.12f}")
    print(f"  affine-spatial form    : {alt['affine-spatial']:.12f}")
    print(f"  metric-spatial form    : {alt['metric-spatial']:.12f}")
    print(f"  metric form (reference): {kinetic_energy(st, inertia, sphere):.12f}")
    tr1 = np.trace(alt["Omega"] @ alt["Omega"]) - np.trace(alt["OmegaHat"] @ alt["OmegaHat"])
    print(f"  Tr(Omega^2) spatial minus co-moving: {tr1:.2e}")


if __name__ == "__main__":
    main()
