"""Parallel transport and geodesics on the sphere.

Transports a tangent vector once around a latitude circle and compares the
holonomy rotation against the cone-unrolling angle 2 pi (1 - cos(r/R)),
then integrates a spin-free body from the equator and watches it trace the
great circle.  Run with --plot to save a picture of the transported vector
field.
"""

import argparse

import numpy as np
from scipy.integrate import solve_ivp

from affinebody import geometry
from affinebody.dynamics.models import InertiaModel
from affinebody.frames import polar_orthonormal_frame
from affinebody.integrate import IntegratorConfig, run
from affinebody.kinematics import BodyState, Velocity


def holonomy_demo(radius=1.0, r0=0.9):
    sphere = geometry.sphere(radius)
    frame = polar_orthonormal_frame(sphere)

    def rhs(phi, w):
        gamma = sphere.connection(np.array([r0, phi]))
        return -np.einsum("ijk,j,k->i", gamma, w, np.array([0.0, 1.0]))

    w0 = np.array([1.0, 0.0])
    sol = solve_ivp(rhs, [0.0, 2.0 * np.pi], w0, rtol=1e-12, atol=1e-14,
                    dense_output=True)
    cof = frame.coframe(np.array([r0, 0.0]))
    a0, a1 = cof @ w0, cof @ sol.y[:, -1]
    angle = np.arctan2(a0[0] * a1[1] - a0[1] * a1[0], a0 @ a1)
    expected = 2.0 * np.pi * (1.0 - np.cos(r0 / radius))
    print("parallel transport around the latitude circle")
    print(f"  measured rotation : {abs(angle):.12f} rad")
    print(f"  cone-unrolling    : {expected:.12f} rad")
    print(f"  difference        : {abs(abs(angle) - expected):.2e}")
    return sol


def geodesic_demo(radius=1.0):
    sphere = geometry.sphere(radius)
    frame = polar_orthonormal_frame(sphere)
    inertia = InertiaModel(m=1.0, J=0.5 * np.eye(2))

    x0 = np.array([np.pi * radius / 2, 0.0])
    v0 = np.array([0.0, 0.7])
    e0 = frame.frame(x0)
    edot0 = -np.einsum("ijk,jA,k->iA", sphere.connection(x0), e0, v0)
    st = BodyState(x0, e0, Velocity(v0, edot0))

    rec = run(st, sphere, inertia, IntegratorConfig(dt=1e-3, t_end=2.0, stride=100))
    rs = np.array([s.state.x[0] for s in rec.samples])
    print("\nspin-free body launched along the equator")
    print(f"  max |r - pi R/2| over t = 2 : {np.max(np.abs(rs - x0[0])):.2e}")
    print(f"  relative energy drift       : {rec.relative_drift(rec.energies()):.2e}")
    return rec


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--plot", action="store_true", help="save holonomy.png")
    args = parser.parse_args()

    sol = holonomy_demo()
    geodesic_demo()

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        phis = np.linspace(0, 2 * np.pi, 25)
        ws = sol.sol(phis)
        fig, ax = plt.subplots(subplot_kw={"projection": "polar"})
        ax.quiver(phis, np.ones_like(phis), ws[0], ws[1])
        ax.set_title("vector parallel-transported around r = 0.9")
        fig.savefig("holonomy.png", dpi=120)
        print("\nwrote holonomy.png")


if __name__ == "__main__":
    main()
