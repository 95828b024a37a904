"""Invariant suites behind the `verify` command.

Each suite returns (name, passed, worst_residual, note); curvature-dependent
checks are skipped with a notice on flat models.
"""

from __future__ import annotations

import dataclasses
from typing import List, Optional, Tuple

import numpy as np

from .dynamics.brackets import (
    OBSERVABLE_IDS,
    PhasePoint,
    canonical_bracket,
    closed_form_bracket,
    jacobi_residual,
)
from .frames import FrameField, nonholonomy_at, teleparallel_connection_at
from .geometry import ManifoldModel, curvature_of_connection
from .kinematics import (
    BodyState,
    MatrixField,
    Momentum,
    TensorField,
    decompose,
    deformation,
    momentum_snapshot,
    transform_material,
    transform_spatial,
    Velocity,
)

__all__ = ["random_interior_point", "random_state", "run_suites"]


def random_interior_point(model: ManifoldModel, rng: np.random.Generator) -> np.ndarray:
    if model.name.startswith("sphere"):
        # keep away from the poles where the chart degenerates
        r = rng.uniform(0.35, 0.85) * np.pi
        return np.array([r, rng.uniform(0.0, 2.0 * np.pi)])
    if model.name.startswith("pseudosphere"):
        return np.array([rng.uniform(0.4, 2.5), rng.uniform(0.0, 2.0 * np.pi)])
    return rng.uniform(-1.0, 1.0, size=model.dim)


def random_frame(n: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        e = rng.uniform(-1.0, 1.0, size=(n, n)) + 1.5 * np.eye(n)
        if np.linalg.det(e) > 0.2:
            return e


def random_state(
    model: ManifoldModel, rng: np.random.Generator, fibre: str = "momentum"
) -> BodyState:
    n = model.dim
    x = random_interior_point(model, rng)
    e = random_frame(n, rng)
    if fibre == "momentum":
        return BodyState(
            x, e, Momentum(rng.uniform(-1, 1, n), rng.uniform(-1, 1, (n, n)))
        )
    return BodyState(x, e, Velocity(rng.uniform(-1, 1, n), rng.uniform(-1, 1, (n, n))))


def _suite_geometry(model: ManifoldModel, rng, samples=25) -> List[Tuple]:
    rows = []
    worst_metricity = 0.0
    worst_skew = 0.0
    worst_pair = 0.0
    worst_const = 0.0
    curved = model.name.startswith(("sphere", "pseudosphere"))
    if curved:
        sign = 1.0 if model.name.startswith("sphere") else -1.0
        kappa = sign / _model_radius(model) ** 2
    for _ in range(samples):
        x = random_interior_point(model, rng)
        g = model.metric(x)
        worst_metricity = max(worst_metricity, model.metricity_residual(x))
        R = model.curvature(x)
        worst_skew = max(worst_skew, float(np.max(np.abs(R + np.einsum("lkji->lkij", R)))))
        R_low = np.einsum("lm,mkij->lkij", g, R)
        worst_pair = max(
            worst_pair, float(np.max(np.abs(R_low + np.einsum("klij->lkij", R_low))))
        )
        if curved:
            expected = kappa * (
                np.einsum("li,kj->lkij", np.eye(2), g)
                - np.einsum("lj,ki->lkij", np.eye(2), g)
            )
            worst_const = max(worst_const, float(np.max(np.abs(R - expected))))
    rows.append(("metricity |nabla g|", worst_metricity < 1e-9, worst_metricity, ""))
    rows.append(("curvature last-pair antisymmetry", worst_skew < 1e-12, worst_skew, ""))
    rows.append(("curvature first-pair g-skewness", worst_pair < 1e-8, worst_pair, ""))
    if curved:
        rows.append(
            ("constant-curvature form", worst_const < 1e-7, worst_const, "")
        )
    else:
        rows.append(("constant-curvature form", True, 0.0, "skipped on flat model"))
    return rows


def _model_radius(model: ManifoldModel) -> float:
    """Recover R from g_phiphi = R^2 sin(r/R)^2 (sinh on the pseudosphere)."""
    from scipy.optimize import brentq

    t = next(tt for tt in (0.5, 0.1, 0.02, 1e-3) if model.contains(np.array([tt, 0.0])))
    g1 = model.metric(np.array([t, 0.0]))[1, 1]
    if model.name.startswith("sphere"):
        # monotone increasing in R on (t/pi, inf), limit t^2 > g1
        f = lambda R: R**2 * np.sin(t / R) ** 2 - g1
        return brentq(f, t / np.pi * (1 + 1e-9), 1e8, xtol=1e-14, rtol=1e-14)
    # monotone decreasing in R, limit t^2 < g1
    f = lambda R: R**2 * np.sinh(t / R) ** 2 - g1
    return brentq(f, 1e-8, 1e8, xtol=1e-14, rtol=1e-14)


def _suite_frames(model: ManifoldModel, frame: FrameField, rng, samples=25) -> List[Tuple]:
    rows = []
    worst_dual = worst_ortho = worst_tel = 0.0
    max_nonhol = 0.0
    for _ in range(samples):
        x = random_interior_point(model, rng)
        E = frame.frame(x)
        cof = frame.coframe(x)
        worst_dual = max(worst_dual, float(np.max(np.abs(cof @ E - np.eye(model.dim)))))
        if frame.orthonormal:
            g = model.metric(x)
            worst_ortho = max(
                worst_ortho, float(np.max(np.abs(E.T @ g @ E - np.eye(model.dim))))
            )
        tel_curv = curvature_of_connection(
            model, lambda xx: teleparallel_connection_at(frame, xx), x
        )
        worst_tel = max(worst_tel, float(np.max(np.abs(tel_curv))))
        max_nonhol = max(max_nonhol, float(np.max(np.abs(nonholonomy_at(frame, x)))))
    rows.append(("coframe duality", worst_dual < 1e-12, worst_dual, ""))
    if frame.orthonormal:
        rows.append(("frame orthonormality", worst_ortho < 1e-10, worst_ortho, ""))
    rows.append(("teleparallel curvature vanishes", worst_tel < 1e-7, worst_tel, ""))
    if model.name.startswith(("sphere", "pseudosphere")):
        rows.append(
            ("frame field is non-holonomic", max_nonhol > 0.1, max_nonhol, "")
        )
    return rows


def _suite_brackets(model: ManifoldModel, rng, samples=12) -> List[Tuple]:
    worst = 0.0
    for _ in range(samples):
        st = random_state(model, rng, "momentum")
        z = PhasePoint.from_state(st)
        for i, fid in enumerate(OBSERVABLE_IDS):
            for gid in OBSERVABLE_IDS[i:]:
                diff = closed_form_bracket(fid, gid, z, model) - canonical_bracket(
                    fid, gid, z, model
                )
                worst = max(worst, float(np.max(np.abs(diff))))
    rows = [("closed-form vs canonical brackets", worst < 1e-9, worst, "")]

    worst_j = 0.0
    for _ in range(4):
        st = random_state(model, rng, "momentum")
        z = PhasePoint.from_state(st)
        ids = rng.choice(len(OBSERVABLE_IDS), size=3, replace=True)
        triple, comps = [], []
        for k in ids:
            fid = OBSERVABLE_IDS[k]
            from .dynamics.brackets import observable_value

            shape = observable_value(fid, z, model).shape
            comps.append(tuple(int(rng.integers(0, s)) for s in shape))
            triple.append(fid)
        worst_j = max(worst_j, jacobi_residual(tuple(triple), tuple(comps), z, model))
    rows.append(("Jacobi identity", worst_j < 1e-8, worst_j, ""))
    if model.name.startswith("flat"):
        rows.append(
            (
                "flat-space holonomic reduction",
                _flat_reduction_exact(model, rng),
                0.0,
                "curvature corrections identically zero",
            )
        )
    return rows


def _flat_reduction_exact(model, rng) -> bool:
    st = random_state(model, rng, "momentum")
    z = PhasePoint.from_state(st)
    for fid, gid in (("P", "P"), ("P", "Pint"), ("P", "e")):
        if np.any(closed_form_bracket(fid, gid, z, model) != 0.0):
            return False
    return True


def _suite_transforms(model: ManifoldModel, rng, samples=20) -> List[Tuple]:
    n = model.dim
    worst_g = worst_c = worst_sh = worst_s = 0.0
    for _ in range(samples):
        st = random_state(model, rng, "velocity")
        g = model.metric(st.x)

        # isometry at st.x: conjugate a rotation into the metric frame
        w, vecs = np.linalg.eigh(g)
        sqrt_g = vecs @ np.diag(np.sqrt(w)) @ vecs.T
        inv_sqrt_g = vecs @ np.diag(w**-0.5) @ vecs.T
        th = rng.uniform(0, 2 * np.pi)
        rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        if n != 2:
            rot = np.eye(n)
        iso = inv_sqrt_g @ rot @ sqrt_g
        T = TensorField(lambda x, M=iso: M, lambda x, n=n: np.zeros((n, n, n)))
        st_T, _ = transform_spatial(st, T, model)
        G0 = deformation(st, model)[0]
        G1 = deformation(st_T, model)[0]
        worst_g = max(worst_g, float(np.max(np.abs(G1 - G0))))

        # constant orthogonal micromaterial rotation leaves C invariant
        Lf = MatrixField(lambda x, M=rot: M, lambda x, n=n: np.zeros((n, n, n)))
        st_L, _ = transform_material(st, Lf, model)
        C0 = deformation(st, model)[1]
        C1 = deformation(st_L, model)[1]
        worst_c = max(worst_c, float(np.max(np.abs(C1 - C0))))

        # momentum rules: SigmaHat invariant under spatial, Sigma under material
        stm = random_state(model, rng, "momentum")
        Trand = TensorField(
            lambda x, M=iso: M, lambda x, n=n: np.zeros((n, n, n))
        )
        stm_T, rules_T = transform_spatial(stm, Trand, model)
        worst_sh = max(
            worst_sh,
            float(
                np.max(
                    np.abs(momentum_snapshot(stm_T, model).SigmaHat - rules_T["SigmaHat"])
                )
            ),
        )
        stm_L, rules_L = transform_material(stm, Lf, model)
        worst_s = max(
            worst_s,
            float(np.max(np.abs(momentum_snapshot(stm_L, model).Sigma - rules_L["Sigma"]))),
        )
    return [
        ("Green tensor isometry invariance", worst_g < 1e-10, worst_g, ""),
        ("Cauchy tensor orthogonal invariance", worst_c < 1e-10, worst_c, ""),
        ("SigmaHat spatial invariance", worst_sh < 1e-10, worst_sh, ""),
        ("Sigma material invariance", worst_s < 1e-10, worst_s, ""),
    ]


def _suite_decomposition(rng, samples=100) -> List[Tuple]:
    worst_rt = worst_spec = 0.0
    for _ in range(samples):
        L = random_frame(2, rng) if rng.uniform() < 0.7 else random_frame(3, rng)
        dec = decompose(L)
        rec = dec.U @ dec.D @ np.linalg.inv(dec.V)
        worst_rt = max(worst_rt, float(np.max(np.abs(rec - L))))
        G = dec.V @ dec.D @ dec.D @ np.linalg.inv(dec.V)
        worst_spec = max(worst_spec, float(np.max(np.abs(G - L.T @ L))))
    return [
        ("two-polar reconstruction", worst_rt < 1e-12, worst_rt, ""),
        ("Green spectral identity", worst_spec < 1e-11, worst_spec, ""),
    ]


def run_suites(
    model: ManifoldModel,
    frame: Optional[FrameField] = None,
    seed: int = 0,
    flip_curvature_sign: bool = False,
) -> List[Tuple]:
    """All invariant suites on one model; returns (name, ok, residual, note) rows."""
    if flip_curvature_sign:
        model = dataclasses.replace(model, curvature_sign=-1.0)
    rng = np.random.default_rng(seed)
    rows = []
    rows += _suite_geometry(model, rng)
    if frame is not None:
        rows += _suite_frames(model, frame, rng)
    rows += _suite_brackets(model, rng)
    rows += _suite_transforms(model, rng)
    rows += _suite_decomposition(rng)
    return rows
