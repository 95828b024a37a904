"""Chart-based manifold models: metric, connection, curvature, torsion, contorsion.

Index conventions are fixed once, here, and used everywhere downstream:

    metric            g[i, j]                 symmetric, positive definite
    metric partials   dg[i, j, k]     = d g_ij / d x^k
    connection        Gamma[i, j, k]  = Gamma^i_jk
    connection psi    dGamma[i, j, k, l] = d Gamma^i_jk / d x^l
    curvature         R[l, k, i, j]   = d_i Gamma^l_kj - d_j Gamma^l_ki
                                        + Gamma^l_ai Gamma^a_kj
                                        - Gamma^l_aj Gamma^a_ki
    torsion           S[i, j, k]      = (Gamma^i_jk - Gamma^i_kj) / 2
    contorsion        K[a, b, c]      = S^a_bc + S_bc^a + S_cb^a
                                        (index shifts by g)

On the two built-in constant-curvature surfaces the chart is polar, with
line elements

    sphere        ds^2 = dr^2 + R^2 sin^2(r/R)  dphi^2,   r in (0, pi R)
    pseudosphere  ds^2 = dr^2 + R^2 sinh^2(r/R) dphi^2,   r in (0, inf)

Coordinate-singular poles are rejected (DomainError), not regularized.
All evaluators accept complex coordinate arrays so that callers may use
complex-step differentiation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, MetricityError, SingularMetricError

__all__ = [
    "ManifoldModel",
    "flat_plane",
    "flat_space",
    "sphere",
    "pseudosphere",
    "from_chart",
    "with_torsion",
    "metric_at",
    "levi_civita_at",
    "curvature_at",
    "torsion_at",
    "contorsion_at",
    "covariant_derivative_along",
    "make_manifold",
]

# 4th-order central difference stencil weights for f'(x).
_FD4_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])
_FD4_WEIGHTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0


def _fd4(fn: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float) -> np.ndarray:
    """Partial derivatives of an array-valued chart function, one trailing axis per x^k."""
    x = np.asarray(x)
    base = np.asarray(fn(x))
    out = np.zeros(base.shape + (x.shape[0],), dtype=np.result_type(base, x))
    for k in range(x.shape[0]):
        acc = 0.0
        for off, w in zip(_FD4_OFFSETS, _FD4_WEIGHTS):
            xp = x.copy().astype(np.result_type(x, float))
            xp[k] = xp[k] + off * h
            acc = acc + w * np.asarray(fn(xp))
        out[..., k] = acc / h
    return out


@dataclass(frozen=True)
class ManifoldModel:
    """Immutable chart-based manifold with metric and affine connection.

    The connection defaults to Levi-Civita of the metric; an optional
    torsion field S^i_jk turns it into the metric-compatible torsional
    connection Gamma = LC + K(S).  Analytic derivative callbacks are used
    when provided, otherwise 4th-order central differences with step
    ``fd_step`` are taken.
    """

    name: str
    dim: int
    metric_fn: Callable[[np.ndarray], np.ndarray]
    metric_partials_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    christoffel_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    christoffel_partials_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    torsion_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    domain_fn: Optional[Callable[[np.ndarray], bool]] = None
    fd_step: float = 1e-5
    curvature_sign: float = field(default=1.0)  # debug hook for negative controls

    # -- domain ---------------------------------------------------------

    def check_point(self, x) -> np.ndarray:
        x = np.asarray(x)
        if x.shape != (self.dim,):
            raise DomainError(
                f"{self.name}: expected {self.dim} coordinates, got shape {x.shape}"
            )
        if self.domain_fn is not None and not np.iscomplexobj(x):
            if not self.domain_fn(x):
                raise DomainError(f"{self.name}: point {x} outside chart domain")
        return x

    def contains(self, x) -> bool:
        x = np.asarray(x)
        if x.shape != (self.dim,):
            return False
        return self.domain_fn is None or bool(self.domain_fn(x))

    # -- metric ---------------------------------------------------------

    def metric(self, x) -> np.ndarray:
        x = self.check_point(x)
        return np.asarray(self.metric_fn(x))

    def metric_inverse(self, x) -> np.ndarray:
        g = self.metric(x)
        try:
            return np.linalg.inv(g)
        except np.linalg.LinAlgError as exc:
            raise SingularMetricError(f"{self.name}: metric singular at {x}") from exc

    def metric_partials(self, x) -> np.ndarray:
        x = self.check_point(x)
        if self.metric_partials_fn is not None:
            return np.asarray(self.metric_partials_fn(x))
        return _fd4(self.metric_fn, x, self.fd_step)

    # -- connection -----------------------------------------------------

    def levi_civita(self, x) -> np.ndarray:
        """Gamma^i_jk = g^im (g_mj,k + g_mk,j - g_jk,m) / 2."""
        if self.christoffel_fn is not None:
            return np.asarray(self.christoffel_fn(self.check_point(x)))
        g_inv = self.metric_inverse(x)
        dg = self.metric_partials(x)
        return 0.5 * (
            np.einsum("im,mjk->ijk", g_inv, dg)
            + np.einsum("im,mkj->ijk", g_inv, dg)
            - np.einsum("im,jkm->ijk", g_inv, dg)
        )

    def connection(self, x) -> np.ndarray:
        """Full connection coefficients: Levi-Civita plus contorsion if torsional."""
        gamma = self.levi_civita(x)
        if self.torsion_fn is None:
            return gamma
        return gamma + self.contorsion(x)

    def connection_partials(self, x) -> np.ndarray:
        if self.torsion_fn is None and self.christoffel_partials_fn is not None:
            return np.asarray(self.christoffel_partials_fn(self.check_point(x)))
        x = self.check_point(x)
        # when the coefficients are themselves finite-differenced, their
        # rounding noise (~1e-11) forces a wider outer step: with h = 1e-3
        # the derivative noise floor drops to ~1e-8
        h = self.fd_step if self.christoffel_fn is not None else max(self.fd_step, 1e-3)
        return _fd4(self.connection, x, h)

    def torsion(self, x) -> np.ndarray:
        """S^i_jk = (Gamma^i_jk - Gamma^i_kj) / 2, from the declared field if any."""
        if self.torsion_fn is None:
            n = self.dim
            return np.zeros((n, n, n))
        return np.asarray(self.torsion_fn(self.check_point(x)))

    def contorsion(self, x) -> np.ndarray:
        """K^a_bc = S^a_bc + S_bc^a + S_cb^a, all index shifts by g."""
        s = self.torsion(x)
        g = self.metric(x)
        g_inv = self.metric_inverse(x)
        # S_bc^a = g_bi g^ad S^i_cd ; S_cb^a = g_ci g^ad S^i_bd
        term2 = np.einsum("bi,ad,icd->abc", g, g_inv, s)
        term3 = np.einsum("ci,ad,ibd->abc", g, g_inv, s)
        return s + term2 + term3

    def curvature(self, x) -> np.ndarray:
        """R^l_kij = Gamma^l_kj,i - Gamma^l_ki,j + Gamma^l_ai Gamma^a_kj - Gamma^l_aj Gamma^a_ki."""
        gamma = self.connection(x)
        dgamma = self.connection_partials(x)
        r = (
            np.einsum("lkji->lkij", dgamma)
            - np.einsum("lkij->lkij", dgamma)
            + np.einsum("lai,akj->lkij", gamma, gamma)
            - np.einsum("laj,aki->lkij", gamma, gamma)
        )
        return self.curvature_sign * r

    def metricity_residual(self, x) -> float:
        """max |nabla_k g_ij| for the model's own connection."""
        gamma = self.connection(x)
        dg = self.metric_partials(x)
        g = self.metric(x)
        nabla = (
            dg
            - np.einsum("lik,lj->ijk", gamma, g)
            - np.einsum("ljk,il->ijk", gamma, g)
        )
        return float(np.max(np.abs(nabla)))


# ---------------------------------------------------------------------------
# built-in models
# ---------------------------------------------------------------------------


def flat_space(n: int = 2) -> ManifoldModel:
    """Euclidean n-space in Cartesian coordinates; every tensor field is trivial."""
    eye = np.eye(n)
    zeros3 = np.zeros((n, n, n))
    zeros4 = np.zeros((n, n, n, n))
    return ManifoldModel(
        name=f"flat{n}d",
        dim=n,
        metric_fn=lambda x: eye,
        metric_partials_fn=lambda x: zeros3,
        christoffel_fn=lambda x: zeros3,
        christoffel_partials_fn=lambda x: zeros4,
    )


def flat_plane() -> ManifoldModel:
    return flat_space(2)


def sphere(radius: float = 1.0, pole_margin: float = 1e-8) -> ManifoldModel:
    """Round 2-sphere of the given radius in the polar chart (r, phi)."""
    if radius <= 0:
        raise ValueError("sphere radius must be positive")
    R = float(radius)
    eps = pole_margin * R

    def metric(x):
        r = x[0]
        return np.array(
            [[1.0 + 0.0 * r, 0.0 * r], [0.0 * r, R**2 * np.sin(r / R) ** 2]]
        )

    def metric_partials(x):
        r = x[0]
        dg = np.zeros((2, 2, 2), dtype=np.result_type(x, float))
        dg[1, 1, 0] = R * np.sin(2.0 * r / R)
        return dg

    def christoffel(x):
        r = x[0]
        gamma = np.zeros((2, 2, 2), dtype=np.result_type(x, float))
        s, c = np.sin(r / R), np.cos(r / R)
        gamma[0, 1, 1] = -R * s * c
        gamma[1, 0, 1] = gamma[1, 1, 0] = c / (R * s)
        return gamma

    def christoffel_partials(x):
        r = x[0]
        dgamma = np.zeros((2, 2, 2, 2), dtype=np.result_type(x, float))
        s = np.sin(r / R)
        dgamma[0, 1, 1, 0] = -np.cos(2.0 * r / R)
        dgamma[1, 0, 1, 0] = dgamma[1, 1, 0, 0] = -1.0 / (R * s) ** 2
        return dgamma

    return ManifoldModel(
        name="sphere",
        dim=2,
        metric_fn=metric,
        metric_partials_fn=metric_partials,
        christoffel_fn=christoffel,
        christoffel_partials_fn=christoffel_partials,
        domain_fn=lambda x: eps < x[0] < np.pi * R - eps,
    )


def pseudosphere(radius: float = 1.0, pole_margin: float = 1e-8) -> ManifoldModel:
    """Lobachevsky plane of curvature -1/R^2 in the polar chart (r, phi)."""
    if radius <= 0:
        raise ValueError("pseudosphere radius must be positive")
    R = float(radius)
    eps = pole_margin * R

    def metric(x):
        r = x[0]
        return np.array(
            [[1.0 + 0.0 * r, 0.0 * r], [0.0 * r, R**2 * np.sinh(r / R) ** 2]]
        )

    def metric_partials(x):
        r = x[0]
        dg = np.zeros((2, 2, 2), dtype=np.result_type(x, float))
        dg[1, 1, 0] = R * np.sinh(2.0 * r / R)
        return dg

    def christoffel(x):
        r = x[0]
        gamma = np.zeros((2, 2, 2), dtype=np.result_type(x, float))
        s, c = np.sinh(r / R), np.cosh(r / R)
        gamma[0, 1, 1] = -R * s * c
        gamma[1, 0, 1] = gamma[1, 1, 0] = c / (R * s)
        return gamma

    def christoffel_partials(x):
        r = x[0]
        dgamma = np.zeros((2, 2, 2, 2), dtype=np.result_type(x, float))
        s = np.sinh(r / R)
        dgamma[0, 1, 1, 0] = -np.cosh(2.0 * r / R)
        dgamma[1, 0, 1, 0] = dgamma[1, 1, 0, 0] = -1.0 / (R * s) ** 2
        return dgamma

    return ManifoldModel(
        name="pseudosphere",
        dim=2,
        metric_fn=metric,
        metric_partials_fn=metric_partials,
        christoffel_fn=christoffel,
        christoffel_partials_fn=christoffel_partials,
        domain_fn=lambda x: x[0] > eps,
    )


def from_chart(
    metric_fn: Callable[[np.ndarray], np.ndarray],
    dim: int,
    name: str = "chart",
    domain_fn: Optional[Callable[[np.ndarray], bool]] = None,
    fd_step: float = 1e-5,
) -> ManifoldModel:
    """User-supplied chart; all derivatives fall back to finite differences."""
    return ManifoldModel(
        name=name, dim=dim, metric_fn=metric_fn, domain_fn=domain_fn, fd_step=fd_step
    )


def with_torsion(
    model: ManifoldModel, torsion_fn: Callable[[np.ndarray], np.ndarray]
) -> ManifoldModel:
    """Same metric, connection replaced by the metric-compatible one with torsion S."""
    return ManifoldModel(
        name=model.name + "+torsion",
        dim=model.dim,
        metric_fn=model.metric_fn,
        metric_partials_fn=model.metric_partials_fn,
        christoffel_fn=model.christoffel_fn,
        christoffel_partials_fn=None,
        torsion_fn=torsion_fn,
        domain_fn=model.domain_fn,
        fd_step=model.fd_step,
        curvature_sign=model.curvature_sign,
    )


def vector_torsion(model: ManifoldModel, u: np.ndarray) -> ManifoldModel:
    """Torsion of trace type, S^i_jk = (delta^i_j u_k - delta^i_k u_j)/2, u constant."""
    u = np.asarray(u, dtype=float)
    n = model.dim
    eye = np.eye(n)
    s = 0.5 * (np.einsum("ij,k->ijk", eye, u) - np.einsum("ik,j->ijk", eye, u))
    return with_torsion(model, lambda x: s)


def make_manifold(kind: str, radius: float = 1.0, dimension: int = 2) -> ManifoldModel:
    """Build a manifold from the scenario-config vocabulary."""
    if kind == "sphere":
        return sphere(radius)
    if kind == "pseudosphere":
        return pseudosphere(radius)
    if kind == "flat2d":
        return flat_plane()
    if kind == "flatN":
        return flat_space(dimension)
    raise ValueError(f"unknown manifold kind {kind!r}")


# ---------------------------------------------------------------------------
# operation-style wrappers
# ---------------------------------------------------------------------------


def metric_at(model: ManifoldModel, x) -> np.ndarray:
    return model.metric(x)


def levi_civita_at(model: ManifoldModel, x) -> np.ndarray:
    return model.levi_civita(x)


def curvature_at(model: ManifoldModel, x) -> np.ndarray:
    return model.curvature(x)


def torsion_at(model: ManifoldModel, x) -> np.ndarray:
    return model.torsion(x)


def contorsion_at(model: ManifoldModel, x, tol: float = 1e-8) -> np.ndarray:
    """Contorsion of the model's connection; requires metric compatibility."""
    res = model.metricity_residual(x)
    if res > tol:
        raise MetricityError(
            f"{model.name}: metricity residual {res:.3e} exceeds {tol:.1e} at {x}"
        )
    return model.contorsion(x)


def curvature_of_connection(
    model: ManifoldModel, connection_fn: Callable[[np.ndarray], np.ndarray], x, h: float = 1e-5
) -> np.ndarray:
    """Curvature of an arbitrary connection field over the model's chart."""
    gamma = np.asarray(connection_fn(np.asarray(x)))
    dgamma = _fd4(connection_fn, np.asarray(x), h)
    return (
        np.einsum("lkji->lkij", dgamma)
        - np.einsum("lkij->lkij", dgamma)
        + np.einsum("lai,akj->lkij", gamma, gamma)
        - np.einsum("laj,aki->lkij", gamma, gamma)
    )


def covariant_derivative_along(
    model: ManifoldModel,
    curve_point,
    curve_velocity,
    field_value,
    field_derivative,
) -> np.ndarray:
    """D w^i/Dt = dw^i/dt + Gamma^i_jk w^j dx^k/dt along a curve."""
    gamma = model.connection(curve_point)
    w = np.asarray(field_value)
    return np.asarray(field_derivative) + np.einsum(
        "ijk,j,k->i", gamma, w, np.asarray(curve_velocity)
    )
