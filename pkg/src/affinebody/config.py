"""Scenario configuration: a flat ``key = value`` text format.

One document per scenario.  Values use JSON syntax (numbers, strings,
booleans, lists, nested lists), ``#`` starts a comment, blank lines are
ignored.  Parsing collects every error with its line number instead of
stopping at the first; rendering writes keys back in insertion order, so
``parse(render(cfg)) == cfg``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np

from .errors import ParseError, ValidationError

__all__ = ["ScenarioConfig", "parse_config", "render_config", "validate_config"]

_MANIFOLDS = ("sphere", "pseudosphere", "flat2d", "flatN")
_FRAMES = ("coordinate", "polar-orthonormal")
_POTENTIALS = ("none", "radial-det", "separable-xy", "separable-polar", "custom-table")
_METHODS = ("rk4", "implicit-midpoint")
_CONSTRAINTS = ("none", "gyroscopic", "incompressible", "rotationless")

_DEFAULTS: Dict[str, Any] = {
    "name": "scenario",
    "manifold": "flat2d",
    "radius": 1.0,
    "dimension": 2,
    "frame": "coordinate",
    "m": 1.0,
    "J": 1.0,
    "coords0": None,
    "e0": "frame",
    "v0": None,
    "edot0": None,
    "p0": None,
    "P0": None,
    "spin0": None,
    "q0": None,
    "qdot0": None,
    "potential": "none",
    "gamma": 0.0,
    "A": 0.0,
    "B": 0.0,
    "C": 0.0,
    "F": None,
    "gamma_hat": 0.0,
    "gamma_tilde": 0.0,
    "perturbation": 0.0,
    "table": None,
    "torsion": "none",
    "torsion_vector": None,
    "damping_translational": 0.0,
    "damping_internal": 0.0,
    "method": "rk4",
    "dt": 1e-3,
    "t_end": 1.0,
    "stride": 1,
    "constraint": "none",
    "constraint_tol": 1e-6,
    "retraction": True,
    "observables": None,
    "E": None,
    "Cx": None,
    "Cy": None,
    "l": None,
    "Calpha": None,
    "Cbeta": None,
    "Asep": None,
    "Cdef": None,
}


@dataclass
class ScenarioConfig:
    """Validated scenario settings; unknown keys are rejected at parse time."""

    values: Dict[str, Any] = field(default_factory=dict)

    def __getattr__(self, key):
        values = object.__getattribute__(self, "values")
        if key in values:
            return values[key]
        if key in _DEFAULTS:
            return _DEFAULTS[key]
        raise AttributeError(key)

    def get(self, key, default=None):
        return self.values.get(key, _DEFAULTS.get(key, default))

    def __eq__(self, other):
        return isinstance(other, ScenarioConfig) and self.values == other.values

    def potential_params(self) -> dict:
        params = {
            "gamma": self.get("gamma"),
            "A": self.get("A"),
            "B": self.get("B"),
            "C": self.get("C"),
            "gamma_hat": self.get("gamma_hat"),
            "gamma_tilde": self.get("gamma_tilde"),
            "perturbation": self.get("perturbation"),
        }
        # F selects the one-parameter subclass A = 0, B = F, C = F/4
        if self.get("F") is not None:
            f = float(self.get("F"))
            params["A"], params["B"], params["C"] = 0.0, f, f / 4.0
        if self.get("table") is not None:
            params["table"] = self.get("table")
        return params


def parse_config(text: str) -> ScenarioConfig:
    """Parse one scenario document, reporting every error at once."""
    values: Dict[str, Any] = {}
    errors: List[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {line!r}")
            continue
        key, _, value_text = line.partition("=")
        key = key.strip()
        value_text = value_text.strip()
        if not key:
            errors.append(f"line {lineno}: empty key")
            continue
        if key not in _DEFAULTS:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in values:
            errors.append(f"line {lineno}: duplicate key {key!r}")
            continue
        try:
            value = json.loads(value_text)
        except json.JSONDecodeError:
            if "#" in value_text:
                try:
                    value = json.loads(value_text.split("#", 1)[0].strip())
                except json.JSONDecodeError:
                    errors.append(f"line {lineno}: bad value for {key!r}: {value_text!r}")
                    continue
            else:
                errors.append(f"line {lineno}: bad value for {key!r}: {value_text!r}")
                continue
        values[key] = value
    cfg = ScenarioConfig(values)
    if errors:
        # still validate whatever parsed, so one pass reports everything
        try:
            validate_config(cfg)
        except ValidationError as exc:
            errors.extend(exc.errors)
        raise ParseError(errors)
    validate_config(cfg)
    return cfg


def render_config(cfg: ScenarioConfig) -> str:
    lines = [f"{key} = {json.dumps(value)}" for key, value in cfg.values.items()]
    return "\n".join(lines) + "\n"


def _dim_of(cfg: ScenarioConfig) -> int:
    if cfg.get("manifold") == "flatN":
        return int(cfg.get("dimension"))
    return 2


def validate_config(cfg: ScenarioConfig):
    """Check vocabulary, dimensional consistency, and the chart domain."""
    errors: List[str] = []
    v = cfg.get

    if v("manifold") not in _MANIFOLDS:
        errors.append(f"manifold: unknown kind {v('manifold')!r}")
    if v("frame") not in _FRAMES:
        errors.append(f"frame: unknown kind {v('frame')!r}")
    if v("potential") not in _POTENTIALS:
        errors.append(f"potential: unknown family {v('potential')!r}")
    if v("method") not in _METHODS:
        errors.append(f"method: unknown method {v('method')!r}")
    if v("constraint") not in _CONSTRAINTS:
        errors.append(f"constraint: unknown constraint {v('constraint')!r}")
    if v("torsion") not in ("none", "vector"):
        errors.append(f"torsion: unknown kind {v('torsion')!r}")

    n = _dim_of(cfg)
    if v("manifold") in ("sphere", "pseudosphere"):
        if not isinstance(v("radius"), (int, float)) or v("radius") <= 0:
            errors.append("radius: must be a positive number")
        if v("frame") == "polar-orthonormal" and n != 2:
            errors.append("frame: polar-orthonormal needs dimension 2")

    for key in ("dt", "t_end"):
        if not isinstance(v(key), (int, float)) or v(key) <= 0:
            errors.append(f"{key}: must be a positive number")
    if not isinstance(v("stride"), int) or v("stride") < 1:
        errors.append("stride: must be a positive integer")
    if not isinstance(v("m"), (int, float)) or v("m") <= 0:
        errors.append("m: must be a positive number")

    J = v("J")
    if isinstance(J, (int, float)):
        if J <= 0:
            errors.append("J: scalar inertia must be positive")
    elif isinstance(J, list):
        arr = np.asarray(J, dtype=float)
        if arr.shape != (n, n):
            errors.append(f"J: matrix inertia must be {n}x{n} for this manifold")
        elif not np.allclose(arr, arr.T) or np.any(np.linalg.eigvalsh(arr) <= 0):
            errors.append("J: matrix inertia must be symmetric positive definite")
    else:
        errors.append("J: must be a number or an n x n matrix")

    for key in ("q0", "qdot0"):
        if v(key) is not None:
            if not isinstance(v(key), list) or len(v(key)) != 6:
                errors.append(f"{key}: expected six entries [r, phi, gam, dlt, x, y]")
            elif v("manifold") not in ("sphere", "pseudosphere"):
                errors.append(f"{key}: six-coordinate initialization needs a 2D surface")
    if v("q0") is not None and v("coords0") is not None:
        errors.append("initial state: give q0 or coords0, not both")
    if v("spin0") is not None and not isinstance(v("spin0"), (int, float)):
        errors.append("spin0: must be a number (co-moving angular rate)")

    coords0 = v("coords0")
    if coords0 is not None:
        if not isinstance(coords0, list) or len(coords0) != n:
            errors.append(f"coords0: expected {n} chart coordinates")
        else:
            r0 = coords0[0]
            if v("manifold") == "sphere" and not (
                0.0 < r0 < float(np.pi) * float(v("radius"))
            ):
                errors.append("coords0: r0 outside the open sphere chart (pole)")
            if v("manifold") == "pseudosphere" and not r0 > 0.0:
                errors.append("coords0: r0 must be positive on the pseudosphere")

    has_velocity = v("v0") is not None or v("edot0") is not None or v("qdot0") is not None
    has_momentum = v("p0") is not None or v("P0") is not None
    if has_velocity and has_momentum:
        errors.append("initial state: give velocities (v0, edot0) or momenta (p0, P0), not both")

    for key in ("v0", "p0"):
        if v(key) is not None and (not isinstance(v(key), list) or len(v(key)) != n):
            errors.append(f"{key}: expected {n} components")
    for key in ("edot0", "P0"):
        if v(key) is not None:
            arr = np.asarray(v(key), dtype=float)
            if arr.shape != (n, n):
                errors.append(f"{key}: expected an {n} x {n} matrix")
    e0 = v("e0")
    if e0 != "frame" and e0 is not None:
        arr = np.asarray(e0, dtype=float)
        if arr.shape != (n, n):
            errors.append(f"e0: expected 'frame' or an {n} x {n} matrix")
        elif np.linalg.det(arr) <= 0:
            errors.append("e0: internal frame must have positive determinant")

    if v("potential") in ("separable-xy", "separable-polar") and v("frame") != "polar-orthonormal":
        errors.append(f"potential: {v('potential')} needs frame = \"polar-orthonormal\"")
    if v("potential") == "custom-table" and v("table") is None:
        errors.append("potential: custom-table needs a `table` of (r, V) rows")
    if v("torsion") == "vector":
        tv = v("torsion_vector")
        if not isinstance(tv, list) or len(tv) != n:
            errors.append(f"torsion_vector: expected {n} components")

    if errors:
        raise ValidationError(errors)
