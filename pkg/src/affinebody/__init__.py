"""Rigid and affinely-rigid micro-bodies on curved two-dimensional surfaces.

A material point carries a linear frame; the pair moves on the frame
bundle of a Riemannian (optionally torsional) surface.  The package
provides the chart geometry, reference frame fields, kinematic snapshots,
balance-form dynamics with spin-curvature and momentum-torsion forces, a
doubly implemented Poisson bracket algebra, conservative integrators with
gyroscopic constraint projection, and the exactly integrable planar models
on the sphere and pseudosphere whose action variables have closed forms.
"""

from . import analytic2d, config, dynamics, frames, geometry, integrate, kinematics
from .config import ScenarioConfig, parse_config, render_config
from .errors import (
    AffineBodyError,
    ConstraintViolationError,
    DegenerateDeformationError,
    DomainError,
    MetricityError,
    ParseError,
    QuadratureError,
    RegimeError,
    RootFindError,
    SchemaError,
    SingularFrameError,
    SingularInertiaError,
    SingularMetricError,
    StepFailure,
    UnboundMotionError,
    UnknownObservableError,
    ValidationError,
)
from .frames import FrameField, coordinate_frame, make_frame, polar_orthonormal_frame
from .geometry import (
    ManifoldModel,
    flat_plane,
    flat_space,
    from_chart,
    make_manifold,
    pseudosphere,
    sphere,
    vector_torsion,
    with_torsion,
)
from .integrate import IntegratorConfig, TrajectoryRecord, run
from .kinematics import BodyState, Momentum, Velocity, decompose, snapshot
from .scenario import ScenarioBundle, build_bundle

__version__ = "0.1.0"

__all__ = [
    "analytic2d",
    "config",
    "dynamics",
    "frames",
    "geometry",
    "integrate",
    "kinematics",
    "ScenarioConfig",
    "parse_config",
    "render_config",
    "AffineBodyError",
    "ConstraintViolationError",
    "DegenerateDeformationError",
    "DomainError",
    "MetricityError",
    "ParseError",
    "QuadratureError",
    "RegimeError",
    "RootFindError",
    "SchemaError",
    "SingularFrameError",
    "SingularInertiaError",
    "SingularMetricError",
    "StepFailure",
    "UnboundMotionError",
    "UnknownObservableError",
    "ValidationError",
    "FrameField",
    "coordinate_frame",
    "make_frame",
    "polar_orthonormal_frame",
    "ManifoldModel",
    "flat_plane",
    "flat_space",
    "from_chart",
    "make_manifold",
    "pseudosphere",
    "sphere",
    "vector_torsion",
    "with_torsion",
    "IntegratorConfig",
    "TrajectoryRecord",
    "run",
    "BodyState",
    "Momentum",
    "Velocity",
    "decompose",
    "snapshot",
    "ScenarioBundle",
    "build_bundle",
    "__version__",
]
