"""Energy models, forces, bracket algebra, and balance-form equations of motion."""

from .brackets import (
    OBSERVABLE_IDS,
    BracketTable,
    PhasePoint,
    bracket,
    bracket_with_hamiltonian,
    canonical_bracket,
    closed_form_bracket,
    hamiltonian_observable,
    jacobi_residual,
    observable_gradients,
    observable_value,
)
from .energies import (
    alt_kinetic_energies,
    kinetic_energy,
    kinetic_energy_forms,
    kinetic_hamiltonian,
    kinetic_hamiltonian_forms,
    total_energy,
    two_polar_kinetic,
    two_polar_rates,
)
from .eom import (
    Constraint,
    Rates,
    constraint_reaction,
    eom_comoving,
    eom_general,
    eom_riemann_cartan,
    geometric_force,
    get_constraint,
    project_gyroscopic,
    project_incompressible,
    project_rotationless,
)
from .models import (
    ForceSnapshot,
    InertiaModel,
    PotentialModel,
    custom_table_potential,
    deformation_coordinates,
    forces_from_potential,
    make_potential,
    radial_det_potential,
    separable_polar_potential,
    separable_xy_potential,
    viscous_damping,
    zero_potential,
)

__all__ = [
    "OBSERVABLE_IDS",
    "BracketTable",
    "PhasePoint",
    "bracket",
    "bracket_with_hamiltonian",
    "canonical_bracket",
    "closed_form_bracket",
    "hamiltonian_observable",
    "jacobi_residual",
    "observable_gradients",
    "observable_value",
    "alt_kinetic_energies",
    "kinetic_energy",
    "kinetic_energy_forms",
    "kinetic_hamiltonian",
    "kinetic_hamiltonian_forms",
    "total_energy",
    "two_polar_kinetic",
    "two_polar_rates",
    "Constraint",
    "Rates",
    "constraint_reaction",
    "eom_comoving",
    "eom_general",
    "eom_riemann_cartan",
    "geometric_force",
    "get_constraint",
    "project_gyroscopic",
    "project_incompressible",
    "project_rotationless",
    "ForceSnapshot",
    "InertiaModel",
    "PotentialModel",
    "custom_table_potential",
    "deformation_coordinates",
    "forces_from_potential",
    "make_potential",
    "radial_det_potential",
    "separable_polar_potential",
    "separable_xy_potential",
    "viscous_damping",
    "zero_potential",
]
