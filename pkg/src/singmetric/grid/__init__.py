"""Finite-difference model on the flat torus (complex dimension one)."""
from __future__ import annotations

import numpy as np

from ..core import ComparabilityWitness, MassProvider, MassVector, Relation, register_engine
from .kernels import BACKEND
from .potential import (
    GridPotential,
    NotInCone,
    SolverConfig,
    check_cone,
    cone_defect,
    default_depth,
    green,
    green_potential,
    laplacian,
    mass_tol,
    np_mass,
    read_potential,
    singular_part,
    truncated_mass,
    write_potential,
)
from .solvers import (
    Divergence,
    IncompatibleData,
    MonotonicityViolation,
    SingularBudget,
    ceiling,
    concentration_check,
    min_atoms,
    p_bracket,
    rooftop,
    solve_cmae,
    stability_experiment,
    stability_families,
)


def mass_vector_grid(u: GridPotential, cfg: SolverConfig | None = None) -> MassVector:
    return MassVector(1, (np_mass(u, cfg), u.c), u.c, mass_tol(u.N))


def _dominates(a: GridPotential, b: GridPotential) -> bool:
    """Every Lelong number of ``a`` is at least that of ``b``."""
    da = dict(a.atoms)
    return all(da.get(cell, 0.0) >= nu for cell, nu in b.atoms)


def compare_grid(a: GridPotential, b: GridPotential) -> ComparabilityWitness:
    # on a finite grid all differences are bounded; only the atoms separate types
    how = "grid: atom-wise Lelong dominance (values agree up to a bounded term)"
    if _dominates(a, b):
        return ComparabilityWitness(Relation.LEQ, how)
    if _dominates(b, a):
        return ComparabilityWitness(Relation.GEQ, how)
    return ComparabilityWitness(Relation.INCOMPARABLE, how)


def join_grid(a: GridPotential, b: GridPotential) -> GridPotential:
    return GridPotential.normalized(a.N, np.maximum(a.values, b.values), min_atoms(a.atoms, b.atoms), a.c)


def _compatible(a: GridPotential, b: GridPotential):
    if a.N != b.N:
        return f"grid sizes differ: {a.N} vs {b.N}"
    if a.c != b.c:
        return "background densities differ"
    return None


register_engine(
    MassProvider(
        tag="grid",
        payload_type=GridPotential,
        mass=mass_vector_grid,
        compatible=_compatible,
        compare=compare_grid,
        join=join_grid,
        transport=None,
        to_json=GridPotential.to_json,
    )
)

__all__ = [
    "BACKEND",
    "Divergence",
    "GridPotential",
    "IncompatibleData",
    "MonotonicityViolation",
    "NotInCone",
    "SingularBudget",
    "SolverConfig",
    "ceiling",
    "check_cone",
    "compare_grid",
    "concentration_check",
    "cone_defect",
    "default_depth",
    "green",
    "green_potential",
    "join_grid",
    "laplacian",
    "mass_tol",
    "mass_vector_grid",
    "np_mass",
    "p_bracket",
    "read_potential",
    "rooftop",
    "singular_part",
    "solve_cmae",
    "stability_experiment",
    "stability_families",
    "truncated_mass",
    "write_potential",
]
