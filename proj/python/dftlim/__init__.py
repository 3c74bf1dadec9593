"""Semiclassical-limit solvers for density-functional models.

The compiled core exposes radial grids, the four model families (tf_c0,
tf_d, vw_c0, vw_d), single-nucleus constrained/unconstrained minimization,
the limit cell energy g_b(Z, alpha), and multi-nucleus electron allocation.
"""

from dftlim._core import (
    ConfigError,
    GbEvaluator,
    Model,
    NumericalError,
    RadialGrid,
    SolveResult,
    allocate,
    attraction_energy,
    closed_form_tfc0,
    correlation_energy,
    coulomb_raw,
    gb_evaluator,
    hartree_bruteforce,
    integrate_volume,
    ionization_threshold,
    kinetic_energy,
    make_log_grid,
    make_model,
    solve_constrained,
    solve_unconstrained,
    total_energy,
)

__all__ = [
    "ConfigError",
    "GbEvaluator",
    "Model",
    "NumericalError",
    "RadialGrid",
    "SolveResult",
    "allocate",
    "attraction_energy",
    "closed_form_tfc0",
    "correlation_energy",
    "coulomb_raw",
    "gb_evaluator",
    "hartree_bruteforce",
    "integrate_volume",
    "ionization_threshold",
    "kinetic_energy",
    "make_log_grid",
    "make_model",
    "solve_constrained",
    "solve_unconstrained",
    "total_energy",
]

__version__ = "0.1.0"
