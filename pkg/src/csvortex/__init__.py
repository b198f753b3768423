"""Numerical solver for the coupled Chern-Simons-Higgs vortex equations on
the plane and on a doubly periodic domain."""

from .background import BackgroundPair, VortexSet, periodic_background, planar_background
from .coupling import (
    CouplingParams,
    bradlow_lambda_min,
    build_A,
    build_K,
    g_eval,
    g_minimum,
    rhs_smooth,
    smallest_eigenvalue,
)
from .fluxes import FluxReport, SweepReport, compute_fluxes, lambda_sweep
from .grids import (
    GridSpec,
    PlanarBox,
    ScalarField,
    TorusDomain,
    grad_inner,
    integrate,
    laplacian,
    poisson_solve_mean_zero,
)
from .mountain import PassPath, PathCollapseError, make_endpoint, mountain_pass
from .periodic import (
    ConstraintState,
    ConstraintViolationError,
    DiagnosticReport,
    FixedPointResult,
    InfeasibleError,
    PeriodicProblem,
    constraint_margin,
    energy_I,
    minimize_constrained,
    reduced_energy_J,
    solve_mean_fixed_point,
    verify_solution,
)
from .planar import PlanarProblem, fit_decay_rate, planar_energy, solve_planar
from .results import SolveResult

__all__ = [
    "BackgroundPair",
    "ConstraintState",
    "ConstraintViolationError",
    "CouplingParams",
    "DiagnosticReport",
    "FixedPointResult",
    "FluxReport",
    "GridSpec",
    "InfeasibleError",
    "PassPath",
    "PathCollapseError",
    "PeriodicProblem",
    "PlanarBox",
    "PlanarProblem",
    "ScalarField",
    "SolveResult",
    "SweepReport",
    "TorusDomain",
    "VortexSet",
    "bradlow_lambda_min",
    "build_A",
    "build_K",
    "compute_fluxes",
    "constraint_margin",
    "energy_I",
    "fit_decay_rate",
    "g_eval",
    "g_minimum",
    "grad_inner",
    "integrate",
    "lambda_sweep",
    "laplacian",
    "make_endpoint",
    "minimize_constrained",
    "mountain_pass",
    "periodic_background",
    "planar_background",
    "planar_energy",
    "poisson_solve_mean_zero",
    "reduced_energy_J",
    "rhs_smooth",
    "smallest_eigenvalue",
    "solve_mean_fixed_point",
    "solve_planar",
    "verify_solution",
]
