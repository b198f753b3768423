"""Session-scoped solves shared across test modules (each takes seconds to
minutes; computed once)."""

import numpy as np
import pytest

from csvortex.background import VortexSet, periodic_background
from csvortex.coupling import CouplingParams, bradlow_lambda_min
from csvortex.grids import GridSpec, TorusDomain
from csvortex.periodic import PeriodicProblem, minimize_constrained
from csvortex.planar import PlanarProblem, solve_planar

L = 2.0 * np.pi
TORUS = TorusDomain(L, L)
TORUS_VORTICES = VortexSet(
    points1=((L / 2.0, L / 2.0, 1),),
    points2=((L / 4.0, 3.0 * L / 4.0, 1),),
)
BRADLOW = bradlow_lambda_min(CouplingParams(2, 3.0, 1.0), 1, 1, TORUS.area)


@pytest.fixture(scope="session")
def std_periodic():
    """N=2, kappa=3, one vortex per component on a (2pi)^2 cell, coupling at
    four times the necessary bound, 128^2 grid."""
    params = CouplingParams(2, 3.0, 4.0 * BRADLOW)
    grid = GridSpec(128, 128)
    problem = PeriodicProblem(params, TORUS_VORTICES, TORUS, grid, tol=1e-9)
    result = minimize_constrained(problem)
    bg = periodic_background(TORUS_VORTICES, TORUS, grid)
    return problem, result, bg


@pytest.fixture(scope="session")
def std_periodic_8x():
    """Same geometry at eight times the bound (mountain-pass regime)."""
    params = CouplingParams(2, 3.0, 8.0 * BRADLOW)
    grid = GridSpec(128, 128)
    problem = PeriodicProblem(params, TORUS_VORTICES, TORUS, grid, tol=1e-9)
    result = minimize_constrained(problem)
    bg = periodic_background(TORUS_VORTICES, TORUS, grid)
    return problem, result, bg


@pytest.fixture(scope="session")
def planar_single():
    """Single vortex at the origin, N=2, kappa=3, lam=2, R=10, 256^2 grid,
    converged to near machine precision (decay-fit quality)."""
    params = CouplingParams(2, 3.0, 2.0)
    problem = PlanarProblem(
        params,
        VortexSet(points1=((0.0, 0.0, 1),)),
        half_width=10.0,
        grid=GridSpec(256, 256),
        mu=4.0,
        tol=1e-12,
    )
    result = solve_planar(problem)
    return problem, result
