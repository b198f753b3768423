"""Result containers shared by the planar and periodic solvers."""

from __future__ import annotations

from dataclasses import dataclass, field

from .grids import ScalarField


@dataclass
class SolveResult:
    """Converged (or best-effort) solution of one vortex problem.

    v1/v2 are the fluctuations on top of the background, u1/u2 the total
    log-amplitude fields.  el_residual is the sup-norm of the discrete field
    equations at the returned iterate; diagnostics carries solver-specific
    extras (energy history, constraint margins, mean values, ...).
    """

    v1: ScalarField
    v2: ScalarField
    u1: ScalarField
    u2: ScalarField
    el_residual: float
    energy_value: float
    iterations: int
    converged: bool
    diagnostics: dict = field(default_factory=dict)
