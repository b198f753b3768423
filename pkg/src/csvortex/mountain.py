"""Second periodic solution via a numerical mountain-pass search.

A discretized path connects the constrained minimizer to a constant-shifted
endpoint of much lower energy.  Orthogonal relaxation sweeps deform the path
downhill (the path maximum is non-increasing), a short climbing stage rides
the remaining gradient up the ridge, and a Newton-Krylov polish turns the
path maximum into a genuine critical point of the full functional, distinct
from the minimizer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import ScalarField, wavenumbers
from .periodic import (
    PeriodicProblem,
    _PeriodicSystem,
    energy_I,
    energy_I_gradient,
)
from .results import SolveResult


class PathCollapseError(RuntimeError):
    """Deformation found no barrier: degenerate (non-strict) minimum."""


@dataclass
class PassPath:
    """Discretized path: fields at the sample nodes and their energies."""

    samples: list[tuple[np.ndarray, np.ndarray]]
    energies: list[float]

    @property
    def max_index(self) -> int:
        return int(np.argmax(self.energies))


def _energy(system: _PeriodicSystem, a1: np.ndarray, a2: np.ndarray) -> float:
    return energy_I(
        ScalarField(a1, system.domain),
        ScalarField(a2, system.domain),
        system.bg,
        system.params,
        system.vortices,
        system.domain,
    )


def _grad(system: _PeriodicSystem, a1: np.ndarray, a2: np.ndarray):
    return energy_I_gradient(
        ScalarField(a1, system.domain),
        ScalarField(a2, system.domain),
        system.bg,
        system.params,
        system.vortices,
        system.domain,
    )


def make_endpoint(
    local_min: SolveResult, problem: PeriodicProblem, xi0: float = 2.0
) -> tuple[ScalarField, ScalarField]:
    """Constant-shifted endpoint with energy at least one unit below the
    minimizer; the shift doubles from xi0 until the gap opens.

    Shifts beyond 100 indicate a coupling too close to infeasibility and are
    rejected.
    """
    if not xi0 > 1.0:
        raise ValueError("initial shift must exceed 1")
    system = _PeriodicSystem(problem)
    v1 = local_min.v1.values
    v2 = local_min.v2.values
    e_min = _energy(system, v1, v2)
    xi = float(xi0)
    while True:
        if xi > 100.0:
            raise RuntimeError(
                "endpoint shift exceeded 100 before opening an energy gap; "
                "coupling likely near the infeasible regime"
            )
        if _energy(system, v1 - xi, v2 - xi) < e_min - 1.0:
            break
        xi *= 2.0
    return (
        ScalarField(v1 - xi, problem.domain),
        ScalarField(v2 - xi, problem.domain),
    )


def _respace(samples: list[tuple[np.ndarray, np.ndarray]]):
    """Redistribute interior nodes uniformly in L2 arc length along the
    polyline (linear interpolation between old nodes)."""
    P = len(samples)
    seg = np.zeros(P)
    for j in range(1, P):
        d1 = samples[j][0] - samples[j - 1][0]
        d2 = samples[j][1] - samples[j - 1][1]
        seg[j] = np.sqrt(np.sum(d1 * d1) + np.sum(d2 * d2))
    s = np.cumsum(seg)
    total = s[-1]
    if total == 0.0:
        return samples
    targets = np.linspace(0.0, total, P)
    out = [samples[0]]
    for t in targets[1:-1]:
        j = int(np.searchsorted(s, t))
        j = min(max(j, 1), P - 1)
        s0, s1 = s[j - 1], s[j]
        theta = 0.0 if s1 == s0 else (t - s0) / (s1 - s0)
        out.append(
            (
                (1.0 - theta) * samples[j - 1][0] + theta * samples[j][0],
                (1.0 - theta) * samples[j - 1][1] + theta * samples[j][1],
            )
        )
    out.append(samples[-1])
    return out


def mountain_pass(
    local_min: SolveResult,
    problem: PeriodicProblem,
    n_nodes: int = 13,
    max_sweeps: int = 60,
    climb_steps: int = 300,
    distinctness_rel: float = 1e-2,
) -> SolveResult:
    """Saddle-type second solution between the minimizer and the shifted
    endpoint.

    Raises PathCollapseError when the deformation finds no energy barrier
    above the minimizer (degenerate-minimum diagnostic).
    """
    if not local_min.converged:
        raise ValueError("mountain pass requires a converged local minimizer")
    system = _PeriodicSystem(problem)
    dom = problem.domain
    v1 = local_min.v1.values.copy()
    v2 = local_min.v2.values.copy()
    end1, end2 = make_endpoint(local_min, problem)

    ts = np.linspace(0.0, 1.0, n_nodes)
    samples = [
        ((1.0 - t) * v1 + t * end1.values, (1.0 - t) * v2 + t * end2.values) for t in ts
    ]
    energies = [_energy(system, a1, a2) for a1, a2 in samples]
    path = PassPath(samples=samples, energies=energies)
    e_min = energies[0]

    _, _, K2 = wavenumbers(dom, v1.shape)
    lam = problem.params.lam

    def precond(g):
        gh = np.fft.fft2(g) / (K2 + lam)
        return np.real(np.fft.ifft2(gh))

    # Phase A: orthogonal relaxation; the path maximum is non-increasing.
    max_history = [max(energies)]
    for _ in range(max_sweeps):
        moved = 0.0
        for j in range(1, n_nodes - 1):
            a1, a2 = path.samples[j]
            g1, g2 = _grad(system, a1, a2)
            t1 = path.samples[j + 1][0] - path.samples[j - 1][0]
            t2 = path.samples[j + 1][1] - path.samples[j - 1][1]
            tn = np.sqrt(np.sum(t1 * t1) + np.sum(t2 * t2))
            if tn > 0.0:
                t1 /= tn
                t2 /= tn
                proj = np.sum(g1 * t1) + np.sum(g2 * t2)
                g1 = g1 - proj * t1
                g2 = g2 - proj * t2
            p1 = precond(g1)
            p2 = precond(g2)
            e0 = path.energies[j]
            alpha = 1.0
            while alpha > 1e-10:
                c1 = a1 - alpha * p1
                c2 = a2 - alpha * p2
                ec = _energy(system, c1, c2)
                if ec <= e0:
                    path.samples[j] = (c1, c2)
                    path.energies[j] = ec
                    moved += alpha * np.sqrt(np.sum(p1 * p1) + np.sum(p2 * p2))
                    break
                alpha *= 0.5
        respaced = _respace(path.samples)
        re_energies = [_energy(system, a1, a2) for a1, a2 in respaced]
        if max(re_energies) <= max_history[-1] + 1e-12 * abs(max_history[-1]):
            path.samples = respaced
            path.energies = re_energies
        max_history.append(max(path.energies))
        m = path.max_index
        g1, g2 = _grad(system, *path.samples[m])
        gnorm = max(np.max(np.abs(g1)), np.max(np.abs(g2)))
        if gnorm < 1e-2 or moved < 1e-12:
            break

    m = path.max_index
    if path.energies[m] <= e_min + 1e-10 * max(1.0, abs(e_min)):
        raise PathCollapseError(
            "path deformation found no energy barrier above the minimizer; "
            "degenerate (non-strict) minimum suspected"
        )

    # Phase B: climbing refinement of the pass node along the path tangent.
    a1, a2 = path.samples[m]
    t1 = path.samples[min(m + 1, n_nodes - 1)][0] - path.samples[max(m - 1, 0)][0]
    t2 = path.samples[min(m + 1, n_nodes - 1)][1] - path.samples[max(m - 1, 0)][1]
    tn = np.sqrt(np.sum(t1 * t1) + np.sum(t2 * t2))
    if tn > 0.0:
        t1 /= tn
        t2 /= tn
    for _ in range(climb_steps):
        g1, g2 = _grad(system, a1, a2)
        gnorm = max(np.max(np.abs(g1)), np.max(np.abs(g2)))
        if gnorm < 1e-3:
            break
        proj = np.sum(g1 * t1) + np.sum(g2 * t2)
        c1 = g1 - 2.0 * proj * t1
        c2 = g2 - 2.0 * proj * t2
        a1 = a1 - 0.5 * precond(c1)
        a2 = a2 - 0.5 * precond(c2)

    # Phase C: Newton polish on the full field equations.
    s1, s2, res, steps = system.newton_polish(a1, a2, problem.tol)

    d1 = s1 - v1
    d2 = s2 - v2
    hx, hy = system.hx, system.hy
    dist = np.sqrt((np.sum(d1 * d1) + np.sum(d2 * d2)) * hx * hy)
    floor = distinctness_rel * np.sqrt(dom.area)
    if dist <= floor:
        raise PathCollapseError(
            f"polished critical point coincides with the minimizer "
            f"(L2 distance {dist:.3e} <= floor {floor:.3e})"
        )

    sf1 = ScalarField(s1, dom)
    sf2 = ScalarField(s2, dom)
    energy = _energy(system, s1, s2)
    return SolveResult(
        v1=sf1,
        v2=sf2,
        u1=ScalarField(system.bg.u0_1.values + s1, dom),
        u2=ScalarField(system.bg.u0_2.values + s2, dom),
        el_residual=float(res),
        energy_value=float(energy),
        iterations=steps,
        converged=bool(res <= problem.tol),
        diagnostics={
            "path_max_history": max_history,
            "saddle_energy": float(energy),
            "minimizer_energy": float(e_min),
            "distance_from_minimizer": float(dist),
            "path_energies": list(path.energies),
        },
    )
