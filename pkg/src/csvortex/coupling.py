"""Closed-form algebra of the coupled vortex system.

Everything here is scalar/2x2 arithmetic: the coupling matrix K, the
symmetric quadratic-form matrix A, the smooth (non-singular) part of the
right-hand side of the field equations, the constraint function g, and the
area-coupling lower bound on the coupling strength.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CouplingParams:
    """Model parameters: color rank N, coupling ratio kappa, strength lam.

    kappa is the ratio of the two Chern-Simons levels; lam is the scaled
    coupling 1/(4*kappa_1^2).  Solvers on the torus additionally require
    kappa > 1; that is enforced there, not here.
    """

    N: int
    kappa: float
    lam: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError("N must be an integer >= 2")
        object.__setattr__(self, "N", int(self.N))
        if not (np.isfinite(self.kappa) and self.kappa > 0):
            raise ValueError("kappa must be positive and finite")
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ValueError("lam must be positive and finite")

    @property
    def kappa1(self) -> float:
        """Level of the U(1) factor implied by lam = 1/(4*kappa_1^2)."""
        return 1.0 / (2.0 * np.sqrt(self.lam))

    @property
    def kappa2(self) -> float:
        return self.kappa1 / self.kappa


def build_K(params: CouplingParams) -> np.ndarray:
    """Coupling matrix K; rows sum to 1 and the eigenvalues are {1, kappa}."""
    n, k = params.N, params.kappa
    return np.array(
        [
            [n - 1.0 + k, 1.0 - k],
            [(n - 1.0) * (1.0 - k), 1.0 + (n - 1.0) * k],
        ]
    ) / n


def build_A(params: CouplingParams, use_inverse_kappa: bool = False) -> np.ndarray:
    """Symmetric positive-definite quadratic-form matrix A(N, kt).

    kt is kappa by default, 1/kappa when `use_inverse_kappa` is set; the
    entries carry 1/kt, so the flag effectively swaps kappa <-> 1/kappa.
    """
    n = params.N
    kt = (1.0 / params.kappa) if use_inverse_kappa else params.kappa
    r = 1.0 / kt
    return np.array(
        [
            [n - 1.0 + r, 1.0 - r],
            [1.0 - r, 1.0 / (n - 1.0) + r],
        ]
    ) / n


def smallest_eigenvalue(A: np.ndarray, sym_tol: float = 1e-12) -> float:
    """Smaller eigenvalue of a symmetric 2x2 matrix, in closed form.

    This is the coercivity constant of the quadratic form and is computed
    from the assembled matrix itself (not from any separate printed formula;
    see README for the normalization caveat).
    """
    A = np.asarray(A, dtype=float)
    if A.shape != (2, 2) or not np.all(np.isfinite(A)):
        raise ValueError("expected a finite 2x2 matrix")
    scale = max(1.0, np.max(np.abs(A)))
    if abs(A[0, 1] - A[1, 0]) > sym_tol * scale:
        raise ValueError("matrix is not symmetric")
    a, b, d = A[0, 0], 0.5 * (A[0, 1] + A[1, 0]), A[1, 1]
    return float(0.5 * (a + d - np.hypot(a - d, 2.0 * b)))


def rhs_smooth(u1, u2, params: CouplingParams):
    """Smooth part of the right-hand side of the field equations, pointwise.

    Input may be scalars or same-shape arrays of log-amplitudes; output is
    the pair of lam-scaled polynomial expressions in (e^{u1}, e^{u2}),
    excluding the Dirac source terms.  Inputs whose exponential overflows
    are rejected.
    """
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    if not (np.all(np.isfinite(u1)) and np.all(np.isfinite(u2))):
        raise ValueError("non-finite field values")
    if np.any(u1 > 700.0) or np.any(u2 > 700.0):
        raise OverflowError("exp(u) overflows double precision")
    n, k, lam = params.N, params.kappa, params.lam
    a = np.exp(u1)
    b = np.exp(u2)
    c11 = (n - 1.0 + k) ** 2
    c1x = -(k - 1.0) * (n - (n - 2.0) * (k - 1.0))
    c12 = (1.0 - k) * (1.0 + (n - 1.0) * k)
    r1 = (c11 * a * a + c1x * a * b + c12 * b * b) / n**2 - (
        (n - 1.0 + k) * a + (1.0 - k) * b
    ) / n
    c21 = (n - 1.0) * (1.0 - k) * (n - 1.0 + k)
    c2x = -(n - 1.0) * (k - 1.0) * (2.0 + (n - 2.0) * k)
    c22 = (1.0 + (n - 1.0) * k) ** 2
    r2 = (c21 * a * a + c2x * a * b + c22 * b * b) / n**2 - (
        (n - 1.0) * (1.0 - k) * a + (1.0 + (n - 1.0) * k) * b
    ) / n
    return lam * r1, lam * r2


def rhs_smooth_jacobian(u1, u2, params: CouplingParams):
    """Pointwise 2x2 Jacobian of `rhs_smooth` with respect to (u1, u2).

    Returned as (J11, J12, J21, J22) arrays; used by Newton solvers.
    """
    n, k, lam = params.N, params.kappa, params.lam
    a = np.exp(np.asarray(u1, dtype=float))
    b = np.exp(np.asarray(u2, dtype=float))
    c11 = (n - 1.0 + k) ** 2
    c1x = -(k - 1.0) * (n - (n - 2.0) * (k - 1.0))
    c12 = (1.0 - k) * (1.0 + (n - 1.0) * k)
    j11 = lam * ((2.0 * c11 * a * a + c1x * a * b) / n**2 - (n - 1.0 + k) * a / n)
    j12 = lam * ((c1x * a * b + 2.0 * c12 * b * b) / n**2 - (1.0 - k) * b / n)
    c21 = (n - 1.0) * (1.0 - k) * (n - 1.0 + k)
    c2x = -(n - 1.0) * (k - 1.0) * (2.0 + (n - 2.0) * k)
    c22 = (1.0 + (n - 1.0) * k) ** 2
    j21 = lam * ((2.0 * c21 * a * a + c2x * a * b) / n**2 - (n - 1.0) * (1.0 - k) * a / n)
    j22 = lam * ((c2x * a * b + 2.0 * c22 * b * b) / n**2 - (1.0 + (n - 1.0) * k) * b / n)
    return j11, j12, j21, j22


def g_eval(t1, t2, params: CouplingParams):
    """Constraint function g(t1, t2); global minimum -N^2/(4(N-1)) at (1/2, 1/2)."""
    n, k = params.N, params.kappa
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    return (
        (n - 1.0 + k) * t1 * t1
        + (1.0 / (n - 1.0) + k) * t2 * t2
        - 2.0 * (k - 1.0) * t1 * t2
        - n * t1
        - n / (n - 1.0) * t2
    )


def g_minimum(params: CouplingParams) -> float:
    """Value of g at its unique global minimum (1/2, 1/2)."""
    n = params.N
    return -(n * n) / (4.0 * (n - 1.0))


def bradlow_lambda_min(params: CouplingParams, n1: int, n2: int, area: float) -> float:
    """Necessary lower bound on lam for periodic solutions to exist."""
    if area <= 0:
        raise ValueError("area must be positive")
    if n1 < 0 or n2 < 0:
        raise ValueError("vortex numbers must be nonnegative")
    n = params.N
    return 16.0 * np.pi * ((n - 1.0) * n1 + n2) / (n * area)
