"""First doubly periodic solution via constrained minimization.

The unknown is split into a mean part (c1, c2) and mean-zero fluctuations
(w1, w2).  On the admissible set (two inequality constraints on the
exponential moments of w) the means are recovered per evaluation from a
scalar fixed point with a unique positive root; the reduced functional J of
the fluctuations alone is then minimized by projected descent.  A
Newton-Krylov polish on the full Euler-Lagrange system finishes to
tolerance.  All torus calculus is spectral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .background import BackgroundPair, VortexSet, periodic_background
from .coupling import CouplingParams, bradlow_lambda_min, rhs_smooth, rhs_smooth_jacobian
from .grids import (
    GridSpec,
    ScalarField,
    TorusDomain,
    grad_inner,
    integrate,
    node_coords,
    spacings,
    wavenumbers,
)
from .results import SolveResult

MARGIN_FLOOR_REL = 1e-10  # interior floor for the constraint margins, times area^2


class InfeasibleError(RuntimeError):
    """No admissible iterate: coupling too weak for the requested vortices."""


class ConstraintViolationError(ValueError):
    """Evaluation requested outside the admissible set."""


@dataclass(frozen=True)
class PeriodicProblem:
    params: CouplingParams
    vortices: VortexSet
    domain: TorusDomain
    grid: GridSpec
    tol: float = 1e-8
    max_iter: int = 10_000

    def __post_init__(self):
        if self.params.kappa <= 1.0:
            raise ValueError("periodic solves require kappa > 1")


@dataclass(frozen=True)
class ConstraintState:
    """Exponential moments of the shifted fluctuations and the topological
    constants entering the mean-value equations.

    E1/E2/Q1/Q2 are the first and second moments of exp(u0_i + w_i); X is
    the mixed moment of exp(u0_1 + u0_2 + w1 + w2).
    """

    E1: float
    E2: float
    Q1: float
    Q2: float
    X: float
    b1: float
    b2: float
    area: float


@dataclass(frozen=True)
class FixedPointResult:
    c1: float
    c2: float
    root_X: float
    residual: float
    bracket: tuple[float, float]


def vortex_constants(params: CouplingParams, vortices: VortexSet) -> tuple[float, float]:
    """Constants (b1, b2) multiplying the mean values in the reduced system."""
    n, k = params.N, params.kappa
    n1, n2 = vortices.n1, vortices.n2
    b1 = 4.0 * np.pi * ((1.0 + (n - 1.0) * k) * n1 + (k - 1.0) * n2) / k
    b2 = 4.0 * np.pi * ((n - 1.0) * (k - 1.0) * n1 + (n - 1.0 + k) * n2) / ((n - 1.0) * k)
    return b1, b2


def constraint_state(
    w1: ScalarField,
    w2: ScalarField,
    bg: BackgroundPair,
    params: CouplingParams,
    vortices: VortexSet,
    domain: TorusDomain,
) -> ConstraintState:
    a1 = bg.u0_1.values + w1.values
    a2 = bg.u0_2.values + w2.values
    if max(np.max(a1), np.max(a2)) > 300.0:
        raise OverflowError("exponential moments overflow")
    e1 = np.exp(a1)
    e2 = np.exp(a2)
    b1, b2 = vortex_constants(params, vortices)
    return ConstraintState(
        E1=integrate(ScalarField(e1, domain)),
        E2=integrate(ScalarField(e2, domain)),
        Q1=integrate(ScalarField(e1 * e1, domain)),
        Q2=integrate(ScalarField(e2 * e2, domain)),
        X=integrate(ScalarField(e1 * e2, domain)),
        b1=b1,
        b2=b2,
        area=domain.area,
    )


def margins_from_state(state: ConstraintState, params: CouplingParams) -> tuple[float, float]:
    n, k, lam = params.N, params.kappa, params.lam
    m1 = state.E1**2 - 4.0 * (n - 1.0 + k) * state.b1 * state.Q1 / (n * n * lam)
    m2 = (
        state.E2**2
        - 4.0 * (n - 1.0) * (1.0 + (n - 1.0) * k) * state.b2 * state.Q2 / (n * n * lam)
    )
    return m1, m2


def constraint_margin(
    w1: ScalarField,
    w2: ScalarField,
    bg: BackgroundPair,
    params: CouplingParams,
    vortices: VortexSet,
    domain: TorusDomain,
) -> tuple[float, float]:
    """Slack of the two admissibility inequalities; both >= 0 means the pair
    (w1, w2) is admissible."""
    state = constraint_state(w1, w2, bg, params, vortices, domain)
    return margins_from_state(state, params)


def solve_mean_fixed_point(state: ConstraintState, params: CouplingParams) -> FixedPointResult:
    """Unique positive root of the mean-value equations on the admissible set.

    Returns log-scale means (c1, c2) solving the coupled quadratic relations
    with the "+" branch of the square root: bracketed bisection on
    f(X) = X - f1(f2(X)) followed by a Newton polish.
    """
    n, k, lam = params.N, params.kappa, params.lam
    if k <= 1.0:
        raise ValueError("fixed point requires kappa > 1")
    m1, m2 = margins_from_state(state, params)
    if m1 < 0.0 or m2 < 0.0:
        raise ConstraintViolationError(
            f"constraint margins negative: ({m1:.3e}, {m2:.3e})"
        )
    E1, E2, Q1, Q2, X12 = state.E1, state.E2, state.Q1, state.Q2, state.X
    b1, b2 = state.b1, state.b2
    a1 = n - 1.0 + k
    a2 = 1.0 / (n - 1.0) + k
    d1 = 4.0 * a1 * b1 * Q1 / lam
    d2 = 4.0 * (1.0 + (n - 1.0) * k) * b2 * Q2 / ((n - 1.0) * lam)

    def f1(y):
        p = n * E1 + (k - 1.0) * y * X12
        disc = p * p - d1
        if disc < 0.0:
            raise ConstraintViolationError("negative discriminant in mean recovery")
        return (p + math.sqrt(disc)) / (2.0 * a1 * Q1)

    def f2(y):
        p = n / (n - 1.0) * E2 + (k - 1.0) * y * X12
        disc = p * p - d2
        if disc < 0.0:
            raise ConstraintViolationError("negative discriminant in mean recovery")
        return (p + math.sqrt(disc)) / (2.0 * a2 * Q2)

    def df1(y):
        p = n * E1 + (k - 1.0) * y * X12
        return (k - 1.0) * X12 * f1(y) / math.sqrt(p * p - d1)

    def df2(y):
        p = n / (n - 1.0) * E2 + (k - 1.0) * y * X12
        return (k - 1.0) * X12 * f2(y) / math.sqrt(p * p - d2)

    def g(x):
        return x - f1(f2(x))

    hi = 1.0
    doublings = 0
    while g(hi) <= 0.0:
        hi *= 2.0
        doublings += 1
        if doublings > 200:
            raise RuntimeError("no sign change found for the mean fixed point")
    lo = 0.0
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-15 * hi:
            break
    x0 = 0.5 * (lo + hi)
    for _ in range(40):
        gx = g(x0)
        dg = 1.0 - df1(f2(x0)) * df2(x0)
        if dg == 0.0:
            break
        step = gx / dg
        x_new = x0 - step
        if x_new <= 0.0:
            break
        x0 = x_new
        if abs(step) <= 1e-16 * x0:
            break

    c1 = math.log(x0)
    c2 = math.log(f2(x0))
    # direct substitution into the two quadratic mean relations
    ec1, ec2 = x0, f2(x0)
    t1 = a1 * ec1 * ec1 * Q1
    p1v = ec1 * (n * E1 + (k - 1.0) * ec2 * X12)
    t2 = a2 * ec2 * ec2 * Q2
    p2v = ec2 * (n / (n - 1.0) * E2 + (k - 1.0) * ec1 * X12)
    r1 = t1 - p1v + b1 / lam
    r2 = t2 - p2v + b2 / lam
    residual = max(
        abs(r1) / max(t1, p1v, b1 / lam, 1e-300),
        abs(r2) / max(t2, p2v, b2 / lam, 1e-300),
    )
    if ec1 > 1.0 + 1e-10 or ec2 > 1.0 + 1e-10:
        raise RuntimeError("mean bound exp(c_i) <= 1 violated; numerical breakdown")
    return FixedPointResult(c1=c1, c2=c2, root_X=x0, residual=residual, bracket=(lo, hi))


# ----------------------------------------------------------------------
# energy functionals
# ----------------------------------------------------------------------

def energy_I(
    v1: ScalarField,
    v2: ScalarField,
    bg: BackgroundPair,
    params: CouplingParams,
    vortices: VortexSet,
    domain: TorusDomain,
) -> float:
    """Full periodic energy functional of the fluctuation pair (v1, v2)."""
    n, k, lam = params.N, params.kappa, params.lam
    b1, b2 = vortex_constants(params, vortices)
    g11 = grad_inner(v1, v1)
    g22 = grad_inner(v2, v2)
    g12 = grad_inner(v1, v2)
    q1 = np.exp(bg.u0_1.values + v1.values) - 1.0
    q2 = np.exp(bg.u0_2.values + v2.values) - 1.0
    quad = (
        (n - 1.0 + k) * integrate(ScalarField(q1 * q1, domain))
        + (1.0 / (n - 1.0) + k) * integrate(ScalarField(q2 * q2, domain))
        + 2.0 * (1.0 - k) * integrate(ScalarField(q1 * q2, domain))
    )
    lin = b1 * integrate(v1) / domain.area + b2 * integrate(v2) / domain.area
    return (
        0.5 * (n - 1.0 + 1.0 / k) * g11
        + 0.5 * (1.0 / (n - 1.0) + 1.0 / k) * g22
        + (1.0 - 1.0 / k) * g12
        + 0.5 * lam * quad
        + lin
    )


def _reduced_J_from_state(
    w1, w2, state: ConstraintState, fp: FixedPointResult, params: CouplingParams
) -> float:
    n, k, lam = params.N, params.kappa, params.lam
    g11 = grad_inner(w1, w1)
    g22 = grad_inner(w2, w2)
    g12 = grad_inner(w1, w2)
    area = state.area
    ec1, ec2 = math.exp(fp.c1), math.exp(fp.c2)
    mid = 0.5 * lam * (
        n * (area - ec1 * state.E1) + n / (n - 1.0) * (area - ec2 * state.E2)
    )
    return (
        0.5 * (n - 1.0 + 1.0 / k) * g11
        + 0.5 * (1.0 / (n - 1.0) + 1.0 / k) * g22
        + (1.0 - 1.0 / k) * g12
        + mid
        + state.b1 * fp.c1
        + state.b2 * fp.c2
    )


def reduced_energy_J(
    w1: ScalarField,
    w2: ScalarField,
    bg: BackgroundPair,
    params: CouplingParams,
    vortices: VortexSet,
    domain: TorusDomain,
) -> float:
    """Reduced functional of the mean-zero pair, means eliminated by the
    fixed point.  Requires (w1, w2) admissible."""
    state = constraint_state(w1, w2, bg, params, vortices, domain)
    fp = solve_mean_fixed_point(state, params)
    # constant accounting for the vortex number (independent of w)
    n = params.N
    topo = -2.0 * np.pi * n * (vortices.n1 + vortices.n2 / (n - 1.0))
    return _reduced_J_from_state(w1, w2, state, fp, params) + topo


def reduced_energy_J_gradient(
    w1: ScalarField,
    w2: ScalarField,
    bg: BackgroundPair,
    params: CouplingParams,
    vortices: VortexSet,
    domain: TorusDomain,
) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise L2 gradient of the reduced functional on the mean-zero
    subspace.

    Equals the mean-zero projection of the full functional's gradient at
    (w + c(w)): the mean equations are stationary at the fixed point, so no
    implicit differentiation through c(w) is needed.
    """
    state = constraint_state(w1, w2, bg, params, vortices, domain)
    fp = solve_mean_fixed_point(state, params)
    n, k, lam = params.N, params.kappa, params.lam
    _, _, K2 = wavenumbers(domain, w1.shape)
    u1 = bg.u0_1.values + w1.values + fp.c1
    u2 = bg.u0_2.values + w2.values + fp.c2
    e1 = np.exp(u1)
    e2 = np.exp(u2)
    n1 = (n - 1.0 + k) * e1 * (e1 - 1.0) + (1.0 - k) * e1 * (e2 - 1.0)
    n2 = (1.0 / (n - 1.0) + k) * e2 * (e2 - 1.0) + (1.0 - k) * e2 * (e1 - 1.0)
    lap1 = np.real(np.fft.ifft2(-K2 * np.fft.fft2(w1.values)))
    lap2 = np.real(np.fft.ifft2(-K2 * np.fft.fft2(w2.values)))
    g1 = -((n - 1.0 + 1.0 / k) * lap1 + (1.0 - 1.0 / k) * lap2) + lam * n1
    g2 = -((1.0 - 1.0 / k) * lap1 + (1.0 / (n - 1.0) + 1.0 / k) * lap2) + lam * n2
    g1 -= g1.mean()
    g2 -= g2.mean()
    return g1, g2


def energy_I_gradient(
    v1: ScalarField,
    v2: ScalarField,
    bg: BackgroundPair,
    params: CouplingParams,
    vortices: VortexSet,
    domain: TorusDomain,
) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise L2 gradient of the full functional with respect to (v1, v2),
    means included (no projection)."""
    n, k, lam = params.N, params.kappa, params.lam
    b1, b2 = vortex_constants(params, vortices)
    _, _, K2 = wavenumbers(domain, v1.shape)
    lap1 = np.real(np.fft.ifft2(-K2 * np.fft.fft2(v1.values)))
    lap2 = np.real(np.fft.ifft2(-K2 * np.fft.fft2(v2.values)))
    e1 = np.exp(bg.u0_1.values + v1.values)
    e2 = np.exp(bg.u0_2.values + v2.values)
    n1 = (n - 1.0 + k) * e1 * (e1 - 1.0) + (1.0 - k) * e1 * (e2 - 1.0)
    n2 = (1.0 / (n - 1.0) + k) * e2 * (e2 - 1.0) + (1.0 - k) * e2 * (e1 - 1.0)
    g1 = -((n - 1.0 + 1.0 / k) * lap1 + (1.0 - 1.0 / k) * lap2) + lam * n1 + b1 / domain.area
    g2 = -((1.0 - 1.0 / k) * lap1 + (1.0 / (n - 1.0) + 1.0 / k) * lap2) + lam * n2 + b2 / domain.area
    return g1, g2


def el_residual_fields(
    v1: np.ndarray,
    v2: np.ndarray,
    bg: BackgroundPair,
    params: CouplingParams,
    vortices: VortexSet,
    domain: TorusDomain,
) -> tuple[np.ndarray, np.ndarray]:
    """Residual of the reduced field equations at (v1, v2): the spectral
    Laplacian of v minus the smooth right-hand side minus the flux sink."""
    shape = v1.shape
    _, _, K2 = wavenumbers(domain, shape)
    lap1 = np.real(np.fft.ifft2(-K2 * np.fft.fft2(v1)))
    lap2 = np.real(np.fft.ifft2(-K2 * np.fft.fft2(v2)))
    r1, r2 = rhs_smooth(bg.u0_1.values + v1, bg.u0_2.values + v2, params)
    s1 = 4.0 * np.pi * vortices.n1 / domain.area
    s2 = 4.0 * np.pi * vortices.n2 / domain.area
    return lap1 - r1 - s1, lap2 - r2 - s2


# ----------------------------------------------------------------------
# constrained minimization driver
# ----------------------------------------------------------------------

class _PeriodicSystem:
    def __init__(self, problem: PeriodicProblem):
        self.problem = problem
        self.params = problem.params
        self.vortices = problem.vortices
        self.domain = problem.domain
        self.grid = problem.grid
        self.bg = periodic_background(problem.vortices, problem.domain, problem.grid)
        self.area = problem.domain.area
        self.floor = MARGIN_FLOOR_REL * self.area**2
        _, _, self.K2 = wavenumbers(problem.domain, problem.grid.shape)
        self.hx, self.hy = spacings(problem.domain, problem.grid.shape)
        self._fd_lap = None

    # gradient of J w.r.t. the mean-zero pair (projection of the full one)
    def grad_J(self, w1, w2, fp: FixedPointResult):
        n, k, lam = self.params.N, self.params.kappa, self.params.lam
        u1 = self.bg.u0_1.values + w1 + fp.c1
        u2 = self.bg.u0_2.values + w2 + fp.c2
        e1 = np.exp(u1)
        e2 = np.exp(u2)
        n1 = (n - 1.0 + k) * e1 * (e1 - 1.0) + (1.0 - k) * e1 * (e2 - 1.0)
        n2 = (1.0 / (n - 1.0) + k) * e2 * (e2 - 1.0) + (1.0 - k) * e2 * (e1 - 1.0)
        lap1 = np.real(np.fft.ifft2(-self.K2 * np.fft.fft2(w1)))
        lap2 = np.real(np.fft.ifft2(-self.K2 * np.fft.fft2(w2)))
        g1 = -((n - 1.0 + 1.0 / k) * lap1 + (1.0 - 1.0 / k) * lap2) + lam * n1
        g2 = -((1.0 - 1.0 / k) * lap1 + (1.0 / (n - 1.0) + 1.0 / k) * lap2) + lam * n2
        g1 -= g1.mean()
        g2 -= g2.mean()
        return g1, g2

    def precondition(self, g):
        gh = np.fft.fft2(g)
        gh /= self.K2 + self.params.lam
        gh[0, 0] = 0.0
        return np.real(np.fft.ifft2(gh))

    def evaluate(self, w1, w2):
        """(J, state, fixed point) at a mean-zero pair; raises outside the
        admissible set."""
        sf1 = ScalarField(w1, self.domain)
        sf2 = ScalarField(w2, self.domain)
        state = constraint_state(sf1, sf2, self.bg, self.params, self.vortices, self.domain)
        m1, m2 = margins_from_state(state, self.params)
        if m1 <= self.floor or m2 <= self.floor:
            raise ConstraintViolationError(f"margins at floor: ({m1:.3e}, {m2:.3e})")
        fp = solve_mean_fixed_point(state, self.params)
        n = self.params.N
        topo = -2.0 * np.pi * n * (self.vortices.n1 + self.vortices.n2 / (n - 1.0))
        J = _reduced_J_from_state(sf1, sf2, state, fp, self.params) + topo
        return J, state, fp

    def el_sup(self, v1, v2):
        f1, f2 = el_residual_fields(
            v1, v2, self.bg, self.params, self.vortices, self.domain
        )
        return max(np.max(np.abs(f1)), np.max(np.abs(f2)))

    # -- Newton-Krylov polish on the full system -----------------------
    def _fd_laplacian_matrix(self):
        if self._fd_lap is None:
            m1, m2 = self.grid.shape
            ix = sp.identity(m1)
            iy = sp.identity(m2)
            ex = np.ones(m1)
            ey = np.ones(m2)
            tx = sp.diags([ex, -2.0 * ex, ex], [-1, 0, 1], shape=(m1, m1)).tolil()
            tx[0, -1] = 1.0
            tx[-1, 0] = 1.0
            ty = sp.diags([ey, -2.0 * ey, ey], [-1, 0, 1], shape=(m2, m2)).tolil()
            ty[0, -1] = 1.0
            ty[-1, 0] = 1.0
            self._fd_lap = (
                sp.kron(tx.tocsr() / self.hx**2, iy) + sp.kron(ix, ty.tocsr() / self.hy**2)
            ).tocsr()
        return self._fd_lap

    def newton_polish(self, v1, v2, tol, max_steps=30):
        shape = v1.shape
        npts = v1.size

        def F(z):
            f1, f2 = el_residual_fields(
                z[:npts].reshape(shape),
                z[npts:].reshape(shape),
                self.bg,
                self.params,
                self.vortices,
                self.domain,
            )
            return np.concatenate([f1.ravel(), f2.ravel()])

        z = np.concatenate([v1.ravel(), v2.ravel()])
        fz = F(z)
        steps = 0
        while np.max(np.abs(fz)) > tol and steps < max_steps:
            u1 = self.bg.u0_1.values + z[:npts].reshape(shape)
            u2 = self.bg.u0_2.values + z[npts:].reshape(shape)
            j11, j12, j21, j22 = rhs_smooth_jacobian(u1, u2, self.params)
            L = self._fd_laplacian_matrix()
            M = sp.bmat(
                [
                    [L - sp.diags(j11.ravel()), -sp.diags(j12.ravel())],
                    [-sp.diags(j21.ravel()), L - sp.diags(j22.ravel())],
                ],
                format="csc",
            )
            lu = spla.splu(M)

            def jmv(dz):
                d1 = dz[:npts].reshape(shape)
                d2 = dz[npts:].reshape(shape)
                l1 = np.real(np.fft.ifft2(-self.K2 * np.fft.fft2(d1)))
                l2 = np.real(np.fft.ifft2(-self.K2 * np.fft.fft2(d2)))
                out1 = l1 - j11 * d1 - j12 * d2
                out2 = l2 - j21 * d1 - j22 * d2
                return np.concatenate([out1.ravel(), out2.ravel()])

            Jop = spla.LinearOperator((2 * npts, 2 * npts), matvec=jmv)
            Mop = spla.LinearOperator((2 * npts, 2 * npts), matvec=lu.solve)
            step, info = spla.lgmres(Jop, -fz, M=Mop, rtol=1e-10, atol=0.0, maxiter=200)
            if info != 0:
                break
            alpha = 1.0
            n0 = np.linalg.norm(fz)
            while alpha > 1e-8:
                z_try = z + alpha * step
                f_try = F(z_try)
                if np.linalg.norm(f_try) < (1.0 - 1e-4 * alpha) * n0:
                    z, fz = z_try, f_try
                    break
                alpha *= 0.5
            else:
                break
            steps += 1
        return z[:npts].reshape(shape), z[npts:].reshape(shape), np.max(np.abs(fz)), steps


def minimize_constrained(
    problem: PeriodicProblem, w_start: tuple[np.ndarray, np.ndarray] | None = None
) -> SolveResult:
    """Constrained minimizer of the reduced functional, polished to a
    solution of the field equations.

    Raises InfeasibleError when the coupling is below the necessary area
    bound, when no admissible starting point exists, or when the descent is
    driven to the constraint boundary (the signature of an infeasible
    coupling strength).
    """
    params = problem.params
    lam_min = bradlow_lambda_min(
        params, problem.vortices.n1, problem.vortices.n2, problem.domain.area
    )
    if params.lam < lam_min:
        raise InfeasibleError(
            f"coupling lam={params.lam:.6g} below the necessary bound "
            f"{lam_min:.6g} for n1={problem.vortices.n1}, n2={problem.vortices.n2}, "
            f"area={problem.domain.area:.6g}"
        )
    system = _PeriodicSystem(problem)
    shape = problem.grid.shape
    if w_start is None:
        w1 = np.zeros(shape)
        w2 = np.zeros(shape)
    else:
        w1 = np.asarray(w_start[0], dtype=float).copy()
        w2 = np.asarray(w_start[1], dtype=float).copy()
        w1 -= w1.mean()
        w2 -= w2.mean()

    try:
        J, state, fp = system.evaluate(w1, w2)
    except ConstraintViolationError as exc:
        raise InfeasibleError(
            f"no admissible starting point (boundary approach at start): {exc}; "
            f"lam={params.lam:.6g} is likely below the solvable threshold "
            f"(necessary bound {lam_min:.6g})"
        ) from exc

    J_hist = [J]
    margin_hist = [margins_from_state(state, params)]
    iterations = 0
    newton_gate = max(1e-4, problem.tol)
    descent_budget = min(500, problem.max_iter)

    d1 = d2 = None
    prev = None
    res = system.el_sup(w1 + fp.c1, w2 + fp.c2)
    while res > newton_gate and iterations < descent_budget:
        g1, g2 = system.grad_J(w1, w2, fp)
        p1 = system.precondition(g1)
        p2 = system.precondition(g2)
        if d1 is None:
            d1, d2 = p1, p2
        else:
            num = np.sum(g1 * (p1 - prev[0])) + np.sum(g2 * (p2 - prev[1]))
            den = np.sum(prev[2] * prev[0]) + np.sum(prev[3] * prev[1])
            beta = max(0.0, num / den) if den != 0 else 0.0
            d1 = p1 + beta * d1
            d2 = p2 + beta * d2
        prev = (p1, p2, g1, g2)
        slope = -(np.sum(g1 * d1) + np.sum(g2 * d2)) * system.hx * system.hy
        if slope >= 0.0:
            d1, d2 = p1, p2
            slope = -(np.sum(g1 * d1) + np.sum(g2 * d2)) * system.hx * system.hy
        alpha = 1.0
        accepted = False
        while alpha > 1e-12:
            try:
                J_try, state_try, fp_try = system.evaluate(w1 - alpha * d1, w2 - alpha * d2)
            except (ConstraintViolationError, OverflowError):
                alpha *= 0.5
                continue
            if J_try <= J_hist[-1] + 1e-4 * alpha * slope:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            # cannot move without breaching the constraints: boundary approach
            m1, m2 = margin_hist[-1]
            if min(m1, m2) < 1e-3 * system.area**2:
                raise InfeasibleError(
                    f"descent driven to the admissible-set boundary "
                    f"(margins {m1:.3e}, {m2:.3e}); lam={params.lam:.6g} too small"
                )
            break
        w1 = w1 - alpha * d1
        w2 = w2 - alpha * d2
        J, state, fp = J_try, state_try, fp_try
        J_hist.append(J)
        margin_hist.append(margins_from_state(state, params))
        res = system.el_sup(w1 + fp.c1, w2 + fp.c2)
        iterations += 1

    v1 = w1 + fp.c1
    v2 = w2 + fp.c2
    v1, v2, res, newton_steps = system.newton_polish(v1, v2, problem.tol)
    iterations += newton_steps

    # re-split and recompute the constraint picture at the final iterate
    c1 = float(v1.mean())
    c2 = float(v2.mean())
    w1f = ScalarField(v1 - c1, problem.domain)
    w2f = ScalarField(v2 - c2, problem.domain)
    state_f = constraint_state(w1f, w2f, system.bg, params, problem.vortices, problem.domain)
    m1f, m2f = margins_from_state(state_f, params)
    sf1 = ScalarField(v1, problem.domain)
    sf2 = ScalarField(v2, problem.domain)
    energy = energy_I(sf1, sf2, system.bg, params, problem.vortices, problem.domain)
    converged = bool(res <= problem.tol)
    return SolveResult(
        v1=sf1,
        v2=sf2,
        u1=ScalarField(system.bg.u0_1.values + v1, problem.domain),
        u2=ScalarField(system.bg.u0_2.values + v2, problem.domain),
        el_residual=float(res),
        energy_value=float(energy),
        iterations=iterations,
        converged=converged,
        diagnostics={
            "J_history": J_hist,
            "margins": (m1f, m2f),
            "margin_history": margin_hist,
            "c1": c1,
            "c2": c2,
            "newton_steps": newton_steps,
        },
    )


# ----------------------------------------------------------------------
# verification
# ----------------------------------------------------------------------

@dataclass
class DiagnosticReport:
    """verify_solution output: numeric margins plus per-check pass flags."""

    max_u1: float
    max_u2: float
    amplitude_below_vacuum: bool
    negativity_ok: bool
    identity_rel_1: float
    identity_rel_2: float
    identities_ok: bool
    el_residual: float
    el_ok: bool
    margin1: float
    margin2: float
    margins_ok: bool
    checks: dict = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return (
            self.amplitude_below_vacuum
            and self.negativity_ok
            and self.identities_ok
            and self.el_ok
        )


def _nonvortex_mask(domain, shape, points):
    X, Y = node_coords(domain, shape)
    hx, hy = spacings(domain, shape)
    cut = 1.5 * max(hx, hy)
    mask = np.ones(shape, dtype=bool)
    for x0, y0, _ in points:
        dx = np.abs(X - x0)
        dy = np.abs(Y - y0)
        dx = np.minimum(dx, domain.L1 - dx)
        dy = np.minimum(dy, domain.L2 - dy)
        mask &= np.hypot(dx, dy) > cut
    return mask


def verify_solution(
    result: SolveResult,
    bg: BackgroundPair,
    params: CouplingParams,
    vortices: VortexSet,
    domain: TorusDomain,
    el_tol: float = 1e-6,
    identity_tol: float = 1e-6,
    negativity_margin: float = 1e-10,
) -> DiagnosticReport:
    """Check the pointwise bounds, the integral identities, the field-equation
    residual and the constraint margins of a candidate periodic solution."""
    u1 = result.u1.values
    u2 = result.u2.values
    v1 = result.v1.values
    v2 = result.v2.values
    n, k, lam = params.N, params.kappa, params.lam

    max_u1 = float(np.max(u1))
    max_u2 = float(np.max(u2))
    amplitude_ok = bool(max_u1 < 0.0 and max_u2 < 0.0)
    if vortices.n1 + vortices.n2 == 0:
        negativity_ok = bool(max(np.max(np.abs(u1)), np.max(np.abs(u2))) < 1e-8)
        amplitude_ok = negativity_ok
    else:
        m1 = _nonvortex_mask(domain, u1.shape, vortices.points1)
        m2 = _nonvortex_mask(domain, u2.shape, vortices.points2)
        negativity_ok = bool(
            np.max(u1[m1]) < -negativity_margin and np.max(u2[m2]) < -negativity_margin
        )

    e1 = np.exp(u1)
    e2 = np.exp(u2)
    E1 = integrate(ScalarField(e1, domain))
    E2 = integrate(ScalarField(e2, domain))
    Q1 = integrate(ScalarField(e1 * e1, domain))
    Q2 = integrate(ScalarField(e2 * e2, domain))
    X12 = integrate(ScalarField(e1 * e2, domain))
    b1, b2 = vortex_constants(params, vortices)
    t1 = (n - 1.0 + k) * Q1
    t2 = n * E1
    t3 = (k - 1.0) * X12
    id1 = t1 - t2 - t3 + b1 / lam
    rel1 = abs(id1) / max(abs(t1), abs(t2), abs(t3), b1 / lam, 1e-300)
    s1 = (1.0 / (n - 1.0) + k) * Q2
    s2 = n / (n - 1.0) * E2
    s3 = (k - 1.0) * X12
    id2 = s1 - s2 - s3 + b2 / lam
    rel2 = abs(id2) / max(abs(s1), abs(s2), abs(s3), b2 / lam, 1e-300)

    f1, f2 = el_residual_fields(v1, v2, bg, params, vortices, domain)
    el = float(max(np.max(np.abs(f1)), np.max(np.abs(f2))))

    c1 = float(v1.mean())
    c2 = float(v2.mean())
    w1 = ScalarField(v1 - c1, domain)
    w2 = ScalarField(v2 - c2, domain)
    mg1, mg2 = constraint_margin(w1, w2, bg, params, vortices, domain)

    return DiagnosticReport(
        max_u1=max_u1,
        max_u2=max_u2,
        amplitude_below_vacuum=amplitude_ok,
        negativity_ok=negativity_ok,
        identity_rel_1=float(rel1),
        identity_rel_2=float(rel2),
        identities_ok=bool(rel1 < identity_tol and rel2 < identity_tol),
        el_residual=el,
        el_ok=bool(el < el_tol),
        margin1=float(mg1),
        margin2=float(mg2),
        margins_ok=bool(mg1 >= 0.0 and mg2 >= 0.0),
        checks={
            "mean_values": (c1, c2),
            "moments": (E1, E2, Q1, Q2, X12),
        },
    )
