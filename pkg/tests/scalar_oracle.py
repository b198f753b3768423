"""Standalone single-field vortex solver used as an independent oracle.

Solves the scalar self-dual equation

    Lap(u) = lam * e^u * (e^u - 1) + 4*pi*sum_s m_s*delta_{p_s}

on the box [-R, R]^2 with u -> 0 at the truncation edge, via the same
background split (u = u0 + v) but a completely separate implementation:
its own background sampling, its own sparse operators, plain damped Newton.
Nothing here imports the package's solver machinery.
"""

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


def solve_scalar_abelian(points, lam, half_width, m, mu, tol=1e-11, max_newton=60):
    """Return (u, v, X, Y) on an m-by-m grid over [-R, R]^2."""
    R = half_width
    x = np.linspace(-R, R, m)
    h = x[1] - x[0]
    X, Y = np.meshgrid(x, x, indexing="ij")

    u0 = np.zeros_like(X)
    hsrc = np.zeros_like(X)
    with np.errstate(divide="ignore"):
        for x0, y0, mult in points:
            r2 = (X - x0) ** 2 + (Y - y0) ** 2
            u0 -= mult * np.log1p(mu / r2)
            hsrc += mult * 4.0 * mu / (mu + r2) ** 2
    u0 = np.maximum(u0, -700.0)

    n = m - 2
    e = np.ones(n)
    t = sp.diags([e[:-1], -2.0 * e, e[:-1]], [-1, 0, 1]) / h**2
    lap = (sp.kron(t, sp.identity(n)) + sp.kron(sp.identity(n), t)).tocsr()

    v = np.zeros_like(X)
    v[0, :], v[-1, :], v[:, 0], v[:, -1] = -u0[0, :], -u0[-1, :], -u0[:, 0], -u0[:, -1]

    def lap5(f):
        out = np.zeros_like(f)
        out[1:-1, 1:-1] = (
            f[2:, 1:-1] + f[:-2, 1:-1] + f[1:-1, 2:] + f[1:-1, :-2] - 4.0 * f[1:-1, 1:-1]
        ) / h**2
        return out

    def residual(v):
        ev = np.exp(u0 + v)
        r = lap5(v) - lam * ev * (ev - 1.0) - hsrc
        r[0, :] = r[-1, :] = r[:, 0] = r[:, -1] = 0.0
        return r

    for _ in range(max_newton):
        r = residual(v)
        rn = np.max(np.abs(r[1:-1, 1:-1]))
        if rn < tol:
            break
        ev = np.exp(u0 + v)[1:-1, 1:-1].ravel()
        J = lap - sp.diags(lam * ev * (2.0 * ev - 1.0))
        dv = spla.splu(J.tocsc()).solve(-r[1:-1, 1:-1].ravel())
        step = np.zeros_like(v)
        step[1:-1, 1:-1] = dv.reshape(n, n)
        alpha = 1.0
        r0 = np.linalg.norm(r)
        while alpha > 1e-8:
            r_try = residual(v + alpha * step)
            if np.linalg.norm(r_try) < r0:
                break
            alpha *= 0.5
        v = v + alpha * step

    return u0 + v, v, X, Y
