"""Uniform-grid calculus on the torus and on truncated planar boxes.

Torus fields use the Fourier (FFT) representation throughout: integration is
the rectangle rule (spectrally exact for band-limited fields), derivatives
and Poisson inversion are exact in mode space.  Planar-box fields live on a
node grid that includes the boundary; derivatives are second-order finite
differences and integration is the trapezoid rule.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TorusDomain:
    """Rectangular fundamental cell with periodic identifications."""

    L1: float
    L2: float

    def __post_init__(self):
        if not (self.L1 > 0 and self.L2 > 0):
            raise ValueError("cell edge lengths must be positive")

    @property
    def area(self) -> float:
        return self.L1 * self.L2


@dataclass(frozen=True)
class PlanarBox:
    """Square truncation box [-R, R]^2 of the plane."""

    half_width: float

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("box half-width must be positive")

    @property
    def area(self) -> float:
        return (2.0 * self.half_width) ** 2


@dataclass(frozen=True)
class GridSpec:
    """Sample counts along the two axes."""

    M1: int
    M2: int

    def __post_init__(self):
        for m in (self.M1, self.M2):
            if m < 8 or m % 2 != 0:
                raise ValueError("grid sizes must be even and at least 8")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.M1, self.M2)


@dataclass(frozen=True)
class ScalarField:
    """Real samples of a function on a torus or planar-box grid.

    values[i, j] is the sample at node (x_i, y_j); see `node_coords`.
    """

    values: np.ndarray
    domain: TorusDomain | PlanarBox

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.ndim != 2:
            raise ValueError("field values must be a 2-D array")
        m1, m2 = v.shape
        if m1 < 8 or m2 < 8 or m1 % 2 or m2 % 2:
            raise ValueError("grid sizes must be even and at least 8")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def spacings(domain, shape) -> tuple[float, float]:
    """Grid spacings (hx, hy) for a given domain and sample shape."""
    m1, m2 = shape
    if isinstance(domain, TorusDomain):
        return domain.L1 / m1, domain.L2 / m2
    return 2.0 * domain.half_width / (m1 - 1), 2.0 * domain.half_width / (m2 - 1)


def node_coords(domain, shape) -> tuple[np.ndarray, np.ndarray]:
    """Meshgrid node coordinates (X, Y), indexed [i, j].

    Torus nodes cover the half-open cell [0, L) (no duplicated seam); box
    nodes include both boundaries of [-R, R].
    """
    m1, m2 = shape
    if isinstance(domain, TorusDomain):
        x = np.arange(m1) * (domain.L1 / m1)
        y = np.arange(m2) * (domain.L2 / m2)
    else:
        r = domain.half_width
        x = np.linspace(-r, r, m1)
        y = np.linspace(-r, r, m2)
    return np.meshgrid(x, y, indexing="ij")


def wavenumbers(domain: TorusDomain, shape) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Angular wavenumber grids (KX, KY, K2) for FFT-ordered modes."""
    m1, m2 = shape
    kx = 2.0 * np.pi * np.fft.fftfreq(m1, d=domain.L1 / m1)
    ky = 2.0 * np.pi * np.fft.fftfreq(m2, d=domain.L2 / m2)
    KX, KY = np.meshgrid(kx, ky, indexing="ij")
    return KX, KY, KX**2 + KY**2


def _require_same_grid(f: ScalarField, g: ScalarField):
    if f.shape != g.shape or f.domain != g.domain:
        raise ValueError("fields live on different grids")


def integrate(f: ScalarField) -> float:
    """Quadrature of f over its domain.

    Rectangle rule on the torus (spectrally accurate); trapezoid on a box.
    """
    hx, hy = spacings(f.domain, f.shape)
    if isinstance(f.domain, TorusDomain):
        return float(np.sum(f.values) * hx * hy)
    w1 = np.ones(f.shape[0])
    w1[0] = w1[-1] = 0.5
    w2 = np.ones(f.shape[1])
    w2[0] = w2[-1] = 0.5
    return float(np.einsum("i,j,ij->", w1, w2, f.values) * hx * hy)


def mean(f: ScalarField) -> float:
    return integrate(f) / f.domain.area


def laplacian(f: ScalarField) -> ScalarField:
    """Laplacian: spectral on the torus, 5-point stencil inside a box.

    On a box the boundary ring of the result is set to zero (the stencil is
    defined on interior nodes only).
    """
    if isinstance(f.domain, TorusDomain):
        _, _, K2 = wavenumbers(f.domain, f.shape)
        out = np.real(np.fft.ifft2(-K2 * np.fft.fft2(f.values)))
        return ScalarField(out, f.domain)
    hx, hy = spacings(f.domain, f.shape)
    v = f.values
    out = np.zeros_like(v)
    out[1:-1, 1:-1] = (v[2:, 1:-1] - 2.0 * v[1:-1, 1:-1] + v[:-2, 1:-1]) / hx**2 + (
        v[1:-1, 2:] - 2.0 * v[1:-1, 1:-1] + v[1:-1, :-2]
    ) / hy**2
    return ScalarField(out, f.domain)


def laplacian_stencil_torus(f: ScalarField) -> ScalarField:
    """Periodic 5-point Laplacian (second order); used as a Newton/Krylov
    preconditioner surrogate for the spectral operator."""
    if not isinstance(f.domain, TorusDomain):
        raise ValueError("torus field required")
    hx, hy = spacings(f.domain, f.shape)
    v = f.values
    out = (np.roll(v, -1, 0) - 2.0 * v + np.roll(v, 1, 0)) / hx**2
    out += (np.roll(v, -1, 1) - 2.0 * v + np.roll(v, 1, 1)) / hy**2
    return ScalarField(out, f.domain)


def poisson_solve_mean_zero(f: ScalarField, tol: float = 1e-8) -> ScalarField:
    """Mean-zero u with (spectral) Laplacian(u) = f - mean(f), torus only.

    Warns when |integral of f| exceeds tol*area: the compatible problem that
    is actually solved drops the mean.
    """
    if not isinstance(f.domain, TorusDomain):
        raise ValueError("Poisson inversion requires a torus field")
    total = integrate(f)
    if abs(total) > tol * f.domain.area:
        warnings.warn(
            f"source has nonzero mean ({total:.3e}); solving for f - mean(f)",
            stacklevel=2,
        )
    _, _, K2 = wavenumbers(f.domain, f.shape)
    fh = np.fft.fft2(f.values)
    uh = np.zeros_like(fh)
    nz = K2 > 0
    uh[nz] = -fh[nz] / K2[nz]
    return ScalarField(np.real(np.fft.ifft2(uh)), f.domain)


def grad_inner(f: ScalarField, g: ScalarField) -> float:
    """Dirichlet inner product: integral of grad(f).grad(g) over the domain.

    Spectral on the torus; centered differences + trapezoid on a box.
    """
    _require_same_grid(f, g)
    if isinstance(f.domain, TorusDomain):
        m1, m2 = f.shape
        _, _, K2 = wavenumbers(f.domain, f.shape)
        fh = np.fft.fft2(f.values)
        gh = np.fft.fft2(g.values)
        s = np.sum(K2 * fh * np.conj(gh)).real
        return float(s * f.domain.area / (m1 * m2) ** 2)
    hx, hy = spacings(f.domain, f.shape)
    fx, fy = np.gradient(f.values, hx, hy)
    gx, gy = np.gradient(g.values, hx, hy)
    return integrate(ScalarField(fx * gx + fy * gy, f.domain))


def gradient_fields(f: ScalarField) -> tuple[np.ndarray, np.ndarray]:
    """(df/dx, df/dy) samples; spectral on the torus, centered on a box."""
    if isinstance(f.domain, TorusDomain):
        KX, KY, _ = wavenumbers(f.domain, f.shape)
        fh = np.fft.fft2(f.values)
        fx = np.real(np.fft.ifft2(1j * KX * fh))
        fy = np.real(np.fft.ifft2(1j * KY * fh))
        return fx, fy
    hx, hy = spacings(f.domain, f.shape)
    return np.gradient(f.values, hx, hy)


def zeros(domain, grid: GridSpec) -> ScalarField:
    return ScalarField(np.zeros(grid.shape), domain)
