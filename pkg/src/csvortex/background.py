"""Singular background fields absorbing the Dirac sources at vortex points.

Planar geometry uses the closed-form profile
    u0_i = -sum_s m_s * ln(1 + mu |x - p_s|^-2),
whose distributional Laplacian is 4*pi*sum_s m_s*delta_{p_s} - h_i with the
explicit density h_i = sum_s m_s * 4*mu/(mu + |x - p_s|^2)^2.

Periodic geometry represents each Dirac point as its exact (band-limited)
Fourier series and inverts the Laplacian spectrally, producing the mean-zero
solution of
    Lap(u0_i) = 4*pi*sum_s m_s*delta_{p_s} - 4*pi*n_i/|Omega|.
The log singularity is carried by u0 analytically in the planar case and
band-limited in the periodic case; the fluctuation solved for later is
smooth in both.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import GridSpec, PlanarBox, ScalarField, TorusDomain, node_coords, wavenumbers

# Log-scale clamp: exp(-700) underflows cleanly to ~1e-304 without denormals.
U0_CLAMP = -700.0

Point = tuple[float, float, int]


@dataclass(frozen=True)
class VortexSet:
    """Prescribed zero sets of the two Higgs components, with multiplicities.

    points1/points2 are sequences of (x, y, multiplicity).
    """

    points1: tuple[Point, ...] = ()
    points2: tuple[Point, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "points1", tuple(tuple(p) for p in self.points1))
        object.__setattr__(self, "points2", tuple(tuple(p) for p in self.points2))
        for x, y, m in self.points1 + self.points2:
            if int(m) != m or m < 1:
                raise ValueError("vortex multiplicity must be a positive integer")
            if not (np.isfinite(x) and np.isfinite(y)):
                raise ValueError("vortex coordinates must be finite")

    @property
    def n1(self) -> int:
        return int(sum(p[2] for p in self.points1))

    @property
    def n2(self) -> int:
        return int(sum(p[2] for p in self.points2))


@dataclass(frozen=True)
class BackgroundPair:
    """Background fields (u0_1, u0_2) and, in planar geometry, the source
    densities (h_1, h_2).  Periodic backgrounds carry h_i = None: the role of
    h is played there by the constant 4*pi*n_i/|Omega|."""

    u0_1: ScalarField
    u0_2: ScalarField
    h_1: ScalarField | None
    h_2: ScalarField | None
    mu: float | None
    geometry: str  # "planar" | "periodic"


def _planar_component(points, mu, X, Y):
    u0 = np.zeros_like(X)
    h = np.zeros_like(X)
    with np.errstate(divide="ignore"):
        for x0, y0, m in points:
            r2 = (X - x0) ** 2 + (Y - y0) ** 2
            u0 -= m * np.log1p(mu / r2)
            h += m * 4.0 * mu / (mu + r2) ** 2
    return np.maximum(u0, U0_CLAMP), h


def planar_background(
    vortices: VortexSet, mu: float, box: PlanarBox, grid: GridSpec
) -> BackgroundPair:
    """Sample the closed-form planar background on a box grid.

    A vortex point landing exactly on a node gives u0 = -inf there, which is
    clamped so that exp(u0) vanishes; h stays finite at vortex points.
    """
    if not mu > 0:
        raise ValueError("mu must be positive")
    r = box.half_width
    for x0, y0, _ in vortices.points1 + vortices.points2:
        if abs(x0) >= r or abs(y0) >= r:
            raise ValueError("vortex point outside the truncation box")
    X, Y = node_coords(box, grid.shape)
    u01, h1 = _planar_component(vortices.points1, mu, X, Y)
    u02, h2 = _planar_component(vortices.points2, mu, X, Y)
    return BackgroundPair(
        u0_1=ScalarField(u01, box),
        u0_2=ScalarField(u02, box),
        h_1=ScalarField(h1, box),
        h_2=ScalarField(h2, box),
        mu=float(mu),
        geometry="planar",
    )


def _periodic_component(points, domain, shape):
    m1, m2 = shape
    KX, KY, K2 = wavenumbers(domain, shape)
    src_hat = np.zeros(shape, dtype=complex)
    for x0, y0, m in points:
        # band-limited Dirac comb: unit Fourier coefficient per cell mode
        src_hat += m * np.exp(-1j * (KX * x0 + KY * y0))
    src_hat *= 4.0 * np.pi * (m1 * m2) / domain.area
    u_hat = np.zeros_like(src_hat)
    nz = K2 > 0
    u_hat[nz] = -src_hat[nz] / K2[nz]  # DC mode dropped: mean-zero solution
    return np.real(np.fft.ifft2(u_hat))


def periodic_background(
    vortices: VortexSet, domain: TorusDomain, grid: GridSpec
) -> BackgroundPair:
    """Mean-zero spectral background on the torus.

    Each Dirac source is represented by its exact Fourier series truncated at
    the grid's modes, so the construction is exactly lattice-periodic.
    """
    for x0, y0, _ in vortices.points1 + vortices.points2:
        if not (0.0 <= x0 < domain.L1 and 0.0 <= y0 < domain.L2):
            raise ValueError("vortex point outside the fundamental cell")
    u01 = _periodic_component(vortices.points1, domain, grid.shape)
    u02 = _periodic_component(vortices.points2, domain, grid.shape)
    return BackgroundPair(
        u0_1=ScalarField(u01, domain),
        u0_2=ScalarField(u02, domain),
        h_1=None,
        h_2=None,
        mu=None,
        geometry="periodic",
    )
