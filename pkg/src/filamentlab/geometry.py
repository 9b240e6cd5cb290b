"""Domain geometry, scale parameters, cutoff functions and filament curves.

Conventions used throughout the package:

* the domain is ``omega x T_L`` with ``omega`` a disk or an axis-aligned,
  origin-centered rectangle; the origin always lies in the interior,
* the transverse grid is cell-centered on the bounding box of ``omega``,
  the vertical grid has nodes ``z_k = k L/Nz`` (periodic),
* points of the cross-section are stored either as ``(x, y)`` float pairs
  or as complex numbers ``x + iy``; filament curves are complex arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DISK = "disk"
RECTANGLE = "rectangle"

_MIN_GRID = 8


def as_points(a) -> np.ndarray:
    """Normalize a point set to a float array of shape (n, 2).

    Accepts an (n, 2) array-like or a complex array of shape (n,).
    """
    a = np.asarray(a)
    if np.iscomplexobj(a):
        a = a.reshape(-1)
        return np.column_stack([a.real, a.imag]).astype(float)
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.shape[-1] != 2:
        raise ValueError(f"expected points of shape (n, 2), got {a.shape}")
    return a


def as_complex(a) -> np.ndarray:
    """Normalize a point set to a complex array of shape (n,).

    Complex or 1-D input is read as complex values; 2-D input as (n, 2)
    coordinate pairs.
    """
    a = np.asarray(a)
    if np.iscomplexobj(a) or a.ndim <= 1:
        return a.reshape(-1).astype(complex)
    pts = as_points(a)
    return pts[:, 0] + 1j * pts[:, 1]


def perp(v):
    """90-degree rotation (x, y) -> (-y, x), the ``v^perp`` convention."""
    v = np.asarray(v, dtype=float)
    out = np.empty_like(v)
    out[..., 0] = -v[..., 1]
    out[..., 1] = v[..., 0]
    return out


@dataclass(frozen=True)
class DomainGeometry:
    """Cross-section shape, vertical period and grid resolutions.

    ``radius`` is used for the disk, ``half_widths`` for the rectangle.
    Spacings are derived: ``dz = L/Nz`` exactly, and the transverse
    spacings divide the bounding box of the cross-section.
    """

    shape: str
    L: float
    Nx: int
    Ny: int
    Nz: int
    radius: float = 0.0
    half_widths: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.shape not in (DISK, RECTANGLE):
            raise ValueError(f"unknown shape {self.shape!r}")
        if min(self.Nx, self.Ny, self.Nz) < _MIN_GRID:
            raise ValueError(f"grid counts must be >= {_MIN_GRID}")
        if self.L <= 0:
            raise ValueError("vertical period must be positive")
        if self.shape == DISK and self.radius <= 0:
            raise ValueError("disk radius must be positive")
        if self.shape == RECTANGLE and min(self.half_widths) <= 0:
            raise ValueError("rectangle half-widths must be positive")

    @classmethod
    def disk(cls, radius, L, Nx, Ny=None, Nz=8):
        return cls(DISK, L, Nx, Ny if Ny is not None else Nx, Nz, radius=radius)

    @classmethod
    def rectangle(cls, ax, ay, L, Nx, Ny=None, Nz=8):
        return cls(RECTANGLE, L, Nx, Ny if Ny is not None else Nx, Nz,
                   half_widths=(float(ax), float(ay)))

    @property
    def bounds(self):
        """Half-widths (ax, ay) of the bounding box of the cross-section."""
        if self.shape == DISK:
            return (self.radius, self.radius)
        return self.half_widths

    @property
    def dx(self):
        return 2.0 * self.bounds[0] / self.Nx

    @property
    def dy(self):
        return 2.0 * self.bounds[1] / self.Ny

    @property
    def dz(self):
        return self.L / self.Nz

    @property
    def cell_area(self):
        return self.dx * self.dy

    def x_centers(self):
        ax = self.bounds[0]
        return -ax + (np.arange(self.Nx) + 0.5) * self.dx

    def y_centers(self):
        ay = self.bounds[1]
        return -ay + (np.arange(self.Ny) + 0.5) * self.dy

    def z_nodes(self):
        return np.arange(self.Nz) * self.dz

    def center_mesh(self):
        """Meshgrid (X, Y) of transverse cell centers, indexing='ij'."""
        return np.meshgrid(self.x_centers(), self.y_centers(), indexing="ij")

    def boundary_distance(self, p):
        """Signed distance from ``p`` to the lateral boundary (>0 inside)."""
        pts = as_points(p)
        if self.shape == DISK:
            d = self.radius - np.hypot(pts[:, 0], pts[:, 1])
        else:
            ax, ay = self.half_widths
            d = np.minimum(ax - np.abs(pts[:, 0]), ay - np.abs(pts[:, 1]))
        return d if d.size > 1 else float(d[0])

    def contains(self, p, margin=0.0):
        return np.all(np.greater(self.boundary_distance(p), margin))

    def scaled(self, factor):
        """Transverse rescaling ``omega -> factor * omega`` (same grid counts, same L)."""
        if self.shape == DISK:
            return DomainGeometry(DISK, self.L, self.Nx, self.Ny, self.Nz,
                                  radius=self.radius * factor)
        ax, ay = self.half_widths
        return DomainGeometry(RECTANGLE, self.L, self.Nx, self.Ny, self.Nz,
                              half_widths=(ax * factor, ay * factor))


def h_epsilon(eps: float) -> float:
    """The filament displacement scale 1/sqrt(|log eps|) (natural log)."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    return 1.0 / math.sqrt(-math.log(eps))


@dataclass(frozen=True)
class ScaleParameters:
    """Core scale ``epsilon``, its derived displacement scale, and the
    calibrated single-vortex core-energy constant ``gamma``."""

    epsilon: float
    gamma: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in (0, 1]")

    @property
    def h_epsilon(self):
        return h_epsilon(self.epsilon)


# ---------------------------------------------------------------------------
# Cutoff profile: fixed C^2 quintic bump, 1 on [0, 1], 0 on [2, inf),
# monotone nonincreasing in between.

def chi(s):
    """The fixed smooth plateau cutoff: 1 for s < 1, 0 for s >= 2."""
    s = np.asarray(s, dtype=float)
    t = np.clip(s - 1.0, 0.0, 1.0)
    val = 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    return val if val.ndim else float(val)


def chi_r(s, r):
    """Rescaled cutoff ``chi(s / r)``."""
    return chi(np.asarray(s, dtype=float) / r)


@dataclass(frozen=True)
class CutoffSpec:
    """Cutoff radius together with the fixed plateau profile."""

    r: float
    profile: object = chi

    def __post_init__(self):
        if self.r <= 0:
            raise ValueError("cutoff radius must be positive")

    def __call__(self, s):
        return self.profile(np.asarray(s, dtype=float) / self.r)


# ---------------------------------------------------------------------------
# Filament configurations


@dataclass
class FilamentConfiguration:
    """``n`` periodic curves z -> f_j(z) in R^2, sampled on the z-grid.

    ``samples`` is complex of shape (n, Nz); index Nz wraps to 0.
    """

    samples: np.ndarray
    L: float

    def __post_init__(self):
        samples = np.atleast_2d(np.asarray(self.samples, dtype=complex))
        if not np.all(np.isfinite(samples)):
            raise ValueError("filament samples must be finite")
        if self.L <= 0:
            raise ValueError("vertical period must be positive")
        self.samples = samples

    @property
    def n(self):
        return self.samples.shape[0]

    @property
    def Nz(self):
        return self.samples.shape[1]

    @property
    def dz(self):
        return self.L / self.Nz

    def z_nodes(self):
        return np.arange(self.Nz) * self.dz

    def z_index(self, z):
        return int(round(float(z) / self.dz)) % self.Nz

    def points_at(self, z) -> np.ndarray:
        """Filament positions at the grid node nearest to ``z``, shape (n,) complex."""
        return self.samples[:, self.z_index(z)].copy()

    def wavenumbers(self):
        return 2.0 * np.pi * np.fft.fftfreq(self.Nz, d=self.dz)

    def derivative(self, order=1) -> np.ndarray:
        """Spectral z-derivative of every curve, shape (n, Nz) complex."""
        k = self.wavenumbers()
        mult = (1j * k) ** order
        return np.fft.ifft(mult * np.fft.fft(self.samples, axis=1), axis=1)

    def translated(self, b) -> "FilamentConfiguration":
        b = complex(b) if np.isscalar(b) or np.iscomplexobj(np.asarray(b)) else complex(*b)
        return FilamentConfiguration(self.samples + b, self.L)

    def copy(self) -> "FilamentConfiguration":
        return FilamentConfiguration(self.samples.copy(), self.L)

    @classmethod
    def from_constant_points(cls, points, L, Nz):
        pts = as_complex(points)
        return cls(np.repeat(pts[:, None], Nz, axis=1), L)


def min_separation(f: FilamentConfiguration) -> float:
    """Minimum over the z-grid and ordered pairs j != k of |f_j - f_k|.

    Returns +inf for a single filament (infimum over an empty pair set).
    """
    if f.n < 2:
        return math.inf
    diff = f.samples[:, None, :] - f.samples[None, :, :]
    dist = np.abs(diff)
    iu = np.triu_indices(f.n, k=1)
    return float(dist[iu].min())


# ---------------------------------------------------------------------------
# Vortex-centered quadratic cutoffs


def _chi_quadratic(points, x, r):
    """sum_i chi_r(|x - p_i|) |x - p_i|^2 for x an (..., 2) array."""
    pts = as_points(points)
    x = np.asarray(x, dtype=float)
    dx = x[..., None, 0] - pts[:, 0]
    dy = x[..., None, 1] - pts[:, 1]
    d = np.hypot(dx, dy)
    return np.sum(chi_r(d, r) * d * d, axis=-1)


def cutoff_chi_f(f: FilamentConfiguration, r, x, z):
    """Unscaled vortex-centered cutoff ``chi^f_r(x, z)``."""
    val = _chi_quadratic(f.points_at(z), np.asarray(x, dtype=float), r)
    return float(val) if np.ndim(val) == 0 else val


def cutoff_chi_f_scaled(f: FilamentConfiguration, r, eps, x, z):
    """Rescaled cutoff ``chi^f_{r,eps} = h^-2 chi^{hf}_{hr}`` at (x, z)."""
    h = h_epsilon(eps)
    scaled = FilamentConfiguration(h * f.samples, f.L)
    val = _chi_quadratic(scaled.points_at(z), np.asarray(x, dtype=float), h * r)
    return (float(val) if np.ndim(val) == 0 else val) / (h * h)
