"""Vorticity extraction: momentum, plaquette Jacobian, vortex detection.

The momentum is ``j = Im(conj(u) grad_x u)`` (horizontal components only);
the Jacobian is realized as half the discrete curl of ``j`` on grid
plaquettes, so that the sum over any rectangle of plaquettes times the cell
area telescopes exactly to half the trapezoid circulation of ``j`` around
its boundary.  Each unit vortex carries Jacobian mass pi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage


@dataclass(frozen=True)
class Vortex:
    center: tuple
    charge: int


@dataclass
class SliceVortexSet:
    """Detected vortex centers with integer charges on one horizontal slice."""

    z: float
    vortices: list

    @property
    def centers(self) -> np.ndarray:
        if not self.vortices:
            return np.zeros((0, 2))
        return np.array([v.center for v in self.vortices], dtype=float)

    @property
    def charges(self) -> np.ndarray:
        return np.array([v.charge for v in self.vortices], dtype=int)

    def __len__(self):
        return len(self.vortices)


def momentum_slice(u2d, dx, dy):
    """j = Im(conj(u) grad u) by centered differences (one-sided at edges)."""
    ux = np.gradient(u2d, dx, axis=0)
    uy = np.gradient(u2d, dy, axis=1)
    cu = np.conj(u2d)
    return (cu * ux).imag, (cu * uy).imag


def momentum_j(field):
    """Per-slice momentum of a 3D field, two arrays of shape (Nx, Ny, Nz)."""
    g = field.geom
    ux = np.gradient(field.values, g.dx, axis=0)
    uy = np.gradient(field.values, g.dy, axis=1)
    cu = np.conj(field.values)
    return (cu * ux).imag, (cu * uy).imag


def jacobian_slice(u2d, dx, dy):
    """Plaquette-centered Jacobian: half the discrete curl of the momentum."""
    jx, jy = momentum_slice(u2d, dx, dy)
    circ = (
        0.5 * dx * (jx[:-1, :-1] + jx[1:, :-1])
        + 0.5 * dy * (jy[1:, :-1] + jy[1:, 1:])
        - 0.5 * dx * (jx[:-1, 1:] + jx[1:, 1:])
        - 0.5 * dy * (jy[:-1, :-1] + jy[:-1, 1:])
    )
    return circ / (2.0 * dx * dy)


def jacobian_J(field):
    """Plaquette Jacobian of a 3D field, shape (Nx-1, Ny-1, Nz)."""
    g = field.geom
    out = np.empty((g.Nx - 1, g.Ny - 1, g.Nz))
    for iz in range(g.Nz):
        out[:, :, iz] = jacobian_slice(field.values[:, :, iz], g.dx, g.dy)
    return out


def momentum_circulation(jx, jy, dx, dy, i0, i1, j0, j1):
    """Trapezoid circulation of (jx, jy) around the cell-center rectangle
    [i0, i1] x [j0, j1] (counterclockwise)."""
    bottom = np.trapezoid(jx[i0:i1 + 1, j0], dx=dx)
    top = np.trapezoid(jx[i0:i1 + 1, j1], dx=dx)
    left = np.trapezoid(jy[i0, j0:j1 + 1], dx=dy)
    right = np.trapezoid(jy[i1, j0:j1 + 1], dx=dy)
    return bottom + right - top - left


def winding_numbers(u2d) -> np.ndarray:
    """Integer phase winding of each plaquette (sum of principal-value
    phase differences around the cell, divided by 2 pi)."""
    def pv(a, b):
        return np.angle(b * np.conj(a))

    d1 = pv(u2d[:-1, :-1], u2d[1:, :-1])
    d2 = pv(u2d[1:, :-1], u2d[1:, 1:])
    d3 = pv(u2d[1:, 1:], u2d[:-1, 1:])
    d4 = pv(u2d[:-1, 1:], u2d[:-1, :-1])
    return np.rint((d1 + d2 + d3 + d4) / (2.0 * np.pi)).astype(int)


_WINDOW = 2  # |J|-weighted centroid half-window, in plaquettes


def detect_slice(u2d, geom, z=0.0) -> SliceVortexSet:
    """Detect vortices on one slice: winding marks charged plaquettes,
    8-connected charged plaquettes cluster, centers from a 5x5
    |J|-weighted centroid around each cluster."""
    w = winding_numbers(u2d)
    vortices = []
    if np.any(w != 0):
        jac = jacobian_slice(u2d, geom.dx, geom.dy)
        absj = np.abs(jac)
        px = geom.x_centers()[:-1] + 0.5 * geom.dx
        py = geom.y_centers()[:-1] + 0.5 * geom.dy
        labels, nlab = ndimage.label(w != 0, structure=np.ones((3, 3), dtype=int))
        for lab in range(1, nlab + 1):
            mask = labels == lab
            charge = int(w[mask].sum())
            if charge == 0:
                continue  # sub-cell dipole, below resolution
            ii, jj = np.nonzero(mask)
            ci = int(round(ii.mean()))
            cj = int(round(jj.mean()))
            i0, i1 = max(ci - _WINDOW, 0), min(ci + _WINDOW + 1, w.shape[0])
            j0, j1 = max(cj - _WINDOW, 0), min(cj + _WINDOW + 1, w.shape[1])
            wt = absj[i0:i1, j0:j1]
            total = wt.sum()
            if total <= 0:
                cx, cy = px[ci], py[cj]
            else:
                cx = float((wt * px[i0:i1, None]).sum() / total)
                cy = float((wt * py[None, j0:j1]).sum() / total)
            vortices.append(Vortex((cx, cy), charge))
    return SliceVortexSet(z=float(z), vortices=vortices)


def detect_vortices(field, z) -> SliceVortexSet:
    """Vortex set of the slice nearest to height ``z``."""
    g = field.geom
    iz = int(round(float(z) / g.dz)) % g.Nz
    return detect_slice(field.values[:, :, iz], g, z=iz * g.dz)
