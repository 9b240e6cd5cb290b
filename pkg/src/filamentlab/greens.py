"""Green-function machinery on the cross-section.

``harmonic_correction_H(geom, x, a)`` is the harmonic function of ``x``
with boundary values ``-log|x - a|``; it corrects the free-space logarithm
so that the stream function ``psi(x) = -sum_i (log|x - a_i| + H(x, a_i))``
vanishes on the lateral boundary.  The induced divergence-free field
``jstar_domain = -grad^perp psi`` is tangent to the boundary and carries
circulation ``2 pi`` around each source point.

On the disk everything is closed form (method of images); on the rectangle
``H`` comes from a 5-point Laplace solve with Dirichlet data sampled on the
boundary nodes, with accuracy controlled by the ``n_grid`` parameter.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.interpolate import RegularGridInterpolator

from .errors import PointOutsideDomain, SingularPoint
from .geometry import DISK, DomainGeometry, as_points

DEFAULT_RECT_GRID = 192

_BOUNDARY_TOL = 1e-12


def _check_interior(geom, pts, what):
    d = np.atleast_1d(geom.boundary_distance(pts))
    if np.any(d <= 0):
        raise PointOutsideDomain(f"{what} must lie strictly inside the cross-section")


def _check_in_closure(geom, pts, what):
    scale = max(geom.bounds)
    d = np.atleast_1d(geom.boundary_distance(pts))
    if np.any(d < -_BOUNDARY_TOL * scale):
        raise PointOutsideDomain(f"{what} lies outside the cross-section")


# ---------------------------------------------------------------------------
# Plane field


def jstar_plane(x, a):
    """sum_i (x - a_i)^perp / |x - a_i|^2 with v^perp = (-v2, v1)."""
    pts = as_points(a)
    x = np.asarray(x, dtype=float)
    dx = x[..., None, 0] - pts[:, 0]
    dy = x[..., None, 1] - pts[:, 1]
    r2 = dx * dx + dy * dy
    if np.any(r2 == 0.0):
        raise SingularPoint("evaluation point coincides with a source point")
    out = np.empty(x.shape, dtype=float)
    out[..., 0] = np.sum(-dy / r2, axis=-1)
    out[..., 1] = np.sum(dx / r2, axis=-1)
    return out


# ---------------------------------------------------------------------------
# Disk: method of images

def _disk_H_and_grad(R, x, a):
    """H(x, a) = -log(|a| |x - R^2 a/|a|^2| / R) and its x-gradient."""
    x = np.asarray(x, dtype=float)
    ax, ay = float(a[0]), float(a[1])
    amod2 = ax * ax + ay * ay
    if amod2 == 0.0:
        return -math.log(R) * np.ones(x.shape[:-1]), np.zeros_like(x)
    star = np.array([ax, ay]) * (R * R / amod2)
    dx = x[..., 0] - star[0]
    dy = x[..., 1] - star[1]
    r2 = dx * dx + dy * dy
    val = -0.5 * np.log(amod2 * r2 / (R * R))
    grad = np.empty_like(x)
    grad[..., 0] = -dx / r2
    grad[..., 1] = -dy / r2
    return val, grad


# ---------------------------------------------------------------------------
# Rectangle: sparse 5-point Dirichlet solve, factorization cached per grid


class _RectangleLaplace:
    """Dirichlet Laplace solver on [-ax, ax] x [-ay, ay] nodes."""

    def __init__(self, ax, ay, mx, my):
        self.ax, self.ay = ax, ay
        self.mx, self.my = mx, my
        self.xs = np.linspace(-ax, ax, mx + 1)
        self.ys = np.linspace(-ay, ay, my + 1)
        self.hx = 2.0 * ax / mx
        self.hy = 2.0 * ay / my
        nix, niy = mx - 1, my - 1
        ex = sp.eye(nix)
        ey = sp.eye(niy)
        d2x = sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(nix, nix)) / self.hx**2
        d2y = sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(niy, niy)) / self.hy**2
        lap = sp.kron(d2x, ey) + sp.kron(ex, d2y)
        self.lu = spla.splu(lap.tocsc())

    def solve(self, boundary):
        """Solve Laplace with Dirichlet data ``boundary(x, y)`` (vectorized).

        Returns node values of shape (mx+1, my+1), indexing [i, j] = (x_i, y_j).
        """
        mx, my = self.mx, self.my
        grid = np.zeros((mx + 1, my + 1))
        grid[0, :] = boundary(np.full(my + 1, self.xs[0]), self.ys)
        grid[-1, :] = boundary(np.full(my + 1, self.xs[-1]), self.ys)
        grid[:, 0] = boundary(self.xs, np.full(mx + 1, self.ys[0]))
        grid[:, -1] = boundary(self.xs, np.full(mx + 1, self.ys[-1]))
        rhs = np.zeros((mx - 1, my - 1))
        rhs[0, :] -= grid[0, 1:-1] / self.hx**2
        rhs[-1, :] -= grid[-1, 1:-1] / self.hx**2
        rhs[:, 0] -= grid[1:-1, 0] / self.hy**2
        rhs[:, -1] -= grid[1:-1, -1] / self.hy**2
        grid[1:-1, 1:-1] = self.lu.solve(rhs.ravel()).reshape(mx - 1, my - 1)
        return grid


_RECT_SOLVERS = {}
_RECT_SOLUTIONS = {}
_MAX_SOLUTIONS = 4096
_MIN_MY = 8


def _rect_solver(geom, n_grid):
    ax, ay = geom.half_widths
    if isinstance(n_grid, tuple):
        mx, my = int(n_grid[0]), int(n_grid[1])
    else:
        mx = int(n_grid)
        my = max(_MIN_MY, int(round(n_grid * ay / ax)))
    key = (round(ax, 14), round(ay, 14), mx, my)
    solver = _RECT_SOLVERS.get(key)
    if solver is None:
        solver = _RectangleLaplace(ax, ay, mx, my)
        _RECT_SOLVERS[key] = solver
    return solver


def _rect_H_solution(geom, a, n_grid):
    """Node values of H(., a) on the rectangle, cached per source point."""
    ax_, ay_ = geom.half_widths
    grid_key = tuple(n_grid) if isinstance(n_grid, tuple) else int(n_grid)
    key = (round(ax_, 14), round(ay_, 14), grid_key,
           round(float(a[0]), 14), round(float(a[1]), 14))
    cached = _RECT_SOLUTIONS.get(key)
    if cached is not None:
        return cached
    solver = _rect_solver(geom, n_grid)
    axp, ayp = float(a[0]), float(a[1])

    def boundary(x, y):
        return -0.5 * np.log((x - axp) ** 2 + (y - ayp) ** 2)

    grid = solver.solve(boundary)
    if len(_RECT_SOLUTIONS) >= _MAX_SOLUTIONS:
        _RECT_SOLUTIONS.clear()
    entry = (solver, grid)
    _RECT_SOLUTIONS[key] = entry
    return entry


def _bilinear(solver, grid, x):
    interp = RegularGridInterpolator((solver.xs, solver.ys), grid,
                                     bounds_error=False, fill_value=None)
    return interp(np.atleast_2d(x))


def rectangle_H_node_grid(geom, points, n_grid=DEFAULT_RECT_GRID):
    """Summed correction ``sum_i H(., a_i)`` on the rectangle node grid.

    Returns (xs, ys, H) with H of shape (len(xs), len(ys)); one sparse solve
    (boundary data summed by linearity).
    """
    pts = as_points(points)
    _check_interior(geom, pts, "source points")
    solver = _rect_solver(geom, n_grid)

    def boundary(x, y):
        total = np.zeros(np.broadcast(x, y).shape)
        for p in pts:
            total += -0.5 * np.log((x - p[0]) ** 2 + (y - p[1]) ** 2)
        return total

    return solver.xs, solver.ys, solver.solve(boundary)


def harmonic_correction_H(geom: DomainGeometry, x, a, n_grid=DEFAULT_RECT_GRID):
    """Harmonic correction H(x, a): harmonic in x, equal to -log|x-a| on the boundary."""
    a = as_points(a)[0]
    _check_interior(geom, a, "source point")
    xx = np.asarray(x, dtype=float)
    _check_in_closure(geom, xx, "evaluation point")
    if geom.shape == DISK:
        val, _ = _disk_H_and_grad(geom.radius, xx, a)
        return float(val) if np.ndim(val) == 0 else val
    solver, grid = _rect_H_solution(geom, a, n_grid)
    val = _bilinear(solver, grid, xx)
    return float(val[0]) if xx.ndim == 1 else val.reshape(xx.shape[:-1])


def harmonic_correction_grad(geom, x, a, n_grid=DEFAULT_RECT_GRID):
    """x-gradient of H(x, a); closed form on the disk, centered differences
    of the solved grid on the rectangle."""
    a = as_points(a)[0]
    _check_interior(geom, a, "source point")
    xx = np.asarray(x, dtype=float)
    _check_in_closure(geom, xx, "evaluation point")
    if geom.shape == DISK:
        _, grad = _disk_H_and_grad(geom.radius, xx, a)
        return grad
    solver, grid = _rect_H_solution(geom, a, n_grid)
    gx = np.gradient(grid, solver.xs, axis=0)
    gy = np.gradient(grid, solver.ys, axis=1)
    out = np.empty(np.atleast_2d(xx).shape, dtype=float)
    out[:, 0] = _bilinear(solver, gx, xx)
    out[:, 1] = _bilinear(solver, gy, xx)
    return out[0] if xx.ndim == 1 else out.reshape(xx.shape)


def jstar_domain(geom, x, a, n_grid=DEFAULT_RECT_GRID):
    """Boundary-corrected circulation field ``-grad^perp psi`` at ``x``.

    Equals ``jstar_plane`` plus ``sum_i grad^perp H(x, a_i)``; divergence-free,
    tangent to the lateral boundary, circulation 2 pi around each a_i.
    """
    pts = as_points(a)
    _check_interior(geom, pts, "source points")
    xx = np.asarray(x, dtype=float)
    _check_in_closure(geom, xx, "evaluation point")
    out = jstar_plane(xx, pts)
    for p in pts:
        g = harmonic_correction_grad(geom, xx, p, n_grid=n_grid)
        out[..., 0] += -np.asarray(g)[..., 1]
        out[..., 1] += np.asarray(g)[..., 0]
    return out
