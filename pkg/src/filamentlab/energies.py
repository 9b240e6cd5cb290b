"""Static energy functionals: pairwise interaction, filament Hamiltonian,
renormalized energies and the per-length energy constant kappa.

Sign conventions (all case-sensitive and used consistently everywhere):

* ``W(a) = -sum_{i != j} log|a_i - a_j|`` over ordered pairs,
* ``grad_k W(a) = -2 sum_{l != k} (a_k - a_l)/|a_k - a_l|^2``,
* ``W_omega(a) = -pi (sum_{i != j} log|a_i - a_j| + sum_{i,j} H(a_i, a_j))``
  with the diagonal included in the H-sum,
* ``kappa(n, eps) = n (pi |log eps| + gamma) + n(n-1) pi |log h_eps|
  - pi n^2 H(0, 0)``.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NonSimpleConfiguration
from .geometry import FilamentConfiguration, as_complex, h_epsilon
from .greens import DEFAULT_RECT_GRID, harmonic_correction_H

_COINCIDENCE = 0.0


def _pairwise_distances(zpts):
    """|z_i - z_j| for complex points of shape (..., n)."""
    return np.abs(zpts[..., :, None] - zpts[..., None, :])


def interaction_W(a) -> float:
    """Pairwise logarithmic interaction over ordered pairs."""
    z = as_complex(a)
    n = z.size
    if n < 2:
        return 0.0
    d = _pairwise_distances(z)
    iu = np.triu_indices(n, k=1)
    vals = d[iu]
    if np.any(vals <= _COINCIDENCE):
        raise NonSimpleConfiguration("coincident points in interaction energy")
    return float(-2.0 * np.log(vals).sum())


def gradient_W(a) -> np.ndarray:
    """Exact gradient of ``interaction_W``, shape (n, 2)."""
    z = as_complex(a)
    n = z.size
    if n < 2:
        return np.zeros((n, 2))
    diff = z[:, None] - z[None, :]
    r2 = np.abs(diff) ** 2
    np.fill_diagonal(r2, 1.0)
    if np.any(r2[~np.eye(n, dtype=bool)] <= _COINCIDENCE):
        raise NonSimpleConfiguration("coincident points in interaction gradient")
    terms = diff / r2
    np.fill_diagonal(terms, 0.0)
    g = -2.0 * terms.sum(axis=1)
    return np.column_stack([g.real, g.imag])


def interaction_W_profile(samples: np.ndarray) -> np.ndarray:
    """Per-slice interaction for complex samples of shape (n, Nz)."""
    n = samples.shape[0]
    if n < 2:
        return np.zeros(samples.shape[1])
    d = _pairwise_distances(samples.T)  # (Nz, n, n)
    iu = np.triu_indices(n, k=1)
    vals = d[:, iu[0], iu[1]]
    if np.any(vals <= _COINCIDENCE):
        raise NonSimpleConfiguration("coincident filaments at a grid node")
    return -2.0 * np.log(vals).sum(axis=1)


def gradient_W_profile(samples: np.ndarray) -> np.ndarray:
    """Per-slice interaction gradient in complex form, shape (n, Nz)."""
    n = samples.shape[0]
    if n < 2:
        return np.zeros_like(samples)
    diff = samples[:, None, :] - samples[None, :, :]
    r2 = np.abs(diff) ** 2
    idx = np.arange(n)
    r2[idx, idx, :] = 1.0
    off = r2[~np.eye(n, dtype=bool)]
    if np.any(off <= _COINCIDENCE):
        raise NonSimpleConfiguration("coincident filaments at a grid node")
    terms = diff / r2
    terms[idx, idx, :] = 0.0
    return -2.0 * terms.sum(axis=1)


def hamiltonian_G0(f: FilamentConfiguration) -> float:
    """pi * integral over z of (1/2 sum |f_i'|^2 + W(f(z))).

    z-derivatives are spectral, the z-integral is the periodic trapezoid
    rule (spectrally accurate for periodic integrands).
    """
    kinetic = 0.5 * np.sum(np.abs(f.derivative()) ** 2, axis=0)
    interaction = interaction_W_profile(f.samples)
    return float(math.pi * np.sum(kinetic + interaction) * f.dz)


def renormalized_W_omega(geom, a, n_grid=DEFAULT_RECT_GRID) -> float:
    """Renormalized interaction energy in the bounded cross-section.

    ``-pi (sum_{i != j} log|a_i - a_j| + sum_{i,j} H(a_i, a_j))``; the
    harmonic-correction sum includes the diagonal terms i = j.
    """
    z = as_complex(a)
    n = z.size
    log_sum = -interaction_W(a) if n >= 2 else 0.0
    h_sum = 0.0
    for i in range(n):
        for j in range(n):
            h_sum += harmonic_correction_H(
                geom, (z[i].real, z[i].imag), (z[j].real, z[j].imag), n_grid=n_grid
            )
    return float(-math.pi * (log_sum + h_sum))


def kappa(n: int, eps: float, geom, gamma: float, n_grid=DEFAULT_RECT_GRID) -> float:
    """Per-unit-length energy constant of n unit vortices clustered at 0."""
    if n == 0:
        return 0.0
    abslog = -math.log(eps)
    h = h_epsilon(eps)
    h00 = harmonic_correction_H(geom, (0.0, 0.0), (0.0, 0.0), n_grid=n_grid)
    return float(
        n * (math.pi * abslog + gamma)
        + n * (n - 1) * math.pi * abs(math.log(h))
        - math.pi * n * n * h00
    )


def w_eps(a, geom, eps: float, gamma: float, n_grid=DEFAULT_RECT_GRID) -> float:
    """Sharp per-slice energy of unit vortices at positions ``a``:
    ``n (pi |log eps| + gamma) + W_omega(a)``."""
    n = as_complex(a).size
    return n * (math.pi * (-math.log(eps)) + gamma) + renormalized_W_omega(
        geom, a, n_grid=n_grid
    )
