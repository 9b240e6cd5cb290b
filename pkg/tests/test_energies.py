import math

import numpy as np
import pytest

from filamentlab.energies import (
    gradient_W,
    hamiltonian_G0,
    interaction_W,
    kappa,
    renormalized_W_omega,
    w_eps,
)
from filamentlab.errors import NonSimpleConfiguration
from filamentlab.geometry import FilamentConfiguration, h_epsilon


def test_interaction_examples():
    assert interaction_W([(0.0, 0.0), (1.0, 0.0)]) == 0.0
    g = gradient_W([(0.0, 0.0), (1.0, 0.0)])
    assert np.allclose(g, [[2.0, 0.0], [-2.0, 0.0]])
    with pytest.raises(NonSimpleConfiguration):
        interaction_W([(0.0, 0.0), (0.0, 0.0)])
    with pytest.raises(NonSimpleConfiguration):
        gradient_W([(0.5, 0.5), (0.5, 0.5)])


def _fd_gradient(points, step=1e-5):
    pts = np.asarray(points, dtype=float)
    out = np.zeros_like(pts)
    for i in range(pts.shape[0]):
        for c in range(2):
            plus = pts.copy()
            minus = pts.copy()
            plus[i, c] += step
            minus[i, c] -= step
            out[i, c] = (interaction_W(plus) - interaction_W(minus)) / (2 * step)
    return out


def test_gradient_matches_central_differences(rng):
    for _ in range(100):
        n = rng.integers(2, 6)
        pts = rng.uniform(-1.0, 1.0, (n, 2))
        while np.min([np.hypot(*(pts[i] - pts[j]))
                      for i in range(n) for j in range(i + 1, n)]) < 0.15:
            pts = rng.uniform(-1.0, 1.0, (n, 2))
        g = gradient_W(pts)
        fd = _fd_gradient(pts)
        assert np.max(np.abs(g - fd)) / max(np.max(np.abs(fd)), 1.0) < 1e-6


def test_hamiltonian_constant_pairs():
    L = 5.0
    f = FilamentConfiguration.from_constant_points([0.5 + 0j, -0.5 + 0j], L, 32)
    assert hamiltonian_G0(f) == pytest.approx(0.0, abs=1e-12)
    d = 0.35
    f2 = FilamentConfiguration.from_constant_points([d / 2, -d / 2], L, 32)
    assert hamiltonian_G0(f2) == pytest.approx(-2.0 * math.pi * L * math.log(d), rel=1e-12)


# Brute-force quadrature oracle for the double helix (radius 1, L = 2 pi):
# finite-difference derivatives and the trapezoid rule at Nz = 4096 agree
# with the closed form 2 pi^2 (1 - 2 log 2) to 1e-10; value frozen here.
DOUBLE_HELIX_G0 = -7.625145053249748


def test_double_helix_against_quadrature_oracle():
    L = 2 * math.pi
    Nz = 4096
    z = np.arange(Nz) * (L / Nz)
    top = np.exp(1j * z)
    samples = np.vstack([top, -top])
    # independent route: centered differences in z plus trapezoid sum
    dz = L / Nz
    deriv = (np.roll(samples, -1, axis=1) - np.roll(samples, 1, axis=1)) / (2 * dz)
    kinetic = 0.5 * np.sum(np.abs(deriv) ** 2, axis=0)
    dist = np.abs(samples[0] - samples[1])
    oracle = math.pi * float(np.sum(kinetic - 2.0 * np.log(dist)) * dz)
    closed = 2.0 * math.pi**2 * (1.0 - 2.0 * math.log(2.0))
    assert oracle == pytest.approx(closed, abs=2e-4)  # second-order stencil
    assert closed == pytest.approx(DOUBLE_HELIX_G0, abs=1e-12)
    f = FilamentConfiguration(np.vstack([np.exp(1j * z), -np.exp(1j * z)]), L)
    assert hamiltonian_G0(f) == pytest.approx(DOUBLE_HELIX_G0, abs=1e-10)
    coarse = FilamentConfiguration(samples[:, ::64], L)
    assert hamiltonian_G0(coarse) == pytest.approx(DOUBLE_HELIX_G0, abs=1e-10)


def test_hamiltonian_symmetries(rng):
    L = 2 * math.pi
    z = np.arange(32) * (L / 32)
    samples = np.vstack([
        0.8 * np.exp(1j * z) + 0.1,
        -0.7 * np.exp(1j * z) + 0.05j,
        1.6 + 0.1 * np.exp(2j * z),
    ])
    f = FilamentConfiguration(samples, L)
    theta = 0.7341
    rotated = FilamentConfiguration(np.exp(1j * theta) * samples, L)
    assert hamiltonian_G0(rotated) == pytest.approx(hamiltonian_G0(f), rel=1e-12)
    relabeled = FilamentConfiguration(samples[[2, 0, 1]], L)
    assert hamiltonian_G0(relabeled) == pytest.approx(hamiltonian_G0(f), rel=1e-13)


def test_renormalized_energy_disk(unit_disk):
    assert renormalized_W_omega(unit_disk, [(0.0, 0.0)]) == pytest.approx(0.0, abs=1e-12)
    # single vortex at (0.5, 0): W = -pi H(a, a) = pi log(1 - |a|^2)
    val = renormalized_W_omega(unit_disk, [(0.5, 0.0)])
    assert val == pytest.approx(math.pi * math.log(0.75), rel=1e-12)
    # two vortices: assemble the four H terms independently
    a = [(0.3, 0.0), (-0.3, 0.0)]
    from filamentlab.greens import harmonic_correction_H
    log_term = 2.0 * math.log(0.6)
    h_term = sum(harmonic_correction_H(unit_disk, a[i], a[j])
                 for i in range(2) for j in range(2))
    assert renormalized_W_omega(unit_disk, a) == pytest.approx(
        -math.pi * (log_term + h_term), rel=1e-12)


def test_kappa_values(unit_disk):
    gamma = 1.2
    assert kappa(0, 0.05, unit_disk, gamma) == 0.0
    val = kappa(1, 0.05, unit_disk, gamma)
    assert val == pytest.approx(math.pi * (-math.log(0.05)) + gamma, rel=1e-12)
    eps = math.exp(-4.0)
    val2 = kappa(2, eps, unit_disk, gamma)
    assert val2 == pytest.approx(8 * math.pi + 2 * gamma + 2 * math.pi * math.log(2.0),
                                 rel=1e-12)
    # monotone increasing in |log eps| at fixed n >= 1
    eps_seq = [0.5, 0.2, 0.1, 0.05, 0.01]
    vals = [kappa(2, e, unit_disk, gamma) for e in eps_seq]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_w_eps_matches_kappa_expansion(square, gamma_value):
    """n(pi|log eps| + gamma) + W(h f) = pi W(f) + kappa + O(h)."""
    eps = 0.01
    h = h_epsilon(eps)
    pts = np.array([0.45 + 0.1j, -0.45 - 0.1j])
    lhs = w_eps(h * pts, square, eps, gamma_value)
    rhs = math.pi * interaction_W(pts) + kappa(2, eps, square, gamma_value)
    assert lhs == pytest.approx(rhs, abs=1.5 * h)
