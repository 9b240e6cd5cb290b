import math

import numpy as np
import pytest
from scipy.integrate import simpson, solve_bvp

from filamentlab.errors import NonConvergence
from filamentlab.gamma import (
    core_energy_defect,
    estimate_gamma,
    load_gamma_cache,
    radial_core_energy,
    radial_core_profile,
    save_gamma_cache,
)


def test_profile_shape():
    r, rho = radial_core_profile(0.1)
    assert rho[0] == 0.0 and rho[-1] == 1.0
    assert np.all(np.diff(rho) > -1e-9)  # monotone profile
    assert rho[np.searchsorted(r, 0.5)] > 0.97  # saturated outside the core


def test_core_energy_exceeds_log_term():
    for eps in (0.1, 0.05):
        assert core_energy_defect(eps) > 0.0


def test_successive_estimates_stable():
    vals = [core_energy_defect(e) for e in (0.1, 0.05, 0.025)]
    assert abs(vals[1] - vals[0]) < 1e-2
    assert abs(vals[2] - vals[1]) < 1e-2
    cal = estimate_gamma(tol=1e-3)
    gaps = [abs(b - a) for a, b in zip(cal.extrapolated, cal.extrapolated[1:])]
    assert gaps[-1] < 1e-3


def test_grid_doubling():
    d1 = radial_core_energy(0.05, n_mesh=4000)
    d2 = radial_core_energy(0.05, n_mesh=8000)
    assert abs(d2 - d1) < 1e-4


def _bvp_oracle_energy(eps):
    """Independent route: solve_bvp on w = rho/r with the origin treated as
    a singular point, energy by Simpson quadrature."""

    def rhs(x, y):
        return np.vstack([y[1], -(y[0] / eps**2) * (1.0 - x**2 * y[0] ** 2)])

    def bc(ya, yb):
        return np.array([ya[1], yb[0] - 1.0])

    S = np.array([[0.0, 0.0], [0.0, -3.0]])
    x = np.unique(np.concatenate([np.linspace(0, 10 * eps, 200),
                                  np.linspace(10 * eps, 1.0, 201)]))
    w0 = 1.0 / np.sqrt(x**2 + 2 * eps**2)
    sol = solve_bvp(rhs, bc, x, np.vstack([w0, np.gradient(w0, x)]),
                    S=S, tol=1e-8, max_nodes=200000)
    assert sol.success
    r = np.unique(np.concatenate([np.linspace(0, 10 * eps, 2000),
                                  np.linspace(10 * eps, 1.0, 2001)]))
    w, wp = sol.sol(r)
    rho_p = w + r * wp
    integrand = r * rho_p**2 + r * w**2 + (r / (2 * eps**2)) * (1 - r**2 * w**2) ** 2
    return math.pi * float(simpson(integrand, x=r))


def test_against_independent_bvp_solver():
    eps = 0.1
    assert radial_core_energy(eps) == pytest.approx(_bvp_oracle_energy(eps), abs=5e-5)


def test_nonconvergence_raised_for_absurd_tolerance():
    with pytest.raises(NonConvergence):
        estimate_gamma(tol=1e-12)


def test_cache_round_trip(tmp_path):
    cal = estimate_gamma(tol=1e-3)
    path = tmp_path / "gamma.json"
    save_gamma_cache(cal, path)
    assert load_gamma_cache(path) == cal.value
