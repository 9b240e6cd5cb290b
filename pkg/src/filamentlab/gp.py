"""3D Gross-Pitaevskii solver on omega x T_L with lateral Neumann walls.

The equation is integrated with the sign convention taken literally,

    i du/dt - Delta u + (1/eps^2)(|u|^2 - 1) u = 0,

by Strang splitting: a half-step of the pointwise nonlinear flow (an exact
phase rotation that leaves |u| invariant), an exact linear step with
unit-modulus multipliers in the mixed cosine(x, y) x Fourier(z) basis, and
a second nonlinear half-step.  Both substeps preserve the discrete mass to
round-off.  The cosine basis is the cell-centered DCT-II, which realizes
homogeneous Neumann walls exactly on the grid.

Rescaled time: the filament clock t corresponds to physical time
``h_eps^2 t`` with ``h_eps = |log eps|^{-1/2}``.
"""

from __future__ import annotations

import math
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft
from scipy.integrate import cumulative_trapezoid

from .energies import kappa, w_eps
from .errors import (
    FilamentTooCloseToBoundary,
    FormatError,
    InvalidParameters,
    VersionMismatch,
)
from .geometry import (
    DISK,
    RECTANGLE,
    DomainGeometry,
    FilamentConfiguration,
    as_points,
    h_epsilon,
)
from .greens import rectangle_H_node_grid
from .vortices import jacobian_slice

PADE = "pade"
TANH = "tanh"
RADIAL = "radial"  # numerically minimizing core; sharpest preparation
ANGLE_SUM = "angle_sum"
ANGLE_SUM_CORRECTED = "angle_sum_plus_harmonic_correction"

_MAGIC = b"GPF1"
_HEADER = struct.Struct("<III6dBd")


@dataclass
class BuildDiagnostics:
    """Measured preparation quality of constructed initial data."""

    jacobian_mass: np.ndarray   # per-slice integral of J over the cross-section
    expected_mass: float        # pi * n
    paper_energy: float
    standard_energy: float
    g_eps: float | None = None


@dataclass
class ComplexField:
    """3D complex scalar on the grid (cell-centered transverse, periodic z)."""

    geom: DomainGeometry
    values: np.ndarray
    t_phys: float = 0.0
    epsilon: float = 1.0
    build_diagnostics: BuildDiagnostics | None = field(default=None, repr=False)

    def __post_init__(self):
        expected = (self.geom.Nx, self.geom.Ny, self.geom.Nz)
        v = np.asarray(self.values, dtype=complex)
        if v.shape != expected:
            raise ValueError(f"field shape {v.shape} != grid {expected}")
        self.values = v

    def copy(self):
        return ComplexField(self.geom, self.values.copy(), self.t_phys, self.epsilon)

    def readonly_view(self):
        v = self.values.view()
        v.flags.writeable = False
        return ComplexField(self.geom, v, self.t_phys, self.epsilon)


@dataclass
class GpConfig:
    epsilon: float
    dt_phys: float
    splitting: str = "strang"
    include_nonlinearity: bool = True
    workers: int = 2
    alarm_threshold: float = 2.0
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise InvalidParameters("epsilon must lie in (0, 1)")
        if self.dt_phys <= 0:
            raise InvalidParameters("dt_phys must be positive")
        if self.splitting != "strang":
            raise InvalidParameters("only strang splitting is implemented")


@dataclass(frozen=True)
class InitialDataSpec:
    """Filament positions, core profile and phase construction for u0."""

    f0: FilamentConfiguration
    core_profile: str = PADE
    phase: str = ANGLE_SUM

    def __post_init__(self):
        if self.core_profile not in (PADE, TANH, RADIAL):
            raise InvalidParameters(f"unknown core profile {self.core_profile!r}")
        if self.phase not in (ANGLE_SUM, ANGLE_SUM_CORRECTED):
            raise InvalidParameters(f"unknown phase construction {self.phase!r}")


# ---------------------------------------------------------------------------
# Spectral helpers (DCT-II in x, y; FFT in z)


def transverse_wavenumbers(geom):
    """Cosine-mode wavenumbers k_m = pi m / (2 ax) along each transverse axis."""
    ax, ay = geom.bounds
    kx = np.pi * np.arange(geom.Nx) / (2.0 * ax)
    ky = np.pi * np.arange(geom.Ny) / (2.0 * ay)
    return kx, ky


def vertical_wavenumbers(geom):
    return 2.0 * np.pi * np.fft.fftfreq(geom.Nz, d=geom.dz)


def to_spectral(values, workers=2):
    out = sfft.dctn(values, type=2, axes=(0, 1), norm="ortho", workers=workers)
    return sfft.fft(out, axis=2, workers=workers)


def from_spectral(coeffs, workers=2):
    out = sfft.ifft(coeffs, axis=2, workers=workers)
    return sfft.idctn(out, type=2, axes=(0, 1), norm="ortho", workers=workers)


def dct_derivative(values, axis, width, workers=2):
    """Spectral derivative of a cell-centered cosine series along ``axis``."""
    n = values.shape[axis]
    c = sfft.dct(values, type=2, axis=axis, norm="ortho", workers=workers)
    k = np.pi * np.arange(n) / width
    shape = [1] * values.ndim
    shape[axis] = n
    c = c * (-k.reshape(shape))
    s = np.zeros_like(c)
    dst_idx = [slice(None)] * values.ndim
    src_idx = [slice(None)] * values.ndim
    dst_idx[axis] = slice(0, n - 1)
    src_idx[axis] = slice(1, n)
    s[tuple(dst_idx)] = c[tuple(src_idx)]
    return sfft.idst(s, type=2, axis=axis, norm="ortho", workers=workers)


def fft_derivative_z(values, geom, workers=2):
    k = vertical_wavenumbers(geom)
    return sfft.ifft(1j * k[None, None, :] * sfft.fft(values, axis=2, workers=workers),
                     axis=2, workers=workers)


def resonance_dt_bound(geom) -> float:
    """Largest step free of split-step resonance, pi / lambda_max.

    Each substep is unitary, but the composition couples high modes to the
    nonlinear background once a linear phase dt * lambda crosses pi; at
    core-resolving grids this bites long before the accuracy scale eps^2/4
    (empirically the field fills with spurious vortex pairs within ~50
    steps).  Keep dt below this bound for long runs.
    """
    kx, ky = transverse_wavenumbers(geom)
    kz = vertical_wavenumbers(geom)
    lam_max = kx[-1] ** 2 + ky[-1] ** 2 + float(np.max(np.abs(kz))) ** 2
    return math.pi / lam_max


def _propagator(geom, dt, cache):
    key = ("prop", geom.Nx, geom.Ny, geom.Nz, geom.bounds, geom.L, dt)
    mult = cache.get(key)
    if mult is None:
        kx, ky = transverse_wavenumbers(geom)
        kz = vertical_wavenumbers(geom)
        lam = (kx[:, None, None] ** 2 + ky[None, :, None] ** 2
               + kz[None, None, :] ** 2)
        mult = np.exp(1j * lam * dt)
        cache[key] = mult
    return mult


def interior_weights(geom):
    """Quadrature weights per transverse cell: 1 inside the cross-section."""
    if geom.shape == RECTANGLE:
        return None  # all cells interior
    X, Y = geom.center_mesh()
    return (np.hypot(X, Y) <= geom.radius).astype(float)


# ---------------------------------------------------------------------------
# Time stepping


def gp_step(state: ComplexField, config: GpConfig, dt=None) -> ComplexField:
    """One Strang step (half nonlinear, full linear, half nonlinear)."""
    dt = config.dt_phys if dt is None else dt
    u = state.values
    eps2 = config.epsilon**2
    if config.include_nonlinearity:
        phase = (0.5 * dt / eps2) * (np.abs(u) ** 2 - 1.0)
        u = u * np.exp(1j * phase)
    spec = to_spectral(u, workers=config.workers)
    spec *= _propagator(state.geom, dt, config._cache)
    u = from_spectral(spec, workers=config.workers)
    if config.include_nonlinearity:
        phase = (0.5 * dt / eps2) * (np.abs(u) ** 2 - 1.0)
        u = u * np.exp(1j * phase)
    peak = float(np.max(np.abs(u)))
    if peak > config.alarm_threshold:
        warnings.warn(f"field modulus reached {peak:.3f} (alarm threshold "
                      f"{config.alarm_threshold})", stacklevel=2)
    return ComplexField(state.geom, u, state.t_phys + dt, state.epsilon)


def observation_times(t_rescaled, interval):
    """Sampling times 0, dt, 2dt, ..., t (the end point always included)."""
    if t_rescaled == 0.0 or interval is None or interval <= 0:
        return [0.0, t_rescaled] if t_rescaled > 0 else [0.0]
    count = math.ceil(t_rescaled / interval - 1e-12)
    times = [k * interval for k in range(count)]
    times.append(t_rescaled)
    return times


def run_to_rescaled_time(state: ComplexField, t_rescaled, eps, config: GpConfig,
                         observer=None, observer_interval=None) -> ComplexField:
    """Evolve to physical time h_eps^2 * t_rescaled.

    The observer (if any) is called with read-only snapshots at rescaled
    times 0, interval, 2*interval, ..., t_rescaled.
    """
    if t_rescaled < 0:
        raise InvalidParameters("t_rescaled must be nonnegative")
    h2 = h_epsilon(eps) ** 2
    obs_times = observation_times(t_rescaled, observer_interval)
    current = state
    t0 = state.t_phys
    for t_obs in obs_times:
        target = t0 + h2 * t_obs
        while current.t_phys < target - 1e-13 * max(1.0, target):
            dt = min(config.dt_phys, target - current.t_phys)
            current = gp_step(current, config, dt=dt)
        if observer is not None:
            observer(t_obs, current.readonly_view())
    return current


def mass(state: ComplexField) -> float:
    """Integral of |u|^2 over the computational box."""
    g = state.geom
    return float(np.sum(np.abs(state.values) ** 2) * g.dx * g.dy * g.dz)


# ---------------------------------------------------------------------------
# Initial data


_RADIAL_PROFILES = {}


def _radial_profile_table(eps):
    """Cached minimizing radial profile (unit disk, extended by 1)."""
    key = round(float(eps), 12)
    table = _RADIAL_PROFILES.get(key)
    if table is None:
        from .gamma import radial_core_profile
        table = radial_core_profile(eps)
        _RADIAL_PROFILES[key] = table
    return table


def _core_factor(w, eps, profile):
    """rho(|w|/eps) * w/|w| with the selected core profile (0 at w = 0)."""
    if profile == PADE:
        return w / np.sqrt(np.abs(w) ** 2 + 2.0 * eps**2)
    r = np.abs(w)
    safe = np.where(r == 0.0, 1.0, r)
    unit = np.where(r == 0.0, 0.0, w / safe)
    if profile == RADIAL:
        rr, rho = _radial_profile_table(eps)
        return np.interp(r, rr, rho, right=1.0) * unit
    return np.tanh(r / (math.sqrt(2.0) * eps)) * unit


def _slice_field(geom, W, pts, eps, spec_phase, core, correction_cache):
    u = np.ones_like(W)
    for p in pts:
        u = u * _core_factor(W - p, eps, core)
    if spec_phase == ANGLE_SUM_CORRECTED:
        u = u * correction_cache(pts)
    return u


def _disk_correction(geom, W, pts):
    R = geom.radius
    out = np.ones_like(W)
    for p in pts:
        if abs(p) < 1e-14 * R:
            continue  # H(., 0) is constant, conjugate is a constant phase
        star = (R * R / abs(p) ** 2) * p
        ws = W - star
        out *= np.conj(ws) / np.abs(ws)
    return out


def _rectangle_correction(geom, W, pts):
    """exp(i eta) with eta the harmonic conjugate of sum_i H(., a_i)."""
    xs, ys, H = rectangle_H_node_grid(geom, as_points(np.asarray(pts)),
                                      n_grid=(geom.Nx, geom.Ny))
    Hx = np.gradient(H, xs, axis=0)
    Hy = np.gradient(H, ys, axis=1)
    eta_row = cumulative_trapezoid(-Hy[:, 0], xs, initial=0.0)
    eta = eta_row[:, None] + cumulative_trapezoid(Hx, ys, axis=1, initial=0.0)
    eta_c = 0.25 * (eta[:-1, :-1] + eta[1:, :-1] + eta[:-1, 1:] + eta[1:, 1:])
    return np.exp(1j * eta_c)


def build_initial_data(geom: DomainGeometry, eps, spec: InitialDataSpec,
                       gamma=None) -> ComplexField:
    """Vortex-product initial data carrying one +1 vortex per filament.

    Per slice z the field is the product of core factors
    ``rho(|x - h f_j(z)|/eps) e^{i theta_j}`` with the polar angle around
    each rescaled filament position, optionally times the harmonic-conjugate
    correction whose gradient matches the boundary-corrected circulation
    field (the momentum is then tangent to the lateral walls).
    """
    f0 = spec.f0
    if f0.Nz != geom.Nz:
        raise InvalidParameters("initial filaments must be sampled on the z-grid")
    h = h_epsilon(eps)
    P = h * f0.samples
    pts_all = P.ravel()
    margins = np.atleast_1d(geom.boundary_distance(
        np.column_stack([pts_all.real, pts_all.imag])))
    if np.any(margins < 4.0 * eps):
        raise FilamentTooCloseToBoundary(
            f"need 4 eps = {4 * eps:.3g} clearance, worst margin {margins.min():.3g}")
    X, Y = geom.center_mesh()
    W = X + 1j * Y
    if geom.shape == DISK:
        corr = lambda pts: _disk_correction(geom, W, pts)
    else:
        corr = lambda pts: _rectangle_correction(geom, W, pts)
    values = np.empty((geom.Nx, geom.Ny, geom.Nz), dtype=complex)
    z_independent = bool(np.all(P == P[:, :1]))
    if z_independent:
        u = _slice_field(geom, W, P[:, 0], eps, spec.phase, spec.core_profile, corr)
        values[:] = u[:, :, None]
    else:
        for iz in range(geom.Nz):
            values[:, :, iz] = _slice_field(geom, W, P[:, iz], eps, spec.phase,
                                            spec.core_profile, corr)
    state = ComplexField(geom, values, t_phys=0.0, epsilon=float(eps))
    jac_mass = np.array([
        np.sum(jacobian_slice(values[:, :, iz], geom.dx, geom.dy)) * geom.cell_area
        for iz in range(geom.Nz)
    ]) if not z_independent else np.full(geom.Nz, float(
        np.sum(jacobian_slice(values[:, :, 0], geom.dx, geom.dy)) * geom.cell_area))
    energies = energy_G_eps(state, f0.n, gamma if gamma is not None else 0.0)
    state.build_diagnostics = BuildDiagnostics(
        jacobian_mass=jac_mass,
        expected_mass=math.pi * f0.n,
        paper_energy=energies.paper_e_eps_integral,
        standard_energy=energies.standard_e_integral,
        g_eps=energies.g_eps if gamma is not None else None,
    )
    return state


# ---------------------------------------------------------------------------
# Energies


@dataclass(frozen=True)
class GpEnergies:
    g_eps: float
    paper_e_eps_integral: float
    standard_e_integral: float
    transverse_kinetic: float
    z_kinetic: float
    potential: float

    @property
    def raw_energy(self):
        return self.paper_e_eps_integral

    @property
    def e2d_total(self):
        return self.transverse_kinetic + self.potential


def _gradient_energies(state: ComplexField, workers=2):
    g = state.geom
    ax, ay = g.bounds
    ux = dct_derivative(state.values, 0, 2.0 * ax, workers=workers)
    uy = dct_derivative(state.values, 1, 2.0 * ay, workers=workers)
    uz = fft_derivative_z(state.values, g, workers=workers)
    wt = interior_weights(g)
    dens_t = 0.5 * (np.abs(ux) ** 2 + np.abs(uy) ** 2)
    dens_z = 0.5 * np.abs(uz) ** 2
    pot = (np.abs(state.values) ** 2 - 1.0) ** 2 / (4.0 * state.epsilon**2)
    if wt is not None:
        dens_t = dens_t * wt[:, :, None]
        dens_z = dens_z * wt[:, :, None]
        pot = pot * wt[:, :, None]
    return dens_t, dens_z, pot


def energy_G_eps(state: ComplexField, n: int, gamma: float, workers=2) -> GpEnergies:
    """Energy bundle: the printed density (with the 1/4 weight on |du/dz|^2),
    the standard isotropic integral conserved by the discrete flow, and
    ``G_eps`` = printed integral minus L kappa(n, eps, omega)."""
    g = state.geom
    dV = g.dx * g.dy * g.dz
    dens_t, dens_z, pot = _gradient_energies(state, workers=workers)
    tk = float(dens_t.sum() * dV)
    zk = float(dens_z.sum() * dV)
    pk = float(pot.sum() * dV)
    paper = tk + 0.5 * zk + pk
    standard = tk + zk + pk
    lk = g.L * kappa(n, state.epsilon, g, gamma)
    return GpEnergies(g_eps=paper - lk, paper_e_eps_integral=paper,
                      standard_e_integral=standard, transverse_kinetic=tk,
                      z_kinetic=zk, potential=pk)


def e2d_profile(state: ComplexField, workers=2) -> np.ndarray:
    """Per-slice horizontal Ginzburg-Landau energy, shape (Nz,)."""
    g = state.geom
    dens_t, _, pot = _gradient_energies(state, workers=workers)
    return ((dens_t + pot).sum(axis=(0, 1)) * g.dx * g.dy)


def energy_e2d(state: ComplexField, z) -> float:
    g = state.geom
    iz = int(round(float(z) / g.dz)) % g.Nz
    return float(e2d_profile(state)[iz])


def e2d_threshold_flags(state: ComplexField, n: int, theta: float) -> np.ndarray:
    """Per-slice boolean: horizontal energy below pi (n + theta) |log eps|."""
    bound = math.pi * (n + theta) * (-math.log(state.epsilon))
    return e2d_profile(state) <= bound


def surplus_sigma2d(state: ComplexField, f: FilamentConfiguration, eps,
                    gamma, z, profile=None) -> float:
    """Surplus horizontal energy at height z over the sharp vortex energy
    ``W_eps(h f(z); omega)``."""
    g = state.geom
    iz = int(round(float(z) / g.dz)) % g.Nz
    e2d = (profile if profile is not None else e2d_profile(state))[iz]
    h = h_epsilon(eps)
    return float(e2d - w_eps(h * f.samples[:, iz], g, eps, gamma))


def sigma2d_profile(state: ComplexField, f: FilamentConfiguration, eps, gamma):
    """Per-slice surplus and its z-integral (Sigma)."""
    prof = e2d_profile(state)
    vals = np.array([
        surplus_sigma2d(state, f, eps, gamma, iz * state.geom.dz, profile=prof)
        for iz in range(state.geom.Nz)
    ])
    return vals, float(vals.sum() * state.geom.dz)


# ---------------------------------------------------------------------------
# Checkpoint container: magic "GPF1", little-endian header, x-fastest samples


def checkpoint_save(state: ComplexField, path):
    g = state.geom
    if g.shape == DISK:
        tag, param = 0, g.radius
    else:
        tag, param = 1, g.half_widths[0]
    header = _HEADER.pack(g.Nx, g.Ny, g.Nz, g.dx, g.dy, g.dz, g.L,
                          state.epsilon, state.t_phys, tag, param)
    data = np.ascontiguousarray(
        state.values.ravel(order="F")).astype("<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(header)
        fh.write(data)


def filament_trajectory_save(f: FilamentConfiguration, t, path, epsilon=0.0):
    """Dump filament samples in the field-checkpoint container.

    One complex sample per filament per z-node (2n real channels per
    z-sample): shape tag 1 with Nx = n, Ny = 1.  Read back with
    ``filament_trajectory_load`` (the grid is below field resolution).
    """
    n, Nz = f.n, f.Nz
    header = _HEADER.pack(n, 1, Nz, 1.0, 1.0, f.dz, f.L, epsilon, t, 1, n / 2.0)
    data = np.ascontiguousarray(
        f.samples.reshape(n, 1, Nz).ravel(order="F")).astype("<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(header)
        fh.write(data)


def filament_trajectory_load(path):
    """Inverse of filament_trajectory_save; returns (configuration, t)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != _MAGIC:
        raise FormatError(f"bad magic {blob[:4]!r}")
    n, ny, Nz, _, _, _, L, _, t, tag, _ = _HEADER.unpack(blob[4:4 + _HEADER.size])
    if ny != 1 or tag != 1:
        raise FormatError("not a filament trajectory container")
    payload = blob[4 + _HEADER.size:]
    if len(payload) != n * Nz * 16:
        raise FormatError("payload size inconsistent with header")
    samples = np.frombuffer(payload, dtype="<c16").reshape((n, 1, Nz), order="F")
    return FilamentConfiguration(samples[:, 0, :].copy(), L), t


def checkpoint_load(path) -> ComplexField:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 4 + _HEADER.size:
        raise FormatError("checkpoint truncated before header")
    magic = blob[:4]
    if magic != _MAGIC:
        if magic[:3] == _MAGIC[:3]:
            raise VersionMismatch(f"unsupported container version {magic!r}")
        raise FormatError(f"bad magic {magic!r}")
    Nx, Ny, Nz, dx, dy, dz, L, eps, t_phys, tag, param = _HEADER.unpack(
        blob[4:4 + _HEADER.size])
    payload = blob[4 + _HEADER.size:]
    expected = Nx * Ny * Nz * 16
    if len(payload) != expected:
        raise FormatError(f"payload size {len(payload)} != {expected} "
                          f"for grid {Nx}x{Ny}x{Nz}")
    try:
        if tag == 0:
            geom = DomainGeometry.disk(param, L, Nx, Ny, Nz)
        elif tag == 1:
            geom = DomainGeometry.rectangle(param, Ny * dy / 2.0, L, Nx, Ny, Nz)
        else:
            raise FormatError(f"unknown shape tag {tag}")
    except ValueError as exc:  # e.g. a filament-trajectory container
        raise FormatError(f"header does not describe a field grid: {exc}") from None
    if not (math.isclose(geom.dx, dx, rel_tol=1e-12)
            and math.isclose(geom.dy, dy, rel_tol=1e-12)
            and math.isclose(geom.dz, dz, rel_tol=1e-12)):
        raise FormatError("header spacings inconsistent with shape and counts")
    values = np.frombuffer(payload, dtype="<c16").reshape((Nx, Ny, Nz), order="F")
    return ComplexField(geom, values.copy(), t_phys=t_phys, epsilon=eps)
