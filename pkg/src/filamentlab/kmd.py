"""Time integration of the nearly-parallel filament system.

The general system, for horizontal displacements X_j(z, t) in R^2,

    dX_j/dt = J [ alpha_j Gamma_j X_j'' + sum_{k != j} 2 Gamma_k
                  (X_j - X_k)/|X_j - X_k|^2 ],

is integrated in complex form f_j = X_j1 + i X_j2, where the symplectic
rotation J acts as multiplication by -i.  That orientation is fixed (and
unit-tested) by requiring the unit-circulation right-hand side to coincide
with  i df_j/dt = f_j'' + 2 sum (f_j - f_k)/|f_j - f_k|^2.

Two schemes: ``strang_split`` (pointwise-in-z interaction flow by RK4
micro-steps around an exact Fourier step for the dispersive part) and
``rk4_spectral`` (classical RK4 on the full right-hand side).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import CollisionImminent, InvalidParameters
from .energies import hamiltonian_G0
from .geometry import FilamentConfiguration, min_separation

STRANG = "strang_split"
RK4 = "rk4_spectral"


@dataclass(frozen=True)
class KmdParameters:
    """Circulations and core constants, one per filament (defaults all 1)."""

    Gamma: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "Gamma", np.atleast_1d(np.asarray(self.Gamma, float)))
        object.__setattr__(self, "alpha", np.atleast_1d(np.asarray(self.alpha, float)))
        if self.Gamma.shape != self.alpha.shape:
            raise InvalidParameters("Gamma and alpha must have matching lengths")
        if np.any(self.Gamma == 0.0):
            raise InvalidParameters("circulations must be nonzero")
        if np.any(self.Gamma > 0) and np.any(self.Gamma < 0):
            warnings.warn("mixed-sign circulations are experimental: the asymptotic "
                          "motion law is only established for equal signs",
                          stacklevel=2)

    @classmethod
    def unit(cls, n):
        return cls(np.ones(n), np.ones(n))


@dataclass
class KmdState:
    """Filament configuration together with its rescaled time."""

    f: FilamentConfiguration
    t: float = 0.0


@dataclass
class IntegratorConfig:
    dt: float
    scheme: str = STRANG
    collision_threshold: float = 0.0  # 0 -> 1e-3 * initial separation, set by run()
    substeps: int = 4
    record_every: int = 1

    def __post_init__(self):
        if self.dt <= 0:
            raise InvalidParameters("dt must be positive")
        if self.scheme not in (STRANG, RK4):
            raise InvalidParameters(f"unknown scheme {self.scheme!r}")
        if self.collision_threshold < 0:
            raise InvalidParameters("collision threshold must be nonnegative")
        if self.substeps < 1:
            raise InvalidParameters("substeps must be >= 1")


def _check_collision(samples, L, threshold, t):
    if threshold <= 0.0:
        return
    rho = min_separation(FilamentConfiguration(samples, L))
    if rho < threshold:
        raise CollisionImminent(t, rho, threshold)


def _interaction_term(samples, Gamma):
    """sum_{k != j} 2 Gamma_k (f_j - f_k)/|f_j - f_k|^2, complex (n, Nz)."""
    n = samples.shape[0]
    if n < 2:
        return np.zeros_like(samples)
    diff = samples[:, None, :] - samples[None, :, :]
    r2 = np.abs(diff) ** 2
    idx = np.arange(n)
    r2[idx, idx, :] = 1.0
    terms = (2.0 * Gamma)[None, :, None] * diff / r2
    terms[idx, idx, :] = 0.0
    return terms.sum(axis=1)


def kmd_rhs(f: FilamentConfiguration, params: KmdParameters | None = None,
            collision_threshold: float = 0.0, t: float = 0.0) -> np.ndarray:
    """df/dt in complex form, shape (n, Nz); z-derivatives are spectral."""
    params = params or KmdParameters.unit(f.n)
    _check_collision(f.samples, f.L, collision_threshold, t)
    d2 = f.derivative(order=2)
    coeff = (params.alpha * params.Gamma)[:, None]
    return -1j * (coeff * d2 + _interaction_term(f.samples, params.Gamma))


def _interaction_flow(samples, L, dt, params, substeps, threshold, t):
    """RK4 micro-integration of the pointwise-in-z interaction system."""
    if samples.shape[0] < 2 or dt == 0.0:
        return samples
    h = dt / substeps
    Gamma = params.Gamma
    s = samples
    for _ in range(substeps):
        _check_collision(s, L, threshold, t)
        k1 = -1j * _interaction_term(s, Gamma)
        k2 = -1j * _interaction_term(s + 0.5 * h * k1, Gamma)
        k3 = -1j * _interaction_term(s + 0.5 * h * k2, Gamma)
        k4 = -1j * _interaction_term(s + h * k3, Gamma)
        s = s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return s


def _linear_flow(samples, L, dt, params):
    """Exact Fourier step of  i df_j/dt = alpha_j Gamma_j f_j''."""
    Nz = samples.shape[1]
    k = 2.0 * np.pi * np.fft.fftfreq(Nz, d=L / Nz)
    coeff = (params.alpha * params.Gamma)[:, None]
    mult = np.exp(1j * coeff * (k**2)[None, :] * dt)
    return np.fft.ifft(mult * np.fft.fft(samples, axis=1), axis=1)


def step(state: KmdState, dt: float, config: IntegratorConfig,
         params: KmdParameters | None = None) -> KmdState:
    """Advance one step; pure function of its inputs."""
    params = params or KmdParameters.unit(state.f.n)
    f, L = state.f, state.f.L
    thr = config.collision_threshold
    if config.scheme == RK4:
        s = f.samples

        def rhs(samples):
            _check_collision(samples, L, thr, state.t)
            cfg = FilamentConfiguration(samples, L)
            d2 = cfg.derivative(order=2)
            coeff = (params.alpha * params.Gamma)[:, None]
            return -1j * (coeff * d2 + _interaction_term(samples, params.Gamma))

        k1 = rhs(s)
        k2 = rhs(s + 0.5 * dt * k1)
        k3 = rhs(s + 0.5 * dt * k2)
        k4 = rhs(s + dt * k3)
        new = s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    else:
        half = _interaction_flow(f.samples, L, 0.5 * dt, params,
                                 config.substeps, thr, state.t)
        lin = _linear_flow(half, L, dt, params)
        new = _interaction_flow(lin, L, 0.5 * dt, params,
                                config.substeps, thr, state.t)
    _check_collision(new, L, thr, state.t + dt)
    return KmdState(FilamentConfiguration(new, L), state.t + dt)


def conserved_quantities(f: FilamentConfiguration) -> dict:
    """Hamiltonian, center and second moment (first integrals at unit circulation)."""
    return {
        "G0": hamiltonian_G0(f),
        "center": complex(np.sum(f.samples) * f.dz),
        "second_moment": float(np.sum(np.abs(f.samples) ** 2) * f.dz),
    }


@dataclass
class CollisionReport:
    t: float
    rho: float
    threshold: float


@dataclass
class KmdRunResult:
    times: np.ndarray
    states: list
    diagnostics: list
    collision: CollisionReport | None = None

    @property
    def completed(self):
        return self.collision is None

    @property
    def final(self) -> KmdState:
        return KmdState(self.states[-1], float(self.times[-1]))


def run(state: KmdState, t_final: float, config: IntegratorConfig,
        observer=None, params: KmdParameters | None = None) -> KmdRunResult:
    """Step repeatedly to ``t_final``, recording snapshots and diagnostics.

    Aborts cleanly with a CollisionReport (and the partial trajectory) when
    the separation falls below the collision threshold.
    """
    if t_final < state.t:
        raise InvalidParameters("t_final must be >= state.t")
    params = params or KmdParameters.unit(state.f.n)
    cfg = config
    if cfg.collision_threshold == 0.0 and state.f.n >= 2:
        cfg = replace(config, collision_threshold=1e-3 * min_separation(state.f))

    def snapshot(s):
        return {
            "t": s.t,
            "rho": min_separation(s.f),
            **conserved_quantities(s.f),
        }

    times = [state.t]
    states = [state.f.copy()]
    diags = [snapshot(state)]
    if observer is not None:
        observer(state)
    collision = None
    nstep = 0
    current = state
    while current.t < t_final - 1e-14 * max(1.0, abs(t_final)):
        dt = min(cfg.dt, t_final - current.t)
        try:
            current = step(current, dt, cfg, params)
        except CollisionImminent as exc:
            collision = CollisionReport(exc.t, exc.rho, exc.threshold)
            break
        nstep += 1
        if observer is not None:
            observer(current)
        if nstep % cfg.record_every == 0 or current.t >= t_final - 1e-14:
            times.append(current.t)
            states.append(current.f.copy())
            diags.append(snapshot(current))
    return KmdRunResult(np.asarray(times), states, diags, collision)


# ---------------------------------------------------------------------------
# Closed-form reference solutions

ROTATING_PAIR = "rotating_pair"
HELIX_MODE = "helix_mode"
POLYGON = "polygon"
WAVE_PACKET = "wave_packet"


@dataclass(frozen=True)
class ReferenceSolution:
    """Closed-form solutions used for regression and convergence tests."""

    kind: str
    L: float
    params: dict = field(default_factory=dict)

    @classmethod
    def rotating_pair(cls, d, L):
        if d <= 0:
            raise InvalidParameters("pair separation must be positive")
        return cls(ROTATING_PAIR, L, {"d": float(d)})

    @classmethod
    def helix_mode(cls, A, k, L):
        mode = k * L / (2.0 * math.pi)
        if abs(mode - round(mode)) > 1e-9:
            raise InvalidParameters("helix wavenumber must be a multiple of 2 pi / L")
        return cls(HELIX_MODE, L, {"A": complex(A), "k": float(k)})

    @classmethod
    def polygon(cls, n, R, L):
        if n < 2 or R <= 0:
            raise InvalidParameters("polygon needs n >= 2 and positive radius")
        return cls(POLYGON, L, {"n": int(n), "R": float(R)})

    @classmethod
    def wave_packet(cls, A, m0, sigma_m, L, n_modes=12):
        if sigma_m <= 0:
            raise InvalidParameters("mode width must be positive")
        return cls(WAVE_PACKET, L, {"A": complex(A), "m0": int(m0),
                                    "sigma_m": float(sigma_m), "n_modes": int(n_modes)})

    @property
    def n(self):
        if self.kind == ROTATING_PAIR:
            return 2
        if self.kind == POLYGON:
            return self.params["n"]
        return 1

    @property
    def angular_velocity(self):
        """Angular velocity of the rigidly rotating configurations."""
        if self.kind == ROTATING_PAIR:
            return -4.0 / self.params["d"] ** 2
        if self.kind == POLYGON:
            return -(self.params["n"] - 1) / self.params["R"] ** 2
        raise InvalidParameters(f"{self.kind} does not rotate rigidly")

    def evaluate(self, z, t) -> np.ndarray:
        """Filament positions at height(s) z and time t, complex (n, len(z))."""
        z = np.atleast_1d(np.asarray(z, dtype=float))
        if self.kind == ROTATING_PAIR:
            d = self.params["d"]
            a = 0.5 * d * np.exp(-1j * (4.0 / d**2) * t)
            return np.vstack([np.full(z.shape, a), np.full(z.shape, -a)])
        if self.kind == HELIX_MODE:
            A, k = self.params["A"], self.params["k"]
            return (A * np.exp(1j * (k * z + k * k * t)))[None, :]
        if self.kind == POLYGON:
            n, R = self.params["n"], self.params["R"]
            omega = -(n - 1) / R**2
            verts = R * np.exp(1j * (2.0 * np.pi * np.arange(n) / n + omega * t))
            return np.repeat(verts[:, None], z.size, axis=1)
        if self.kind == WAVE_PACKET:
            A, m0 = self.params["A"], self.params["m0"]
            sig, M = self.params["sigma_m"], self.params["n_modes"]
            out = np.zeros(z.shape, dtype=complex)
            for m in range(m0 - M, m0 + M + 1):
                k = 2.0 * np.pi * m / self.L
                out += math.exp(-0.5 * ((m - m0) / sig) ** 2) * np.exp(
                    1j * (k * z + k * k * t))
            return (A * out)[None, :]
        raise InvalidParameters(f"unknown reference kind {self.kind!r}")

    def as_configuration(self, Nz, t=0.0) -> FilamentConfiguration:
        z = np.arange(Nz) * (self.L / Nz)
        return FilamentConfiguration(self.evaluate(z, t), self.L)


def reference_evaluate(ref: ReferenceSolution, z, t) -> np.ndarray:
    return ref.evaluate(z, t)
