"""Experiment configuration: TOML-style file parsing, defaults, validation.

Every key has a default; the fully resolved configuration is echoed into
the run manifest so runs are self-describing.  See docs/config.md for the
key reference.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import InvalidParameters
from .geometry import DISK, RECTANGLE, DomainGeometry, FilamentConfiguration, min_separation

SCENARIOS = ("single_straight", "rotating_pair", "helix_single", "helix_pair",
             "polygon", "custom")


@dataclass
class ExperimentConfig:
    # scenario
    scenario: str = "rotating_pair"
    scenario_params: dict = field(default_factory=lambda: {"d": 1.0})
    # geometry
    shape: str = RECTANGLE
    ax: float = 1.0
    ay: float = 1.0
    radius: float = 1.0
    L: float = 2.0 * math.pi
    Nx: int = 96
    Ny: int = 96
    Nz: int = 16
    # sweep
    epsilon_list: tuple = (0.1, 0.05)
    t_final: float = 0.05
    observer_interval: float = 0.025
    # filament integrator
    kmd_dt: float = 1e-4
    kmd_scheme: str = "strang_split"
    kmd_substeps: int = 4
    collision_factor: float = 1e-3
    # field integrator
    gp_dt_factor: float = 0.25
    core_profile: str = "tanh"
    phase: str = "angle_sum_plus_harmonic_correction"
    workers: int = 2
    # metrics
    cutoff_r: float = 0.2
    lp_max_cells: int = 96 * 96
    theta: float = 0.5
    # constants
    gamma: object = "calibrate"
    gamma_tol: float = 1e-3
    # output
    output_dir: str = "runs/out"
    dump_trajectory: bool = False
    seed: int = 0

    def geometry(self) -> DomainGeometry:
        if self.shape == DISK:
            return DomainGeometry.disk(self.radius, self.L, self.Nx, self.Ny, self.Nz)
        return DomainGeometry.rectangle(self.ax, self.ay, self.L,
                                        self.Nx, self.Ny, self.Nz)

    def initial_filaments(self) -> FilamentConfiguration:
        return build_scenario(self.scenario, self.scenario_params,
                              self.L, self.Nz)

    def gp_dt(self, eps, geom=None) -> float:
        """Field step: the accuracy scale dt_factor * eps^2, capped by the
        split-step resonance bound of the grid when a geometry is given."""
        dt = self.gp_dt_factor * eps * eps
        if geom is not None:
            from .gp import resonance_dt_bound
            dt = min(dt, 0.8 * resonance_dt_bound(geom))
        return dt

    def validate(self):
        eps = self.epsilon_list
        if not eps or any(not 0.0 < e < 1.0 for e in eps):
            raise InvalidParameters("epsilon_list entries must lie in (0, 1)")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise InvalidParameters("epsilon_list must be strictly decreasing")
        if self.scenario not in SCENARIOS:
            raise InvalidParameters(f"unknown scenario {self.scenario!r}")
        if self.t_final < 0:
            raise InvalidParameters("t_final must be nonnegative")
        f0 = self.initial_filaments()
        rho = min_separation(f0)
        if f0.n >= 2 and not rho > 4.0 * self.cutoff_r:
            raise InvalidParameters(
                f"scenario separation {rho:.4g} must exceed 4 r = {4 * self.cutoff_r:.4g}")
        self.geometry()  # raises on bad grid parameters
        return self

    def canonical_dict(self) -> dict:
        d = {
            "scenario": self.scenario,
            "scenario_params": dict(sorted(self.scenario_params.items())),
            "geometry": {"shape": self.shape, "ax": self.ax, "ay": self.ay,
                         "radius": self.radius, "L": self.L,
                         "Nx": self.Nx, "Ny": self.Ny, "Nz": self.Nz},
            "sweep": {"epsilon": list(self.epsilon_list), "t_final": self.t_final,
                      "observer_interval": self.observer_interval},
            "kmd": {"dt": self.kmd_dt, "scheme": self.kmd_scheme,
                    "substeps": self.kmd_substeps,
                    "collision_factor": self.collision_factor},
            "gp": {"dt_factor": self.gp_dt_factor, "core_profile": self.core_profile,
                   "phase": self.phase, "workers": self.workers},
            "metrics": {"cutoff_r": self.cutoff_r, "lp_max_cells": self.lp_max_cells,
                        "theta": self.theta},
            "constants": {"gamma": self.gamma, "gamma_tol": self.gamma_tol},
            "output": {"dir": self.output_dir, "dump_trajectory": self.dump_trajectory},
            "seed": self.seed,
        }
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def build_scenario(name, params, L, Nz) -> FilamentConfiguration:
    """Initial filament curves for each built-in scenario."""
    z = np.arange(Nz) * (L / Nz)
    if name == "single_straight":
        return FilamentConfiguration(np.zeros((1, Nz), dtype=complex), L)
    if name == "rotating_pair":
        d = float(params.get("d", 1.0))
        if d <= 0:
            raise InvalidParameters("rotating_pair needs d > 0")
        half = 0.5 * d
        return FilamentConfiguration(
            np.vstack([np.full(Nz, half + 0j), np.full(Nz, -half + 0j)]), L)
    if name == "helix_single":
        A = complex(params.get("A", 0.25))
        mode = int(params.get("mode", 1))
        k = 2.0 * math.pi * mode / L
        return FilamentConfiguration((A * np.exp(1j * k * z))[None, :], L)
    if name == "helix_pair":
        R = float(params.get("R", 1.0))
        mode = int(params.get("mode", 1))
        if R <= 0:
            raise InvalidParameters("helix_pair needs R > 0")
        k = 2.0 * math.pi * mode / L
        row = R * np.exp(1j * k * z)
        return FilamentConfiguration(np.vstack([row, -row]), L)
    if name == "polygon":
        n = int(params.get("n", 3))
        R = float(params.get("R", 1.0))
        if n < 2 or R <= 0:
            raise InvalidParameters("polygon needs n >= 2 and R > 0")
        verts = R * np.exp(2j * math.pi * np.arange(n) / n)
        return FilamentConfiguration(np.repeat(verts[:, None], Nz, axis=1), L)
    if name == "custom":
        path = params.get("file")
        if not path:
            raise InvalidParameters("custom scenario needs a 'file' key")
        samples = np.asarray(np.load(path), dtype=complex)
        if samples.ndim != 2 or samples.shape[1] != Nz:
            raise InvalidParameters(
                f"custom samples must have shape (n, Nz={Nz}), got {samples.shape}")
        return FilamentConfiguration(samples, L)
    raise InvalidParameters(f"unknown scenario {name!r}")


def _section(data, name):
    sec = data.get(name, {})
    if not isinstance(sec, dict):
        raise InvalidParameters(f"config section [{name}] must be a table")
    return sec


def config_from_dict(data: dict) -> ExperimentConfig:
    sc = _section(data, "scenario")
    geo = _section(data, "geometry")
    sweep = _section(data, "sweep")
    kmd = _section(data, "kmd")
    gp = _section(data, "gp")
    metrics = _section(data, "metrics")
    constants = _section(data, "constants")
    output = _section(data, "output")
    cfg = ExperimentConfig()
    cfg.scenario = sc.get("name", cfg.scenario)
    cfg.scenario_params = {k: v for k, v in sc.items() if k != "name"}
    if not cfg.scenario_params and cfg.scenario == "rotating_pair":
        cfg.scenario_params = {"d": 1.0}
    cfg.shape = geo.get("shape", cfg.shape)
    cfg.ax = float(geo.get("ax", cfg.ax))
    cfg.ay = float(geo.get("ay", cfg.ay))
    cfg.radius = float(geo.get("radius", cfg.radius))
    cfg.L = float(geo.get("L", cfg.L))
    cfg.Nx = int(geo.get("Nx", cfg.Nx))
    cfg.Ny = int(geo.get("Ny", cfg.Ny))
    cfg.Nz = int(geo.get("Nz", cfg.Nz))
    eps = sweep.get("epsilon", list(cfg.epsilon_list))
    cfg.epsilon_list = tuple(float(e) for e in np.atleast_1d(eps))
    cfg.t_final = float(sweep.get("t_final", cfg.t_final))
    cfg.observer_interval = float(sweep.get("observer_interval", cfg.observer_interval))
    cfg.kmd_dt = float(kmd.get("dt", cfg.kmd_dt))
    cfg.kmd_scheme = kmd.get("scheme", cfg.kmd_scheme)
    cfg.kmd_substeps = int(kmd.get("substeps", cfg.kmd_substeps))
    cfg.collision_factor = float(kmd.get("collision_factor", cfg.collision_factor))
    cfg.gp_dt_factor = float(gp.get("dt_factor", cfg.gp_dt_factor))
    cfg.core_profile = gp.get("core_profile", cfg.core_profile)
    cfg.phase = gp.get("phase", cfg.phase)
    cfg.workers = int(gp.get("workers", cfg.workers))
    cfg.cutoff_r = float(metrics.get("cutoff_r", cfg.cutoff_r))
    cfg.lp_max_cells = int(metrics.get("lp_max_cells", cfg.lp_max_cells))
    cfg.theta = float(metrics.get("theta", cfg.theta))
    cfg.gamma = constants.get("gamma", cfg.gamma)
    if isinstance(cfg.gamma, str) and cfg.gamma != "calibrate":
        raise InvalidParameters("constants.gamma must be a number or 'calibrate'")
    cfg.gamma_tol = float(constants.get("gamma_tol", cfg.gamma_tol))
    cfg.output_dir = output.get("dir", cfg.output_dir)
    cfg.dump_trajectory = bool(output.get("dump_trajectory", cfg.dump_trajectory))
    cfg.seed = int(data.get("seed", cfg.seed))
    return cfg.validate()


def load_config(path) -> ExperimentConfig:
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    return config_from_dict(data)
