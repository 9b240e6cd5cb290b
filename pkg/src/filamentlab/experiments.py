"""Batch orchestration: coupled filament-vs-field runs, sweeps over the
core scale, diagnostics emission, and run manifests.

Observation cadence lives in rescaled time (the filament clock), so
diagnostics tables align across core scales.  All outputs are
deterministic: rerunning the same configuration reproduces the CSV files
byte for byte (timestamps only appear in the manifest).
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .discrepancy import (
    FLAG_COLLISION,
    FLAG_E2D_THRESHOLD,
    FLAG_I3_NEGATIVE,
    GronwallRecord,
    concentration_T,
    gronwall_functionals,
    slice_discrepancy,
)
from .energies import hamiltonian_G0
from .errors import CollisionImminent, TimeGridMismatch
from .gamma import estimate_gamma
from .geometry import FilamentConfiguration, h_epsilon
from .gp import (
    GpConfig,
    InitialDataSpec,
    build_initial_data,
    checkpoint_save,
    e2d_threshold_flags,
    energy_G_eps,
    filament_trajectory_save,
    gp_step,
    mass,
    observation_times,
    sigma2d_profile,
)
from .kmd import IntegratorConfig, KmdState, run as kmd_run
from .matching import w11_match_deltas


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return repr(x)


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


@dataclass
class RunManifest:
    config_hash: str
    code_version: str
    started_at: str
    finished_at: str = ""
    files: list = field(default_factory=list)
    gamma: float = 0.0
    checks: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def to_json(self):
        return json.dumps(self.__dict__, indent=2, sort_keys=True)


def _extract_f_star(report, f_kmd, eps):
    """Rescaled detected centers labeled against the filament prediction.

    Returns None when any slice failed the clean-detection fast path.
    """
    if not report.all_matched:
        return None
    h = h_epsilon(eps)
    n = f_kmd.n
    samples = np.zeros_like(f_kmd.samples)
    targets = h * f_kmd.samples
    for iz, vort in enumerate(report.detected):
        tgt = targets[:, iz]
        res = w11_match_deltas(vort.centers,
                               np.column_stack([tgt.real, tgt.imag]))
        centers = vort.centers
        for i, j in enumerate(res.permutation):
            samples[j, iz] = (centers[i, 0] + 1j * centers[i, 1]) / h
    return FilamentConfiguration(samples, f_kmd.L)


def _resolve_gamma(config):
    if isinstance(config.gamma, (int, float)) and not isinstance(config.gamma, bool):
        return float(config.gamma), False
    cal = estimate_gamma(tol=config.gamma_tol)
    return cal.value, True


DIAG_HEADER = ["t", "G_eps", "G0", "I1", "I2", "I3", "T", "discrepancy",
               "discrepancy_over_h", "mass", "flags", "sigma2d"]
SUMMARY_HEADER = ["epsilon", "h_epsilon", "sup_discrepancy", "sup_over_h",
                  "energy_gap"]


def run_experiment(config: ExperimentConfig) -> RunManifest:
    """Full coupled run: for each core scale build prepared initial data,
    evolve filaments and field to each observation time, and emit the
    diagnostics and summary tables plus a manifest."""
    config.validate()
    os.makedirs(config.output_dir, exist_ok=True)
    manifest = RunManifest(
        config_hash=config.config_hash(),
        code_version=__version__,
        started_at=time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
        config=config.canonical_dict(),
    )
    gamma, calibrated = _resolve_gamma(config)
    manifest.gamma = gamma
    manifest.checks["gamma_calibrated"] = calibrated
    geom = config.geometry()
    f0 = config.initial_filaments()
    obs_times = observation_times(config.t_final, config.observer_interval)

    # Filament trajectory (independent of the core scale): march once.
    kmd_cfg = IntegratorConfig(dt=config.kmd_dt, scheme=config.kmd_scheme,
                               substeps=config.kmd_substeps,
                               record_every=10**9)
    kmd_states = [f0.copy()]
    kmd_collision = None
    state = KmdState(f0.copy(), 0.0)
    for t_next in obs_times[1:]:
        result = kmd_run(state, t_next, kmd_cfg)
        if result.collision is not None:
            kmd_collision = result.collision
            break
        state = result.final
        kmd_states.append(state.f.copy())
    manifest.checks["kmd_collision"] = kmd_collision is not None
    kmd_times = obs_times[:len(kmd_states)]
    if config.dump_trajectory:
        for k, (t_obs, f_k) in enumerate(zip(kmd_times, kmd_states)):
            name = f"kmd_t{k:03d}.gpf"
            filament_trajectory_save(f_k, t_obs,
                                     os.path.join(config.output_dir, name))
            manifest.files.append(name)

    summary_rows = []
    for i_eps, eps in enumerate(config.epsilon_list):
        try:
            rows = _run_single_epsilon(config, geom, eps, gamma, kmd_times,
                                       kmd_states, manifest, i_eps)
        except CollisionImminent as exc:
            manifest.errors.append(f"eps={eps}: collision abort: {exc}")
            continue
        except Exception as exc:  # record and keep partial outputs
            manifest.errors.append(f"eps={eps}: {type(exc).__name__}: {exc}")
            continue
        summary_rows.append(rows)
    summary_path = os.path.join(config.output_dir, "summary.csv")
    write_csv(summary_path, SUMMARY_HEADER, summary_rows)
    manifest.files.append("summary.csv")
    manifest.checks["completed"] = not manifest.errors
    manifest.finished_at = time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime())
    with open(os.path.join(config.output_dir, "manifest.json"), "w",
              encoding="utf-8") as fh:
        fh.write(manifest.to_json() + "\n")
    manifest.files.append("manifest.json")
    return manifest


def _run_single_epsilon(config, geom, eps, gamma, kmd_times, kmd_states,
                        manifest, i_eps):
    n = kmd_states[0].n
    h = h_epsilon(eps)
    spec = InitialDataSpec(f0=kmd_states[0],
                           core_profile=config.core_profile, phase=config.phase)
    field0 = build_initial_data(geom, eps, spec, gamma=gamma)
    gp_cfg = GpConfig(epsilon=eps, dt_phys=config.gp_dt(eps, geom),
                      workers=config.workers)
    g0_initial = hamiltonian_G0(kmd_states[0])
    energy_gap = abs(field0.build_diagnostics.g_eps - g0_initial)
    state = field0
    rows = []
    sup_disc = 0.0
    for k, (t_obs, f_kmd) in enumerate(zip(kmd_times, kmd_states)):
        target_phys = h * h * t_obs
        while state.t_phys < target_phys - 1e-13 * max(1.0, target_phys):
            dt = min(gp_cfg.dt_phys, target_phys - state.t_phys)
            state = gp_step(state, gp_cfg, dt=dt)
        report = slice_discrepancy(state, f_kmd, eps,
                                   lp_max_cells=config.lp_max_cells)
        f_star = _extract_f_star(report, f_kmd, eps)
        if f_star is not None:
            gron = gronwall_functionals(f_kmd, f_star, t=t_obs)
        else:
            gron = GronwallRecord(math.nan, math.nan, math.nan, t=t_obs)
        energies = energy_G_eps(state, n, gamma, workers=config.workers)
        t_val = concentration_T(state, f_kmd, config.cutoff_r, eps)
        _, sigma_total = sigma2d_profile(state, f_kmd, eps, gamma)
        flags = report.flags
        if manifest.checks.get("kmd_collision"):
            flags |= FLAG_COLLISION
        if math.isfinite(gron.I3) and gron.I3 < -0.01 * (abs(hamiltonian_G0(f_kmd)) + 1.0):
            flags |= FLAG_I3_NEGATIVE
        if not np.all(e2d_threshold_flags(state, n, config.theta)):
            flags |= FLAG_E2D_THRESHOLD
        rows.append([t_obs, energies.g_eps, hamiltonian_G0(f_kmd),
                     gron.I1, gron.I2, gron.I3, t_val, report.integral,
                     report.integral_over_h, mass(state), flags, sigma_total])
        sup_disc = max(sup_disc, report.integral)
        if config.dump_trajectory:
            name = f"field_eps{i_eps:02d}_t{k:03d}.gpf"
            checkpoint_save(state, os.path.join(config.output_dir, name))
            manifest.files.append(name)
    name = f"diagnostics_eps{i_eps:02d}.csv"
    write_csv(os.path.join(config.output_dir, name), DIAG_HEADER, rows)
    manifest.files.append(name)
    return [eps, h, sup_disc, sup_disc / h, energy_gap]


@dataclass
class ComparisonSummary:
    rows: list
    sup_distance: float
    integral_distance: float

    def header(self):
        return ["t", "distance", "I1", "I2", "I3"]


def compare_trajectories(kmd_traj, extracted_traj, eps) -> ComparisonSummary:
    """Per-time matching distance and Gronwall functionals between a
    filament trajectory and an extracted (rescaled) one.

    Both arguments are (times, configurations) pairs with aligned times.
    """
    t_a, states_a = kmd_traj
    t_b, states_b = extracted_traj
    t_a = np.asarray(t_a, dtype=float)
    t_b = np.asarray(t_b, dtype=float)
    if t_a.shape != t_b.shape or np.any(np.abs(t_a - t_b) > 1e-12):
        raise TimeGridMismatch("observation times differ")
    rows = []
    sup_d = 0.0
    integral = 0.0
    for idx, t in enumerate(t_a):
        fa, fb = states_a[idx], states_b[idx]
        dist = _trajectory_distance(fa, fb)
        gron = gronwall_functionals(fa, fb, t=t)
        rows.append([float(t), dist, gron.I1, gron.I2, gron.I3])
        sup_d = max(sup_d, dist)
        if idx > 0:
            integral += 0.5 * (rows[-1][1] + rows[-2][1]) * (t_a[idx] - t_a[idx - 1])
    return ComparisonSummary(rows, sup_d, integral)


def _trajectory_distance(fa: FilamentConfiguration, fb: FilamentConfiguration):
    """z-integral of the per-slice optimal matching distance."""
    if fa.samples.shape != fb.samples.shape:
        raise TimeGridMismatch("configurations must share n and Nz")
    total = 0.0
    for iz in range(fa.Nz):
        a, b = fa.samples[:, iz], fb.samples[:, iz]
        total += w11_match_deltas(np.column_stack([a.real, a.imag]),
                                  np.column_stack([b.real, b.imag])).cost
    return total * fa.dz
