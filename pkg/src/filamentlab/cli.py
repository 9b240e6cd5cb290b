"""Command-line entry point.

Subcommands: ``run`` (coupled experiment), ``kmd`` (filaments only),
``gp`` (field only), ``gamma`` (core-constant calibration), ``compare``
(two run directories), ``check`` (single-checkpoint diagnostics).

Exit codes: 0 success, 1 usage, 2 numeric failure, 3 collision abort.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .config import load_config
from .errors import CollisionImminent, FilamentLabError
from .experiments import run_experiment, write_csv
from .gamma import estimate_gamma, save_gamma_cache
from .geometry import h_epsilon
from .gp import (
    GpConfig, InitialDataSpec, build_initial_data, checkpoint_load,
    checkpoint_save, energy_G_eps, gp_step, mass, observation_times,
)
from .kmd import IntegratorConfig, KmdState, run as kmd_run
from .vortices import detect_slice

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_COLLISION = 3


def _parser():
    p = argparse.ArgumentParser(prog="filamentlab",
                                description="vortex filament laboratory")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "coupled filament/field experiment"),
                        ("kmd", "filament system only"),
                        ("gp", "field solver only")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("config", help="experiment configuration file")
        sp.add_argument("--output", help="override output directory")
    sp = sub.add_parser("gamma", help="calibrate the core-energy constant")
    sp.add_argument("--tol", type=float, default=1e-3)
    sp.add_argument("--cache", default="gamma_cache.json")
    sp = sub.add_parser("compare", help="compare two run directories")
    sp.add_argument("runA")
    sp.add_argument("runB")
    sp = sub.add_parser("check", help="diagnostics of a field checkpoint")
    sp.add_argument("checkpoint")
    return p


def _load(path):
    if not os.path.exists(path):
        print(f"error: no such file: {path}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    try:
        return load_config(path)
    except FilamentLabError as exc:
        print(f"error: bad configuration: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    except Exception as exc:
        print(f"error: cannot parse configuration: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _cmd_run(args):
    cfg = _load(args.config)
    if args.output:
        cfg.output_dir = args.output
    manifest = run_experiment(cfg)
    print(f"run complete: {len(manifest.files)} files in {cfg.output_dir}")
    if manifest.checks.get("kmd_collision"):
        return EXIT_COLLISION
    if manifest.errors:
        for err in manifest.errors:
            print("error:", err, file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _cmd_kmd(args):
    cfg = _load(args.config)
    outdir = args.output or cfg.output_dir
    os.makedirs(outdir, exist_ok=True)
    f0 = cfg.initial_filaments()
    state = KmdState(f0, 0.0)
    icfg = IntegratorConfig(dt=cfg.kmd_dt, scheme=cfg.kmd_scheme,
                            substeps=cfg.kmd_substeps,
                            record_every=max(1, int(round(
                                cfg.observer_interval / cfg.kmd_dt))))
    result = kmd_run(state, cfg.t_final, icfg)
    rows = [[d["t"], d["G0"], d["center"].real, d["center"].imag,
             d["second_moment"], d["rho"]] for d in result.diagnostics]
    path = os.path.join(outdir, "kmd_diagnostics.csv")
    write_csv(path, ["t", "G0", "center_x", "center_y", "second_moment", "rho"], rows)
    print(f"filament run complete: {path}")
    if result.collision is not None:
        print(f"collision abort at t={result.collision.t:.6g} "
              f"(rho={result.collision.rho:.3e})", file=sys.stderr)
        return EXIT_COLLISION
    return EXIT_OK


def _cmd_gp(args):
    cfg = _load(args.config)
    outdir = args.output or cfg.output_dir
    os.makedirs(outdir, exist_ok=True)
    geom = cfg.geometry()
    f0 = cfg.initial_filaments()
    gamma = cfg.gamma if isinstance(cfg.gamma, (int, float)) else 0.0
    for i_eps, eps in enumerate(cfg.epsilon_list):
        spec = InitialDataSpec(f0=f0, core_profile=cfg.core_profile, phase=cfg.phase)
        state = build_initial_data(geom, eps, spec, gamma=gamma)
        gp_cfg = GpConfig(epsilon=eps, dt_phys=cfg.gp_dt(eps, geom), workers=cfg.workers)
        h2 = h_epsilon(eps) ** 2
        rows = []
        for t_obs in observation_times(cfg.t_final, cfg.observer_interval):
            target = h2 * t_obs
            while state.t_phys < target - 1e-13 * max(1.0, target):
                dt = min(gp_cfg.dt_phys, target - state.t_phys)
                state = gp_step(state, gp_cfg, dt=dt)
            en = energy_G_eps(state, f0.n, gamma, workers=cfg.workers)
            rows.append([t_obs, mass(state), en.g_eps, en.paper_e_eps_integral,
                         en.standard_e_integral])
        path = os.path.join(outdir, f"gp_diagnostics_eps{i_eps:02d}.csv")
        write_csv(path, ["t", "mass", "G_eps", "paper_energy", "standard_energy"],
                  rows)
        checkpoint_save(state, os.path.join(outdir, f"field_eps{i_eps:02d}.gpf"))
    print(f"field run complete: {outdir}")
    return EXIT_OK


def _cmd_gamma(args):
    cal = estimate_gamma(tol=args.tol)
    save_gamma_cache(cal, args.cache)
    print(f"gamma = {cal.value:.6f} (tol {args.tol:g}, cached in {args.cache})")
    return EXIT_OK


def _cmd_compare(args):
    for d in (args.runA, args.runB):
        if not os.path.isdir(d):
            print(f"error: no such run directory: {d}", file=sys.stderr)
            return EXIT_USAGE
    rows_out = []
    for name in sorted(os.listdir(args.runA)):
        if not (name.startswith("diagnostics_eps") and name.endswith(".csv")):
            continue
        pa = os.path.join(args.runA, name)
        pb = os.path.join(args.runB, name)
        if not os.path.exists(pb):
            print(f"error: {name} missing from {args.runB}", file=sys.stderr)
            return EXIT_NUMERIC
        a = np.genfromtxt(pa, delimiter=",", names=True)
        b = np.genfromtxt(pb, delimiter=",", names=True)
        ta, tb = np.atleast_1d(a["t"]), np.atleast_1d(b["t"])
        if ta.shape != tb.shape or np.any(np.abs(ta - tb) > 1e-12):
            print(f"error: observation times differ in {name}", file=sys.stderr)
            return EXIT_NUMERIC
        for col in ("G0", "discrepancy", "G_eps"):
            da = np.atleast_1d(a[col])
            db = np.atleast_1d(b[col])
            rows_out.append([name, col, float(np.nanmax(np.abs(da - db)))])
    print(f"{'file':<28}{'column':<20}{'max_abs_diff'}")
    for name, col, diff in rows_out:
        print(f"{name:<28}{col:<20}{diff:.6e}")
    return EXIT_OK


def _cmd_check(args):
    if not os.path.exists(args.checkpoint):
        print(f"error: no such file: {args.checkpoint}", file=sys.stderr)
        return EXIT_USAGE
    state = checkpoint_load(args.checkpoint)
    g = state.geom
    en = energy_G_eps(state, 0, 0.0)
    counts = []
    for iz in range(g.Nz):
        vs = detect_slice(state.values[:, :, iz], g, z=iz * g.dz)
        counts.append((len(vs), int(vs.charges.sum()) if len(vs) else 0))
    n_vort = sorted(set(c[0] for c in counts))
    info = {
        "grid": [g.Nx, g.Ny, g.Nz],
        "shape": g.shape,
        "L": g.L,
        "epsilon": state.epsilon,
        "t_phys": state.t_phys,
        "mass": mass(state),
        "raw_energy": en.paper_e_eps_integral,
        "standard_energy": en.standard_e_integral,
        "vortices_per_slice": n_vort if len(n_vort) > 1 else n_vort[0],
        "total_charge_per_slice": sorted(set(c[1] for c in counts)),
    }
    print(json.dumps(info, indent=2, sort_keys=True))
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    handlers = {"run": _cmd_run, "kmd": _cmd_kmd, "gp": _cmd_gp,
                "gamma": _cmd_gamma, "compare": _cmd_compare, "check": _cmd_check}
    try:
        return handlers[args.command](args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except CollisionImminent as exc:
        print(f"error: collision abort: {exc}", file=sys.stderr)
        return EXIT_COLLISION
    except FilamentLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
