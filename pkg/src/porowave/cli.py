"""Command-line driver.

Subcommands::

    porowave run      --preset NAME | --config FILE  [--out-dir DIR] [--workers N]
    porowave converge --preset NAME | --config FILE  [--out-dir DIR] [--workers N]
    porowave speeds   --material NAME|--config FILE [--angles SPEC] [--out-dir DIR]
    porowave check    --material NAME [--material NAME ...] [--out-dir DIR]

Exit codes: 0 success, 2 configuration error, 3 check failure,
4 runtime failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import verify
from .io import (
    write_gauge_csv,
    write_kv,
    write_manifest,
    write_snapshot,
    write_text,
)
from .materials import Material, MaterialError, PRESET_NAMES, preset
from .scenarios import ConfigError, build_run, parse_config, scenario_preset
from .solver import SolverError, run as run_solver
from .verify import ErrorReport

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CHECK = 3
EXIT_RUNTIME = 4


def _load_scenario(args):
    if args.config:
        scenario = parse_config(args.config)
    elif args.preset:
        scenario = scenario_preset(args.preset)
    else:
        raise ConfigError("either --preset or --config is required")
    return scenario


def _ensure_outdir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def cmd_run(args) -> int:
    scenario = _load_scenario(args)
    out = _ensure_outdir(args.out_dir)
    prefix = scenario.output.get("prefix", "run")
    grid, table, sim, _mode = build_run(scenario, workers=args.workers)
    if sim.t_final == 0.0 and not sim.snapshot_times:
        import dataclasses
        sim = dataclasses.replace(sim, snapshot_times=[0.0])
    result = run_solver(grid, table, sim)
    binary = bool(scenario.output.get("binary", False))
    if not result.snapshots:
        result.snapshots.append((sim.t_final, grid.interior.copy()))
    for i, (t, state) in enumerate(result.snapshots):
        snap_grid = grid.__class__(grid.nx, grid.nz, grid.dx, grid.dz,
                                   grid.x0, grid.z0)
        snap_grid.interior[...] = state
        write_snapshot(os.path.join(out, f"{prefix}_snapshot_{i:04d}.txt"),
                       snap_grid, t, binary=binary)
    for i, rec in enumerate(result.gauges):
        write_gauge_csv(os.path.join(out, f"{prefix}_gauge_{i + 1}.csv"), rec)
    write_manifest(os.path.join(out, f"{prefix}_manifest.txt"), result.manifest)
    print(f"run complete: {result.manifest['steps']} steps, "
          f"{len(result.snapshots)} snapshot(s), {len(result.gauges)} gauge(s) "
          f"-> {out}")
    return EXIT_OK


def cmd_converge(args) -> int:
    scenario = _load_scenario(args)
    if scenario.plane_wave is None:
        raise ConfigError("converge requires a plane-wave scenario")
    sizes = scenario.grid_sizes
    if len(sizes) < 3:
        raise ConfigError("converge needs at least 3 grid sizes "
                          "([converge] grid_sizes)")
    out = _ensure_outdir(args.out_dir)
    report = run_convergence(scenario, sizes, workers=args.workers)
    write_text(os.path.join(out, "convergence_report.txt"), report.to_text())
    write_kv(os.path.join(out, "convergence_report.kv"), report.to_kv())
    print(report.to_text())
    return EXIT_OK


def run_convergence(scenario, grid_sizes, workers=None) -> ErrorReport:
    """Run the plane-wave scenario per grid size; fit error norms.

    The per-cell error is the energy norm of the difference between the
    computed state and the exact mode at the final time, normalized by
    the energy norm of the mode amplitude.
    """
    norms = {"grid_1": [], "grid_2": [], "max": []}
    for m in grid_sizes:
        grid, table, sim, mode = build_run(scenario, nx=m, nz=m, workers=workers)
        result = run_solver(grid, table, sim)
        X, Z = np.meshgrid(grid.x_centers(), grid.z_centers())
        exact = sim.analytic_solution(X, Z, sim.t_final)
        energy = table.materials[0].energy
        diff = result.grid.interior - exact
        efield = verify.energy_norm_field(diff, energy)
        amp = verify.energy_norm(mode.Q0, energy)
        n1, n2, nmax = verify.grid_norms(efield / amp)
        norms["grid_1"].append(n1)
        norms["grid_2"].append(n2)
        norms["max"].append(nmax)
    report = ErrorReport(grid_sizes=list(grid_sizes), norms=norms)
    report.fit()
    return report


def _parse_angles(spec_str: str):
    if ":" in spec_str:
        parts = spec_str.split(":")
        if len(parts) != 3:
            raise ConfigError("angle range must be start:stop:step (degrees)")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise ConfigError(f"bad angle range {spec_str!r}") from None
        if step <= 0:
            raise ConfigError("angle step must be positive")
        return list(np.arange(start, stop + step / 2, step))
    try:
        return [float(p) for p in spec_str.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"bad angle list {spec_str!r}") from None


def _resolve_materials(args):
    names = args.material or []
    specs = {}
    if args.config:
        scenario = parse_config(args.config)
        specs.update(scenario.materials)
    for name in names:
        specs[name] = preset(name)
    if not specs:
        raise ConfigError("no material given (--material NAME or --config FILE)")
    return specs


def cmd_speeds(args) -> int:
    specs = _resolve_materials(args)
    if len(specs) != 1:
        raise ConfigError("speeds works on exactly one material")
    name, spec = next(iter(specs.items()))
    angles = _parse_angles(args.angles)
    material = Material(spec)
    lines = ["angle_deg,c_pf,c_s,c_ps,lambda1,lambda2,tau_d1,tau_d3"]
    c = material.coeffs
    for a in angles:
        n = (math.cos(math.radians(a)), math.sin(math.radians(a)))
        c_pf, c_s, c_ps = material.speeds(n)
        if c.has_dissipation:
            lam1, lam2 = verify.reduced_speeds(material.matrices, n)
        else:
            lam1 = lam2 = float("nan")
        lines.append(",".join(format(v, ".17g") for v in
                              (a, c_pf, c_s, c_ps, lam1, lam2,
                               c.tau_d1, c.tau_d3)))
    out = _ensure_outdir(args.out_dir)
    path = os.path.join(out, f"speeds_{name}.csv")
    write_kv(path, lines)
    print("\n".join(lines))
    return EXIT_OK


def cmd_check(args) -> int:
    specs = _resolve_materials(args)
    out = _ensure_outdir(args.out_dir)
    all_passed = True
    for name, spec in specs.items():
        material = Material(spec)
        reports = [
            verify.check_hyperbolicity(material.matrices),
            verify.check_entropy_conditions(material.matrices),
            verify.check_subcharacteristic(material.matrices),
        ]
        text = "\n".join(r.to_text() for r in reports)
        kv = [line for r in reports for line in r.to_kv()]
        write_text(os.path.join(out, f"check_{name}.txt"), text)
        write_kv(os.path.join(out, f"check_{name}.kv"), kv)
        passed = all(r.passed for r in reports)
        all_passed &= passed
        print(f"{name}: {'PASS' if passed else 'FAIL'}")
        for r in reports:
            for note in r.notes:
                print(f"  [{r.name}] {note}")
            for key, val in r.violations():
                print(f"  [{r.name}] violation: {key} = {val}")
    return EXIT_OK if all_passed else EXIT_CHECK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="porowave",
        description="Finite volume wave propagation in orthotropic "
                    "poroelastic media.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, preset_help):
        p.add_argument("--config", help="INI configuration file")
        p.add_argument("--preset", help=preset_help)
        p.add_argument("--out-dir", default="out", help="output directory")
        p.add_argument("--workers", type=int, default=None,
                       help="data-parallel width (default: config value)")

    p_run = sub.add_parser("run", help="run a scenario and write outputs")
    common(p_run, "scenario preset name")
    p_run.set_defaults(func=cmd_run)

    p_conv = sub.add_parser("converge", help="grid-refinement study against "
                                             "the exact plane wave")
    common(p_conv, "plane-wave scenario preset name")
    p_conv.set_defaults(func=cmd_converge)

    p_speeds = sub.add_parser("speeds", help="wave-speed table over "
                                             "propagation angles")
    p_speeds.add_argument("--material", action="append",
                          help=f"material preset ({', '.join(PRESET_NAMES)})")
    p_speeds.add_argument("--config", help="INI file with a [material.*] section")
    p_speeds.add_argument("--angles", default="0:90:1",
                          help="degrees, 'start:stop:step' or a comma list")
    p_speeds.add_argument("--out-dir", default="out")
    p_speeds.set_defaults(func=cmd_speeds)

    p_check = sub.add_parser("check", help="structural checks "
                                           "(hyperbolicity, entropy, "
                                           "subcharacteristic)")
    p_check.add_argument("--material", action="append",
                         help="material preset name (repeatable)")
    p_check.add_argument("--config", help="INI file with [material.*] sections")
    p_check.add_argument("--out-dir", default="out")
    p_check.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, MaterialError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except verify.VerifyError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
