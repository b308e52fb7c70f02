"""Command-line entry point and experiment modes.

Usage:

    radem --config run.cfg [--mode NAME] [--out DIR]

Modes (config ``mode`` key, overridable with --mode):

    simulate      advance the configured run; writes diagnostics.csv,
                  snapshots/NNNN.dat and report.txt
    mms           forced smooth-solution convergence study; writes report.txt
    sk-check      eigenvector-vs-dissipation-kernel scan over 26 directions
    lemma1-check  empirical coercivity constants of the relative Helmholtz
                  functionals
    energy-audit  total-energy drift and Gauss-residual table over a
                  resolution sweep

Exit status: 0 on success, 2 on configuration errors, 3 on runtime aborts
(positivity loss, non-convergence, constraint violations).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import diagnostics, linear, mms, thermo
from .config import Config, init_fields, parse_config, serialize_config
from .errors import ConfigError, RademError
from .integrator import RunParams, run


def run_simulate(cfg: Config, out_dir: Path) -> str:
    grid, eq, prim = init_fields(cfg)
    params = cfg.run_params()
    snap_dir = out_dir / "snapshots"
    snap_dir.mkdir(parents=True, exist_ok=True)
    result = run(params, grid, eq, prim, snapshot_dir=str(snap_dir),
                 snapshot_stride=cfg.snapshot_stride)
    result.series.to_csv(out_dir / "diagnostics.csv")

    first, last = result.series.records[0], result.series.records[-1]
    lines = [
        "simulation summary",
        f"steps: {result.state.step}   final time: {result.state.t:.12g}",
        f"total mass drift:   {abs(last.total_mass - first.total_mass):.3e}",
        f"total energy drift: {abs(last.total_energy - first.total_energy):.3e}",
        f"lyapunov: initial {first.lyapunov:.6e}  final {last.lyapunov:.6e}",
        f"max div(B) residual: {max(r.div_b_residual for r in result.series.records):.3e}",
        f"max Gauss residual:  {max(r.gauss_residual for r in result.series.records):.3e}",
    ]
    return "\n".join(lines) + "\n"


def run_mms(cfg: Config, out_dir: Path) -> str:
    eos, rad = cfg.eos(), cfg.rad()
    cells, errors, orders = mms.spatial_study(
        eos, rad, cfg.nu, length=cfg.grid_lengths[0], cells=cfg.mms_cells,
        t_end=cfg.mms_t_end, cfl=cfg.cfl)
    dts, diffs, dt_orders = mms.temporal_study(
        eos, rad, cfg.nu, length=cfg.grid_lengths[0], t_end=cfg.mms_t_end)
    return mms.format_convergence_report(cells, errors, orders,
                                         dts, diffs, dt_orders)


def run_sk_check(cfg: Config, out_dir: Path) -> str:
    lin = linear.assemble(cfg.equilibrium(), cfg.eos(), cfg.rad(), cfg.nu)
    report = linear.sk_check(lin, linear.unit_directions_3d())
    return linear.format_sk_report(report, lin)


def run_lemma1_check(cfg: Config, out_dir: Path) -> str:
    report = thermo.coercivity_check(cfg.eq_rho, cfg.eq_theta, cfg.eos(),
                                     cfg.rad(), sample_count=cfg.lemma1_samples)
    return thermo.format_coercivity_report(report, cfg.eq_rho, cfg.eq_theta)


def energy_audit(cfg: Config):
    """Drift and Gauss-residual data per resolution; returns list of dicts."""
    rows = []
    for n in cfg.audit_cells:
        sub = Config(**{**vars(cfg), "grid_cells": (n,) * len(cfg.grid_cells),
                        "perturb": cfg.perturb})
        grid, eq, prim = init_fields(sub)
        result = run(sub.run_params(), grid, eq, prim)
        energy = result.series.column("total_energy")
        drift = float(np.max(np.abs(energy - energy[0])) / abs(energy[0]))
        gauss = float(np.max(result.series.column("gauss_residual")))
        div_b = float(np.max(result.series.column("div_b_residual")))
        rows.append({"cells": n, "energy_drift": drift,
                     "gauss_residual": gauss, "div_b_residual": div_b})
    return rows


def run_energy_audit(cfg: Config, out_dir: Path) -> str:
    rows = energy_audit(cfg)
    lines = ["total-energy drift and constraint residuals vs resolution",
             f"{'cells':>8} {'energy drift':>14} {'gauss resid':>14} "
             f"{'divB resid':>14} {'drift ratio':>12} {'gauss ratio':>12}"]
    for i, row in enumerate(rows):
        dr = rows[i - 1]["energy_drift"] / row["energy_drift"] if i else np.nan
        gr = rows[i - 1]["gauss_residual"] / row["gauss_residual"] if i else np.nan
        lines.append(f"{row['cells']:>8} {row['energy_drift']:14.6e} "
                     f"{row['gauss_residual']:14.6e} {row['div_b_residual']:14.6e} "
                     f"{dr:12.3f} {gr:12.3f}")
    return "\n".join(lines) + "\n"


_MODE_DRIVERS = {
    "simulate": run_simulate,
    "mms": run_mms,
    "sk-check": run_sk_check,
    "lemma1-check": run_lemma1_check,
    "energy-audit": run_energy_audit,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="radem",
        description="damped radiative Euler-Maxwell solver and diagnostics")
    parser.add_argument("--config", required=True, help="path to a config file")
    parser.add_argument("--mode", choices=sorted(_MODE_DRIVERS),
                        help="override the config mode")
    parser.add_argument("--out", default="out", help="output directory")
    args = parser.parse_args(argv)

    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        cfg = parse_config(text)
        if args.mode:
            cfg.mode = args.mode
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.resolved").write_text(serialize_config(cfg))

    try:
        report = _MODE_DRIVERS[cfg.mode](cfg, out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except RademError as exc:
        print(f"runtime abort: {exc}", file=sys.stderr)
        return 3

    (out_dir / "report.txt").write_text(report)
    print(report, end="")
    return 0


def console_main() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
