"""Flat key-value configuration: parsing, validation, serialization, and
constraint-compatible initial fields.

Format: one ``dotted.key = value`` per line, ``#`` comments, blank lines
ignored. Lists are comma-separated. The full key set:

    mode                      simulate | mms | sk-check | lemma1-check | energy-audit
    grid.cells                comma ints, one per axis (1-3 axes)
    grid.lengths              comma floats, one per axis
    eos.R, eos.Cv             ideal-gas constants
    radiation.a               radiation constant (> 0)
    radiation.sigma_a         absorption coefficient (>= 0)
    equilibrium.rho           background density (> 0)
    equilibrium.theta         background temperature (> 0); Er is derived as a*theta^4
    equilibrium.B             comma 3 floats
    params.nu                 momentum damping (>= 0)
    params.cfl                CFL number in (0, 1]
    params.t_end              final time (> 0)
    params.output_interval    diagnostics cadence (> 0)
    params.dt_max             optional step cap (> 0; omit for none)
    params.em                 on | off  (electromagnetic sector)
    params.radiation          on | off  (radiation sector)
    output.snapshot_stride    int >= 0; 0 writes only the final snapshot
    perturb.<field>.amp/.mode/.phase
                              single-mode sinusoid per field; <field> in
                              rho,u1,u2,u3,theta,Er,A1,A2,A3 (A is the vector
                              potential whose discrete curl perturbs B)
    lemma1.samples            sample count for the coercivity sweep
    sk.extra_modes            unused reserve (accepted, ignored)
    mms.cells                 comma ints for the spatial study
    mms.t_end                 final time of the study
    audit.cells               comma ints for the energy-audit resolutions

Initial fields are constructed constraint-compatibly: the density
perturbation is forced to zero mean (the periodic Gauss law
div E = rho_eq - rho is solvable only then), the magnetic perturbation is
the discrete curl of the configured vector potential (discretely
divergence-free by construction), and E is the discrete gradient of the
periodic Poisson solution of the Gauss law, so both constraint residuals
start at round-off.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import ops
from .errors import ConfigError
from .integrator import RunParams
from .state import Equilibrium, Grid, PrimitiveFields
from .thermo import IdealGasEOS, RadiationClosure

MODES = ("simulate", "mms", "sk-check", "lemma1-check", "energy-audit")
PERTURB_FIELDS = ("rho", "u1", "u2", "u3", "theta", "Er", "A1", "A2", "A3")


@dataclass
class Perturbation:
    amp: float = 0.0
    mode: tuple[int, ...] = (1,)
    phase: float = 0.0


@dataclass
class Config:
    mode: str = "simulate"
    grid_cells: tuple[int, ...] = (128,)
    grid_lengths: tuple[float, ...] = (1.0,)
    eos_R: float = 1.0
    eos_Cv: float = 1.5
    rad_a: float = 1.0
    rad_sigma_a: float = 1.0
    eq_rho: float = 1.0
    eq_theta: float = 1.0
    eq_B: tuple[float, float, float] = (0.0, 0.0, 0.0)
    nu: float = 1.0
    cfl: float = 0.4
    t_end: float = 1.0
    output_interval: float = 0.1
    dt_max: float | None = None
    em: bool = True
    radiation: bool = True
    snapshot_stride: int = 0
    perturb: dict = dc_field(default_factory=dict)
    lemma1_samples: int = 4096
    mms_cells: tuple[int, ...] = (64, 128, 256)
    mms_t_end: float = 0.2
    audit_cells: tuple[int, ...] = (128, 256, 512)

    def eos(self) -> IdealGasEOS:
        return IdealGasEOS(R=self.eos_R, C_v=self.eos_Cv)

    def rad(self) -> RadiationClosure:
        return RadiationClosure(a=self.rad_a, sigma_a=self.rad_sigma_a)

    def grid(self) -> Grid:
        return Grid(cells=self.grid_cells, lengths=self.grid_lengths)

    def equilibrium(self) -> Equilibrium:
        return Equilibrium.compatible(self.eq_rho, self.eq_theta, self.eq_B,
                                      self.rad())

    def run_params(self) -> RunParams:
        return RunParams(eos=self.eos(), rad=self.rad(), nu=self.nu,
                         cfl=self.cfl, t_end=self.t_end,
                         output_interval=self.output_interval,
                         dt_max=self.dt_max, em=self.em,
                         radiation=self.radiation)


def _parse_bool(key: str, val: str) -> bool:
    if val in ("on", "true", "1", "yes"):
        return True
    if val in ("off", "false", "0", "no"):
        return False
    raise ConfigError(f"{key}: expected on/off, got {val!r}")


def _parse_floats(key: str, val: str):
    try:
        return tuple(float(v) for v in val.split(","))
    except ValueError as exc:
        raise ConfigError(f"{key}: not a comma list of floats: {val!r}") from exc


def _parse_ints(key: str, val: str):
    try:
        return tuple(int(v) for v in val.split(","))
    except ValueError as exc:
        raise ConfigError(f"{key}: not a comma list of ints: {val!r}") from exc


def _parse_float(key: str, val: str) -> float:
    try:
        return float(val)
    except ValueError as exc:
        raise ConfigError(f"{key}: not a float: {val!r}") from exc


def parse_config(text: str) -> Config:
    cfg = Config()
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        seen[key] = val

    for key, val in seen.items():
        if key == "mode":
            if val not in MODES:
                raise ConfigError(f"mode: unknown mode {val!r}; choose from {MODES}")
            cfg.mode = val
        elif key == "grid.cells":
            cfg.grid_cells = _parse_ints(key, val)
        elif key == "grid.lengths":
            cfg.grid_lengths = _parse_floats(key, val)
        elif key == "eos.R":
            cfg.eos_R = _parse_float(key, val)
        elif key == "eos.Cv":
            cfg.eos_Cv = _parse_float(key, val)
        elif key == "radiation.a":
            cfg.rad_a = _parse_float(key, val)
        elif key == "radiation.sigma_a":
            cfg.rad_sigma_a = _parse_float(key, val)
        elif key == "equilibrium.rho":
            cfg.eq_rho = _parse_float(key, val)
        elif key == "equilibrium.theta":
            cfg.eq_theta = _parse_float(key, val)
        elif key == "equilibrium.B":
            b = _parse_floats(key, val)
            if len(b) != 3:
                raise ConfigError(f"equilibrium.B: need 3 components, got {len(b)}")
            cfg.eq_B = b
        elif key == "params.nu":
            cfg.nu = _parse_float(key, val)
        elif key == "params.cfl":
            cfg.cfl = _parse_float(key, val)
        elif key == "params.t_end":
            cfg.t_end = _parse_float(key, val)
        elif key == "params.output_interval":
            cfg.output_interval = _parse_float(key, val)
        elif key == "params.dt_max":
            cfg.dt_max = _parse_float(key, val) if val != "none" else None
        elif key == "params.em":
            cfg.em = _parse_bool(key, val)
        elif key == "params.radiation":
            cfg.radiation = _parse_bool(key, val)
        elif key == "output.snapshot_stride":
            cfg.snapshot_stride = int(_parse_float(key, val))
        elif key == "lemma1.samples":
            cfg.lemma1_samples = int(_parse_float(key, val))
        elif key == "mms.cells":
            cfg.mms_cells = _parse_ints(key, val)
        elif key == "mms.t_end":
            cfg.mms_t_end = _parse_float(key, val)
        elif key == "audit.cells":
            cfg.audit_cells = _parse_ints(key, val)
        elif key.startswith("perturb."):
            parts = key.split(".")
            if len(parts) != 3 or parts[1] not in PERTURB_FIELDS \
                    or parts[2] not in ("amp", "mode", "phase"):
                raise ConfigError(f"{key}: unknown perturbation key")
            pert = cfg.perturb.setdefault(parts[1], Perturbation())
            if parts[2] == "amp":
                pert.amp = _parse_float(key, val)
            elif parts[2] == "phase":
                pert.phase = _parse_float(key, val)
            else:
                pert.mode = _parse_ints(key, val)
        else:
            raise ConfigError(f"unknown configuration key {key!r}")

    validate_config(cfg)
    return cfg


def validate_config(cfg: Config) -> None:
    if len(cfg.grid_cells) != len(cfg.grid_lengths):
        raise ConfigError("grid.cells and grid.lengths must have equal rank")
    for name, val in (("eos.R", cfg.eos_R), ("eos.Cv", cfg.eos_Cv),
                      ("radiation.a", cfg.rad_a),
                      ("equilibrium.rho", cfg.eq_rho),
                      ("equilibrium.theta", cfg.eq_theta),
                      ("params.t_end", cfg.t_end),
                      ("params.output_interval", cfg.output_interval)):
        if val <= 0:
            raise ConfigError(f"{name}: must be positive, got {val}")
    if cfg.rad_sigma_a < 0:
        raise ConfigError(f"radiation.sigma_a: must be >= 0, got {cfg.rad_sigma_a}")
    if cfg.nu < 0:
        raise ConfigError(f"params.nu: must be >= 0, got {cfg.nu}")
    if not 0 < cfg.cfl <= 1:
        raise ConfigError(f"params.cfl: must lie in (0, 1], got {cfg.cfl}")
    if cfg.snapshot_stride < 0:
        raise ConfigError("output.snapshot_stride: must be >= 0")
    dim = len(cfg.grid_cells)
    for fname, pert in cfg.perturb.items():
        if pert.amp != 0.0 and len(pert.mode) != dim:
            raise ConfigError(
                f"perturb.{fname}.mode: need {dim} mode numbers, got {len(pert.mode)}")


def serialize_config(cfg: Config) -> str:
    lines = [
        f"mode = {cfg.mode}",
        f"grid.cells = {','.join(str(n) for n in cfg.grid_cells)}",
        f"grid.lengths = {','.join(f'{x:.17g}' for x in cfg.grid_lengths)}",
        f"eos.R = {cfg.eos_R:.17g}",
        f"eos.Cv = {cfg.eos_Cv:.17g}",
        f"radiation.a = {cfg.rad_a:.17g}",
        f"radiation.sigma_a = {cfg.rad_sigma_a:.17g}",
        f"equilibrium.rho = {cfg.eq_rho:.17g}",
        f"equilibrium.theta = {cfg.eq_theta:.17g}",
        f"equilibrium.B = {','.join(f'{x:.17g}' for x in cfg.eq_B)}",
        f"params.nu = {cfg.nu:.17g}",
        f"params.cfl = {cfg.cfl:.17g}",
        f"params.t_end = {cfg.t_end:.17g}",
        f"params.output_interval = {cfg.output_interval:.17g}",
        f"params.dt_max = {'none' if cfg.dt_max is None else f'{cfg.dt_max:.17g}'}",
        f"params.em = {'on' if cfg.em else 'off'}",
        f"params.radiation = {'on' if cfg.radiation else 'off'}",
        f"output.snapshot_stride = {cfg.snapshot_stride}",
        f"lemma1.samples = {cfg.lemma1_samples}",
        f"mms.cells = {','.join(str(n) for n in cfg.mms_cells)}",
        f"mms.t_end = {cfg.mms_t_end:.17g}",
        f"audit.cells = {','.join(str(n) for n in cfg.audit_cells)}",
    ]
    for fname in sorted(cfg.perturb):
        pert = cfg.perturb[fname]
        lines.append(f"perturb.{fname}.amp = {pert.amp:.17g}")
        lines.append(f"perturb.{fname}.mode = {','.join(str(m) for m in pert.mode)}")
        lines.append(f"perturb.{fname}.phase = {pert.phase:.17g}")
    return "\n".join(lines) + "\n"


def _sinusoid(pert: Perturbation, grid: Grid) -> np.ndarray:
    """amp * sin(2 pi (m . x / L) + phase) on cell centers."""
    coords = grid.coordinates()
    arg = np.full(grid.cells, pert.phase)
    for a in range(grid.dim):
        arg = arg + 2.0 * np.pi * pert.mode[a] * coords[a] / grid.lengths[a]
    return pert.amp * np.sin(arg)


def init_fields(cfg: Config):
    """Build (grid, equilibrium, primitive fields) with compatible constraints.

    Returns fields whose discrete div(B) vanishes identically (B perturbed
    through a discrete vector potential curl) and whose electric field
    solves the discrete Gauss law for the density perturbation.
    """
    grid = cfg.grid()
    eq = cfg.equilibrium()
    prim = PrimitiveFields.uniform(grid, eq)

    def pert(name):
        p = cfg.perturb.get(name)
        if p is None or p.amp == 0.0:
            return np.zeros(grid.cells)
        return _sinusoid(p, grid)

    d_rho = pert("rho")
    d_rho -= d_rho.mean()  # zero mean: solvability of the periodic Gauss law
    prim.rho = prim.rho + d_rho
    prim.theta = prim.theta + pert("theta")
    prim.Er = prim.Er + pert("Er")
    for i in range(3):
        prim.u[i] = prim.u[i] + pert(f"u{i + 1}")

    potential = np.stack([pert(f"A{i + 1}") for i in range(3)])
    if np.any(potential != 0.0):
        prim.B = prim.B + ops.curl(potential, grid)

    if cfg.em:
        rhs = eq.rho - prim.rho
        phi = ops.solve_wide_poisson(rhs, grid)
        prim.E = ops.grad3(phi, grid)

    prim.check_positivity(radiation=cfg.radiation)
    return grid, eq, prim
