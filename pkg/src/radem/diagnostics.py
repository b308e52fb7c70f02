"""Discrete integral identities: conserved totals, entropy budget, the
relative-energy Lyapunov functional, constraint residuals, and norm proxies.

Quantities per output time:

* total mass, total energy (matter + radiation + field), total entropy
  sum(rho s + S_r) dV;
* entropy production rate, the nonnegative closed form

      a sigma_a / (theta T_r) (theta - T_r)^2 (theta + T_r) (theta^2 + T_r^2)
      + nu rho |u|^2 / theta,

  integrated over the box (the friction term carries the density factor:
  dividing the internal-energy heating nu rho |u|^2 by theta produces it);
* the Lyapunov functional

      sum [ rho |u|^2 / 2 + matter_helmholtz_relative
            + radiation_helmholtz_relative + |B - B_eq|^2 / 2 + |E|^2 / 2 ] dV,

  nonnegative, zero exactly at the equilibrium, and non-increasing in time
  for the continuous dynamics;
* L2 norms of the divergence-constraint residuals div(B) and
  div(E) - (rho_eq - rho);
* per-field-group L2, Linf, and discrete H^k (k <= 3) deviation norms, with
  running time integrals of the squared group Linf (I^2) and of the
  dissipation-weighted norm combination (D^2). The H^k proxies iterate the
  centered first difference and make no claim to reproduce continuum Sobolev
  norms; their observable content at this scale is norm decay.

All global reductions go through numpy's pairwise summation, so results are
independent of any partitioning of the cell loops to round-off.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import ops
from .state import ConservedFields, Equilibrium, Grid, PrimitiveFields
from .thermo import (matter_helmholtz_relative, radiation_helmholtz_relative)

FIELD_GROUPS = ("rho", "u", "theta", "Er", "B", "E")
NORM_KINDS = ("l2", "linf", "h1", "h2", "h3")
FLUID_GROUPS = ("rho", "u", "theta", "Er")


def total_mass(prim: PrimitiveFields, grid: Grid) -> float:
    return ops.pairwise_sum(prim.rho) * grid.cell_volume


def total_energy(prim: PrimitiveFields, cons: ConservedFields, grid: Grid,
                 *, em: bool = True, radiation: bool = True) -> float:
    """sum [ rho|u|^2/2 + rho e + Er + (|B|^2 + |E|^2)/2 ] dV.

    Uses the conserved matter energy directly so that drift measurements
    see exactly what the scheme transports.
    """
    total = ops.pairwise_sum(cons.En)
    if radiation:
        total += ops.pairwise_sum(cons.Er)
    if em:
        total += 0.5 * ops.pairwise_sum(cons.B**2) + 0.5 * ops.pairwise_sum(cons.E**2)
    return total * grid.cell_volume


def total_entropy(prim: PrimitiveFields, grid: Grid, eos, rad,
                  *, radiation: bool = True) -> float:
    """sum (rho s + S_r) dV."""
    density = prim.rho * eos.entropy(prim.rho, prim.theta)
    if radiation:
        density = density + rad.entropy(prim.Er)
    return ops.pairwise_sum(density) * grid.cell_volume


def production_rate(prim: PrimitiveFields, grid: Grid, rad, nu: float,
                    *, radiation: bool = True) -> float:
    """Entropy production: pointwise nonnegative exchange + friction integrand."""
    out = np.zeros(prim.rho.shape)
    if radiation and rad.sigma_a > 0.0:
        Tr = rad.temperature(prim.Er)
        th = prim.theta
        out += (rad.a * rad.sigma_a / (th * Tr)) * (th - Tr) ** 2 \
            * (th + Tr) * (th**2 + Tr**2)
    if nu > 0.0:
        out += nu * prim.rho * np.sum(prim.u**2, axis=0) / prim.theta
    return ops.pairwise_sum(out) * grid.cell_volume


def lyapunov(prim: PrimitiveFields, grid: Grid, eos, rad, eq: Equilibrium,
             *, em: bool = True, radiation: bool = True) -> float:
    """Relative-energy functional; zero at equilibrium, decaying along runs."""
    density = 0.5 * prim.rho * np.sum(prim.u**2, axis=0)
    density = density + matter_helmholtz_relative(prim.rho, prim.theta,
                                                  eq.rho, eq.theta, eos)
    if radiation:
        Tr = rad.temperature(prim.Er)
        density = density + radiation_helmholtz_relative(Tr, eq.theta, rad.a)
    if em:
        b_eq = np.array(eq.B).reshape((3,) + (1,) * grid.dim)
        density = density + 0.5 * np.sum((prim.B - b_eq) ** 2, axis=0)
        density = density + 0.5 * np.sum(prim.E**2, axis=0)
    return ops.pairwise_sum(density) * grid.cell_volume


def constraint_residuals(prim: PrimitiveFields, grid: Grid, eq: Equilibrium):
    """L2 norms of div(B) and of div(E) - (rho_eq - rho)."""
    div_b = ops.div(prim.B, grid)
    gauss = ops.div(prim.E, grid) - (eq.rho - prim.rho)
    vol = grid.cell_volume
    return (float(np.sqrt(ops.pairwise_sum(div_b**2) * vol)),
            float(np.sqrt(ops.pairwise_sum(gauss**2) * vol)))


def _derivative_pyramid(f: np.ndarray, grid: Grid, depth: int):
    """Lists of all centered mixed derivatives up to the given order."""
    levels = [[f]]
    for _ in range(depth):
        prev = levels[-1]
        nxt = []
        for g in prev:
            for a in range(grid.dim):
                nxt.append(ops.ddx(g, a, grid.dx[a]))
        levels.append(nxt)
    return levels


def _group_norms(arrays, grid: Grid) -> dict:
    """L2, Linf, and H^1..H^3 for one field group (list of component arrays)."""
    vol = grid.cell_volume
    sq = sum(a**2 for a in arrays)
    l2_sq = ops.pairwise_sum(sq) * vol
    linf = float(np.sqrt(np.max(sq))) if sq.size else 0.0
    hk_sq = [l2_sq]
    pyramids = [_derivative_pyramid(a, grid, 3) for a in arrays]
    for order in (1, 2, 3):
        add = 0.0
        for pyr in pyramids:
            for g in pyr[order]:
                add += ops.pairwise_sum(g**2) * vol
        hk_sq.append(hk_sq[-1] + add)
    return {
        "l2": float(np.sqrt(l2_sq)),
        "linf": linf,
        "h1": float(np.sqrt(hk_sq[1])),
        "h2": float(np.sqrt(hk_sq[2])),
        "h3": float(np.sqrt(hk_sq[3])),
    }


def norm_suite(prim: PrimitiveFields, grid: Grid, eq: Equilibrium) -> dict:
    """Deviation norms per field group, keyed '<group>_<kind>'."""
    b_eq = np.array(eq.B).reshape((3,) + (1,) * grid.dim)
    groups = {
        "rho": [prim.rho - eq.rho],
        "u": [prim.u[i] for i in range(3)],
        "theta": [prim.theta - eq.theta],
        "Er": [prim.Er - eq.Er],
        "B": [prim.B[i] - b_eq[i] for i in range(3)],
        "E": [prim.E[i] for i in range(3)],
    }
    out = {}
    for name, arrays in groups.items():
        norms = _group_norms(arrays, grid)
        for kind in NORM_KINDS:
            out[f"{name}_{kind}"] = norms[kind]
    return out


def _d2_instantaneous(norms: dict, prim: PrimitiveFields, grid: Grid) -> float:
    """Dissipation-norm combination: fluid H^3 + E H^2 + first B derivatives H^1."""
    fluid = sum(norms[f"{g}_h3"] ** 2 for g in FLUID_GROUPS)
    e_part = norms["E_h2"] ** 2
    b_part = 0.0
    vol = grid.cell_volume
    for i in range(3):
        for a in range(grid.dim):
            db = ops.ddx(prim.B[i], a, grid.dx[a])
            pyr = _derivative_pyramid(db, grid, 1)
            b_part += ops.pairwise_sum(db**2) * vol
            for g in pyr[1]:
                b_part += ops.pairwise_sum(g**2) * vol
    return fluid + e_part + b_part


@dataclass
class DiagnosticsRecord:
    t: float
    total_mass: float
    total_energy: float
    total_entropy: float
    production_rate: float
    lyapunov: float
    div_b_residual: float
    gauss_residual: float
    norms: dict
    i_inf: float
    d2_inst: float
    i2_integral: float = 0.0
    d2_integral: float = 0.0


def compute_record(t: float, prim: PrimitiveFields, cons: ConservedFields,
                   grid: Grid, params, eq: Equilibrium) -> DiagnosticsRecord:
    """Evaluate every diagnostic at one instant. ``params`` provides
    eos, rad, nu and the em/radiation switches."""
    norms = norm_suite(prim, grid, eq)
    div_b, gauss = constraint_residuals(prim, grid, eq)
    i_inf = max(norms[f"{g}_linf"] for g in FLUID_GROUPS)
    return DiagnosticsRecord(
        t=t,
        total_mass=total_mass(prim, grid),
        total_energy=total_energy(prim, cons, grid, em=params.em,
                                  radiation=params.radiation),
        total_entropy=total_entropy(prim, grid, params.eos, params.rad,
                                    radiation=params.radiation),
        production_rate=production_rate(prim, grid, params.rad, params.nu,
                                        radiation=params.radiation),
        lyapunov=lyapunov(prim, grid, params.eos, params.rad, eq,
                          em=params.em, radiation=params.radiation),
        div_b_residual=div_b,
        gauss_residual=gauss,
        norms=norms,
        i_inf=i_inf,
        d2_inst=_d2_instantaneous(norms, prim, grid),
    )


@dataclass
class DiagnosticsSeries:
    """Record list plus trapezoid accumulators for the time-integrated norms."""

    records: list = field(default_factory=list)
    i2_accum: float = 0.0
    d2_accum: float = 0.0
    last_t: float = 0.0
    last_i_inf: float = 0.0
    last_d2_inst: float = 0.0
    _has_last: bool = False

    @classmethod
    def with_accumulators(cls, accum: dict) -> "DiagnosticsSeries":
        s = cls()
        s.i2_accum = accum["i2_accum"]
        s.d2_accum = accum["d2_accum"]
        s.last_t = accum["last_t"]
        s.last_i_inf = accum["last_i_inf"]
        s.last_d2_inst = accum["last_d2_inst"]
        s._has_last = True
        return s

    def append(self, rec: DiagnosticsRecord) -> None:
        if self._has_last:
            dt = rec.t - self.last_t
            self.i2_accum += 0.5 * dt * (self.last_i_inf**2 + rec.i_inf**2)
            self.d2_accum += 0.5 * dt * (self.last_d2_inst + rec.d2_inst)
        self.last_t = rec.t
        self.last_i_inf = rec.i_inf
        self.last_d2_inst = rec.d2_inst
        self._has_last = True
        rec.i2_integral = self.i2_accum
        rec.d2_integral = self.d2_accum
        self.records.append(rec)

    def column_names(self):
        names = ["t", "total_mass", "total_energy", "total_entropy",
                 "production_rate", "lyapunov", "div_b_residual",
                 "gauss_residual"]
        for group in FIELD_GROUPS:
            for kind in NORM_KINDS:
                names.append(f"{group}_{kind}")
        names += ["i2_integral", "d2_integral"]
        return names

    def row(self, rec: DiagnosticsRecord):
        vals = [rec.t, rec.total_mass, rec.total_energy, rec.total_entropy,
                rec.production_rate, rec.lyapunov, rec.div_b_residual,
                rec.gauss_residual]
        vals += [rec.norms[f"{g}_{k}"] for g in FIELD_GROUPS for k in NORM_KINDS]
        vals += [rec.i2_integral, rec.d2_integral]
        return vals

    def to_csv(self, path) -> None:
        """One row per output time; floats at 17 significant digits."""
        names = self.column_names()
        with open(path, "w") as fh:
            fh.write("# radem diagnostics time series\n")
            fh.write("# columns: " + ",".join(names) + "\n")
            for rec in self.records:
                fh.write(",".join(f"{v:.17g}" for v in self.row(rec)) + "\n")

    def column(self, name: str) -> np.ndarray:
        names = self.column_names()
        i = names.index(name)
        return np.array([self.row(r)[i] for r in self.records])


def read_csv(path):
    """Load a diagnostics CSV into (column_names, 2D array)."""
    with open(path) as fh:
        names = None
        for line in fh:
            if line.startswith("# columns:"):
                names = line.split(":", 1)[1].strip().split(",")
                break
    data = np.loadtxt(path, comments="#", delimiter=",")
    return names, np.atleast_2d(data)
