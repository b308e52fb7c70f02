"""Manufactured smooth solutions and forced convergence studies (1D).

A family of traveling sinusoids is prescribed for every primitive field;
the forcing that makes them an exact solution of the full system is derived
symbolically (conserved form, including Lorentz coupling, damping and
radiative exchange) and injected into the hyperbolic stage. Two studies:

* spatial: fixed final time, CFL-limited steps, error against the exact
  fields under grid refinement (first-order interface dissipation sets the
  floor);
* temporal: fixed grid, time-step halving, self-convergence of the final
  state (isolates the time-integration and splitting error, second order).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import sympy as sp

from .state import ConservedFields, Equilibrium, Grid, PrimitiveFields
from .thermo import IdealGasEOS, RadiationClosure

_FIELDS = ("rho", "u1", "u2", "u3", "theta", "Er",
           "B1", "B2", "B3", "E1", "E2", "E3")


@dataclass
class ManufacturedCase:
    """Callable exact fields and conserved-variable forcing for one setup."""

    grid: Grid
    eq: Equilibrium
    exact: dict          # name -> f(x, t) vectorized
    force: dict          # conserved slot -> f(x, t) vectorized

    def primitive_at(self, t: float) -> PrimitiveFields:
        x = self.grid.axis_coords(0)
        f = {name: np.asarray(self.exact[name](x, t), dtype=float) * np.ones_like(x)
             for name in _FIELDS}
        return PrimitiveFields(
            rho=f["rho"],
            u=np.stack([f["u1"], f["u2"], f["u3"]]),
            theta=f["theta"],
            Er=f["Er"],
            B=np.stack([f["B1"], f["B2"], f["B3"]]),
            E=np.stack([f["E1"], f["E2"], f["E3"]]),
        )

    def forcing(self, t: float, grid: Grid) -> ConservedFields:
        x = grid.axis_coords(0)
        one = np.ones_like(x)
        g = {k: np.asarray(fn(x, t), dtype=float) * one for k, fn in self.force.items()}
        return ConservedFields(
            rho=g["rho"],
            m=np.stack([g["m1"], g["m2"], g["m3"]]),
            En=g["En"],
            Er=g["Er"],
            B=np.stack([g["B1"], g["B2"], g["B3"]]),
            E=np.stack([g["E1"], g["E2"], g["E3"]]),
        )


def build_case(grid: Grid, eos: IdealGasEOS, rad: RadiationClosure, nu: float,
               eq: Equilibrium, amplitude: float = 0.05,
               speed: float = 0.7) -> ManufacturedCase:
    """Traveling-wave manufactured solution on a 1D periodic box."""
    if grid.dim != 1:
        raise ValueError("manufactured cases are built on 1D grids")
    x, t = sp.symbols("x t", real=True)
    k = 2 * sp.pi / grid.lengths[0]
    w = speed * k
    A = amplitude

    phase = k * x - w * t
    fields = {
        "rho": eq.rho * (1 + A * sp.sin(phase)),
        "u1": A * sp.cos(phase),
        "u2": A * sp.sin(phase + sp.Rational(1, 3)),
        "u3": A * sp.cos(phase + sp.Rational(2, 3)),
        "theta": eq.theta * (1 + A * sp.cos(phase + sp.Rational(1, 5))),
        "Er": eq.Er * (1 + A * sp.sin(phase + sp.Rational(2, 5))),
        "B1": sp.Float(eq.B[0]),
        "B2": eq.B[1] + A * sp.sin(phase + sp.Rational(1, 7)),
        "B3": eq.B[2] + A * sp.cos(phase + sp.Rational(3, 7)),
        "E1": A * sp.sin(phase + sp.Rational(4, 7)),
        "E2": A * sp.cos(phase + sp.Rational(5, 7)),
        "E3": A * sp.sin(phase + sp.Rational(6, 7)),
    }

    rho = fields["rho"]
    u = sp.Matrix([fields["u1"], fields["u2"], fields["u3"]])
    theta = fields["theta"]
    Er = fields["Er"]
    B = sp.Matrix([fields["B1"], fields["B2"], fields["B3"]])
    E = sp.Matrix([fields["E1"], fields["E2"], fields["E3"]])

    p = eos.R * rho * theta
    pr = Er / 3
    En = rho * (u.dot(u) / 2 + eos.C_v * theta)
    m = rho * u
    exchange = rad.sigma_a * (rad.a * theta**4 - Er)
    u_cross_B = u.cross(B)
    curl_E = sp.Matrix([0, -sp.diff(E[2], x), sp.diff(E[1], x)])
    curl_B = sp.Matrix([0, -sp.diff(B[2], x), sp.diff(B[1], x)])

    force = {}
    force["rho"] = sp.diff(rho, t) + sp.diff(rho * u[0], x)
    for i in range(3):
        expr = (sp.diff(m[i], t) + sp.diff(m[i] * u[0], x)
                + (sp.diff(p + pr, x) if i == 0 else 0)
                + rho * (E[i] + u_cross_B[i]) + nu * m[i])
        force[f"m{i + 1}"] = expr
    force["En"] = (sp.diff(En, t) + sp.diff((En + p) * u[0], x)
                   + u[0] * sp.diff(pr, x) + exchange + rho * E.dot(u))
    force["Er"] = (sp.diff(Er, t) + sp.diff(Er * u[0], x)
                   + pr * sp.diff(u[0], x) - exchange)
    for i in range(3):
        force[f"B{i + 1}"] = sp.diff(B[i], t) + curl_E[i]
        force[f"E{i + 1}"] = sp.diff(E[i], t) - curl_B[i] - m[i]

    def lamb(expr):
        return sp.lambdify((x, t), expr, modules="numpy")

    exact = {name: lamb(expr) for name, expr in fields.items()}
    force_fn = {name: lamb(expr) for name, expr in force.items()}
    return ManufacturedCase(grid=grid, eq=eq, exact=exact, force=force_fn)


def _l2_error(prim: PrimitiveFields, ref: PrimitiveFields, grid: Grid) -> float:
    vol = grid.cell_volume
    err = 0.0
    err += np.sum((prim.rho - ref.rho) ** 2)
    err += np.sum((prim.u - ref.u) ** 2)
    err += np.sum((prim.theta - ref.theta) ** 2)
    err += np.sum((prim.Er - ref.Er) ** 2)
    err += np.sum((prim.B - ref.B) ** 2)
    err += np.sum((prim.E - ref.E) ** 2)
    return float(np.sqrt(err * vol))


def observed_orders(errors) -> list:
    e = np.asarray(errors, dtype=float)
    return list(np.log2(e[:-1] / e[1:]))


def spatial_study(eos, rad, nu, *, length: float = 1.0, cells=(64, 128, 256),
                  t_end: float = 0.2, cfl: float = 0.4, amplitude: float = 0.05,
                  eq: Equilibrium | None = None):
    """Error vs exact manufactured fields under grid refinement.

    Returns (cells, errors, orders).
    """
    from .integrator import RunParams, cfl_dt, strang_step
    from .state import to_conserved, to_primitive

    if eq is None:
        eq = Equilibrium.compatible(1.0, 1.0, (0.3, 0.2, 0.1), rad)
    errors = []
    for n in cells:
        grid = Grid(cells=(n,), lengths=(length,))
        case = build_case(grid, eos, rad, nu, eq, amplitude=amplitude)
        params = RunParams(eos=eos, rad=rad, nu=nu, cfl=cfl, t_end=t_end,
                           output_interval=t_end)
        cons = to_conserved(case.primitive_at(0.0), eos)
        t = 0.0
        while t < t_end - 1e-14:
            prim = to_primitive(cons, eos)
            dt = min(cfl_dt(prim, grid, params), t_end - t)
            cons = strang_step(cons, grid, params, dt, t=t, forcing=case.forcing)
            t += dt
        final = to_primitive(cons, eos)
        errors.append(_l2_error(final, case.primitive_at(t_end), grid))
    return list(cells), errors, observed_orders(errors)


def temporal_study(eos, rad, nu, *, length: float = 1.0, n_cells: int = 64,
                   t_end: float = 0.2, n_levels: int = 4, amplitude: float = 0.05,
                   eq: Equilibrium | None = None):
    """Self-convergence under dt halving on a fixed grid.

    Runs the forced problem with capped time steps dt0 / 2^j and measures
    the L2 difference between consecutive final states; the observed order
    log2(e_j / e_{j+1}) isolates splitting + time-integration error.
    Returns (dts, diffs, orders).
    """
    from .integrator import RunParams, cfl_dt, strang_step
    from .state import to_conserved, to_primitive

    if eq is None:
        eq = Equilibrium.compatible(1.0, 1.0, (0.3, 0.2, 0.1), rad)
    grid = Grid(cells=(n_cells,), lengths=(length,))
    case = build_case(grid, eos, rad, nu, eq, amplitude=amplitude)
    params0 = RunParams(eos=eos, rad=rad, nu=nu, cfl=0.4, t_end=t_end,
                        output_interval=t_end)
    dt_limit = cfl_dt(case.primitive_at(0.0), grid, params0)
    dt0 = 0.5 * dt_limit

    finals = []
    dts = []
    for level in range(n_levels):
        dt_cap = dt0 / 2**level
        n_steps = int(np.ceil(t_end / dt_cap))
        dt = t_end / n_steps
        cons = to_conserved(case.primitive_at(0.0), eos)
        t = 0.0
        for _ in range(n_steps):
            cons = strang_step(cons, grid, params0, dt, t=t, forcing=case.forcing)
            t += dt
        finals.append(to_primitive(cons, eos))
        dts.append(dt)

    diffs = [_l2_error(finals[j], finals[j + 1], grid) for j in range(n_levels - 1)]
    return dts, diffs, observed_orders(diffs)


def format_convergence_report(cells, errors, orders, dts, diffs, dt_orders) -> str:
    lines = ["forced smooth-solution convergence study", "",
             "spatial refinement (error vs exact fields):",
             f"{'cells':>8} {'L2 error':>14} {'order':>8}"]
    for i, (n, e) in enumerate(zip(cells, errors)):
        o = f"{orders[i - 1]:8.3f}" if i > 0 else " " * 8
        lines.append(f"{n:>8} {e:14.6e} {o}")
    lines += ["", "time-step refinement (self-convergence, fixed grid):",
              f"{'dt':>14} {'difference':>14} {'order':>8}"]
    for i, dt in enumerate(dts):
        d = f"{diffs[i]:14.6e}" if i < len(diffs) else " " * 14
        o = f"{dt_orders[i - 1]:8.3f}" if 0 < i <= len(dt_orders) else " " * 8
        lines.append(f"{dt:14.6e} {d} {o}")
    return "\n".join(lines) + "\n"
