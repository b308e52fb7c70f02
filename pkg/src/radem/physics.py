"""Pointwise fluxes, radiation coupling, Maxwell curl terms, and wave speeds.

Model summary (nondimensional, light speed 1). Transported unknowns follow

    d/dt rho + div(rho u)                          = 0
    d/dt m   + div(m x u) + grad(p + p_r)          = -rho (E + u x B) - nu m
    d/dt En  + div((En + p) u) + u . grad(p_r)     = -sigma_a (a theta^4 - Er) - rho E.u
    d/dt Er  + div(Er u) + p_r div(u)              = +sigma_a (a theta^4 - Er)
    d/dt B   + curl(E)                             = 0
    d/dt E   - curl(B)                             = rho u,

with m = rho u and En the total matter energy density. Sign conventions
matter: the force on the fluid is -rho (E + u x B), the current in the
Ampere law is +rho u, and the Gauss law reads div(E) = rho_eq - rho. With
these choices the electric work -rho E.u in the matter energy cancels the
field-energy gain exactly, and the sum of matter, radiative, and
electromagnetic energies obeys a pure conservation law.

Discretely, the divergence terms are carried by a first-order Rusanov flux
on (rho, m, En, Er); the radiation coupling terms u.grad(p_r) and
p_r div(u) are non-conservative by construction and use centered
differences; the Maxwell block uses centered curls only, so the discrete
identity div(curl(.)) == 0 preserves div(B) = 0 to round-off. There is no
explicit damping term in En: the momentum sink -nu m removes kinetic energy
while En holds the total, so friction heat lands in the internal energy
automatically.

All operations here are pure and cell-local (or stencil-local with read-only
neighbours) and may be evaluated concurrently over disjoint cell ranges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ops
from .state import ConservedFields, Grid, PrimitiveFields
from .thermo import EquationOfState, RadiationClosure


@dataclass
class FluxVector:
    """Transport flux of the conserved fluid/radiation unknowns along one axis."""

    rho: np.ndarray
    m: np.ndarray
    En: np.ndarray
    Er: np.ndarray

    def __add__(self, other):
        return FluxVector(self.rho + other.rho, self.m + other.m,
                          self.En + other.En, self.Er + other.Er)

    def __sub__(self, other):
        return FluxVector(self.rho - other.rho, self.m - other.m,
                          self.En - other.En, self.Er - other.Er)

    def scaled(self, factor):
        return FluxVector(factor * self.rho, factor * self.m,
                          factor * self.En, factor * self.Er)


@dataclass
class SourceVector:
    """Local (zeroth-order) source contributions to (m, En, Er, E)."""

    m: np.ndarray
    En: np.ndarray
    Er: np.ndarray
    E: np.ndarray


def transport_flux(prim: PrimitiveFields, eos: EquationOfState,
                   rad: RadiationClosure, axis: int, *,
                   radiation: bool = True) -> FluxVector:
    """Physical transport flux along a spatial axis.

    The momentum flux carries the full pressure p + p_r; the matter energy
    flux carries only the gas pressure work (En + p) u, the radiative
    pressure exchanges energy through the non-conservative terms instead.
    """
    ua = prim.u[axis]
    p = eos.pressure(prim.rho, prim.theta)
    pr = rad.pressure(prim.Er) if radiation else np.zeros_like(p)
    m_flux = prim.rho * prim.u * ua
    m_flux[axis] = m_flux[axis] + p + pr
    kinetic = 0.5 * prim.rho * np.sum(prim.u**2, axis=0)
    En = kinetic + prim.rho * eos.internal_energy(prim.rho, prim.theta)
    return FluxVector(
        rho=prim.rho * ua,
        m=m_flux,
        En=(En + p) * ua,
        Er=prim.Er * ua if radiation else np.zeros_like(ua),
    )


def nonconservative_terms(prim: PrimitiveFields, grad_pr: np.ndarray,
                          div_u: np.ndarray):
    """Radiation coupling terms moved to the right-hand side.

    Returns (En_term, Er_term) = (-u . grad(p_r), -p_r div(u)) given the
    centered gradient of p_r (shape (dim, *cells)) and centered div(u).
    Their sum completes the conservative fluxes to the total-energy flux
    (En + Er + p + p_r) u up to second-order discretization error.
    """
    u_dot_grad = np.zeros_like(div_u)
    for a in range(grad_pr.shape[0]):
        u_dot_grad += prim.u[a] * grad_pr[a]
    pr = prim.Er / 3.0
    return -u_dot_grad, -pr * div_u


def maxwell_rhs(prim: PrimitiveFields, grid: Grid):
    """Curl parts of the field equations: (dB/dt, dE/dt) = (-curl E, +curl B).

    The current rho u enters through ``local_sources``, not here.
    """
    return -ops.curl(prim.E, grid), ops.curl(prim.B, grid)


def local_sources(prim: PrimitiveFields, eos: EquationOfState,
                  rad: RadiationClosure, nu: float, *,
                  em: bool = True, radiation: bool = True) -> SourceVector:
    """Instantaneous zeroth-order sources at a state.

    momentum: -rho (E + u x B) - nu rho u
    En:       -sigma_a (a theta^4 - Er) - rho E.u
    Er:       +sigma_a (a theta^4 - Er)
    E:        +rho u

    The radiative exchange contributions to En and Er are equal and
    opposite, and the Lorentz work term in En is exactly -rho E.u (the
    magnetic force does no work).
    """
    shape = prim.rho.shape
    m_src = -nu * prim.rho * prim.u
    En_src = np.zeros(shape)
    Er_src = np.zeros(shape)
    E_src = np.zeros((3,) + shape)
    if em:
        u_cross_B = np.cross(prim.u, prim.B, axisa=0, axisb=0, axisc=0)
        m_src = m_src - prim.rho * (prim.E + u_cross_B)
        En_src = En_src - prim.rho * np.sum(prim.E * prim.u, axis=0)
        E_src = prim.rho * prim.u
    if radiation and rad.sigma_a > 0.0:
        exchange = rad.sigma_a * (rad.equilibrium_energy(prim.theta) - prim.Er)
        En_src = En_src - exchange
        Er_src = Er_src + exchange
    return SourceVector(m=m_src, En=En_src, Er=Er_src, E=E_src)


def max_wave_speed(prim: PrimitiveFields, eos: EquationOfState,
                   rad: RadiationClosure, axis: int, *,
                   radiation: bool = True, safety: float = 1.2) -> np.ndarray:
    """Upper bound on signal speeds along an axis, floored by the light speed.

    Uses c_tot^2 = p_rho + theta p_theta^2 / (rho^2 C_v) + 4 Er / (3 rho);
    the last term over-estimates the true radiative contribution (which
    carries a further factor 1/3), and the 1.2 safety factor covers the
    remaining heuristics. Validated against flux-Jacobian eigenvalues.
    """
    p_rho = eos.p_rho(prim.rho, prim.theta)
    p_theta = eos.p_theta(prim.rho, prim.theta)
    cv = eos.heat_capacity(prim.rho, prim.theta)
    c2 = p_rho + prim.theta * p_theta**2 / (prim.rho**2 * cv)
    if radiation:
        c2 = c2 + 4.0 * prim.Er / (3.0 * prim.rho)
    return np.maximum(1.0, np.abs(prim.u[axis]) + safety * np.sqrt(c2))


def rusanov_flux(prim_L: PrimitiveFields, prim_R: PrimitiveFields,
                 eos: EquationOfState, rad: RadiationClosure, axis: int, *,
                 cons_L: ConservedFields | None = None,
                 cons_R: ConservedFields | None = None,
                 radiation: bool = True) -> FluxVector:
    """Rusanov (local Lax-Friedrichs) interface flux on the transported unknowns.

    0.5 (F_L + F_R) - 0.5 lambda (U_R - U_L) with lambda the larger of the
    two one-sided ``max_wave_speed`` bounds. Consistent: coincident states
    return the exact transport flux.
    """
    from .state import to_conserved

    F_L = transport_flux(prim_L, eos, rad, axis, radiation=radiation)
    F_R = transport_flux(prim_R, eos, rad, axis, radiation=radiation)
    if cons_L is None:
        cons_L = to_conserved(prim_L, eos)
    if cons_R is None:
        cons_R = to_conserved(prim_R, eos)
    lam = np.maximum(max_wave_speed(prim_L, eos, rad, axis, radiation=radiation),
                     max_wave_speed(prim_R, eos, rad, axis, radiation=radiation))
    jump = FluxVector(rho=cons_R.rho - cons_L.rho, m=cons_R.m - cons_L.m,
                      En=cons_R.En - cons_L.En,
                      Er=(cons_R.Er - cons_L.Er) if radiation
                      else np.zeros_like(cons_L.rho))
    central = (F_L + F_R).scaled(0.5)
    return central - jump.scaled(0.5 * lam)
