"""Equation of state, radiation closure, and relative Helmholtz functionals.

Matter is a compressible gas with pressure p(rho, theta), specific internal
energy e(rho, theta) and specific entropy s(rho, theta) tied together by the
Gibbs relation ``theta ds = de + p d(1/rho)``. The default closure is the
ideal gas

    p = R rho theta,   e = C_v theta,   s = C_v ln(theta) - R ln(rho),

with the entropy constant fixed so s(1, 1) = 0 (additive constants cancel in
every balance law; fixing one makes reported numbers deterministic).

Radiation is in the grey two-temperature closure: radiative energy density
E_r defines a radiation temperature via E_r = a T_r^4, radiative pressure is
p_r = E_r / 3, and the radiative entropy density is S_r = (4/3) a T_r^3.

The relative Helmholtz functionals implemented here are the nonnegative,
locally quadratic distance measures to a reference state (rho0, theta0):

    matter:    H(rho, theta) - (rho - rho0) dH/drho(rho0, theta0) - H(rho0, theta0),
               with H(rho, theta) = rho (e - theta0 s),
    radiation: a T_r^3 (T_r - 4 theta0 / 3) + a theta0^4 / 3,

both vanishing exactly at the reference and bounded above and below by
multiples of the squared distance on the boxes (rho0/2, 2 rho0) x
(theta0/2, 2 theta0) and (theta0/2, 2 theta0). ``coercivity_check`` estimates
those multiples empirically with a deterministic low-discrepancy sweep.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .errors import DomainError


def _require_positive(name: str, value) -> None:
    arr = np.asarray(value)
    if not np.all(arr > 0.0):
        bad = float(np.min(arr))
        raise DomainError(f"{name} must be positive, got min {bad:.6g}")


class EquationOfState:
    """Evaluator contract for a smooth two-argument gas closure.

    Subclasses provide p, e, s and the partials p_rho, p_theta, e_theta on
    rho > 0, theta > 0. All evaluators accept scalars or arrays and must be
    Gibbs-consistent:

        ds/dtheta = (1/theta) de/dtheta,
        ds/drho   = (1/theta) (de/drho - p / rho^2).
    """

    def pressure(self, rho, theta):
        raise NotImplementedError

    def internal_energy(self, rho, theta):
        raise NotImplementedError

    def entropy(self, rho, theta):
        raise NotImplementedError

    def p_rho(self, rho, theta):
        raise NotImplementedError

    def p_theta(self, rho, theta):
        raise NotImplementedError

    def heat_capacity(self, rho, theta):
        """C_v = de/dtheta, required positive."""
        raise NotImplementedError

    def theta_from_internal(self, rho, eint_density):
        """Invert rho * e(rho, theta) = eint_density for theta.

        Generic safeguarded Newton with bisection fallback; subclasses with a
        closed form should override. Tolerance 1e-12 relative, <= 50 Newton
        iterations.
        """
        rho = np.asarray(rho, dtype=float)
        eint = np.asarray(eint_density, dtype=float)
        _require_positive("rho", rho)
        _require_positive("internal energy", eint)
        theta = eint / (rho * self.heat_capacity(rho, np.ones_like(rho)))
        theta = np.where(theta > 0, theta, 1.0)
        for _ in range(50):
            resid = rho * self.internal_energy(rho, theta) - eint
            slope = rho * self.heat_capacity(rho, theta)
            step = resid / slope
            new = np.maximum(theta - step, 0.5 * theta)
            done = np.all(np.abs(new - theta) <= 1e-12 * np.abs(new))
            theta = new
            if done:
                return theta
        raise DomainError("temperature inversion did not converge")


@dataclass(frozen=True)
class IdealGasEOS(EquationOfState):
    """Ideal gas with constant gas constant R and heat capacity C_v."""

    R: float = 1.0
    C_v: float = 1.5

    def __post_init__(self):
        _require_positive("R", self.R)
        _require_positive("C_v", self.C_v)

    def pressure(self, rho, theta):
        _require_positive("rho", rho)
        _require_positive("theta", theta)
        return self.R * np.asarray(rho) * np.asarray(theta)

    def internal_energy(self, rho, theta):
        _require_positive("rho", rho)
        _require_positive("theta", theta)
        return self.C_v * np.asarray(theta) * np.ones_like(np.asarray(rho, dtype=float))

    def entropy(self, rho, theta):
        _require_positive("rho", rho)
        _require_positive("theta", theta)
        return self.C_v * np.log(theta) - self.R * np.log(rho)

    def p_rho(self, rho, theta):
        return self.R * np.asarray(theta) * np.ones_like(np.asarray(rho, dtype=float))

    def p_theta(self, rho, theta):
        return self.R * np.asarray(rho) * np.ones_like(np.asarray(theta, dtype=float))

    def heat_capacity(self, rho, theta):
        return self.C_v * np.ones_like(np.asarray(rho, dtype=float) * np.asarray(theta))

    def theta_from_internal(self, rho, eint_density):
        rho = np.asarray(rho, dtype=float)
        eint = np.asarray(eint_density, dtype=float)
        return eint / (rho * self.C_v)


@dataclass(frozen=True)
class RadiationClosure:
    """Grey radiation constants: a (radiation constant), sigma_a (absorption)."""

    a: float = 1.0
    sigma_a: float = 1.0

    def __post_init__(self):
        _require_positive("a", self.a)
        if self.sigma_a < 0.0:
            raise DomainError(f"sigma_a must be >= 0, got {self.sigma_a:.6g}")

    def temperature(self, Er):
        """T_r = (E_r / a)^(1/4)."""
        _require_positive("Er", Er)
        return (np.asarray(Er) / self.a) ** 0.25

    def pressure(self, Er):
        """p_r = E_r / 3."""
        _require_positive("Er", Er)
        return np.asarray(Er) / 3.0

    def entropy(self, Er):
        """S_r = (4/3) a T_r^3."""
        Tr = self.temperature(Er)
        return (4.0 / 3.0) * self.a * Tr**3

    def equilibrium_energy(self, theta):
        """Radiative energy in equilibrium with matter at temperature theta."""
        _require_positive("theta", theta)
        return self.a * np.asarray(theta) ** 4


def matter_helmholtz_relative(rho, theta, rho_ref: float, theta_ref: float,
                              eos: EquationOfState):
    """Relative matter Helmholtz functional, zero and minimal at the reference.

    With H(rho, theta) = rho (e - theta_ref s), returns

        H(rho, theta) - (rho - rho_ref) dH/drho(ref) - H(ref).

    The reference slope has the closed form e - theta_ref s + p / rho at the
    reference state for any Gibbs-consistent closure (the e_rho and s_rho
    terms combine to p / rho^2 when theta = theta_ref).
    """
    _require_positive("rho_ref", rho_ref)
    _require_positive("theta_ref", theta_ref)
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)

    def h(r, th):
        return r * (eos.internal_energy(r, th) - theta_ref * eos.entropy(r, th))

    h_ref = h(rho_ref, theta_ref)
    slope = (eos.internal_energy(rho_ref, theta_ref)
             - theta_ref * eos.entropy(rho_ref, theta_ref)
             + eos.pressure(rho_ref, theta_ref) / rho_ref)
    return h(rho, theta) - (rho - rho_ref) * slope - h_ref


def radiation_helmholtz_relative(Tr, theta_ref: float, a: float):
    """Relative radiative Helmholtz functional a Tr^3 (Tr - 4 theta_ref / 3) + a theta_ref^4 / 3.

    Equals (E_r - theta_ref S_r) minus its value at Tr = theta_ref; vanishes
    with zero slope at Tr = theta_ref and grows quartically.
    """
    _require_positive("Tr", Tr)
    _require_positive("theta_ref", theta_ref)
    Tr = np.asarray(Tr, dtype=float)
    return a * Tr**3 * (Tr - (4.0 / 3.0) * theta_ref) + (a / 3.0) * theta_ref**4


@dataclass(frozen=True)
class CoercivityReport:
    """Empirical two-sided quadratic bounds of the relative Helmholtz functionals.

    c1 <= matter / (drho^2 + dtheta^2) <= c2 on the matter box, and
    c3 <= radiation / dTr^2 <= c4 on the radiation interval. All four must be
    strictly positive and finite for the functionals to control the squared
    distance to the reference state.
    """

    c1: float
    c2: float
    c3: float
    c4: float
    matter_samples: int
    radiation_samples: int

    @property
    def all_positive_finite(self) -> bool:
        vals = (self.c1, self.c2, self.c3, self.c4)
        return all(np.isfinite(v) and v > 0.0 for v in vals)


def coercivity_check(rho_ref: float, theta_ref: float, eos: EquationOfState,
                     rad: RadiationClosure, sample_count: int = 4096) -> CoercivityReport:
    """Estimate the quadratic-ratio bounds by a deterministic Sobol sweep.

    Samples the box (rho_ref/2, 2 rho_ref) x (theta_ref/2, 2 theta_ref) for the
    matter functional and (theta_ref/2, 2 theta_ref) for the radiative one.
    Samples closer to the reference than 1e-6 (relative) are skipped: the
    ratio is 0/0 there by construction. Requires sample_count >= 1000.
    """
    if sample_count < 1000:
        raise DomainError(f"sample_count must be >= 1000, got {sample_count}")
    _require_positive("rho_ref", rho_ref)
    _require_positive("theta_ref", theta_ref)

    m = int(np.ceil(np.log2(sample_count)))
    pts = qmc.Sobol(d=2, scramble=False).random_base2(m)
    rho = rho_ref * (0.5 + 1.5 * pts[:, 0])
    theta = theta_ref * (0.5 + 1.5 * pts[:, 1])
    dist2 = (rho - rho_ref) ** 2 + (theta - theta_ref) ** 2
    keep = dist2 > (1e-6 * (rho_ref**2 + theta_ref**2))**2
    rho, theta, dist2 = rho[keep], theta[keep], dist2[keep]
    ratio_m = matter_helmholtz_relative(rho, theta, rho_ref, theta_ref, eos) / dist2
    if not np.all(np.isfinite(ratio_m)):
        i = int(np.argmin(np.isfinite(ratio_m)))
        raise DomainError(
            f"non-finite matter ratio at rho={rho[i]:.6g}, theta={theta[i]:.6g}")

    pts1 = qmc.Sobol(d=1, scramble=False).random_base2(m)[:, 0]
    Tr = theta_ref * (0.5 + 1.5 * pts1)
    dT2 = (Tr - theta_ref) ** 2
    keep1 = dT2 > (1e-6 * theta_ref)**2
    Tr, dT2 = Tr[keep1], dT2[keep1]
    ratio_r = radiation_helmholtz_relative(Tr, theta_ref, rad.a) / dT2
    if not np.all(np.isfinite(ratio_r)):
        i = int(np.argmin(np.isfinite(ratio_r)))
        raise DomainError(f"non-finite radiation ratio at Tr={Tr[i]:.6g}")

    return CoercivityReport(
        c1=float(np.min(ratio_m)),
        c2=float(np.max(ratio_m)),
        c3=float(np.min(ratio_r)),
        c4=float(np.max(ratio_r)),
        matter_samples=int(rho.size),
        radiation_samples=int(Tr.size),
    )


def format_coercivity_report(report: CoercivityReport, rho_ref: float,
                             theta_ref: float) -> str:
    lines = [
        "relative Helmholtz coercivity check",
        f"reference state: rho={rho_ref:.12g} theta={theta_ref:.12g}",
        f"matter samples:    {report.matter_samples}",
        f"radiation samples: {report.radiation_samples}",
        f"c1 (matter lower)    = {report.c1:.12g}",
        f"c2 (matter upper)    = {report.c2:.12g}",
        f"c3 (radiation lower) = {report.c3:.12g}",
        f"c4 (radiation upper) = {report.c4:.12g}",
        f"all strictly positive and finite: {report.all_positive_finite}",
    ]
    return "\n".join(lines) + "\n"
