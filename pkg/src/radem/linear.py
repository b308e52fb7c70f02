"""Linearization around an equilibrium: directional symbols, symmetrizer,
dissipation structure, eigenvalue sweeps, and the stability-criterion check.

Unknown ordering (12 variables): rho, u1, u2, u3, theta, Er, B1, B2, B3,
E1, E2, E3. Perturbations W around a compatible constant state obey

    dW/dt + sum_j A_j dW/dx_j + L W = 0

with first-order coefficient matrices A_j built from

    a1 = p_rho / rho,  a2 = p_theta / rho,  a3 = 1 / (3 rho),
    b1 = theta p_theta / (rho C_v),         c1 = (4/3) Er,

plus the curl structure of the field block, and a zeroth-order matrix L
collecting the damping nu, the relaxation rates

    b2 = 4 a sigma_a theta^3 / (rho C_v),   b3 = sigma_a / (rho C_v),
    c2 = 4 a sigma_a theta^3,               c3 = sigma_a,

the velocity-field coupling (+E in the velocity row, -rho u in the electric
row) and the u x B background rotation. All coefficients are evaluated at
the equilibrium; the quadratic remainders are not part of the linear system.

A diagonal symmetrizer with weights

    (p_rho/rho^2, 1, 1, 1, C_v/theta, 1/(4 rho Er), 1/rho ... , 1/rho ...)

makes every A_j symmetric and splits L into an exactly antisymmetric part
(the u<->E exchange and the rotation) plus a positive-semidefinite
dissipative part. The weight 1/(4 rho Er) on the radiative energy and the
weight 1/rho on both field blocks are forced by the requirements that
S A_j be symmetric given a3 = 1/(3 rho) and that the u<->E coupling carry
no symmetric residue; with rho = 1 and a = 1 they coincide with the weights
of the underlying quadratic energy form.

The dissipative part has an eight-dimensional kernel (density, both field
blocks, and the matter-radiation combination tangent to Er = a theta^4),
so some eigenvectors of the spatial symbol A(xi) lie inside it: the
genuinely hyperbolic-relaxation stability criterion (no characteristic
direction invisible to the dissipation) fails here for every direction xi.
``sk_check`` exhibits the failure; the longitudinal magnetic mode B || xi
is an analytic witness valid for all xi. The partition of L into
dissipative and antisymmetric parts is a reconstruction (stated in the
report header), since only the combined zeroth-order operator is fixed by
the dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eig, eigh, subspace_angles

from .errors import DomainError
from .state import Equilibrium
from .thermo import EquationOfState, RadiationClosure

_LEVI = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _LEVI[_i, _j, _k] = 1.0
    _LEVI[_i, _k, _j] = -1.0

VARIABLE_NAMES = ("rho", "u1", "u2", "u3", "theta", "Er",
                  "B1", "B2", "B3", "E1", "E2", "E3")


@dataclass(frozen=True)
class Coefficients:
    a1: float
    a2: float
    a3: float
    b1: float
    b2: float
    b3: float
    c1: float
    c2: float
    c3: float


@dataclass
class LinearizedSystem:
    eq: Equilibrium
    nu: float
    coeffs: Coefficients
    A: np.ndarray          # (3, 12, 12) directional first-order matrices
    L: np.ndarray          # (12, 12) zeroth-order matrix
    weights: np.ndarray    # (12,) diagonal symmetrizer

    def a_xi(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        return np.tensordot(xi, self.A, axes=(0, 0))

    def symbol(self, xi) -> np.ndarray:
        """Generator of the Fourier mode dynamics: -(i A(xi) + L)."""
        return -(1j * self.a_xi(xi) + self.L)

    def symmetrized(self, M: np.ndarray) -> np.ndarray:
        w = np.sqrt(self.weights)
        return (w[:, None] * M) / w[None, :]

    def dissipation_matrix(self) -> np.ndarray:
        """Symmetric part of L in symmetrized variables (PSD)."""
        Lt = self.symmetrized(self.L)
        return 0.5 * (Lt + Lt.T)

    def dissipation_kernel(self, tol: float = 1e-11) -> np.ndarray:
        """Orthonormal basis (columns) of ker(sym L) in symmetrized variables."""
        vals, vecs = eigh(self.dissipation_matrix())
        scale = max(np.max(np.abs(vals)), 1.0)
        return vecs[:, np.abs(vals) <= tol * scale]


def coefficients(eq: Equilibrium, eos: EquationOfState, rad: RadiationClosure) -> Coefficients:
    rho, theta = eq.rho, eq.theta
    p_rho = float(eos.p_rho(rho, theta))
    p_theta = float(eos.p_theta(rho, theta))
    cv = float(eos.heat_capacity(rho, theta))
    return Coefficients(
        a1=p_rho / rho,
        a2=p_theta / rho,
        a3=1.0 / (3.0 * rho),
        b1=theta * p_theta / (rho * cv),
        b2=4.0 * rad.a * rad.sigma_a * theta**3 / (rho * cv),
        b3=rad.sigma_a / (rho * cv),
        c1=(4.0 / 3.0) * eq.Er,
        c2=4.0 * rad.a * rad.sigma_a * theta**3,
        c3=rad.sigma_a,
    )


def assemble(eq: Equilibrium, eos: EquationOfState, rad: RadiationClosure,
             nu: float) -> LinearizedSystem:
    """Build the linearized system at a compatible equilibrium."""
    eq.check_compatible(rad)
    if nu < 0:
        raise DomainError("nu must be >= 0")
    co = coefficients(eq, eos, rad)

    A = np.zeros((3, 12, 12))
    for j in range(3):
        A[j, 0, 1 + j] = eq.rho
        A[j, 1 + j, 0] = co.a1
        A[j, 1 + j, 4] = co.a2
        A[j, 1 + j, 5] = co.a3
        A[j, 4, 1 + j] = co.b1
        A[j, 5, 1 + j] = co.c1
        for i in range(3):
            for k in range(3):
                A[j, 6 + i, 9 + k] = _LEVI[i, j, k]       # curl E in B row
                A[j, 9 + i, 6 + k] = -_LEVI[i, j, k]      # -curl B in E row

    L = np.zeros((12, 12))
    for i in range(3):
        L[1 + i, 9 + i] = 1.0                   # +E in the velocity equation
        L[1 + i, 1 + i] += nu
        for j in range(3):
            for k in range(3):
                L[1 + i, 1 + j] += _LEVI[i, j, k] * eq.B[k]   # u x B background
        L[9 + i, 1 + i] = -eq.rho               # -rho u current in Ampere row
    L[4, 4] = co.b2
    L[4, 5] = -co.b3
    L[5, 4] = -co.c2
    L[5, 5] = co.c3

    p_rho = float(eos.p_rho(eq.rho, eq.theta))
    cv = float(eos.heat_capacity(eq.rho, eq.theta))
    weights = np.ones(12)
    weights[0] = p_rho / eq.rho**2
    weights[4] = cv / eq.theta
    weights[5] = 1.0 / (4.0 * eq.rho * eq.Er)
    weights[6:12] = 1.0 / eq.rho
    return LinearizedSystem(eq=eq, nu=nu, coeffs=co, A=A, L=L, weights=weights)


@dataclass
class DirectionReport:
    xi: np.ndarray
    eigenvalues: np.ndarray          # of the symmetrized A(xi), ascending
    min_kernel_angle: float          # radians, over all eigenspaces
    violations: list                 # (eigenvalue, angle) pairs below tolerance


@dataclass
class SKReport:
    directions: list
    angle_tol: float

    @property
    def violated_everywhere(self) -> bool:
        return all(len(d.violations) > 0 for d in self.directions)


def _eigenspace_clusters(vals: np.ndarray, tol: float = 1e-9):
    """Index groups of (sorted) eigenvalues equal up to an absolute tolerance."""
    scale = max(float(np.max(np.abs(vals))), 1.0)
    groups = [[0]]
    for i in range(1, len(vals)):
        if vals[i] - vals[groups[-1][0]] <= tol * scale:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def sk_check(lin: LinearizedSystem, xis, angle_tol: float = 1e-8) -> SKReport:
    """Search each direction for eigenvectors of A(xi) inside ker(sym L).

    Works in symmetrized variables where A(xi) is symmetric, so eigenspaces
    are orthogonal and well conditioned. For each eigenvalue cluster the
    smallest principal angle to the dissipation kernel is computed; an angle
    below tolerance means an eigenvector of the transport symbol feels no
    dissipation at all (the stability criterion fails in that direction).
    """
    kernel = lin.dissipation_kernel()
    out = []
    for xi in xis:
        xi = np.asarray(xi, dtype=float)
        if np.linalg.norm(xi) == 0.0:
            raise DomainError("xi must be nonzero")
        A_sym = lin.symmetrized(lin.a_xi(xi))
        asym = np.max(np.abs(A_sym - A_sym.T))
        if asym > 1e-10 * max(1.0, np.max(np.abs(A_sym))):
            raise DomainError("symmetrizer failed to symmetrize A(xi)")
        vals, vecs = eigh(0.5 * (A_sym + A_sym.T))
        violations = []
        min_angle = np.pi / 2
        for group in _eigenspace_clusters(vals):
            space = vecs[:, group]
            if kernel.shape[1] == 0:
                continue
            angles = subspace_angles(space, kernel)
            angle = float(np.min(angles)) if angles.size else np.pi / 2
            min_angle = min(min_angle, angle)
            if angle < angle_tol:
                violations.append((float(vals[group[0]]), angle))
        out.append(DirectionReport(xi=xi, eigenvalues=vals,
                                   min_kernel_angle=min_angle,
                                   violations=violations))
    return SKReport(directions=out, angle_tol=angle_tol)


def decay_rates(lin: LinearizedSystem, xi) -> np.ndarray:
    """Eigenvalues of -(i A(xi) + L), sorted by descending real part.

    Real parts bound the growth/decay of the corresponding Fourier mode of
    the linearized dynamics; all lie in the closed left half-plane.
    """
    xi = np.asarray(xi, dtype=float)
    if np.linalg.norm(xi) == 0.0:
        raise DomainError("xi must be nonzero")
    vals = eig(lin.symbol(xi), right=False)
    return vals[np.argsort(-vals.real)]


def decay_modes(lin: LinearizedSystem, xi):
    """Eigen-decomposition of the mode generator: (values, right, left).

    Left eigenvectors are the rows of inv(right); projecting a Fourier mode
    amplitude onto them isolates single-mode exponential decay.
    """
    xi = np.asarray(xi, dtype=float)
    vals, right = eig(lin.symbol(xi))
    order = np.argsort(-vals.real)
    vals = vals[order]
    right = right[:, order]
    left = np.linalg.inv(right)
    return vals, right, left


def unit_directions_3d():
    """The 26 directions with integer components in {-1, 0, 1}, normalized."""
    dirs = []
    for i in (-1, 0, 1):
        for j in (-1, 0, 1):
            for k in (-1, 0, 1):
                if (i, j, k) == (0, 0, 0):
                    continue
                v = np.array([i, j, k], dtype=float)
                dirs.append(v / np.linalg.norm(v))
    return dirs


def fluid_subblock(lin: LinearizedSystem):
    """Restriction to (rho, u, theta, Er): returns (A (3,6,6), L (6,6), weights)."""
    idx = np.arange(6)
    A = lin.A[np.ix_(np.arange(3), idx, idx)]
    L = lin.L[np.ix_(idx, idx)]
    return A, L, lin.weights[idx]


def sk_check_fluid(lin: LinearizedSystem, xis, angle_tol: float = 1e-8):
    """Stability-criterion scan of the fluid sub-block alone (recorded, not asserted).

    With nu > 0 the dissipation kernel of the sub-block is spanned by the
    density direction and the matter-radiation equilibrium tangent; any
    surviving violation mixes those directions with the acoustic-null
    pressure balance.
    """
    A, L, w = fluid_subblock(lin)
    sub = LinearizedSystem(eq=lin.eq, nu=lin.nu, coeffs=lin.coeffs,
                           A=A, L=L, weights=w)
    return sk_check(sub, xis, angle_tol=angle_tol)


def format_sk_report(report: SKReport, lin: LinearizedSystem) -> str:
    """Structured text report: per-direction eigenvalues, angles, violations."""
    lines = [
        "transport-symbol vs dissipation-kernel check",
        "dissipation = symmetric part of the zeroth-order matrix in symmetrized",
        "variables; the velocity-field exchange and the background rotation are",
        "exactly antisymmetric there and carry no dissipation. This partition of",
        "the zeroth-order operator is a reconstruction documented here.",
        f"kernel dimension: {lin.dissipation_kernel().shape[1]}",
        f"angle tolerance: {report.angle_tol:.3e} rad",
        "",
    ]
    for d in report.directions:
        xi_s = ",".join(f"{x:+.6f}" for x in d.xi)
        lines.append(f"xi=({xi_s})")
        lines.append("  eigenvalues: " + " ".join(f"{v:+.6f}" for v in d.eigenvalues))
        lines.append(f"  min kernel angle: {d.min_kernel_angle:.3e} rad")
        if d.violations:
            for ev, angle in d.violations:
                lines.append(f"  VIOLATION: eigenvalue {ev:+.6f}, angle {angle:.3e}")
        else:
            lines.append("  no violation found")
    lines.append("")
    verdict = "criterion VIOLATED in every sampled direction" \
        if report.violated_everywhere else "criterion satisfied in some direction"
    lines.append(f"verdict: {verdict}")
    return "\n".join(lines) + "\n"
