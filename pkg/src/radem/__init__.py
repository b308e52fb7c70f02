"""Solver and diagnostics for the damped radiative Euler-Maxwell system.

A compressible inviscid gas with velocity damping, coupled to a grey
two-temperature radiation field through quartic emission/absorption
exchange, and to the full Maxwell system through the Lorentz force and the
fluid current, integrated on uniform periodic grids. The package verifies
the model's structural identities numerically: total-energy conservation,
entropy production positivity, relative-energy (Lyapunov) decay, divergence
constraint preservation, coercivity of the relative Helmholtz functionals,
and the spectral structure of the linearization around equilibria.
"""

from .state import (ConservedFields, Equilibrium, Grid, PrimitiveFields,
                    to_conserved, to_primitive)
from .thermo import IdealGasEOS, RadiationClosure
from .integrator import RunParams, run, strang_step

__all__ = [
    "ConservedFields", "Equilibrium", "Grid", "PrimitiveFields",
    "to_conserved", "to_primitive", "IdealGasEOS", "RadiationClosure",
    "RunParams", "run", "strang_step",
]

__version__ = "0.1.0"
