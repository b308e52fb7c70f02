"""Exception types shared across the package."""


class RademError(Exception):
    """Base class for all package-specific errors."""


class DomainError(RademError, ValueError):
    """A thermodynamic evaluator was called outside its domain (e.g. rho <= 0)."""


class ConfigError(RademError, ValueError):
    """A configuration file or value is invalid; message names the field."""


class PositivityError(RademError, RuntimeError):
    """Density, temperature, or radiative energy lost positivity during a step.

    Carries the flat cell index and field name so failures are reproducible.
    """

    def __init__(self, field: str, cell_index, value, t: float | None = None):
        self.field = field
        self.cell_index = tuple(int(i) for i in cell_index)
        self.value = float(value)
        self.t = t
        at = f" at t={t:.6g}" if t is not None else ""
        super().__init__(
            f"positivity failure{at}: {field}={value:.6g} in cell {self.cell_index}"
        )


class NonConvergenceError(RademError, RuntimeError):
    """An implicit solve (Newton or Poisson) failed to reach its tolerance."""


class ConstraintError(RademError, RuntimeError):
    """Initial data violates the divergence constraints beyond tolerance."""
