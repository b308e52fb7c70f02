"""Field containers, primitive/conserved conversions, and grid geometry.

The unknowns per cell are density rho > 0, velocity u (3 components), matter
temperature theta > 0, radiative energy density Er > 0, magnetic induction B
and electric field E (3 components each). The conserved image replaces u and
theta by momentum m = rho u and total matter energy density
En = rho (|u|^2 / 2 + e(rho, theta)); Er, B, E are their own conserved
quantities.

Grids are uniform Cartesian boxes with periodic wrap on every axis. Vector
fields always keep three components even in 1D/2D runs, because the Lorentz
force and the curl operators couple all of them.

Updates are functional: every step builds new arrays, so a read buffer is
never aliased with a write buffer, and all containers are safe for concurrent
read access.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, PositivityError
from .thermo import EquationOfState, RadiationClosure


@dataclass(frozen=True)
class Grid:
    """Uniform periodic Cartesian grid, cell-centered."""

    cells: tuple[int, ...]
    lengths: tuple[float, ...]

    def __post_init__(self):
        if not 1 <= len(self.cells) <= 3:
            raise DomainError(f"grid dimension must be 1..3, got {len(self.cells)}")
        if len(self.lengths) != len(self.cells):
            raise DomainError("grid cells and lengths must have equal rank")
        if any(n < 4 for n in self.cells):
            raise DomainError("need at least 4 cells per axis for centered stencils")
        if any(length <= 0 for length in self.lengths):
            raise DomainError("grid lengths must be positive")

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def dx(self) -> tuple[float, ...]:
        return tuple(length / n for length, n in zip(self.lengths, self.cells))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.dx))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.cells))

    def axis_coords(self, axis: int) -> np.ndarray:
        """Cell-center coordinates along one axis."""
        n = self.cells[axis]
        return (np.arange(n) + 0.5) * self.dx[axis]

    def coordinates(self) -> np.ndarray:
        """Cell-center coordinates, shape (dim, *cells)."""
        axes = [self.axis_coords(a) for a in range(self.dim)]
        return np.stack(np.meshgrid(*axes, indexing="ij"))


@dataclass(frozen=True)
class Equilibrium:
    """Constant state with zero velocity and electric field.

    The radiative energy is tied to the matter temperature by the
    compatibility condition Er = a theta^4; construct through
    ``Equilibrium.compatible`` to enforce it bit-exactly.
    """

    rho: float
    theta: float
    Er: float
    B: tuple[float, float, float]

    @classmethod
    def compatible(cls, rho: float, theta: float, B, rad: RadiationClosure) -> "Equilibrium":
        if rho <= 0 or theta <= 0:
            raise DomainError("equilibrium rho and theta must be positive")
        Bt = tuple(float(b) for b in B)
        if len(Bt) != 3:
            raise DomainError("equilibrium B must have 3 components")
        return cls(rho=float(rho), theta=float(theta),
                   Er=float(rad.equilibrium_energy(theta)), B=Bt)

    def check_compatible(self, rad: RadiationClosure, rtol: float = 1e-13) -> None:
        target = rad.equilibrium_energy(self.theta)
        if abs(self.Er - target) > rtol * abs(target):
            raise DomainError(
                f"incompatible equilibrium: Er={self.Er:.17g}, a*theta^4={target:.17g}")


@dataclass
class PrimitiveFields:
    """Primitive unknowns on a grid; scalar shape (*cells), vectors (3, *cells)."""

    rho: np.ndarray
    u: np.ndarray
    theta: np.ndarray
    Er: np.ndarray
    B: np.ndarray
    E: np.ndarray

    def copy(self) -> "PrimitiveFields":
        return PrimitiveFields(self.rho.copy(), self.u.copy(), self.theta.copy(),
                               self.Er.copy(), self.B.copy(), self.E.copy())

    @classmethod
    def uniform(cls, grid: Grid, eq: Equilibrium) -> "PrimitiveFields":
        shape = grid.cells
        vec = lambda vals: np.stack([np.full(shape, v, dtype=float) for v in vals])
        return cls(
            rho=np.full(shape, eq.rho, dtype=float),
            u=np.zeros((3,) + shape),
            theta=np.full(shape, eq.theta, dtype=float),
            Er=np.full(shape, eq.Er, dtype=float),
            B=vec(eq.B),
            E=np.zeros((3,) + shape),
        )

    def check_positivity(self, *, radiation: bool = True, t: float | None = None) -> None:
        for name, arr, active in (("rho", self.rho, True),
                                  ("theta", self.theta, True),
                                  ("Er", self.Er, radiation)):
            if active and not np.all(arr > 0.0):
                flat = int(np.argmin(arr))
                idx = np.unravel_index(flat, arr.shape)
                raise PositivityError(name, idx, arr[idx], t=t)


@dataclass
class ConservedFields:
    """Conserved unknowns: rho, momentum m, total matter energy En, Er, B, E."""

    rho: np.ndarray
    m: np.ndarray
    En: np.ndarray
    Er: np.ndarray
    B: np.ndarray
    E: np.ndarray

    def copy(self) -> "ConservedFields":
        return ConservedFields(self.rho.copy(), self.m.copy(), self.En.copy(),
                               self.Er.copy(), self.B.copy(), self.E.copy())


def to_conserved(prim: PrimitiveFields, eos: EquationOfState) -> ConservedFields:
    """Map primitive to conserved: m = rho u, En = rho(|u|^2/2 + e)."""
    kinetic = 0.5 * prim.rho * np.sum(prim.u**2, axis=0)
    return ConservedFields(
        rho=prim.rho.copy(),
        m=prim.rho * prim.u,
        En=kinetic + prim.rho * eos.internal_energy(prim.rho, prim.theta),
        Er=prim.Er.copy(),
        B=prim.B.copy(),
        E=prim.E.copy(),
    )


def to_primitive(cons: ConservedFields, eos: EquationOfState,
                 t: float | None = None) -> PrimitiveFields:
    """Recover primitive fields; raises PositivityError naming the first bad cell."""
    if not np.all(cons.rho > 0.0):
        flat = int(np.argmin(cons.rho))
        idx = np.unravel_index(flat, cons.rho.shape)
        raise PositivityError("rho", idx, cons.rho[idx], t=t)
    u = cons.m / cons.rho
    eint = cons.En - 0.5 * np.sum(cons.m**2, axis=0) / cons.rho
    if not np.all(eint > 0.0):
        flat = int(np.argmin(eint))
        idx = np.unravel_index(flat, eint.shape)
        raise PositivityError("internal energy", idx, eint[idx], t=t)
    theta = eos.theta_from_internal(cons.rho, eint)
    return PrimitiveFields(rho=cons.rho.copy(), u=u, theta=theta,
                           Er=cons.Er.copy(), B=cons.B.copy(), E=cons.E.copy())


def roll_fields(fields, shift: int, axis: int):
    """Shift every array of a container periodically along a spatial axis.

    Vector arrays carry components on axis 0, so their spatial axis is
    offset by one.
    """
    kwargs = {}
    for name, arr in vars(fields).items():
        ax = axis + 1 if arr.ndim == len(fields.rho.shape) + 1 else axis
        kwargs[name] = np.roll(arr, shift, axis=ax)
    return replace(fields, **kwargs)


# Snapshot format: plain columnar text, one row per cell. Header comments
# carry grid metadata and the column list; all floats use 17 significant
# digits so a write/read round-trip is bit exact for float64.

_SNAPSHOT_COLUMNS = ["rho", "u1", "u2", "u3", "theta", "Er",
                     "B1", "B2", "B3", "E1", "E2", "E3"]


def save_snapshot(path, prim: PrimitiveFields, grid: Grid, t: float,
                  extra_header: dict | None = None) -> None:
    idx = np.indices(grid.cells).reshape(grid.dim, -1)
    cols = [prim.rho, *prim.u, prim.theta, prim.Er, *prim.B, *prim.E]
    data = np.stack([c.reshape(-1) for c in cols])
    with open(path, "w") as fh:
        fh.write("# radem snapshot\n")
        fh.write(f"# grid.cells={','.join(str(n) for n in grid.cells)}\n")
        fh.write(f"# grid.lengths={','.join(f'{x:.17g}' for x in grid.lengths)}\n")
        fh.write(f"# t={t:.17g}\n")
        for key, val in (extra_header or {}).items():
            fh.write(f"# {key}={val}\n")
        index_names = ["i", "j", "k"][: grid.dim]
        fh.write("# columns: " + " ".join(index_names + _SNAPSHOT_COLUMNS) + "\n")
        for c in range(data.shape[1]):
            ints = " ".join(str(int(v)) for v in idx[:, c])
            vals = " ".join(f"{v:.17g}" for v in data[:, c])
            fh.write(f"{ints} {vals}\n")


def load_snapshot(path):
    """Read a snapshot; returns (prim, grid, t, extra_header)."""
    header = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            stripped = line[1:].strip()
            if "=" in stripped:
                key, val = stripped.split("=", 1)
                header[key.strip()] = val.strip()
    cells = tuple(int(v) for v in header["grid.cells"].split(","))
    lengths = tuple(float(v) for v in header["grid.lengths"].split(","))
    grid = Grid(cells=cells, lengths=lengths)
    t = float(header["t"])
    raw = np.loadtxt(path, comments="#")
    raw = np.atleast_2d(raw)
    order = np.lexsort(tuple(raw[:, a] for a in reversed(range(grid.dim))))
    raw = raw[order]
    vals = raw[:, grid.dim:]
    shaped = [vals[:, c].reshape(grid.cells) for c in range(vals.shape[1])]
    prim = PrimitiveFields(
        rho=shaped[0],
        u=np.stack(shaped[1:4]),
        theta=shaped[4],
        Er=shaped[5],
        B=np.stack(shaped[6:9]),
        E=np.stack(shaped[9:12]),
    )
    extra = {k: v for k, v in header.items()
             if k not in ("grid.cells", "grid.lengths", "t")}
    return prim, grid, t, extra
