"""Second-order centered difference operators on uniform periodic grids.

All data is cell-centered. Scalars have shape ``grid.cells``; vector fields
carry their three components on a leading axis, shape ``(3, *grid.cells)``,
regardless of the grid dimension (1D/2D runs keep all three components).
Derivatives along axes the grid does not have are identically zero.

Two structural identities of these operators are load-bearing for the solver:

* shifts along distinct axes commute, hence ``div(curl(F)) == 0`` holds to
  round-off for any periodic F, and
* each operator is skew-adjoint under the cell-volume inner product, so
  sums like ``sum(E * curl(B) - B * curl(E))`` telescope to zero exactly.
"""

from __future__ import annotations

import numpy as np


def ddx(f: np.ndarray, array_axis: int, dx: float) -> np.ndarray:
    """Centered first derivative along ``array_axis`` with periodic wrap."""
    return (np.roll(f, -1, axis=array_axis) - np.roll(f, 1, axis=array_axis)) / (2.0 * dx)


def grad(f: np.ndarray, grid) -> np.ndarray:
    """Gradient of a scalar field, shape ``(grid.dim, *grid.cells)``."""
    return np.stack([ddx(f, a, grid.dx[a]) for a in range(grid.dim)])


def grad3(f: np.ndarray, grid) -> np.ndarray:
    """Gradient embedded in 3 components, shape ``(3, *grid.cells)``."""
    out = np.zeros((3,) + tuple(grid.cells))
    for a in range(grid.dim):
        out[a] = ddx(f, a, grid.dx[a])
    return out


def div(vec: np.ndarray, grid) -> np.ndarray:
    """Divergence of a 3-component vector field (missing axes contribute 0)."""
    out = np.zeros(grid.cells)
    for a in range(grid.dim):
        out += ddx(vec[a], a, grid.dx[a])
    return out


def curl(vec: np.ndarray, grid) -> np.ndarray:
    """Curl of a 3-component vector field, shape ``(3, *grid.cells)``."""

    def d(component: int, axis: int) -> np.ndarray:
        if axis < grid.dim:
            return ddx(vec[component], axis, grid.dx[axis])
        return np.zeros(grid.cells)

    return np.stack([
        d(2, 1) - d(1, 2),
        d(0, 2) - d(2, 0),
        d(1, 0) - d(0, 1),
    ])


def directional_derivative(u: np.ndarray, f: np.ndarray, grid) -> np.ndarray:
    """Advective derivative ``u . grad(f)`` for a scalar f."""
    out = np.zeros(grid.cells)
    for a in range(grid.dim):
        out += u[a] * ddx(f, a, grid.dx[a])
    return out


def solve_wide_poisson(rhs: np.ndarray, grid) -> np.ndarray:
    """Solve ``div(grad(phi)) = rhs`` for the composed centered operators.

    The composition div o grad is the wide (2*dx) five/seven-point Laplacian,
    diagonal in Fourier space with symbol ``-sum_a sin(k_a dx_a)^2 / dx_a^2``.
    The mean mode and the checkerboard (Nyquist) modes lie in its kernel and
    are projected out of the right-hand side; callers must verify the residual
    if the input may carry content there.
    """
    rhs_hat = np.fft.fftn(rhs)
    symbol = np.zeros(grid.cells)
    for a in range(grid.dim):
        n = grid.cells[a]
        m = np.arange(n)
        s = np.sin(2.0 * np.pi * m / n) / grid.dx[a]
        shape = [1] * grid.dim
        shape[a] = n
        symbol = symbol - (s.reshape(shape)) ** 2
    phi_hat = np.zeros_like(rhs_hat)
    nonzero = np.abs(symbol) > 1e-13
    phi_hat[nonzero] = rhs_hat[nonzero] / symbol[nonzero]
    return np.real(np.fft.ifftn(phi_hat))


def pairwise_sum(a: np.ndarray) -> float:
    """Deterministic global reduction (numpy's pairwise summation)."""
    return float(np.sum(a, dtype=np.float64))
