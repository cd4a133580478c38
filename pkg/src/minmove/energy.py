"""Per-step discrete energy, its gradient and Hessian action.

For homogeneous Dirichlet data the step energy on the interior unknowns
``U`` (shape ``(I, m)``) is::

    F(U) = sum_i [phi(U_i) - b_prev_i.U_i - dt f_i.U_i] dx
           + dt/2 sum_{cells} |(U_{i+1} - U_i)/dx|^2 dx

with ``U_0 = U_{I+1} = 0``.  The sums over ``phi`` and ``b_prev.U`` are the
trapezoid rule on each cell; boundary nodes contribute nothing because
``phi(0) = 0`` and ``b(0) = 0``.
"""

from dataclasses import dataclass, field

import numpy as np

from minmove.errors import DomainError
from minmove.mesh import Grid1D

DEFAULT_EPS_REG = 1e-8


def pad_dirichlet(U):
    """Interior unknowns ``(I, m)`` -> nodal array ``(I+2, m)`` with zero boundary rows."""
    U = np.asarray(U, dtype=float)
    out = np.zeros((U.shape[0] + 2,) + U.shape[1:])
    out[1:-1] = U
    return out


def _check(U, shape):
    U = np.asarray(U, dtype=float)
    if U.shape != shape:
        raise ValueError(f"expected interior array of shape {shape}, got {U.shape}")
    if not np.all(np.isfinite(U)):
        raise DomainError("energy evaluated at a non-finite point")
    return U


@dataclass(frozen=True)
class StateField:
    """Nodal field at one time level; ``values`` has shape ``(I+2, m)``."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != self.grid.n_nodes:
            raise ValueError(f"state must have shape ({self.grid.n_nodes}, m), got {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def m(self):
        return self.values.shape[1]

    @property
    def interior(self):
        return self.values[1:-1]


@dataclass(frozen=True)
class DiscreteEnergy:
    """Strictly convex step functional built from ``b(U^n)`` and the source at ``t^{n+1}``.

    ``b_prev`` and ``source`` are nodal arrays of shape ``(I+2, m)``; their
    boundary rows are ignored (``b_prev`` is zero there by construction).
    """

    isotherm: object
    grid: Grid1D
    dt: float
    b_prev: np.ndarray
    source: np.ndarray = field(default=None)

    def __post_init__(self):
        m = self.isotherm.m_components
        shape = (self.grid.n_nodes, m)
        b_prev = np.asarray(self.b_prev, dtype=float)
        if b_prev.shape != shape:
            raise ValueError(f"b_prev must have shape {shape}, got {b_prev.shape}")
        src = np.zeros(shape) if self.source is None else np.broadcast_to(
            np.asarray(self.source, dtype=float), shape
        ).copy()
        if not (np.all(np.isfinite(b_prev)) and np.all(np.isfinite(src))):
            raise DomainError("non-finite b_prev or source")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        object.__setattr__(self, "b_prev", b_prev)
        object.__setattr__(self, "source", src)

    @classmethod
    def from_previous(cls, isotherm, grid, dt, U_prev, source=None):
        """Assemble from the previous nodal state ``U_prev`` (shape ``(I+2, m)``)."""
        return cls(isotherm, grid, dt, isotherm.b(U_prev), source)

    @property
    def shape(self):
        return (self.grid.I, self.isotherm.m_components)

    @property
    def linear_term(self):
        """Interior coefficient ``c_i = b_prev_i + dt f_i`` of the linear part."""
        return self.b_prev[1:-1] + self.dt * self.source[1:-1]

    def _laplacian(self, U):
        P = pad_dirichlet(U)
        return 2.0 * U - P[:-2] - P[2:]

    def dirichlet_energy(self, U):
        """``sum_cells |(U_{i+1}-U_i)/dx|^2 dx`` for interior unknowns ``U``."""
        P = pad_dirichlet(U)
        return float(np.sum(np.diff(P, axis=0) ** 2) / self.grid.dx)

    def evaluate(self, U):
        U = _check(U, self.shape)
        dx = self.grid.dx
        local = np.sum(self.isotherm.potential(U)) - np.sum(self.linear_term * U)
        return float(local * dx + 0.5 * self.dt * self.dirichlet_energy(U))

    def gradient(self, U):
        U = _check(U, self.shape)
        dx = self.grid.dx
        return (self.isotherm.b(U) - self.linear_term) * dx + (self.dt / dx) * self._laplacian(U)

    def euler_lagrange_residual(self, U):
        """``(b(U) - b_prev)/dt - Lap_h U - f`` at interior nodes (``gradient / (dx dt)``)."""
        U = _check(U, self.shape)
        dx = self.grid.dx
        return (
            (self.isotherm.b(U) - self.b_prev[1:-1]) / self.dt
            + self._laplacian(U) / dx**2
            - self.source[1:-1]
        )

    def regularized_jacobian(self, U, eps_reg=DEFAULT_EPS_REG):
        """``D_u b`` per node, evaluated at ``U_i`` pushed radially out to ``|U_i| >= eps_reg``.

        A zero node is evaluated at ``eps_reg * e_1``.  Shape ``(I, m, m)``.
        """
        U = np.asarray(U, dtype=float)
        r = np.linalg.norm(U, axis=-1)
        small = r < eps_reg
        shifted = U.copy()
        nz = small & (r > 0)
        shifted[nz] *= (eps_reg / r[nz])[:, None]
        zero = r == 0
        shifted[zero] = 0.0
        shifted[zero, 0] = eps_reg
        return self.isotherm.jacobian(shifted)

    def hessian_apply(self, U, V, eps_reg=DEFAULT_EPS_REG):
        """Regularized Hessian-vector product; exact wherever ``|U_i| >= eps_reg``."""
        U = _check(U, self.shape)
        V = _check(V, self.shape)
        dx = self.grid.dx
        J = self.regularized_jacobian(U, eps_reg)
        return np.einsum("ikl,il->ik", J, V) * dx + (self.dt / dx) * self._laplacian(V)
