"""Uniform space grid, uniform time partition and trapezoidal quadrature."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from minmove.errors import ConfigurationError


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on ``[a, b]`` with ``I`` interior nodes.

    Nodes are ``x_i = a + i*dx`` for ``i = 0..I+1``; both boundary nodes are
    kept in every nodal array.
    """

    a: float
    b: float
    I: int

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or self.a >= self.b:
            raise ConfigurationError(f"need a < b, got a={self.a}, b={self.b}")
        if int(self.I) != self.I or self.I < 1:
            raise ConfigurationError(f"need at least one interior node, got I={self.I}")

    @property
    def dx(self):
        return (self.b - self.a) / (self.I + 1)

    @property
    def n_nodes(self):
        return self.I + 2

    @cached_property
    def nodes(self):
        x = self.a + np.arange(self.I + 2) * self.dx
        x[-1] = self.b
        x.flags.writeable = False
        return x

    @property
    def interior(self):
        return self.nodes[1:-1]

    def refine(self):
        """Grid with ``2I+1`` interior nodes (half the spacing)."""
        return Grid1D(self.a, self.b, 2 * self.I + 1)


@dataclass(frozen=True)
class TimePartition:
    """``N`` uniform steps of size ``dt = T/N`` on ``[0, T]``."""

    T: float
    N: int

    def __post_init__(self):
        if not np.isfinite(self.T) or self.T <= 0:
            raise ConfigurationError(f"need T > 0, got {self.T}")
        if int(self.N) != self.N or self.N < 1:
            raise ConfigurationError(f"need N >= 1, got {self.N}")

    @property
    def dt(self):
        return self.T / self.N

    def time(self, n):
        return self.T if n == self.N else n * self.dt

    @property
    def times(self):
        t = np.arange(self.N + 1) * self.dt
        t[-1] = self.T
        return t


def build_grid(a, b, I):
    """Validated :class:`Grid1D`; raises :class:`ConfigurationError` on bad input."""
    return Grid1D(float(a), float(b), I)


def grid_from_spacing(a, b, dx, rtol=1e-9):
    """Grid on ``[a, b]`` whose spacing is ``dx``; ``(b-a)/dx`` must be an integer."""
    cells = (b - a) / dx
    n = int(round(cells))
    if n < 2 or abs(cells - n) > rtol * cells:
        raise ConfigurationError(f"dx={dx} does not divide [{a}, {b}] into >= 2 equal cells")
    return build_grid(a, b, n - 1)


def trapezoid_integral(values, grid):
    """Composite trapezoid rule over the grid cells.

    ``values`` holds one entry (or row) per node including both boundary
    nodes; extra trailing axes are integrated independently.
    """
    g = np.asarray(values, dtype=float)
    if g.shape[0] != grid.n_nodes:
        raise ValueError(f"expected {grid.n_nodes} nodal values, got {g.shape[0]}")
    return 0.5 * (g[:-1] + g[1:]).sum(axis=0) * grid.dx
