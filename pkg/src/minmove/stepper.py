"""Implicit time loop: every step is a convex minimization."""

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from minmove.diagnostics import DEFAULT_SUPPORT_EPS, gradient_energy, step_diagnostics
from minmove.energy import DiscreteEnergy, StateField
from minmove.errors import ConfigurationError, DomainError, NonConvergence, UnsupportedOperation
from minmove.mesh import Grid1D, TimePartition
from minmove.minimizer import SolverConfig, minimize

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProblemSpec:
    """Isotherm, grids, initial data and source for one run.

    ``initial_condition`` is either a callable ``x -> (len(x), m)`` array or a
    nodal array of shape ``(I+2, m)``; it must vanish at both boundary nodes.
    ``source`` is ``None`` or a callable ``(t, x) -> (len(x), m)``.  The
    boundary condition is always homogeneous Dirichlet.
    """

    isotherm: object
    grid: Grid1D
    time: TimePartition
    initial_condition: Callable | np.ndarray
    source: Callable | None = None

    @property
    def m(self):
        return self.isotherm.m_components

    def _nodal(self, values, what):
        arr = np.asarray(values, dtype=float)
        shape = (self.grid.n_nodes, self.m)
        if arr.ndim == 1 and self.m == 1:
            arr = arr[:, None]
        try:
            arr = np.broadcast_to(arr, shape).copy()
        except ValueError:
            raise ConfigurationError(f"{what} has shape {arr.shape}, expected {shape}") from None
        if not np.all(np.isfinite(arr)):
            raise ConfigurationError(f"{what} is not finite")
        return arr

    def initial_values(self):
        ic = self.initial_condition
        raw = ic(self.grid.nodes) if callable(ic) else ic
        U0 = self._nodal(raw, "initial condition")
        if np.any(U0[0] != 0.0) or np.any(U0[-1] != 0.0):
            raise ConfigurationError("initial condition must vanish at the boundary nodes")
        return U0

    def source_values(self, t):
        if self.source is None:
            return np.zeros((self.grid.n_nodes, self.m))
        return self._nodal(self.source(t, self.grid.nodes), f"source at t={t}")


@dataclass(frozen=True)
class Trajectory:
    """Stored time levels with per-step solver reports and diagnostics.

    ``levels[j]`` is the nodal state at step ``steps[j]``; with ``stride == 1``
    every step is stored and ``levels[n]`` is ``U^n``.  Diagnostics and
    reports cover every step regardless of thinning.
    """

    isotherm: object
    grid: Grid1D
    time: TimePartition
    steps: tuple
    levels: np.ndarray
    reports: tuple
    diagnostics: tuple
    stride: int = 1
    has_source: bool = False

    @property
    def times(self):
        return self.time.times

    def level(self, n):
        if n % self.stride and n != self.time.N:
            raise UnsupportedOperation(f"level {n} was not stored (stride {self.stride})")
        return self.levels[self.steps.index(n)]

    def field(self, n):
        return StateField(self.grid, self.level(n))


def run(spec, solver_cfg=None, stride=1, support_eps=DEFAULT_SUPPORT_EPS, progress=None):
    """Advance ``spec`` from ``t = 0`` to ``T``.

    Level ``n+1`` is the minimizer of the step energy built from ``b(U^n)`` and
    the source sampled at ``t^{n+1}``, warm-started from ``U^n``.  With
    ``stride > 1`` only every ``stride``-th level (and the last) is kept.
    Solver failure re-raises :class:`NonConvergence` with ``step`` set.
    """
    if int(stride) != stride or stride < 1:
        raise ConfigurationError("stride must be a positive integer")
    cfg = solver_cfg or SolverConfig()
    iso, grid, tp = spec.isotherm, spec.grid, spec.time
    dt = tp.dt
    U = spec.initial_values()

    steps, levels, reports = [0], [U.copy()], []
    cumulative = 0.0
    diags = [step_diagnostics(iso, grid, U, 0, 0.0, cumulative, support_eps)]
    has_source = False
    for n in range(tp.N):
        t_next = tp.time(n + 1)
        f = spec.source_values(t_next)
        has_source = has_source or bool(np.any(f != 0.0))
        energy = DiscreteEnergy(iso, grid, dt, iso.b(U), f)
        try:
            interior, rep = minimize(energy, U[1:-1], cfg)
        except NonConvergence as exc:
            exc.step = n + 1
            raise
        U = np.zeros_like(U)
        U[1:-1] = interior
        cumulative += dt * gradient_energy(U, grid.dx)
        reports.append(rep)
        diags.append(step_diagnostics(iso, grid, U, n + 1, t_next, cumulative, support_eps))
        if (n + 1) % stride == 0 or n + 1 == tp.N:
            steps.append(n + 1)
            levels.append(U.copy())
        if progress is not None:
            progress(n + 1, rep)
        log.debug("step %d: %d iterations, |grad|/dx=%.2e", n + 1, rep.iterations, rep.grad_norm)

    return Trajectory(
        isotherm=iso,
        grid=grid,
        time=tp,
        steps=tuple(steps),
        levels=np.array(levels),
        reports=tuple(reports),
        diagnostics=tuple(diags),
        stride=int(stride),
        has_source=has_source,
    )


def query(traj, t):
    """State at time ``t``, piecewise constant on ``((n-1)dt, n dt]`` and ``U^0`` at 0."""
    T = traj.time.T
    if not 0.0 <= t <= T:
        raise DomainError(f"t={t} outside [0, {T}]")
    ratio = t / traj.time.dt
    n = int(math.ceil(ratio - 1e-9 * max(1.0, ratio)))
    n = min(max(n, 0), traj.time.N)
    return traj.field(n)
