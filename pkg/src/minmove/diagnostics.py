"""Post-processing: errors, convergence rates, energy audit, supports."""

from dataclasses import dataclass

import numpy as np

from minmove.errors import UnsupportedOperation
from minmove.mesh import trapezoid_integral

DEFAULT_SUPPORT_EPS = 1e-10


@dataclass(frozen=True)
class Support:
    """Hull ``[left, right]`` of the nodes above threshold, and the gaps inside it."""

    interval: tuple | None
    gaps: tuple = ()

    @property
    def empty(self):
        return self.interval is None

    def contains(self, other, slack=0.0):
        """True if ``other``'s hull lies inside this hull widened by ``slack``."""
        if other.empty:
            return True
        if self.empty:
            return False
        return (self.interval[0] - slack <= other.interval[0]
                and other.interval[1] <= self.interval[1] + slack)


@dataclass(frozen=True)
class StepDiagnostics:
    step: int
    time: float
    energy: float
    cumulative_dirichlet: float
    min_value: float
    supports: tuple
    mass: tuple


@dataclass(frozen=True)
class ErrorReport:
    points: tuple
    rate: float
    prefactor: float


@dataclass(frozen=True)
class EnergyAudit:
    lhs: float
    bound: float
    margin: float
    worst_step: int

    @property
    def passed(self):
        return self.margin >= 0.0


def _values(field):
    return np.asarray(getattr(field, "values", field), dtype=float)


def extract_support(field, grid, component=0, support_eps=DEFAULT_SUPPORT_EPS):
    """Support of one component: outermost nodes above ``support_eps`` plus internal gaps.

    A gap is a maximal run of nodes at or below the threshold strictly inside
    the hull; it is reported as ``(x_first, x_last)`` of that run.
    """
    if not support_eps > 0:
        raise ValueError("support_eps must be positive")
    v = _values(field)
    col = v[:, component] if v.ndim == 2 else v
    above = np.flatnonzero(col > support_eps)
    if above.size == 0:
        return Support(None, ())
    x = grid.nodes
    lo, hi = above[0], above[-1]
    gaps = []
    jumps = np.flatnonzero(np.diff(above) > 1)
    for j in jumps:
        gaps.append((float(x[above[j] + 1]), float(x[above[j + 1] - 1])))
    return Support((float(x[lo]), float(x[hi])), tuple(gaps))


def gradient_energy(U_nodal, dx):
    """``sum_cells |(U_{i+1}-U_i)/dx|^2 dx`` for a nodal array."""
    return float(np.sum(np.diff(U_nodal, axis=0) ** 2) / dx)


def step_diagnostics(isotherm, grid, U_nodal, step, time, cumulative_dirichlet,
                     support_eps=DEFAULT_SUPPORT_EPS):
    U = np.asarray(U_nodal, dtype=float)
    dx = grid.dx
    energy = float(np.sum(isotherm.conjugate_density(U)) * dx)
    mass = np.sum(isotherm.b(U), axis=0) * dx
    supports = tuple(extract_support(U, grid, k, support_eps) for k in range(U.shape[1]))
    return StepDiagnostics(
        step=step,
        time=float(time),
        energy=energy,
        cumulative_dirichlet=float(cumulative_dirichlet),
        min_value=float(np.min(U)),
        supports=supports,
        mass=tuple(float(v) for v in mass),
    )


def l2_qt_error(traj, exact):
    """Space-time L2 error against ``exact(t, x) -> (len(x), m)`` array.

    Each slab ``((n-1)dt, n dt]`` carries the constant level ``U^n`` and the
    exact solution is sampled at ``t^n``; space integrals use the trapezoid rule.
    """
    if getattr(traj, "stride", 1) != 1:
        raise UnsupportedOperation("L2(Q_T) error needs every time level; trajectory is thinned")
    grid = traj.grid
    x = grid.nodes
    total = 0.0
    for n in range(1, traj.time.N + 1):
        t = traj.times[n]
        ref = np.asarray(exact(t, x), dtype=float).reshape(grid.n_nodes, -1)
        diff2 = np.sum((traj.levels[n] - ref) ** 2, axis=1)
        total += traj.time.dt * trapezoid_integral(diff2, grid)
    return float(np.sqrt(total))


def l2_qt_distance(traj_a, traj_b):
    """Same norm as :func:`l2_qt_error` between two trajectories on one grid."""
    if traj_a.grid != traj_b.grid or traj_a.time != traj_b.time:
        raise ValueError("trajectories live on different grids")
    for tr in (traj_a, traj_b):
        if getattr(tr, "stride", 1) != 1:
            raise UnsupportedOperation("L2(Q_T) distance needs every time level")
    total = 0.0
    for n in range(1, traj_a.time.N + 1):
        diff2 = np.sum((traj_a.levels[n] - traj_b.levels[n]) ** 2, axis=1)
        total += traj_a.time.dt * trapezoid_integral(diff2, traj_a.grid)
    return float(np.sqrt(total))


def fit_rate(points):
    """Least-squares fit of ``log e = log C + r log dx``; returns ``(r, C)``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise ValueError("need at least two (dx, error) points")
    if np.any(pts <= 0) or not np.all(np.isfinite(pts)):
        raise ValueError("dx and error values must be positive and finite")
    r, logc = np.polyfit(np.log(pts[:, 0]), np.log(pts[:, 1]), 1)
    return float(r), float(np.exp(logc))


def incremental_orders(points):
    """Observed order between consecutive points, sorted by decreasing dx."""
    pts = sorted(points, key=lambda p: -p[0])
    return [
        float(np.log(e1 / e2) / np.log(h1 / h2))
        for (h1, e1), (h2, e2) in zip(pts[:-1], pts[1:])
    ]


def error_report(points):
    r, c = fit_rate(points)
    return ErrorReport(tuple((float(h), float(e)) for h, e in points), r, c)


def audit_energy_estimate(traj, rel_slack=1e-8, abs_slack=1e-10):
    """Check the telescoped a priori estimate on every level.

    With zero source and zero boundary data, for every ``n``::

        sum_i B(U^n_i) dx + sum_{k<=n} dt |grad_h U^k|^2 <= sum_i B(U^0_i) dx

    The audit compares the largest left-hand side with the right-hand side
    widened by ``rel_slack`` and ``abs_slack``.
    """
    if traj.has_source:
        raise UnsupportedOperation("energy audit requires a zero source term")
    diags = traj.diagnostics
    lhs = np.array([d.energy + d.cumulative_dirichlet for d in diags])
    worst = int(np.argmax(lhs))
    bound = diags[0].energy * (1.0 + rel_slack) + abs_slack
    return EnergyAudit(float(lhs[worst]), float(bound), float(bound - lhs[worst]), worst)


def positivity_audit(traj):
    """Smallest component value over all levels (diagnostics cover every step)."""
    return min(d.min_value for d in traj.diagnostics)
