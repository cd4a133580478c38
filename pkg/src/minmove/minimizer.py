"""Damped Newton minimization of the step energy.

The energy is strictly convex with a block-tridiagonal Hessian
``D_u b(U_i) dx + (dt/dx) L``, but ``D_u b`` is unbounded where ``U_i -> 0``
(the degeneracy that produces free boundaries).  Newton in ``U`` then
converges very slowly at the nodes just outside the support, where the
solution behaves like ``b^{-1}`` of a small number.  The default method
therefore takes the Newton step in the isotherm variable ``Z = b(U)``:

    (dx I + (dt/dx) L (D_u b)^{-1}) dZ = -grad F(U)

which only involves the bounded matrix ``(D_u b)^{-1}`` (zero at ``U = 0``).
The trial points ``U(alpha) = b^{-1}(Z + alpha dZ)`` trace a curve whose
tangent at ``alpha = 0`` is the exact Newton direction in ``U``, and the
backtracking line search runs on the true energy along that curve.

``method="newton-u"`` is the plain Newton iteration in ``U`` on the
regularized Hessian (``D_u b`` evaluated at ``|U_i| >= eps_reg``); it is
adequate when the solution stays away from zero.

Once the predicted decrease falls below what double precision can resolve
in the energy, steps are accepted on residual decrease instead (the energy
is still required not to rise beyond round-off).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from minmove.energy import DEFAULT_EPS_REG
from minmove.errors import ConfigurationError, NonConvergence, NonFiniteEnergy

METHODS = ("newton-b", "newton-u")
_MAX_BACKTRACKS = 80


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rule and line-search parameters.

    ``grad_tol`` bounds ``max|grad F| / dx``, i.e. the Euler-Lagrange residual
    per unit length multiplied by ``dt``.
    """

    grad_tol: float = 1e-10
    max_iters: int = 200
    shrink: float = 0.5
    armijo: float = 1e-4
    eps_reg: float = DEFAULT_EPS_REG
    method: str = "newton-b"

    def __post_init__(self):
        if not self.grad_tol > 0:
            raise ConfigurationError("grad_tol must be positive")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ConfigurationError("max_iters must be a positive integer")
        if not 0 < self.shrink < 1:
            raise ConfigurationError("shrink factor must lie in (0, 1)")
        if not 0 < self.armijo < 1:
            raise ConfigurationError("sufficient-decrease constant must lie in (0, 1)")
        if not self.eps_reg > 0:
            raise ConfigurationError("eps_reg must be positive")
        if self.method not in METHODS:
            raise ConfigurationError(f"unknown method {self.method!r}; expected one of {METHODS}")


@dataclass
class SolveReport:
    iterations: int
    grad_norm: float
    energy_decrease: float
    converged: bool
    fallback_used: bool = False
    energies: list = field(default_factory=list, repr=False)


def block_tridiagonal_banded(diag, lower, upper):
    """Pack a block-tridiagonal matrix into LAPACK band storage.

    ``diag`` has shape ``(I, m, m)``; ``lower[i]`` is block ``(i+1, i)`` and
    ``upper[i]`` is block ``(i, i+1)``, both of shape ``(I-1, m, m)``.
    Returns ``(ab, bw)`` for ``solve_banded((bw, bw), ab, rhs)``.
    """
    I, m, _ = diag.shape
    bw = 2 * m - 1
    ab = np.zeros((2 * bw + 1, I * m))
    k, l = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")

    def put(blocks, row_block, col_block):
        rows = row_block[:, None, None] * m + k
        cols = col_block[:, None, None] * m + l
        ab[bw + rows - cols, cols] = blocks

    idx = np.arange(I)
    put(diag, idx, idx)
    if I > 1:
        put(lower, idx[1:], idx[:-1])
        put(upper, idx[:-1], idx[1:])
    return ab, bw


def _solve_block_tridiagonal(diag, lower, upper, rhs):
    ab, bw = block_tridiagonal_banded(diag, lower, upper)
    return solve_banded((bw, bw), ab, rhs.ravel()).reshape(rhs.shape)


def _newton_b_direction(energy, U, g):
    iso, dx, dt = energy.isotherm, energy.grid.dx, energy.dt
    m = iso.m_components
    Dinv = iso.inverse_jacobian(U)
    c = dt / dx
    diag = dx * np.eye(m)[None] + 2.0 * c * Dinv
    lower = -c * Dinv[:-1]
    upper = -c * Dinv[1:]
    dZ = _solve_block_tridiagonal(diag, lower, upper, -g)
    slope = float(np.einsum("ik,ikl,il->", g, Dinv, dZ))
    return dZ, slope


def _newton_u_direction(energy, U, g, eps_reg):
    dx, dt = energy.grid.dx, energy.dt
    m = energy.isotherm.m_components
    J = energy.regularized_jacobian(U, eps_reg)
    c = dt / dx
    diag = dx * J + 2.0 * c * np.eye(m)[None]
    off = np.broadcast_to(-c * np.eye(m), (energy.grid.I - 1, m, m))
    d = _solve_block_tridiagonal(diag, off, off, -g)
    return d, float(np.sum(g * d))


def _energy_scale(energy, U):
    """Magnitude of the terms summed in ``F(U)``, for round-off estimates."""
    dx = energy.grid.dx
    local = np.sum(energy.isotherm.potential(U)) + np.sum(np.abs(energy.linear_term * U))
    return local * dx + 0.5 * energy.dt * energy.dirichlet_energy(U)


def minimize(energy, U_init, cfg=None):
    """Minimize ``energy`` starting from ``U_init`` (interior unknowns, shape ``(I, m)``).

    Returns ``(U_min, SolveReport)``.  Raises :class:`NonConvergence` when the
    iteration budget is spent or the line search cannot make progress, and
    :class:`NonFiniteEnergy` when the energy cannot be evaluated.
    """
    cfg = cfg or SolverConfig()
    iso = energy.isotherm
    dx = energy.grid.dx
    U = np.array(U_init, dtype=float)
    if U.shape != energy.shape:
        raise ValueError(f"U_init must have shape {energy.shape}, got {U.shape}")
    if not np.all(np.isfinite(U)):
        raise NonFiniteEnergy("non-finite initial guess")

    f = energy.evaluate(U)
    if not np.isfinite(f):
        raise NonFiniteEnergy("energy is not finite at the initial guess")
    f_start = f
    energies = [f]
    g = energy.gradient(U)
    gnorm = float(np.max(np.abs(g))) / dx
    Z = iso.b(U) if cfg.method == "newton-b" else None
    fallback = False

    def report(it, converged):
        return SolveReport(it, gnorm, f_start - f, converged, fallback, energies)

    for it in range(cfg.max_iters + 1):
        if gnorm <= cfg.grad_tol:
            return U, report(it, True)
        if it == cfg.max_iters:
            break

        if cfg.method == "newton-b":
            direction, slope = _newton_b_direction(energy, U, g)
            curved = True
        else:
            direction, slope = _newton_u_direction(energy, U, g, cfg.eps_reg)
            curved = False
        if not (np.all(np.isfinite(direction)) and np.isfinite(slope) and slope < 0):
            # steepest descent, Jacobi-scaled by the Laplacian diagonal
            direction = -g / (dx + 2.0 * energy.dt / dx)
            slope = float(np.sum(g * direction))
            curved = False
            fallback = True

        noise = 1e3 * np.finfo(float).eps * max(_energy_scale(energy, U), np.finfo(float).tiny)
        alpha = 1.0
        accepted = False
        saw_finite = False
        for _ in range(_MAX_BACKTRACKS):
            if curved:
                trial = iso.b_inverse(Z + alpha * direction)
            else:
                trial = U + alpha * direction
            if np.all(np.isfinite(trial)):
                f_trial = energy.evaluate(trial)
                if np.isfinite(f_trial):
                    saw_finite = True
                    if -alpha * slope > noise:
                        ok = f_trial <= f + cfg.armijo * alpha * slope
                        g_trial = None
                    else:
                        g_trial = energy.gradient(trial)
                        ok = f_trial <= f + noise and np.max(np.abs(g_trial)) / dx < gnorm
                    if ok:
                        accepted = True
                        break
            alpha *= cfg.shrink
        if not accepted:
            if not saw_finite:
                raise NonFiniteEnergy("every line-search trial point overflowed")
            raise NonConvergence(
                f"line search stalled at iteration {it} (|grad|/dx = {gnorm:.3e})",
                report(it, False),
            )

        if curved:
            Z = Z + alpha * direction
        elif cfg.method == "newton-b":
            Z = iso.b(trial)
        U = trial
        f = f_trial
        energies.append(f)
        g = g_trial if g_trial is not None else energy.gradient(U)
        gnorm = float(np.max(np.abs(g))) / dx

    raise NonConvergence(
        f"no convergence in {cfg.max_iters} iterations (|grad|/dx = {gnorm:.3e})",
        report(cfg.max_iters, False),
    )
