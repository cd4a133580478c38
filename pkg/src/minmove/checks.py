"""Built-in identity checks run by ``minmove validate``."""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from minmove.analytic import ZKBProfile
from minmove.energy import DiscreteEnergy
from minmove.isotherm import FreundlichIsotherm, PMEIsotherm, b_bound_margin
from minmove.mesh import build_grid


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_points(rng, n, m, rmin, rmax):
    dirs = rng.normal(size=(n, m))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return dirs * rng.uniform(rmin, rmax, size=(n, 1))


def _fd_gradient(fun, u, h):
    g = np.empty_like(u)
    for k in range(u.shape[-1]):
        e = np.zeros(u.shape[-1])
        e[k] = h
        g[..., k] = (fun(u + e) - fun(u - e)) / (2 * h)
    return g


def check_gradient_identity(iso, rng, perturb=0.0):
    u = _random_points(rng, 100, iso.m_components, 0.01, 10.0)
    b = iso.b(u) * (1.0 + perturb)
    g = np.array([_fd_gradient(iso.potential, ui, 1e-6 * np.linalg.norm(ui)) for ui in u])
    err = float(np.max(np.linalg.norm(b - g, axis=1) / np.linalg.norm(b, axis=1)))
    return CheckResult(f"b = grad(phi) [{iso!r}]", err <= 1e-6, f"max rel err {err:.2e}")


def check_conjugate_identity(iso, rng):
    u = _random_points(rng, 1000, iso.m_components, 0.0, 10.0)
    closed = iso.conjugate_density(u)
    ident = iso.conjugate_density_identity(u)
    err = float(np.max(np.abs(closed - ident) / np.maximum(np.abs(closed), 1e-300)))
    return CheckResult(f"B = u.b - phi [{iso!r}]", err <= 1e-12, f"max rel err {err:.2e}")


def check_monotonicity(iso, rng):
    z = _random_points(rng, 1000, iso.m_components, 0.0, 10.0)
    w = _random_points(rng, 1000, iso.m_components, 0.0, 10.0)
    prod = np.sum((iso.b(z) - iso.b(w)) * (z - w), axis=1)
    return CheckResult(f"monotonicity [{iso!r}]", bool(np.all(prod >= 0)),
                       f"min {float(prod.min()):.2e}")


def check_b_bound(iso, rng):
    z = _random_points(rng, 1000, iso.m_components, 0.0, 20.0)
    worst = min(float(np.min(b_bound_margin(iso, z, d))) for d in (0.5, 1.0, 2.0))
    return CheckResult(f"|b| <= delta B + max|b| [{iso!r}]", worst >= 0.0,
                       f"min margin {worst:.2e}")


def check_energy_derivatives(rng, perturb=0.0):
    iso = FreundlichIsotherm(1.0 / 3.0, 2)
    grid = build_grid(0.0, 1.0, 6)
    U_prev = np.zeros((grid.n_nodes, 2))
    U_prev[1:-1] = rng.uniform(0.1, 1.0, size=(grid.I, 2))
    F = DiscreteEnergy.from_previous(iso, grid, 0.05, U_prev)
    U = rng.uniform(0.1, 1.0, size=(grid.I, 2))
    g = F.gradient(U) * (1.0 + perturb)
    h = 1e-6
    fd = np.zeros_like(U)
    for idx in np.ndindex(U.shape):
        E = np.zeros_like(U)
        E[idx] = h
        fd[idx] = (F.evaluate(U + E) - F.evaluate(U - E)) / (2 * h)
    err = float(np.max(np.abs(g - fd)) / np.max(np.abs(fd)))
    return CheckResult("energy gradient vs finite differences", err <= 1e-6, f"rel err {err:.2e}")


def check_zkb_mass(m_exponent):
    prof = ZKBProfile(C=0.2, t0=0.3, x0=0.0, m_exponent=m_exponent)
    masses = []
    for t in (0.0, 0.25, 0.5):
        R = float(prof.support_radius(t))
        masses.append(quad(lambda x: float(prof.z(t, x)), -R, R, limit=200,
                           epsabs=0, epsrel=1e-12)[0])
    drift = (max(masses) - min(masses)) / masses[0]
    return CheckResult(f"ZKB mass conservation (m={m_exponent:g})", drift <= 1e-6,
                       f"relative drift {drift:.2e}")


def run_checks(perturb_gradient=0.0, seed=12345):
    """Run every identity check; ``perturb_gradient`` scales ``b`` and ``grad F`` (test hook)."""
    rng = np.random.default_rng(seed)
    isotherms = [FreundlichIsotherm(1.0 / 3.0, 2), FreundlichIsotherm(0.5, 3),
                 PMEIsotherm(0.5, 1), PMEIsotherm(1.0 / 3.0, 2)]
    results = []
    for iso in isotherms:
        results.append(check_gradient_identity(iso, rng, perturb_gradient))
        results.append(check_conjugate_identity(iso, rng))
        results.append(check_monotonicity(iso, rng))
        results.append(check_b_bound(iso, rng))
    results.append(check_energy_derivatives(rng, perturb_gradient))
    results.extend(check_zkb_mass(m) for m in (2.0, 3.0))
    return results
