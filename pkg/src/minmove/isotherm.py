"""Radial isotherms ``b = grad(phi)`` and their conjugate energy density.

Two isotherms are usable by the solver, both of the form ``phi(u) = Phi(|u|)``
with ``Phi`` convex, so ``b(u) = Phi'(|u|) u/|u|``:

* :class:`FreundlichIsotherm`, the idealized competitive transport isotherm
  ``b(u) = u + |u|^(p-1) u`` with potential
  ``phi(u) = |u|^2/2 + |u|^(p+1)/(p+1)``;
* :class:`PMEIsotherm`, the pure power law ``b(u) = |u|^(p-1) u`` with
  ``phi(u) = |u|^(p+1)/(p+1)``.  The substitution ``z = b(u)`` turns
  ``d/dt b(u) = u_xx`` into the porous medium equation with exponent ``1/p``.

The conjugate density ``B(z) = z.b(z) - phi(z)`` is implemented twice, as a
closed form and as the defining identity, so the two can be cross-checked.

Other multicomponent isotherms are common in the adsorption literature but
are not gradients of a known convex potential and therefore cannot drive the
variational scheme.  They are provided for reference only:

* Langmuir: ``s_i = N_i K_i u_i / (1 + sum_j K_j u_j)``
* Sheindorf-Rebhun-Sheintuch (multicomponent Freundlich):
  ``s_i = C_i (sum_j a_ij u_j)^(p_i - 1) u_i`` with ``a_ii = 1``.
"""

from dataclasses import dataclass

import numpy as np

from minmove.errors import ConfigurationError, DomainError

# below this radius b(u) is replaced by its limit b(0) = 0
TINY_RADIUS = 1e-300


def _check_finite(u):
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise DomainError("isotherm evaluated at a non-finite point")
    return u


@dataclass(frozen=True)
class GrowthReport:
    """Empirical constants of the growth conditions over a sample set.

    ``c1 = max |b(u)| / (|u| + 1)`` and ``c2 = max |b(u)|^2 / (B(u) + 1)``.
    """

    c1: float
    c2: float
    n_samples: int


class RadialIsotherm:
    """Common machinery for isotherms with ``phi(u) = Phi(|u|)``.

    Subclasses supply the radial profile: ``Phi``, ``g = Phi'``, ``g(r)/r``,
    ``g'``, the closed-form conjugate density and the inverse of ``g``.
    Arrays carry the component index on the last axis.
    """

    kind = "radial"

    def __init__(self, p, m_components=1):
        p = float(p)
        if not 0.0 < p < 1.0:
            raise ConfigurationError(f"Freundlich exponent must lie in (0, 1), got {p}")
        if int(m_components) != m_components or m_components < 1:
            raise ConfigurationError(f"m_components must be a positive integer, got {m_components}")
        self.p = p
        self.m_components = int(m_components)

    def __repr__(self):
        return f"{type(self).__name__}(p={self.p!r}, m_components={self.m_components})"

    def __eq__(self, other):
        return (
            type(self) is type(other)
            and self.p == other.p
            and self.m_components == other.m_components
        )

    def __hash__(self):
        return hash((type(self).__name__, self.p, self.m_components))

    # radial profile, overridden by subclasses
    def _Phi(self, r):
        raise NotImplementedError

    def _g(self, r):
        raise NotImplementedError

    def _ratio(self, r):
        """g(r)/r for r > 0."""
        raise NotImplementedError

    def _g_prime(self, r):
        raise NotImplementedError

    def _r_over_g(self, r):
        """r/g(r), continuous with value 0 at r = 0."""
        raise NotImplementedError

    def _inv_g_prime(self, r):
        """1/g'(r), continuous with value 0 at r = 0."""
        raise NotImplementedError

    def _B_closed(self, r):
        raise NotImplementedError

    def _radius_from_b(self, s):
        """Solve g(r) = s for r >= 0."""
        raise NotImplementedError

    def _vec(self, u):
        u = _check_finite(u)
        if u.ndim == 0 or u.shape[-1] != self.m_components:
            raise ValueError(
                f"expected trailing axis of length {self.m_components}, got shape {u.shape}"
            )
        return u

    def potential(self, u):
        """Convex potential ``phi(u)``; returns an array of shape ``u.shape[:-1]``."""
        u = self._vec(u)
        return self._Phi(np.linalg.norm(u, axis=-1))

    def b(self, u):
        """Isotherm ``b(u) = grad(phi)(u)`` with ``b(0) = 0``."""
        u = self._vec(u)
        r = np.linalg.norm(u, axis=-1, keepdims=True)
        safe = np.where(r > TINY_RADIUS, r, 1.0)
        return np.where(r > TINY_RADIUS, self._ratio(safe) * u, 0.0)

    def conjugate_density(self, u):
        """``B(u)`` from its closed form."""
        u = self._vec(u)
        return self._B_closed(np.linalg.norm(u, axis=-1))

    def conjugate_density_identity(self, u):
        """``B(u)`` as ``u.b(u) - phi(u)``."""
        u = self._vec(u)
        return np.sum(u * self.b(u), axis=-1) - self.potential(u)

    def jacobian(self, u):
        """Exact ``D_u b(u)``, shape ``u.shape + (m,)``.

        Unbounded at the origin, so ``|u|`` below ``TINY_RADIUS`` is a domain
        error; callers needing a bounded matrix must shift the point first.
        """
        u = self._vec(u)
        r = np.linalg.norm(u, axis=-1)
        if np.any(r <= TINY_RADIUS):
            raise DomainError("D_u b is unbounded at u = 0")
        uh = u / r[..., None]
        P = uh[..., :, None] * uh[..., None, :]
        eye = np.eye(self.m_components)
        return self._g_prime(r)[..., None, None] * P + self._ratio(r)[..., None, None] * (eye - P)

    def inverse_jacobian(self, u):
        """``(D_u b(u))^{-1}``, the Jacobian of ``b^{-1}`` at ``b(u)``.

        Bounded everywhere and equal to the zero matrix at ``u = 0``.
        """
        u = self._vec(u)
        r = np.linalg.norm(u, axis=-1)
        pos = r > TINY_RADIUS
        safe = np.where(pos, r, 1.0)
        uh = np.where(pos[..., None], u / safe[..., None], 0.0)
        P = uh[..., :, None] * uh[..., None, :]
        eye = np.eye(self.m_components)
        normal = np.where(pos, self._inv_g_prime(safe), 0.0)
        tangential = np.where(pos, self._r_over_g(safe), 0.0)
        return normal[..., None, None] * P + tangential[..., None, None] * (eye - P)

    def b_inverse(self, z):
        """The unique ``u`` with ``b(u) = z``."""
        z = self._vec(z)
        s = np.linalg.norm(z, axis=-1, keepdims=True)
        pos = s > 0.0
        safe = np.where(pos, s, 1.0)
        r = self._radius_from_b(safe)
        return np.where(pos, z * (r / safe), 0.0)

    def max_b_norm_on_ball(self, radius, n_radii=2001, n_directions=16, seed=0):
        """``max_{|w| <= radius} |b(w)|`` by dense sampling of the ball."""
        rng = np.random.default_rng(seed)
        dirs = rng.normal(size=(n_directions, self.m_components))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        radii = np.linspace(0.0, radius, n_radii)
        pts = radii[:, None, None] * dirs[None, :, :]
        return float(np.max(np.linalg.norm(self.b(pts), axis=-1)))


class FreundlichIsotherm(RadialIsotherm):
    """Competitive transport isotherm ``b(u) = u + |u|^(p-1) u``."""

    kind = "freundlich-transport"

    def _Phi(self, r):
        return 0.5 * r**2 + r ** (self.p + 1.0) / (self.p + 1.0)

    def _g(self, r):
        return r + r**self.p

    def _ratio(self, r):
        return 1.0 + r ** (self.p - 1.0)

    def _g_prime(self, r):
        return 1.0 + self.p * r ** (self.p - 1.0)

    def _r_over_g(self, r):
        q = r ** (1.0 - self.p)
        return q / (q + 1.0)

    def _inv_g_prime(self, r):
        q = r ** (1.0 - self.p)
        return q / (q + self.p)

    def _B_closed(self, r):
        return 0.5 * r**2 + self.p / (self.p + 1.0) * r ** (self.p + 1.0)

    def _radius_from_b(self, s):
        # Newton on w = r^p for h(w) = w^(1/p) + w - s: h is convex and the
        # start min(s, s^p) lies above the root, so iterates decrease monotonically.
        inv_p = 1.0 / self.p
        w = np.minimum(s, s**self.p)
        for _ in range(200):
            h = w**inv_p + w - s
            w_new = w - h / (inv_p * w ** (inv_p - 1.0) + 1.0)
            w_new = np.maximum(w_new, 0.0)
            if not np.any(w_new < w):
                break
            w = np.minimum(w, w_new)
        return w**inv_p


class PMEIsotherm(RadialIsotherm):
    """Pure power law ``b(u) = |u|^(p-1) u`` (porous-medium pullback, PME exponent ``1/p``)."""

    kind = "pme-scalar"

    @classmethod
    def from_pme_exponent(cls, m_exponent, m_components=1):
        if m_exponent <= 1:
            raise ConfigurationError(f"PME exponent must exceed 1, got {m_exponent}")
        return cls(1.0 / m_exponent, m_components)

    @property
    def pme_exponent(self):
        return 1.0 / self.p

    def _Phi(self, r):
        return r ** (self.p + 1.0) / (self.p + 1.0)

    def _g(self, r):
        return r**self.p

    def _ratio(self, r):
        return r ** (self.p - 1.0)

    def _g_prime(self, r):
        return self.p * r ** (self.p - 1.0)

    def _r_over_g(self, r):
        return r ** (1.0 - self.p)

    def _inv_g_prime(self, r):
        return r ** (1.0 - self.p) / self.p

    def _B_closed(self, r):
        return self.p / (self.p + 1.0) * r ** (self.p + 1.0)

    def _radius_from_b(self, s):
        return s ** (1.0 / self.p)


def make_isotherm(kind, p, m_components=1):
    """Build an isotherm from its configuration name."""
    kinds = {cls.kind: cls for cls in (FreundlichIsotherm, PMEIsotherm)}
    try:
        cls = kinds[kind]
    except KeyError:
        raise ConfigurationError(
            f"unknown isotherm {kind!r}; expected one of {sorted(kinds)}"
        ) from None
    return cls(p, m_components)


def check_growth_conditions(isotherm, samples):
    """Smallest constants in ``|b| <= C1(|u|+1)`` and ``|b|^2 <= C2(B+1)`` over ``samples``."""
    samples = isotherm._vec(samples)
    if samples.size == 0:
        raise ValueError("need at least one sample")
    samples = samples.reshape(-1, isotherm.m_components)
    bn = np.linalg.norm(isotherm.b(samples), axis=-1)
    un = np.linalg.norm(samples, axis=-1)
    B = isotherm.conjugate_density(samples)
    return GrowthReport(
        c1=float(np.max(bn / (un + 1.0))),
        c2=float(np.max(bn**2 / (B + 1.0))),
        n_samples=len(samples),
    )


def b_bound_margin(isotherm, z, delta):
    """Slack in ``|b(z)| <= delta*B(z) + max_{|w|<=1/delta} |b(w)|`` (nonnegative when it holds)."""
    z = isotherm._vec(z)
    rhs = delta * isotherm.conjugate_density(z) + isotherm.max_b_norm_on_ball(1.0 / delta)
    return rhs - np.linalg.norm(isotherm.b(z), axis=-1)


def langmuir_multicomponent(u, capacity, affinity):
    """Langmuir competitive isotherm ``s_i = N_i K_i u_i / (1 + sum_j K_j u_j)`` (reference only)."""
    u = np.asarray(u, dtype=float)
    capacity = np.asarray(capacity, dtype=float)
    affinity = np.asarray(affinity, dtype=float)
    return capacity * affinity * u / (1.0 + np.sum(affinity * u, axis=-1, keepdims=True))


def sheindorf_freundlich(u, coeff, exponents, competition):
    """Multicomponent Freundlich ``s_i = C_i (sum_j a_ij u_j)^(p_i-1) u_i`` (reference only)."""
    u = np.asarray(u, dtype=float)
    mixed = u @ np.asarray(competition, dtype=float).T
    return np.asarray(coeff) * mixed ** (np.asarray(exponents) - 1.0) * u
