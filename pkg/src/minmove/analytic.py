"""Barenblatt (ZKB) self-similar solutions of the porous medium equation.

For ``z_t = Lap(|z|^(m-1) z)`` in ``d`` dimensions::

    Z(t, x) = (t+t0)^(-alpha) * (C - k |x-x0|^2 (t+t0)^(-2 beta))_+^(1/(m-1))

with ``alpha = d/(d(m-1)+2)``, ``beta = alpha/d`` and
``k = alpha(m-1)/(2 m d)``.  With ``p = 1/m`` and ``b(u) = |u|^(p-1) u`` the
substitution ``z = b(u)`` maps ``d/dt b(u) = Lap u`` onto this equation, so
``u = Z^m`` solves the scalar pure-power problem exactly.
"""

from dataclasses import dataclass

import numpy as np

from minmove.errors import ConfigurationError, DomainError


@dataclass(frozen=True)
class ZKBProfile:
    C: float
    t0: float
    x0: float | tuple = 0.0
    m_exponent: float = 2.0
    d: int = 1

    def __post_init__(self):
        if not self.m_exponent > 1:
            raise ConfigurationError(f"PME exponent must exceed 1, got {self.m_exponent}")
        if not self.C > 0:
            raise ConfigurationError(f"C must be positive, got {self.C}")
        if int(self.d) != self.d or self.d < 1:
            raise ConfigurationError(f"dimension must be a positive integer, got {self.d}")
        if np.size(self.x0) not in (1, self.d):
            raise ConfigurationError("x0 must have d coordinates")

    @property
    def alpha(self):
        return self.d / (self.d * (self.m_exponent - 1.0) + 2.0)

    @property
    def beta(self):
        return self.alpha / self.d

    @property
    def k(self):
        return self.alpha * (self.m_exponent - 1.0) / (2.0 * self.m_exponent * self.d)

    def _shifted_time(self, t):
        s = np.asarray(t, dtype=float) + self.t0
        if np.any(s <= 0):
            raise DomainError(f"profile undefined for t <= -t0 = {-self.t0}")
        return s

    def _dist2(self, x):
        x = np.asarray(x, dtype=float)
        if self.d == 1:
            return (x - float(np.ravel(self.x0)[0])) ** 2
        return np.sum((x - np.asarray(self.x0, dtype=float)) ** 2, axis=-1)

    def z(self, t, x):
        """Density ``Z(t, x) >= 0``; ``x`` has a trailing axis of length ``d`` when ``d > 1``."""
        s = self._shifted_time(t)
        inner = self.C - self.k * self._dist2(x) * s ** (-2.0 * self.beta)
        return s ** (-self.alpha) * np.maximum(inner, 0.0) ** (1.0 / (self.m_exponent - 1.0))

    def u(self, t, x):
        """Pullback ``u = Z^m`` solving ``d/dt |u|^(p-1)u = Lap u`` with ``p = 1/m``."""
        return self.z(t, x) ** self.m_exponent

    def support_radius(self, t):
        return np.sqrt(self.C / self.k) * self._shifted_time(t) ** self.beta

    def mass(self):
        """Total mass of ``Z`` in ``d = 1`` (closed form, time independent)."""
        if self.d != 1:
            raise NotImplementedError("closed-form mass is provided for d = 1 only")
        from scipy.special import beta as beta_fn

        q = 1.0 / (self.m_exponent - 1.0)
        # int_{-R}^{R} (C - k x^2)^q dx with R = sqrt(C/k), after x -> R sin(theta)
        return float(self.C ** (q + 0.5) / np.sqrt(self.k) * beta_fn(0.5, q + 1.0))

    def fits_inside(self, a, b, T):
        """Support stays strictly inside ``(a, b)`` on ``[0, T]`` (radius grows with t)."""
        if self.d != 1:
            raise NotImplementedError
        x0 = float(np.ravel(self.x0)[0])
        return float(self.support_radius(T)) < min(x0 - a, b - x0)

    def check_inside(self, a, b, T):
        if self.t0 <= 0:
            raise ConfigurationError("t0 must be positive to sample initial data at t = 0")
        if not self.fits_inside(a, b, T):
            raise ConfigurationError(
                f"ZKB support radius {float(self.support_radius(T)):.4g} at T={T} "
                f"reaches the boundary of ({a}, {b})"
            )

    def _column(self, t, x):
        return self.u(t, x)[:, None]

    def _column_at_zero(self, x):
        return self._column(0.0, x)

    # bound methods rather than closures so problems pickle across processes
    def initial_condition(self):
        return self._column_at_zero

    def exact(self):
        """``(t, x) -> (len(x), 1)`` array, the form used by the error functional."""
        return self._column
