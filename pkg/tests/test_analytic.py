import numpy as np
import pytest
from scipy.integrate import quad

from minmove.analytic import ZKBProfile
from minmove.errors import ConfigurationError, DomainError
from minmove.isotherm import PMEIsotherm


def test_constants_d1_m2():
    prof = ZKBProfile(C=1.0, t0=1.0, m_exponent=2.0)
    # alpha = 1/(1*1+2), beta = alpha, k = alpha*1/(2*2*1)
    assert prof.alpha == pytest.approx(1 / 3)
    assert prof.beta == pytest.approx(1 / 3)
    assert prof.k == pytest.approx(1 / 12)


def test_constants_general_dimension():
    prof = ZKBProfile(C=1.0, t0=1.0, x0=(0.0, 0.0, 0.0), m_exponent=3.0, d=3)
    assert prof.alpha == pytest.approx(3 / 8)
    assert prof.beta == pytest.approx(1 / 8)
    assert prof.k == pytest.approx((3 / 8) * 2 / 18)


def test_heat_limit():
    for d in (1, 2, 3):
        prof = ZKBProfile(C=1.0, t0=1.0, x0=(0.0,) * d if d > 1 else 0.0,
                          m_exponent=1 + 1e-9, d=d)
        assert prof.alpha == pytest.approx(d / 2, rel=1e-8)


def test_outside_support_zero():
    prof = ZKBProfile(C=0.2, t0=0.25, m_exponent=2.0)
    assert prof.z(0.0, 50.0) == 0.0
    assert prof.u(0.3, -50.0) == 0.0


def test_domain_errors():
    prof = ZKBProfile(C=0.2, t0=0.25, m_exponent=2.0)
    with pytest.raises(DomainError):
        prof.z(-0.25, 0.0)
    with pytest.raises(ConfigurationError):
        ZKBProfile(C=0.2, t0=0.25, m_exponent=1.0)
    with pytest.raises(ConfigurationError):
        ZKBProfile(C=-1.0, t0=0.25)


@pytest.mark.parametrize("m", [2.0, 3.0, 1.5])
def test_mass_conserved(m):
    prof = ZKBProfile(C=0.3, t0=0.2, x0=0.4, m_exponent=m)
    masses = []
    for t in (0.0, 0.1, 0.5, 2.0):
        R = float(prof.support_radius(t))
        masses.append(quad(lambda x: float(prof.z(t, x)), 0.4 - R, 0.4 + R,
                           epsabs=0, epsrel=1e-12, limit=200)[0])
    np.testing.assert_allclose(masses, masses[0], rtol=1e-6)
    assert masses[0] == pytest.approx(prof.mass(), rel=1e-8)


def test_support_radius():
    prof = ZKBProfile(C=1 / 12, t0=0.5, m_exponent=2.0)
    assert prof.support_radius(0.5) == pytest.approx(1.0)
    r = prof.support_radius(np.linspace(0, 3, 20))
    assert np.all(np.diff(r) > 0)


@pytest.mark.parametrize("m", [2.0, 3.0])
def test_support_radius_matches_grid_scan(m):
    prof = ZKBProfile(C=0.2, t0=0.25, m_exponent=m)
    x = np.linspace(0, 3, 300001)
    dx = x[1] - x[0]
    for t in (0.0, 0.4):
        edge = x[np.flatnonzero(prof.z(t, x) > 0)[-1]]
        assert abs(edge - prof.support_radius(t)) <= dx


@pytest.mark.parametrize("m", [2.0, 3.0])
def test_round_trip_through_isotherm(m):
    prof = ZKBProfile(C=0.2, t0=0.25, m_exponent=m)
    iso = PMEIsotherm.from_pme_exponent(m)
    x = np.linspace(-1.0, 1.0, 101)
    inside = np.abs(x) < 0.95 * prof.support_radius(0.3)
    u = prof.u(0.3, x[inside])
    z = prof.z(0.3, x[inside])
    np.testing.assert_allclose(iso.b(u[:, None])[:, 0], z, rtol=1e-12)
    assert prof.u(0.0, 10.0) == 0.0


@pytest.mark.parametrize("m", [2.0, 3.0])
def test_pde_residual_second_order(m):
    # residual of d/dt b(u) - u_xx with centred differences at interior support points
    prof = ZKBProfile(C=0.2, t0=0.25, m_exponent=m)
    t = 0.3
    x = np.linspace(-0.5, 0.5, 11)
    res = []
    for h in (1e-2, 5e-3, 2.5e-3):
        dzdt = (prof.z(t + h, x) - prof.z(t - h, x)) / (2 * h)
        uxx = (prof.u(t, x + h) - 2 * prof.u(t, x) + prof.u(t, x - h)) / h**2
        res.append(np.max(np.abs(dzdt - uxx)))
    orders = np.log2(np.array(res[:-1]) / np.array(res[1:]))
    assert np.all(orders > 1.8)


@pytest.mark.parametrize("m", [2.0, 3.0])
def test_continuity_at_free_boundary(m):
    prof = ZKBProfile(C=0.2, t0=0.25, m_exponent=m)
    R = float(prof.support_radius(0.2))
    for eps in (1e-4, 1e-6):
        assert prof.z(0.2, R - eps) < 10 * eps ** min(1.0, 1 / (m - 1))
        assert prof.z(0.2, R + eps) == 0.0


def test_u_c1_for_large_m():
    # for m > 2, u ~ (R - x)^(m/(m-1)) near the edge: the inner slope decays
    # like h^(1/(m-1)) and matches the zero slope outside
    prof = ZKBProfile(C=0.2, t0=0.25, m_exponent=3.0)
    R = float(prof.support_radius(0.2))
    slopes = [(prof.u(0.2, R - h) - prof.u(0.2, R - 2 * h)) / h for h in (1e-3, 1e-5, 1e-7)]
    assert abs(slopes[1]) < 0.2 * abs(slopes[0])
    assert abs(slopes[2]) < 0.2 * abs(slopes[1])
    assert (prof.u(0.2, R + 2e-7) - prof.u(0.2, R + 1e-7)) == 0.0


def test_containment_validator():
    prof = ZKBProfile(C=0.2, t0=0.25, m_exponent=2.0)
    prof.check_inside(-2, 2, 0.5)
    with pytest.raises(ConfigurationError):
        prof.check_inside(-1.2, 1.2, 0.5)
    with pytest.raises(ConfigurationError):
        ZKBProfile(C=0.2, t0=0.0, m_exponent=2.0).check_inside(-2, 2, 0.5)
