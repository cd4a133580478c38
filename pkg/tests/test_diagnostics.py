import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from minmove.analytic import ZKBProfile
from minmove.diagnostics import (
    Support,
    audit_energy_estimate,
    error_report,
    extract_support,
    fit_rate,
    gradient_energy,
    incremental_orders,
    l2_qt_error,
)
from minmove.errors import UnsupportedOperation
from minmove.isotherm import FreundlichIsotherm, PMEIsotherm
from minmove.mesh import TimePartition, build_grid
from minmove.stepper import ProblemSpec, run


def zero_run(I=9, N=5, T=1.0):
    spec = ProblemSpec(PMEIsotherm(0.5, 1), build_grid(0.0, 1.0, I), TimePartition(T, N),
                       lambda x: np.zeros((len(x), 1)))
    return run(spec)


def test_l2_error_against_itself_is_zero():
    traj = zero_run()
    assert l2_qt_error(traj, lambda t, x: np.zeros((len(x), 1))) == 0.0


def test_l2_error_of_zero_against_one():
    traj = zero_run()
    assert l2_qt_error(traj, lambda t, x: np.ones((len(x), 1))) == pytest.approx(1.0, rel=1e-14)


def test_l2_error_samples_slab_end_times():
    traj = zero_run(N=4)
    # exact = t: slab n contributes dt * (n dt)^2
    dt = traj.time.dt
    expected = np.sqrt(sum(dt * (n * dt) ** 2 for n in range(1, 5)))
    got = l2_qt_error(traj, lambda t, x: np.full((len(x), 1), t))
    assert got == pytest.approx(expected, rel=1e-14)


def test_l2_error_rejects_thinned_trajectory():
    spec = ProblemSpec(PMEIsotherm(0.5, 1), build_grid(0.0, 1.0, 9), TimePartition(1.0, 4),
                       lambda x: np.zeros((len(x), 1)))
    with pytest.raises(UnsupportedOperation):
        l2_qt_error(run(spec, stride=2), lambda t, x: np.zeros((len(x), 1)))


def test_fit_rate_examples():
    r, c = fit_rate([(0.1, 0.1), (0.05, 0.05), (0.025, 0.025)])
    assert r == pytest.approx(1.0) and c == pytest.approx(1.0)
    r, c = fit_rate([(h, 3 * h**2) for h in (0.2, 0.1, 0.05)])
    assert r == pytest.approx(2.0) and c == pytest.approx(3.0)
    rep = error_report([(0.2, 0.4), (0.1, 0.2)])
    assert rep.rate == pytest.approx(1.0)
    assert incremental_orders([(0.05, 1.0), (0.1, 4.0)]) == pytest.approx([2.0])


@pytest.mark.parametrize("points", [[(0.1, 1.0)], [(0.1, 1.0), (0.05, 0.0)], [(0.1, -1), (0.2, 1)]])
def test_fit_rate_rejects_bad_input(points):
    with pytest.raises(ValueError):
        fit_rate(points)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(1e-3, 1e3))
def test_fit_rate_recovers_power_law(r, c):
    pts = [(h, c * h**r) for h in (0.08, 0.04, 0.02, 0.01)]
    rr, cc = fit_rate(pts)
    assert rr == pytest.approx(r, rel=1e-9)
    assert cc == pytest.approx(c, rel=1e-8)


def test_support_of_zero_is_empty():
    grid = build_grid(0.0, 1.0, 29)
    s = extract_support(np.zeros((31, 1)), grid)
    assert s.empty and s.gaps == ()
    assert Support((0.0, 1.0)).contains(s)
    assert not s.contains(Support((0.2, 0.3)))


def test_support_of_indicator():
    grid = build_grid(0.0, 1.0, 29)
    v = np.zeros(31)
    v[10:21] = 1.0
    s = extract_support(v, grid)
    assert s.interval == (grid.nodes[10], grid.nodes[20]) and s.gaps == ()
    v[14:17] = 0.0
    s = extract_support(v, grid)
    assert s.gaps == ((grid.nodes[14], grid.nodes[16]),)


@pytest.mark.parametrize("m_exp", [2.0, 3.0])
def test_support_of_zkb_within_one_cell(m_exp):
    prof = ZKBProfile(C=0.2, t0=0.25, m_exponent=m_exp)
    grid = build_grid(-2.0, 2.0, 399)
    for t in (0.0, 0.3):
        u = prof.u(t, grid.nodes)
        s = extract_support(u, grid)
        R = float(prof.support_radius(t))
        assert abs(s.interval[1] - R) <= grid.dx
        assert abs(s.interval[0] + R) <= grid.dx


def test_support_shrinks_with_larger_threshold():
    grid = build_grid(-1.0, 1.0, 199)
    v = np.exp(-(grid.nodes / 0.1) ** 2)
    prev = None
    for eps in (1e-12, 1e-8, 1e-4, 1e-1):
        s = extract_support(v, grid, support_eps=eps)
        if prev is not None:
            assert prev.contains(s)
        prev = s
    with pytest.raises(ValueError):
        extract_support(v, grid, support_eps=0.0)


def test_gradient_energy_linear():
    grid = build_grid(0.0, 1.0, 9)
    U = grid.nodes[:, None] * 2.0
    assert gradient_energy(U, grid.dx) == pytest.approx(4.0)


def test_audit_rejects_source():
    spec = ProblemSpec(FreundlichIsotherm(0.5, 1), build_grid(0.0, 1.0, 9),
                       TimePartition(0.1, 2), lambda x: np.zeros((len(x), 1)),
                       source=lambda t, x: np.ones((len(x), 1)))
    with pytest.raises(UnsupportedOperation):
        audit_energy_estimate(run(spec))


def test_audit_zero_run_passes():
    audit = audit_energy_estimate(zero_run())
    assert audit.passed and audit.lhs == 0.0
