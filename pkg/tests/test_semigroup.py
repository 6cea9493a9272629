import math

import numpy as np
import pytest

from fiberflow.errors import PreconditionError
from fiberflow.geometry import FiberedSpace, PointSet, dist_to_fiber
from fiberflow.lagrangian import power_lagrangian
from fiberflow.scenario import random_scenario
from fiberflow.section import Section, g_field
from fiberflow.semigroup import (
    differentiability_probe,
    discrete_D,
    evolution_table,
    evolve,
    evolve_forward,
    hj_residual,
    hj_residual_lipschitz,
    proposition_suite,
    quasi_minimizer_trace,
    semicontinuity_probe,
    slope_estimate_check,
    time_derivative,
)


def naive_scan(section, L, y, t):
    """Independently coded brute-force minimum over the base set."""
    best = math.inf
    for z in range(section.n_base):
        d = dist_to_fiber(section.values[y], section.space.fibers[z]).value
        g = max(section.values[z])
        best = min(best, t * float(L(d / t)) + g)
    return best


def test_two_point_closed_forms(two_point):
    sec, L = two_point.section(), two_point.lagrangian()
    for t in (0.5, 1.0, 2.0, 7.0):
        assert evolve(sec, L, 0, t).value == pytest.approx(0.0, abs=1e-12)
    r = evolve(sec, L, 1, 2.0)
    assert r.value == pytest.approx(0.5, abs=1e-12)
    assert r.argmin == (0,)
    for t in (0.5, 1.0, 2.0):
        assert evolve(sec, L, 1, t).value == pytest.approx(min(1.0, 1.0 / t), abs=1e-12)


def test_evolve_matches_naive_scan(paper):
    sec, L = paper.section(), paper.lagrangian()
    for t in (0.03, 1.0):
        for y in range(0, sec.n_base, 9):
            assert evolve(sec, L, y, t).value == pytest.approx(naive_scan(sec, L, y, t), abs=1e-12)
    rnd = random_scenario(5)
    sec, L = rnd.section(), rnd.lagrangian()
    for y in range(sec.n_base):
        assert evolve(sec, L, y, 1.7).value == pytest.approx(naive_scan(sec, L, y, 1.7), abs=1e-12)


def test_self_competitor_bound(paper):
    sec, L = paper.section(), paper.lagrangian()
    g = g_field(sec)
    for t in paper.grids.times + [1.0, 5.0]:
        for y in range(0, sec.n_base, 7):
            assert evolve(sec, L, y, t).value <= g[y] + 1e-12


def test_pointwise_bounds_on_paper(paper):
    sec, L = paper.section(), paper.lagrangian()
    lower = float(sec.values.min())
    g = g_field(sec)
    for t in (0.02, 0.5, 2.0):
        for y in range(0, sec.n_base, 5):
            u = evolve(sec, L, y, t).value
            assert lower - 1e-12 <= u <= g[y] + 1e-12


def test_forward_equals_symmetrized_on_singleton(singleton):
    sec, L = singleton.section(), singleton.lagrangian()
    for t in singleton.grids.times:
        for y in range(sec.n_base):
            assert evolve_forward(sec, y, t).value == pytest.approx(evolve(sec, L, y, t).value, abs=1e-12)


def test_forward_differs_on_paper_scenario(paper):
    sec, L = paper.section(), paper.lagrangian()
    x = paper.id_index("y010")
    assert evolve_forward(sec, x, 1.0).value != pytest.approx(evolve(sec, L, x, 1.0).value, abs=1e-9)


def test_both_operators_reach_min_g_for_large_t(paper):
    sec, L = paper.section(), paper.lagrangian()
    gmin = float(g_field(sec).min())
    for y in (0, 40, 80):
        assert evolve(sec, L, y, 1e6).value == pytest.approx(gmin, abs=1e-4)
        assert evolve_forward(sec, y, 1e6).value == pytest.approx(gmin, abs=1e-4)


def test_discrete_D_cases(two_point, tie):
    sec, L = two_point.section(), two_point.lagrangian()
    assert discrete_D(sec, L, 0, 1.0) == (0.0, 0.0)  # argmin is {y} itself
    dm, dp = discrete_D(sec, L, 1, 2.0)
    assert dm == pytest.approx(math.sqrt(2.0), abs=1e-12)
    assert dp == pytest.approx(math.sqrt(2.0), abs=1e-12)
    # engineered exact tie at fiber distances 1 and 2
    sec, L = tie.section(), tie.lagrangian()
    assert evolve(sec, L, 0, 1.0).argmin == (1, 2)
    assert discrete_D(sec, L, 0, 1.0) == (1.0, 2.0)


def test_time_derivative_frozen_argmin(two_point):
    sec = two_point.section()
    td = time_derivative(sec, 1, 0.5, h=1e-7 * 0.5)
    assert td.forward == 0.0 and td.backward == 0.0
    assert td.predicted_plus == 0.0 and td.predicted_minus == 0.0


def test_time_derivative_smooth_branch(two_point):
    sec = two_point.section()
    for t in (1.5, 3.0):
        td = time_derivative(sec, 1, t, h=1e-7 * t)
        assert td.forward == pytest.approx(-1.0 / t**2, abs=1e-6)
        assert td.backward == pytest.approx(-1.0 / t**2, abs=1e-6)
        assert td.predicted_plus == pytest.approx(-1.0 / t**2, abs=1e-12)
        assert td.predicted_minus == pytest.approx(-1.0 / t**2, abs=1e-12)


def test_time_derivative_kink(two_point):
    # closed forms at the kink t = 1: right slope -1 from the remote branch,
    # left slope 0 from the frozen branch
    sec = two_point.section()
    td = time_derivative(sec, 1, 1.0, h=1e-7)
    assert td.forward == pytest.approx(-1.0, abs=1e-6)
    assert td.backward == pytest.approx(0.0, abs=1e-12)
    assert td.predicted_plus == pytest.approx(-1.0, abs=1e-12)
    assert td.predicted_minus == pytest.approx(0.0, abs=1e-12)


def test_time_derivative_domain_error(two_point):
    with pytest.raises(PreconditionError):
        time_derivative(two_point.section(), 1, 1.0, h=1.5)


def test_time_derivative_requires_model(two_point):
    with pytest.raises(PreconditionError):
        time_derivative(two_point.section(), 1, 1.0, h=0.01, L=power_lagrangian(4.0))


def test_hj_residual_constant_field(singleton):
    sec = singleton.section()
    for t in singleton.grids.times:
        for y in range(sec.n_base):
            r = hj_residual(sec, y, t, radius=1.5)
            assert r.slope == 0.0
            assert abs(r.residual) <= 1e-12


def test_hj_residual_two_point(two_point):
    sec = two_point.section()
    r = hj_residual(sec, 1, 1.5, radius=2.0)
    assert r.n_neighbors == 1
    assert r.slope == pytest.approx((1 / 1.5) / math.sqrt(2.0), abs=1e-12)
    assert r.residual <= 1e-6


def test_hj_residual_paper_grid(paper):
    sec = paper.section()
    stride = paper.grids.hj_base_stride
    for t in paper.grids.effective_hj_times():
        for y in range(0, sec.n_base, stride):
            r = hj_residual(sec, y, t, radius=paper.grids.hj_radius)
            assert r.residual <= 1e-6
            assert r.no_neighbors  # radius below the base gap: flagged, slope 0


def test_hj_lipschitz_matches_plain_on_singleton(singleton):
    sec = singleton.section()
    for y in range(sec.n_base):
        a = hj_residual(sec, y, 1.0, radius=1.5)
        b = hj_residual_lipschitz(sec, y, 1.0, radius=1.5)
        assert b.residual == pytest.approx(a.residual, abs=1e-12)


def test_hj_lipschitz_two_point(two_point):
    sec = two_point.section()
    for t in two_point.grids.times:
        for y in (0, 1):
            assert hj_residual_lipschitz(sec, y, t, radius=2.0).residual <= 1e-6


def test_hj_lipschitz_refuses_infinite_ils():
    space = FiberedSpace(
        kappa=1,
        base_points=np.array([[0.0], [1.0]]),
        fibers=(PointSet(np.array([[0.0]])), PointSet(np.array([[0.0], [5.0]]))),
    )
    sec = Section(space=space, values=np.array([[0.0], [5.0]]))
    with pytest.raises(PreconditionError):
        hj_residual_lipschitz(sec, 0, 1.0, radius=2.0)


def test_slope_estimate_two_point(two_point):
    sec = two_point.section()
    for t in (1.0, 1.5, 2.0, 4.0):
        rep = slope_estimate_check(sec, t)
        assert rep.violations == []
        assert rep.worst_slack <= 1e-9


def test_slope_estimate_paper_grid(paper):
    sec = paper.section()
    for t in paper.grids.times:
        rep = slope_estimate_check(sec, t)
        assert rep.violations == []


def test_quasi_minimizer_trace(paper):
    sec = paper.section()
    for y in (0, paper.id_index("y010"), 80):
        trace = quasi_minimizer_trace(sec, y)
        assert trace.argmin_dist[-1] <= 1e-6
        assert np.all(trace.quasi_dist**2 <= trace.quasi_bound + 1e-9)


def test_suite_singleton_zero_slack(singleton):
    suite = proposition_suite(singleton.section(), singleton.lagrangian(), singleton.grids.times)
    for item in suite.items:
        assert item.status == "PASS", item
        assert item.worst_slack <= 1e-9


def test_suite_two_point_passes_and_monotone_strict(two_point):
    sec, L = two_point.section(), two_point.lagrangian()
    suite = proposition_suite(sec, L, two_point.grids.times)
    assert all(item.status == "PASS" for item in suite.items)
    # strictly decreasing past the kink
    assert evolve(sec, L, 1, 1.5).value < evolve(sec, L, 1, 1.0).value - 1e-3


def test_suite_paper_passes(paper):
    suite = proposition_suite(
        paper.section(), paper.lagrangian(), paper.grids.times, labels=paper.base_ids
    )
    assert all(item.status == "PASS" for item in suite.items)


def test_suite_skips_axiom_items_for_bad_lagrangian(paper):
    from fiberflow.lagrangian import Lagrangian

    L = Lagrangian(fn=np.exp, name="exp", cert_grid=np.linspace(0, 5, 64))
    suite = proposition_suite(paper.section(), L, [0.02])
    assert suite.item("c_spatial_estimate").status == "SKIPPED"
    assert suite.item("d_cross_time_estimate").status == "SKIPPED"


def test_evolution_table_invariants(two_point):
    sec, L = two_point.section(), two_point.lagrangian()
    table = evolution_table(sec, L, two_point.grids.times, hj_radius=2.0)
    assert all(len(a) >= 1 for row in table.argmins for a in row)
    assert np.all(table.iD_minus <= table.iD_plus + 1e-15)
    assert np.all(np.isfinite(table.u))
    assert np.all(np.isfinite(table.hj_residual))


def test_diagnostics_smoke(two_point):
    rows = semicontinuity_probe(two_point.section(), 1, 1.5, n_neighbors=1)
    assert rows and {"y_index", "t", "iD_minus", "iD_plus"} <= set(rows[0])
    rows = differentiability_probe(two_point.section(), 1, 1.5)
    assert rows and rows[0]["u_quotient"] <= rows[0]["bound"] + 1e-9
