import numpy as np
import pytest

from fiberflow.errors import PreconditionError
from fiberflow.lagrangian import power_lagrangian
from fiberflow.semigroup import evolve
from fiberflow.variational import (
    action,
    make_curve_problem,
    minimize_interior,
    solve_variational,
)


def test_linear_curve_action_is_constant_speed_value(two_point):
    sec, L = two_point.section(), two_point.lagrangian()
    params = two_point.params
    d = sec.fiber_distances()[1, 0]
    g0 = 0.0
    for m in (1, 4, 16):
        problem = make_curve_problem(sec, params, y=1, t=2.0, m=m, z=0)
        expected = 2.0 * float(L(d / 2.0)) + g0
        assert action(problem, L, sec, params) == pytest.approx(expected, abs=1e-12)


def test_perturbed_action_dominates_linear(two_point):
    # discrete Jensen: 1000 random interior perturbations never beat the line
    sec, L = two_point.section(), two_point.lagrangian()
    params = two_point.params
    rng = np.random.default_rng(42)
    base = make_curve_problem(sec, params, y=1, t=2.0, m=8, z=0)
    linear_value = action(base, L, sec, params)
    for _ in range(1000):
        nodes = base.nodes.copy()
        nodes[1:-1] += rng.normal(scale=0.3, size=7)
        problem = make_curve_problem(sec, params, y=1, t=2.0, m=8, z=0, nodes=nodes)
        assert action(problem, L, sec, params) >= linear_value - 1e-12


def test_single_step_equals_evolve(paper):
    sec, L = paper.section(), paper.lagrangian()
    for y in (0, 40, 80):
        for t in (0.5, 2.0):
            r = solve_variational(sec, L, y, t, m=1, params=paper.params)
            assert r.value == pytest.approx(evolve(sec, L, y, t).value, abs=1e-15)


def test_two_point_variational_solution(two_point):
    sec, L = two_point.section(), two_point.lagrangian()
    r = solve_variational(sec, L, y=1, t=2.0, m=8, params=two_point.params)
    assert r.value == pytest.approx(0.5, abs=1e-8)
    assert r.best_z == 0
    assert r.max_linearity_deviation <= 1e-8


def test_descent_recovers_line_from_perturbed_start(two_point):
    sec, L = two_point.section(), two_point.lagrangian()
    params = two_point.params
    problem = make_curve_problem(sec, params, y=1, t=2.0, m=8, z=0)
    rng = np.random.default_rng(3)
    problem.nodes[1:-1] += rng.normal(scale=0.5, size=7)
    nodes, sweeps = minimize_interior(problem, L)
    linear = nodes[0] + np.linspace(0, 1, 9) * (nodes[-1] - nodes[0])
    assert np.abs(nodes - linear).max() <= 1e-6
    assert sweeps < 10_000


def test_golden_section_path_with_quartic_penalty(two_point):
    sec = two_point.section()
    L = power_lagrangian(4.0)
    params = two_point.params
    problem = make_curve_problem(sec, params, y=1, t=2.0, m=6, z=0)
    problem.nodes[1:-1] += np.linspace(0.2, -0.2, 5)
    nodes, _ = minimize_interior(problem, L)
    linear = nodes[0] + np.linspace(0, 1, 7) * (nodes[-1] - nodes[0])
    assert np.abs(nodes - linear).max() <= 1e-6
    r = solve_variational(sec, L, y=1, t=2.0, m=6, params=params)
    assert abs(r.gap) <= 1e-9


def test_refining_steps_never_increases_value(paper):
    sec, L = paper.section(), paper.lagrangian()
    values = [
        solve_variational(sec, L, y=40, t=1.0, m=m, params=paper.params).value
        for m in (1, 2, 4, 8)
    ]
    for coarse, fine in zip(values, values[1:]):
        assert fine <= coarse + 1e-9


def test_refusal_without_parametrization(two_point):
    sec, L = two_point.section(), two_point.lagrangian()
    with pytest.raises(PreconditionError):
        solve_variational(sec, L, y=1, t=1.0, m=4, params=None)


def test_endpoint_constraint_enforced(two_point):
    sec, L = two_point.section(), two_point.lagrangian()
    params = two_point.params
    problem = make_curve_problem(sec, params, y=1, t=2.0, m=4, z=0)
    problem.nodes[-1] += 0.1
    with pytest.raises(PreconditionError):
        action(problem, L, sec, params)
