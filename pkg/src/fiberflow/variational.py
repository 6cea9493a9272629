"""Discrete curve problem behind the evolved field.

Curves are scalar-valued on a uniform grid over [0, t], pinned at both ends:
w(0) sits at the scalar parameter of a candidate base point z and w(t) at
that parameter plus the fiber distance d(f(y), fiber(z)).  The action is the
Riemann sum of the penalty of the slopes plus the initial datum g(z).  For a
convex penalty the inner problem is solved by the constant-speed curve, which
is how the outer scan over z reproduces the direct evolution formula; the
solver verifies that numerically instead of assuming it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .lagrangian import Lagrangian
from .section import Section, g_field
from .semigroup import evolve

Array = np.ndarray

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass
class CurveProblem:
    """One inner minimization instance: target point y, horizon t, m steps,
    candidate start z, and the m+1 node values of the curve."""

    y_index: int
    t: float
    m: int
    z_index: int
    nodes: Array
    displacement: float  # d(f(y), fiber(z)), fixing the endpoint constraint

    def endpoint_violation(self, params: Array) -> float:
        start = params[self.z_index]
        return max(
            abs(float(self.nodes[0]) - start),
            abs(float(self.nodes[-1]) - (start + self.displacement)),
        )


def make_curve_problem(
    section: Section,
    params: Array,
    y: int,
    t: float,
    m: int,
    z: int,
    nodes: Array | None = None,
) -> CurveProblem:
    if m < 1:
        raise PreconditionError("need at least one time step")
    if t <= 0:
        raise PreconditionError("t must be positive")
    d = float(section.fiber_distances()[y, z])
    start = float(params[z])
    if nodes is None:
        nodes = start + np.linspace(0.0, d, m + 1)
    else:
        nodes = np.asarray(nodes, dtype=float)
        if nodes.shape != (m + 1,):
            raise PreconditionError(f"nodes must have shape ({m + 1},)")
    return CurveProblem(y_index=y, t=float(t), m=m, z_index=z, nodes=nodes, displacement=d)


def action(problem: CurveProblem, L: Lagrangian, section: Section, params: Array) -> float:
    """Riemann-sum action of the node curve plus the initial datum g(z)."""
    if problem.endpoint_violation(params) > 1e-9:
        raise PreconditionError("curve nodes violate the endpoint constraint")
    ds = problem.t / problem.m
    slopes = np.diff(problem.nodes) / ds
    g = g_field(section)
    return float(np.sum(L(slopes)) * ds + g[problem.z_index])


def _golden_section(fun, lo: float, hi: float, tol: float = 1e-12) -> float:
    if hi < lo:
        lo, hi = hi, lo
    if hi - lo < tol:
        return (lo + hi) / 2.0
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fun(d)
    return (a + b) / 2.0


def minimize_interior(
    problem: CurveProblem,
    L: Lagrangian,
    tol: float = 1e-10,
    max_sweeps: int = 10_000,
) -> tuple[Array, int]:
    """Cyclic coordinate descent over the interior nodes.

    The per-node problem is convex in the node value; the quadratic model
    penalty has the closed-form midpoint update, anything else uses golden
    section between the neighbors.  Stops when the largest node movement in a
    sweep drops below `tol`.
    """
    nodes = problem.nodes.copy()
    m = problem.m
    ds = problem.t / m
    quadratic = L.is_model_quadratic
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        max_change = 0.0
        for k in range(1, m):
            a, b = nodes[k - 1], nodes[k + 1]
            if quadratic:
                new = 0.5 * (a + b)
            else:
                def local(w, a=a, b=b):
                    return float(L((w - a) / ds) + L((b - w) / ds))

                lo, hi = (a, b) if a <= b else (b, a)
                new = _golden_section(local, lo, hi)
            max_change = max(max_change, abs(new - nodes[k]))
            nodes[k] = new
        if max_change < tol:
            break
    return nodes, sweeps


@dataclass
class VariationalResult:
    value: float
    best_z: int
    nodes: Array
    t: float
    m: int
    evolve_value: float
    gap: float
    max_linearity_deviation: float


def solve_variational(
    section: Section,
    L: Lagrangian,
    y: int,
    t: float,
    m: int,
    params: Array | None,
    tol: float = 1e-10,
    max_sweeps: int = 10_000,
) -> VariationalResult:
    """Outer exact scan over candidate start points, inner descent per curve.

    Requires the base set to carry a scalar parametrization (the curve values
    live on the parameter line); refused otherwise.
    """
    if params is None:
        raise PreconditionError(
            "variational solve needs a scalar parametrization of the base set; "
            "this scenario does not provide one"
        )
    params = np.asarray(params, dtype=float)
    if params.shape != (section.n_base,):
        raise PreconditionError("need exactly one scalar parameter per base point")
    best: tuple[float, int, Array] | None = None
    for z in range(section.n_base):
        problem = make_curve_problem(section, params, y, t, m, z)
        nodes, _ = minimize_interior(problem, L, tol=tol, max_sweeps=max_sweeps)
        problem.nodes = nodes
        val = action(problem, L, section, params)
        if best is None or val < best[0]:
            best = (val, z, nodes)
    value, z, nodes = best
    linear = nodes[0] + np.linspace(0.0, 1.0, m + 1) * (nodes[-1] - nodes[0])
    ev = evolve(section, L, y, t).value
    return VariationalResult(
        value=value,
        best_z=z,
        nodes=nodes,
        t=float(t),
        m=m,
        evolve_value=ev,
        gap=value - ev,
        max_linearity_deviation=float(np.abs(nodes - linear).max()),
    )
