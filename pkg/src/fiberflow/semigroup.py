"""Hopf-Lax style evolution of a section's scalar field, in both orientations.

The evolved value at (y, t) is

    u(y, t) = min over z of [ t L(d(f(y), fiber(z)) / t) + g(z) ],

an exact minimum over the finite base set.  Minimizing sequences collapse to
the argmin set (up to a tie tolerance); the extremal fiber distances over
that set play the role of the one-sided speed indicators D- and D+, drive
closed-form one-sided time derivatives for the quadratic penalty, and feed
the Hamilton-Jacobi residual checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import PreconditionError
from .lagrangian import AxiomReport, Lagrangian, check_axioms, legendre_transform, model_quadratic
from .section import Section, bound_K, g_field, global_ILS

Array = np.ndarray

DEFAULT_TAU_TIE = 1e-9
# forward-difference step scale: sqrt(eps) * t balances truncation against roundoff
FD_STEP_SCALE = float(np.sqrt(np.finfo(float).eps))


class EvolveResult(NamedTuple):
    value: float
    argmin: tuple[int, ...]


def _branch_values(section: Section, L: Lagrangian, y: int, t: float) -> Array:
    if t <= 0:
        raise PreconditionError("t must be positive")
    D = section.fiber_distances()
    g = g_field(section)
    return t * L(D[y] / t) + g


def _argmin_set(branches: Array, tau_tie: float) -> tuple[int, ...]:
    u = float(branches.min())
    return tuple(int(i) for i in np.nonzero(branches <= u + tau_tie)[0])


def evolve(section: Section, L: Lagrangian, y: int, t: float, tau_tie: float = DEFAULT_TAU_TIE) -> EvolveResult:
    """Exact minimum of the evolved field at (y, t) plus its argmin set."""
    branches = _branch_values(section, L, y, t)
    return EvolveResult(float(branches.min()), _argmin_set(branches, tau_tie))


def evolve_all(section: Section, L: Lagrangian, t: float, tau_tie: float = DEFAULT_TAU_TIE):
    """Evolved values and argmin sets for every base point at one time."""
    if t <= 0:
        raise PreconditionError("t must be positive")
    D = section.fiber_distances()
    g = g_field(section)
    B = t * L(D / t) + g[None, :]
    u = B.min(axis=1)
    argmins = [_argmin_set(B[i], tau_tie) for i in range(section.n_base)]
    return u, argmins


def evolve_forward(section: Section, y: int, t: float, tau_tie: float = DEFAULT_TAU_TIE) -> EvolveResult:
    """Original orientation with the fixed quadratic penalty:
    min over z of [ g(z) + d(f(z), fiber(y))^2 / (2t) ].

    Kept for side-by-side comparison with the symmetrized operator.
    """
    if t <= 0:
        raise PreconditionError("t must be positive")
    D = section.fiber_distances()
    g = g_field(section)
    branches = g + D[:, y] ** 2 / (2.0 * t)
    return EvolveResult(float(branches.min()), _argmin_set(branches, tau_tie))


def discrete_D(
    section: Section, L: Lagrangian, y: int, t: float, tau_tie: float = DEFAULT_TAU_TIE
) -> tuple[float, float]:
    """(D-, D+): min and max fiber distance d(f(y), fiber(z)) over the argmin set."""
    _, argmin = evolve(section, L, y, t, tau_tie)
    dists = section.fiber_distances()[y, list(argmin)]
    return float(dists.min()), float(dists.max())


def _require_model(L: Lagrangian | None) -> Lagrangian:
    if L is None:
        return model_quadratic()
    if not L.is_model_quadratic:
        raise PreconditionError("this operation is defined for the quadratic model penalty only")
    return L


@dataclass
class TimeDerivative:
    forward: float
    backward: float
    predicted_plus: float
    predicted_minus: float
    h: float


def time_derivative(
    section: Section,
    y: int,
    t: float,
    h: float | None = None,
    L: Lagrangian | None = None,
    tau_tie: float = DEFAULT_TAU_TIE,
) -> TimeDerivative:
    """One-sided difference quotients of t -> u(y, t) and their predictions
    -(D+-)^2 / (2 t^2) from the argmin set (quadratic penalty only)."""
    L = _require_model(L)
    if h is None:
        h = 0.01 * t
    if not (0 < h < t):
        raise PreconditionError("need 0 < h < t for one-sided differences")
    u0 = evolve(section, L, y, t, tau_tie).value
    up = evolve(section, L, y, t + h, tau_tie).value
    um = evolve(section, L, y, t - h, tau_tie).value
    dm, dp = discrete_D(section, L, y, t, tau_tie)
    return TimeDerivative(
        forward=(up - u0) / h,
        backward=(u0 - um) / h,
        predicted_plus=-(dp * dp) / (2.0 * t * t),
        predicted_minus=-(dm * dm) / (2.0 * t * t),
        h=h,
    )


@dataclass
class HJResidual:
    """One Hamilton-Jacobi residual sample: forward time difference plus the
    squared neighbor slope term.  A nonpositive value certifies the
    subsolution inequality at this grid node."""

    residual: float
    forward_difference: float
    slope: float
    slope_by_radius: dict[float, float]
    n_neighbors: int
    radius: float
    h: float
    no_neighbors: bool


def _positive_quotient(num: float, den: float) -> float | None:
    if num <= 0.0:
        return 0.0
    if den == 0.0:
        return math.inf
    return num / den


def _neighbor_slope(u: Array, y: int, denominators: Array, base_dist: Array, radius: float) -> tuple[float, int]:
    neighbors = np.nonzero((base_dist > 0) & (base_dist <= radius))[0]
    slope = 0.0
    for p in neighbors:
        q = _positive_quotient(u[y] - u[p], denominators[p])
        if q is not None:
            slope = max(slope, q)
    return slope, int(neighbors.size)


def _hj_core(
    section: Section,
    y: int,
    t: float,
    h: float | None,
    radius: float,
    denominators: Array,
    prefactor: float,
    tau_tie: float,
) -> HJResidual:
    L = model_quadratic()
    if h is None:
        h = FD_STEP_SCALE * t
    if not (0 < h < t):
        raise PreconditionError("need 0 < h < t for the forward difference")
    u_t, _ = evolve_all_cached(section, L, t, tau_tie)
    u_th, _ = evolve_all_cached(section, L, t + h, tau_tie)
    fd = (u_th[y] - u_t[y]) / h
    base_dist = section.space.base_distance_matrix()[:, y]
    slope, n_neighbors = _neighbor_slope(u_t, y, denominators, base_dist, radius)
    by_radius = {}
    for r in (radius, radius / 2.0, radius / 4.0):
        s, _ = _neighbor_slope(u_t, y, denominators, base_dist, r)
        by_radius[float(r)] = s
    return HJResidual(
        residual=fd + prefactor * slope * slope,
        forward_difference=fd,
        slope=slope,
        slope_by_radius=by_radius,
        n_neighbors=n_neighbors,
        radius=radius,
        h=h,
        no_neighbors=n_neighbors == 0,
    )


# per-section memo for repeated whole-grid evolutions; the model penalty is a
# fixed function, so (t, tau_tie) identifies the result
def evolve_all_cached(section: Section, L: Lagrangian, t: float, tau_tie: float):
    if not L.is_model_quadratic:
        return evolve_all(section, L, t, tau_tie)
    cache = section.__dict__.setdefault("_evolve_cache", {})
    key = (float(t), float(tau_tie))
    if key not in cache:
        cache[key] = evolve_all(section, L, t, tau_tie)
    return cache[key]


def hj_residual(
    section: Section,
    y: int,
    t: float,
    radius: float,
    h: float | None = None,
    tau_tie: float = DEFAULT_TAU_TIE,
) -> HJResidual:
    """Residual of  d+/dt u(y,t) + 2 * (sup nearby slope)^2 <= 0  where the
    slope quotient divides by the distance between section values."""
    E = section.value_distances()
    return _hj_core(section, y, t, h, radius, E[:, y], 2.0, tau_tie)


def hj_residual_lipschitz(
    section: Section,
    y: int,
    t: float,
    radius: float,
    h: float | None = None,
    tau_tie: float = DEFAULT_TAU_TIE,
) -> HJResidual:
    """Variant with fiber-distance denominators and the 2 / ILS^2 prefactor.

    Requires a finite global intrinsic Lipschitz estimate; refused otherwise.
    """
    ils = global_ILS(section)
    if not math.isfinite(ils) or ils == 0.0:
        raise PreconditionError("hj_residual_lipschitz needs a finite nonzero ILS estimate")
    D = section.fiber_distances()
    return _hj_core(section, y, t, h, radius, D[:, y], 2.0 / (ils * ils), tau_tie)


@dataclass
class Eq314Report:
    """Pair scan of the finite slope estimate
    u(z,t) - u(y,t) <= (d(f(z),f(y)) / 2t) * (D-(y,t) + d(f(z), fiber(y)))."""

    t: float
    worst_slack: float
    worst_pair: tuple[int, int]
    violations: list[tuple[int, int, float]]


def slope_estimate_check(
    section: Section,
    t: float,
    tau_tie: float = DEFAULT_TAU_TIE,
    tol: float = 1e-9,
) -> Eq314Report:
    L = model_quadratic()
    u, argmins = evolve_all_cached(section, L, t, tau_tie)
    D = section.fiber_distances()
    E = section.value_distances()
    iDm = np.array([D[y, list(a)].min() for y, a in enumerate(argmins)])
    # slack[z, y] = u(z) - u(y) - (E[z,y]/2t) (iDm[y] + D[z, y])
    slack = u[:, None] - u[None, :] - (E / (2.0 * t)) * (iDm[None, :] + D)
    np.fill_diagonal(slack, -np.inf)
    pos = np.unravel_index(int(np.argmax(slack)), slack.shape)
    worst = float(slack[pos])
    violations = [
        (int(z), int(y), float(slack[z, y]))
        for z, y in np.argwhere(slack > tol)
    ]
    violations.sort()
    return Eq314Report(t=float(t), worst_slack=worst, worst_pair=(int(pos[0]), int(pos[1])), violations=violations)


@dataclass
class QuasiMinimizerTrace:
    """Fiber distances along the shrinking-time schedule t_n = scale * 2^-n.

    `argmin_dist[n]` uses the tie-tolerance argmin set; `quasi_dist[n]` allows
    the 1/n slack of a quasi-minimizing sequence and `quasi_bound[n]` is the
    a-priori bound 2 t_n (2 ||f||_inf + 1/n) on its squared distance.
    """

    times: Array
    argmin_dist: Array
    quasi_dist: Array
    quasi_bound: Array


def quasi_minimizer_trace(
    section: Section,
    y: int,
    levels: int = 20,
    tau_tie: float = DEFAULT_TAU_TIE,
) -> QuasiMinimizerTrace:
    L = model_quadratic()
    scale = max(1.0, section.sup_norm())
    D = section.fiber_distances()
    g = g_field(section)
    times, a_dist, q_dist, q_bound = [], [], [], []
    for n in range(levels + 1):
        t_n = scale * 2.0 ** (-n)
        branches = t_n * L(D[y] / t_n) + g
        u = float(branches.min())
        tie = np.nonzero(branches <= u + tau_tie)[0]
        slack = 1.0 / max(n, 1)
        quasi = np.nonzero(branches <= u + slack)[0]
        times.append(t_n)
        a_dist.append(float(D[y, tie].max()))
        q_dist.append(float(D[y, quasi].max()))
        q_bound.append(2.0 * t_n * (2.0 * section.sup_norm() + slack))
    return QuasiMinimizerTrace(
        times=np.array(times),
        argmin_dist=np.array(a_dist),
        quasi_dist=np.array(q_dist),
        quasi_bound=np.array(q_bound),
    )


@dataclass
class SuiteItem:
    key: str
    status: str  # PASS / FAIL / SKIPPED
    worst_slack: float | None
    location: str | None
    note: str | None = None


@dataclass
class SuiteReport:
    items: list[SuiteItem]
    axiom_report: AxiomReport

    @property
    def passed(self) -> bool:
        return all(item.status != "FAIL" for item in self.items)

    def item(self, key: str) -> SuiteItem:
        for it in self.items:
            if it.key == key:
                return it
        raise KeyError(key)


@dataclass
class _Tables:
    times: Array
    u: Array  # (T, m)
    argmins: list[list[tuple[int, ...]]]
    iDm: Array
    iDp: Array


def _build_tables(section: Section, L: Lagrangian, times: Array, tau_tie: float) -> _Tables:
    D = section.fiber_distances()
    u_rows, argmin_rows, iDm_rows, iDp_rows = [], [], [], []
    for t in times:
        u, argmins = evolve_all_cached(section, L, float(t), tau_tie)
        u_rows.append(u)
        argmin_rows.append(argmins)
        iDm_rows.append([D[y, list(a)].min() for y, a in enumerate(argmins)])
        iDp_rows.append([D[y, list(a)].max() for y, a in enumerate(argmins)])
    return _Tables(
        times=times,
        u=np.array(u_rows),
        argmins=argmin_rows,
        iDm=np.array(iDm_rows),
        iDp=np.array(iDp_rows),
    )


def proposition_suite(
    section: Section,
    L: Lagrangian,
    times,
    tau_tie: float = DEFAULT_TAU_TIE,
    tol: float = 1e-9,
    xi_resolution: int = 101,
    quasi_levels: int = 20,
    labels: list[str] | None = None,
) -> SuiteReport:
    """Run the full battery of evolution properties and report per-item verdicts.

    Items whose hypotheses fail (penalty axioms, finite ILS) are SKIPPED, not
    failed.  Items tied to the quadratic-penalty theory (quasi-minimizers,
    D+- monotonicity and bounds, the time-Lipschitz estimate) always evaluate
    the model evolution, whatever `L` is.
    """
    times = np.sort(np.asarray(times, dtype=float))
    if times.size == 0 or np.any(times <= 0):
        raise PreconditionError("times must be nonempty and positive")
    lab = labels if labels is not None else [str(i) for i in range(section.n_base)]

    g = g_field(section)
    E = section.value_distances()
    K = bound_K(section)
    ils = global_ILS(section)
    axioms = check_axioms(L, section, times)

    scen = _build_tables(section, L, times, tau_tie)
    model = scen if L.is_model_quadratic else _build_tables(section, model_quadratic(), times, tau_tie)

    items: list[SuiteItem] = []

    def record(key: str, slack: float, loc: str, note: str | None = None, bound: float = tol):
        if slack == -math.inf:  # nothing to compare (e.g. a single grid time)
            items.append(SuiteItem(key=key, status="PASS", worst_slack=None, location=None, note="no comparable grid pairs"))
            return
        status = "PASS" if slack <= bound else "FAIL"
        items.append(SuiteItem(key=key, status=status, worst_slack=slack, location=loc, note=note))

    def skip(key: str, why: str):
        items.append(SuiteItem(key=key, status="SKIPPED", worst_slack=None, location=None, note=why))

    def argmax_loc(arr: Array) -> str:
        ti, yi = np.unravel_index(int(np.argmax(arr)), arr.shape)
        return f"y={lab[yi]},t={times[ti]:g}"

    # (a) pointwise bounds: min of all coordinates <= u <= g + t L(0)
    L0 = float(L(0.0))
    nonneg = float(np.min(L(L.cert_grid))) >= -1e-12
    if not nonneg:
        skip("a_bounds", "penalty takes negative values; the lower bound does not apply")
    else:
        lower = float(section.values.min())
        slack_low = lower - scen.u
        slack_high = scen.u - (g[None, :] + times[:, None] * L0)
        both = np.maximum(slack_low, slack_high)
        record("a_bounds", float(both.max()), argmax_loc(both))

    # (b) quasi-minimizing sequences collapse onto the fiber of y as t -> 0
    worst_final = -math.inf
    worst_bound = -math.inf
    loc_final = ""
    for y in range(section.n_base):
        trace = quasi_minimizer_trace(section, y, levels=quasi_levels, tau_tie=tau_tie)
        final = float(trace.argmin_dist[-1])
        if final > worst_final:
            worst_final, loc_final = final, f"y={lab[y]},t={trace.times[-1]:g}"
        worst_bound = max(worst_bound, float((trace.quasi_dist**2 - trace.quasi_bound).max()))
    record(
        "b_quasi_minimizer",
        max(worst_final - 1e-6, worst_bound),
        loc_final,
        note=f"final argmin fiber distance {worst_final:.3e}",
    )

    # (c) spatial estimate |u(x,t) - u(y,t)| <= 2 K sqrt(L(d(f(x),f(y))/t))
    if not axioms.passed:
        skip("c_spatial_estimate", "penalty axioms failed on this scenario")
    else:
        worst, loc = -math.inf, ""
        for ti, t in enumerate(times):
            rhs = 2.0 * K * np.sqrt(np.maximum(L(E / t), 0.0))
            gap = np.abs(scen.u[ti][:, None] - scen.u[ti][None, :]) - rhs
            w = float(gap.max())
            if w > worst:
                xi, yi = np.unravel_index(int(np.argmax(gap)), gap.shape)
                worst, loc = w, f"x={lab[xi]},y={lab[yi]},t={t:g}"
        record("c_spatial_estimate", worst, loc)

    # (d) cross-time estimate u(y,t) <= 2 K sqrt(L(d/t)) + u(x,s) for s < t
    if not axioms.passed:
        skip("d_cross_time_estimate", "penalty axioms failed on this scenario")
    else:
        worst, loc = -math.inf, ""
        for si in range(times.size):
            for ti in range(si + 1, times.size):
                t = times[ti]
                rhs = 2.0 * K * np.sqrt(np.maximum(L(E / t), 0.0))
                gap = scen.u[ti][None, :] - (rhs + scen.u[si][:, None])
                w = float(gap.max())
                if w > worst:
                    xi, yi = np.unravel_index(int(np.argmax(gap)), gap.shape)
                    worst, loc = w, f"x={lab[xi]},y={lab[yi]},s={times[si]:g},t={t:g}"
        record("d_cross_time_estimate", worst, loc)

    # (e) boundary behavior |u - g| <= C t with C = max(|L(0)|, max |H|)
    if not math.isfinite(ils):
        skip("e_boundary_rate", "global ILS estimate is infinite")
    else:
        worst, loc = -math.inf, ""
        for ti, t in enumerate(times):
            for y in range(section.n_base):
                table = legendre_transform(L, section, y, float(t), xi_resolution=xi_resolution)
                C = max(abs(L0), float(np.abs(table.lstar).max()))
                gap = abs(scen.u[ti, y] - g[y]) - C * t
                if gap > worst:
                    worst, loc = float(gap), f"y={lab[y]},t={t:g}"
        record("e_boundary_rate", worst, loc)

    # (f) u(y, .) nonincreasing in t
    worst, loc = -math.inf, ""
    for si in range(times.size):
        for ti in range(si + 1, times.size):
            gap = scen.u[ti] - scen.u[si]
            w = float(gap.max())
            if w > worst:
                worst, loc = w, f"y={lab[int(np.argmax(gap))]},s={times[si]:g},t={times[ti]:g}"
    record("f_time_monotone", worst, loc)

    # (g) D+(y,t) <= D-(y,s) for t < s (quadratic model)
    worst, loc = -math.inf, ""
    for ti in range(times.size):
        for si in range(ti + 1, times.size):
            gap = model.iDp[ti] - model.iDm[si] - tau_tie
            w = float(gap.max())
            if w > worst:
                worst, loc = w, f"y={lab[int(np.argmax(gap))]},t={times[ti]:g},s={times[si]:g}"
    record("g_speed_monotone", worst, loc)

    # (h) 2 t ILS >= D+(y,t) for intrinsically Lipschitz sections
    if not math.isfinite(ils):
        skip("h_speed_bound", "global ILS estimate is infinite")
    else:
        gap = model.iDp - 2.0 * times[:, None] * ils
        record("h_speed_bound", float(gap.max()), argmax_loc(gap))

    # (i) global time-Lipschitz bound |u(t) - u(s)| <= K^2 (s - t) / (2 t s)
    worst, loc = -math.inf, ""
    for ti in range(times.size):
        for si in range(ti + 1, times.size):
            t, s = times[ti], times[si]
            gap = np.abs(model.u[ti] - model.u[si]) - K * K * (s - t) / (2.0 * t * s)
            w = float(gap.max())
            if w > worst:
                worst, loc = w, f"y={lab[int(np.argmax(gap))]},t={t:g},s={s:g}"
    record("i_time_lipschitz", worst, loc)

    return SuiteReport(items=items, axiom_report=axioms)


@dataclass
class EvolutionTable:
    """Values, argmin sets, extremal speeds and HJ residuals over (y, t)."""

    times: Array
    u: Array  # (T, m)
    argmins: list[list[tuple[int, ...]]]
    iD_minus: Array
    iD_plus: Array
    hj_residual: Array
    hj_no_neighbors: np.ndarray
    tau_tie: float
    hj_radius: float | None


def evolution_table(
    section: Section,
    L: Lagrangian,
    times,
    tau_tie: float = DEFAULT_TAU_TIE,
    hj_radius: float | None = None,
    hj_h: float | None = None,
) -> EvolutionTable:
    times = np.asarray(times, dtype=float)
    tables = _build_tables(section, L, times, tau_tie)
    m = section.n_base
    resid = np.full((times.size, m), np.nan)
    flags = np.zeros((times.size, m), dtype=bool)
    if hj_radius is not None and L.is_model_quadratic:
        for ti, t in enumerate(times):
            for y in range(m):
                r = hj_residual(section, y, float(t), radius=hj_radius, h=hj_h, tau_tie=tau_tie)
                resid[ti, y] = r.residual
                flags[ti, y] = r.no_neighbors
    if not (np.all(np.isfinite(tables.u))):
        raise PreconditionError("evolution produced non-finite values; input data must be bounded")
    return EvolutionTable(
        times=times,
        u=tables.u,
        argmins=tables.argmins,
        iD_minus=tables.iDm,
        iD_plus=tables.iDp,
        hj_residual=resid,
        hj_no_neighbors=flags,
        tau_tie=tau_tie,
        hj_radius=hj_radius,
    )


def semicontinuity_probe(
    section: Section,
    y: int,
    t: float,
    n_neighbors: int = 3,
    time_factor: float = 0.05,
    tau_tie: float = DEFAULT_TAU_TIE,
) -> list[dict]:
    """Diagnostic table of D+- at base points near y and times near t.

    Emits raw values only; the semicontinuity statement is a limit property
    and gets no pass/fail verdict here.
    """
    L = model_quadratic()
    base_dist = section.space.base_distance_matrix()[:, y]
    order = np.argsort(base_dist)
    rows = []
    for idx in order[: n_neighbors + 1]:
        for t_n in (t * (1 - time_factor), t, t * (1 + time_factor)):
            dm, dp = discrete_D(section, L, int(idx), float(t_n), tau_tie)
            rows.append(
                {
                    "y_index": int(idx),
                    "base_distance": float(base_dist[idx]),
                    "t": float(t_n),
                    "iD_minus": dm,
                    "iD_plus": dp,
                }
            )
    return rows


def differentiability_probe(
    section: Section,
    y: int,
    t: float,
    tau_tie: float = DEFAULT_TAU_TIE,
) -> list[dict]:
    """Diagnostic difference quotients of u against the (2K/t)-scaled section
    quotients, following the smooth-case comparison.  No verdict."""
    L = model_quadratic()
    u, _ = evolve_all_cached(section, L, float(t), tau_tie)
    E = section.value_distances()
    K = bound_K(section)
    base_dist = section.space.base_distance_matrix()[:, y]
    rows = []
    for z in range(section.n_base):
        if z == y or base_dist[z] == 0.0:
            continue
        rows.append(
            {
                "z_index": int(z),
                "base_distance": float(base_dist[z]),
                "u_quotient": float((u[y] - u[z]) / base_dist[z]),
                "bound": float((2.0 * K / t) * E[y, z] / base_dist[z]),
            }
        )
    rows.sort(key=lambda r: r["base_distance"])
    return rows
