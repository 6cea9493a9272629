"""Orchestration of the full verification run behind the `check` command.

Collects machine-readable verdicts, writes the report bundle, and decides the
exit status: zero exactly when no non-skipped verdict failed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import PreconditionError
from .lagrangian import check_axioms
from .reports import (
    ReportBundle,
    write_asymmetry_csv,
    write_evolution_csv,
    write_slopes_csv,
    write_transform_csv,
    write_verdicts_json,
)
from .scenario import Scenario
from .section import asymmetry_probe, global_ILS, g_field, local_slopes, validate_section
from .geometry import validate_space
from .lagrangian import legendre_transform
from .semigroup import (
    evolution_table,
    hj_residual,
    hj_residual_lipschitz,
    proposition_suite,
    slope_estimate_check,
)

HJ_TOLERANCE = 1e-6
SLACK_TOLERANCE = 1e-9


@dataclass
class Verdict:
    check: str
    status: str  # PASS / FAIL / SKIPPED
    worst_slack: float | None
    location: str | None
    note: str | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        slack = d["worst_slack"]
        if slack is not None:
            # keep the verdict file strict JSON even for non-finite slacks
            d["worst_slack"] = float(slack) if math.isfinite(slack) else repr(float(slack))
        return d


def _verdict_from_slack(name: str, slack: float, tol: float, location: str | None, note: str | None = None) -> Verdict:
    status = "PASS" if slack <= tol else "FAIL"
    return Verdict(check=name, status=status, worst_slack=float(slack), location=location, note=note)


def run_check(scenario: Scenario, outdir) -> tuple[ReportBundle, list[Verdict], int]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    prefix = scenario.name.replace(" ", "-")
    section = scenario.section()
    L = scenario.lagrangian()
    grids = scenario.grids
    verdicts: list[Verdict] = []

    # geometry and section validity
    space_report = validate_space(scenario.space(), tau_geo=grids.tau_geo)
    verdicts.append(
        Verdict(
            check="geometry",
            status="PASS" if space_report.ok else "FAIL",
            worst_slack=None,
            location=None,
            note=f"{len(space_report.overlaps)} overlaps, {len(space_report.empty_fibers)} empty fibers",
        )
    )
    sec_report = validate_section(section, tau_sec=grids.tau_sec)
    worst_res = float(sec_report.residuals.max())
    verdicts.append(
        _verdict_from_slack("section", worst_res - grids.tau_sec, 0.0, None, note=f"max residual {worst_res:.3e}")
    )

    # penalty axioms
    axioms = check_axioms(L, section, grids.times)
    verdicts.append(
        _verdict_from_slack("axiom_convexity", axioms.convexity_worst, axioms.convexity_tol, None)
    )
    loc = None
    if axioms.compatibility_witness is not None:
        x, y, z, t = axioms.compatibility_witness
        loc = f"x={scenario.base_ids[x]},y={scenario.base_ids[y]},z={scenario.base_ids[z]},t={t:g}"
    verdicts.append(
        _verdict_from_slack("axiom_compatibility", axioms.compatibility_worst, axioms.compatibility_tol, loc)
    )
    verdicts.append(
        _verdict_from_slack("axiom_time_scaling", axioms.scaling_worst, axioms.scaling_tol, None)
    )

    # asymmetry probe (needs at least three base points)
    probe = None
    if scenario.n_base >= 3:
        probe = asymmetry_probe(section)
        x, y, z = probe.first_form_argmax
        verdicts.append(
            _verdict_from_slack(
                "asymmetry_first_form",
                probe.first_form_worst,
                SLACK_TOLERANCE,
                f"x={scenario.base_ids[x]},y={scenario.base_ids[y]},z={scenario.base_ids[z]}",
                note=f"{len(probe.violations)} reverse-form violations recorded",
            )
        )
    else:
        verdicts.append(
            Verdict("asymmetry_first_form", "SKIPPED", None, None, note="fewer than 3 base points")
        )

    # pinned reference triple, when the scenario carries one
    if scenario.reference_triple is not None and probe is not None:
        ref = scenario.reference_triple
        xi, yi, zi = (scenario.id_index(ref[k]) for k in ("x", "y", "z"))
        D = section.fiber_distances()
        E = section.value_distances()
        lhs = float(D[xi, yi] - D[xi, zi])
        rhs = float(E[yi, zi])
        stated = float(ref.get("stated_constant", math.nan))
        note = (
            f"gap={lhs!r} vs bound={rhs!r}; stated constant {stated!r}, "
            f"|gap-stated|={abs(lhs - stated):.6e}"
            + ("" if abs(lhs - stated) <= 1e-9 else " (discrepancy flagged)")
        )
        verdicts.append(
            _verdict_from_slack(
                "reference_triple_violation",
                rhs - lhs,  # the reverse-form bound must be strictly exceeded
                -SLACK_TOLERANCE,
                f"x={ref['x']},y={ref['y']},z={ref['z']}",
                note=note,
            )
        )

    # evolution table and its invariants
    table = evolution_table(
        section,
        L,
        grids.times,
        tau_tie=grids.tau_tie,
        hj_radius=grids.hj_radius,
    )
    g = g_field(section)
    L0 = float(L(0.0))
    upper = table.u - (g[None, :] + np.asarray(grids.times)[:, None] * L0)
    order = table.iD_minus - table.iD_plus
    inv_slack = max(float(upper.max()), float(order.max()))
    verdicts.append(
        _verdict_from_slack(
            "evolution_invariants",
            inv_slack,
            SLACK_TOLERANCE,
            None,
            note="u <= g + t L(0) and iD- <= iD+ over the grid",
        )
    )

    # proposition suite
    suite = proposition_suite(
        section,
        L,
        grids.times,
        tau_tie=grids.tau_tie,
        xi_resolution=grids.xi_resolution,
        labels=scenario.base_ids,
    )
    for item in suite.items:
        verdicts.append(
            Verdict(
                check=f"suite_{item.key}",
                status=item.status,
                worst_slack=item.worst_slack,
                location=item.location,
                note=item.note,
            )
        )

    # finite pair scan of the slope estimate, every grid time
    worst_314 = -math.inf
    loc_314 = None
    n_viol = 0
    for t in grids.times:
        rep = slope_estimate_check(section, float(t), tau_tie=grids.tau_tie)
        n_viol += len(rep.violations)
        if rep.worst_slack > worst_314:
            worst_314 = rep.worst_slack
            z, y = rep.worst_pair
            loc_314 = f"z={scenario.base_ids[z]},y={scenario.base_ids[y]},t={t:g}"
    verdicts.append(
        _verdict_from_slack(
            "pair_slope_estimate", worst_314, SLACK_TOLERANCE, loc_314, note=f"{n_viol} violating pairs"
        )
    )

    # Hamilton-Jacobi residual grids
    hj_ids = list(range(0, scenario.n_base, max(1, grids.hj_base_stride)))
    hj_times = grids.effective_hj_times()
    radius = grids.hj_radius if grids.hj_radius is not None else max(grids.radii)
    worst_hj, loc_hj, flagged = -math.inf, None, 0
    for t in hj_times:
        for yi in hj_ids:
            r = hj_residual(section, yi, float(t), radius=radius, tau_tie=grids.tau_tie)
            flagged += int(r.no_neighbors)
            if r.residual > worst_hj:
                worst_hj, loc_hj = r.residual, f"y={scenario.base_ids[yi]},t={t:g}"
    verdicts.append(
        _verdict_from_slack(
            "hj_residual_grid", worst_hj, HJ_TOLERANCE, loc_hj, note=f"{flagged} nodes had no neighbors in radius"
        )
    )
    ils = global_ILS(section)
    if math.isfinite(ils) and ils > 0:
        worst_hl, loc_hl = -math.inf, None
        for t in hj_times:
            for yi in hj_ids:
                r = hj_residual_lipschitz(section, yi, float(t), radius=radius, tau_tie=grids.tau_tie)
                if r.residual > worst_hl:
                    worst_hl, loc_hl = r.residual, f"y={scenario.base_ids[yi]},t={t:g}"
        verdicts.append(_verdict_from_slack("hj_residual_lipschitz_grid", worst_hl, HJ_TOLERANCE, loc_hl))
    else:
        verdicts.append(
            Verdict("hj_residual_lipschitz_grid", "SKIPPED", None, None, note="ILS estimate not finite")
        )

    # reports
    slopes = local_slopes(section, grids.radii)
    transforms = []
    for yi in hj_ids:
        for t in grids.times:
            try:
                transforms.append(legendre_transform(L, section, yi, float(t), xi_resolution=grids.xi_resolution))
            except PreconditionError:
                break
    bundle = ReportBundle(
        evolution_csv=write_evolution_csv(outdir / f"{prefix}_evolution.csv", scenario, table),
        slopes_csv=write_slopes_csv(outdir / f"{prefix}_slopes.csv", scenario, slopes),
        transform_csv=write_transform_csv(outdir / f"{prefix}_transform.csv", scenario, transforms),
        verdicts_json=write_verdicts_json(outdir / f"{prefix}_verdicts.json", [v.to_dict() for v in verdicts]),
        asymmetry_csv=write_asymmetry_csv(outdir / f"{prefix}_asymmetry.csv", scenario, probe),
    )
    exit_code = 0 if all(v.status != "FAIL" for v in verdicts) else 1
    return bundle, verdicts, exit_code
