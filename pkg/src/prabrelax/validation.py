"""Property-grade diagnostics: complete monotonicity and cross-method agreement."""

from __future__ import annotations

import math

import numpy as np

from . import laplace, relaxation
from .report import Check, DiagnosticsReport
from .relaxation import Curve, RelaxationModel
from .special import NonConvergence

__all__ = ["complete_monotonicity_check", "cross_validate"]


def complete_monotonicity_check(c: Curve, max_order: int = 4) -> DiagnosticsReport:
    """Divided-difference sign test: (-1)^n f[t_i..t_{i+n}] >= -eps_n up to max_order.

    eps_n is a noise floor built from the curve's own error estimates and
    the local grid gaps (divided differences amplify point noise by the
    inverse gap to the n-th power); sampled curves cannot certify signs
    below that floor.  The first violating window, if any, is reported.
    """
    if not (1 <= max_order <= 6):
        raise ValueError("max_order must be in [1, 6]")
    t, f = c.grid, c.values
    if len(t) < max_order + 8:
        raise ValueError(f"need at least max_order+8={max_order + 8} grid points, got {len(t)}")
    max_err = float(np.max(c.error_estimates)) if len(c.error_estimates) else 0.0
    max_err = max(max_err, 1e-15 * float(np.max(np.abs(f))))

    checks = []
    dd = f.copy()
    for n in range(1, max_order + 1):
        dd = (dd[1:] - dd[:-1]) / (t[n:] - t[:-n])
        signed = (-1.0) ** n * dd
        # local noise floor: 2^n * max point error / (smallest gap in the window)^n
        gaps = t[1:] - t[:-1]
        wmin = np.array([gaps[i : i + n].min() for i in range(len(dd))])
        eps_n = (2.0**n) * max_err / wmin**n
        viol = signed < -eps_n
        first = int(np.argmax(viol)) if viol.any() else None
        checks.append(
            Check(
                name=f"order-{n} alternating sign",
                passed=not viol.any(),
                evidence={
                    "violations": int(viol.sum()),
                    "min_signed": float(np.min(signed)),
                    "noise_floor_at_min": float(eps_n[int(np.argmin(signed))]),
                    **({"first_violation_t": float(t[first])} if first is not None else {}),
                },
            )
        )
    return DiagnosticsReport(title=f"complete monotonicity to order {max_order}", checks=tuple(checks))


def cross_validate(m: RelaxationModel, grid: np.ndarray, tol: float = 1e-6) -> DiagnosticsReport:
    """Pairwise agreement matrix among all applicable methods on the grid.

    Methods: the two series and certified inversion for Prabhakar kernels,
    plus the closed form when gamma = 1 and beta = 1 - alpha; the Debye
    exponential and inversion in Debye mode.  A pair agrees at a point when
    |a - b| <= max(tol, err_a + err_b).  The complementarity verdict asks
    that every point be covered by at least one series agreeing with
    inversion.
    """
    grid = np.asarray(grid, dtype=float)
    values: dict[str, list] = {}
    errors: dict[str, list] = {}

    def put(name, i, v, e):
        values.setdefault(name, [None] * len(grid))[i] = v
        errors.setdefault(name, [None] * len(grid))[i] = e

    H = laplace.solution_transform(m)
    for i, t in enumerate(grid):
        ov, oe = laplace.certified_invert(H, float(t))
        put("inversion", i, ov, oe)

    if m.kind == "debye":
        for i, t in enumerate(grid):
            v = relaxation.solve_debye(m.Lambda, m.B, float(t))
            put("debye", i, v, 4e-16 * abs(v))
        series_methods: list[str] = []
        closed_name = "debye"
    else:
        for i, t in enumerate(grid):
            try:
                se = relaxation.solve_series_small_regime(m, float(t))
                put("series-small", i, se.value, se.error_estimate)
            except (NonConvergence, relaxation.AsymptoticBreakdown):
                put("series-small", i, None, None)
            try:
                se = relaxation.solve_series_large_regime(m, float(t))
                put("series-large", i, se.value, se.error_estimate)
            except (NonConvergence, relaxation.AsymptoticBreakdown):
                put("series-large", i, None, None)
        series_methods = ["series-small", "series-large"]
        closed_name = None
        if m.is_closed_gamma1:
            closed_name = "closed-gamma1"
            for i, t in enumerate(grid):
                v, e = relaxation._closed_gamma1_with_err(m, float(t))
                put(closed_name, i, v, e)

    def agree(a: str, b: str, i: int) -> bool | None:
        va, vb = values[a][i], values[b][i]
        if va is None or vb is None:
            return None
        return abs(va - vb) <= max(tol, errors[a][i] + errors[b][i])

    names = list(values.keys())
    checks = []
    for j, a in enumerate(names):
        for b in names[j + 1 :]:
            oks = [agree(a, b, i) for i in range(len(grid))]
            applicable = [o for o in oks if o is not None]
            n_bad = sum(1 for o in applicable if not o)
            checks.append(
                Check(
                    name=f"{a} vs {b}",
                    passed=n_bad == 0,
                    tolerance=tol,
                    evidence={
                        "points_compared": len(applicable),
                        "disagreements": n_bad,
                        "max_abs_diff": max(
                            (abs(values[a][i] - values[b][i]) for i in range(len(grid))
                             if values[a][i] is not None and values[b][i] is not None),
                            default=math.nan,
                        ),
                    },
                )
            )

    best: list[str] = []
    for i in range(len(grid)):
        cands = [
            (errors[n][i], n)
            for n in names
            if n != "inversion" and values[n][i] is not None and agree(n, "inversion", i)
        ]
        best.append(min(cands)[1] if cands else "inversion")

    if series_methods:
        covered = [
            any(agree(s, "inversion", i) for s in series_methods if values[s][i] is not None)
            for i in range(len(grid))
        ]
        checks.append(
            Check(
                name="complementarity: every point covered by a series agreeing with inversion",
                passed=all(covered),
                tolerance=tol,
                evidence={"uncovered_points": int(len(covered) - sum(covered))},
            )
        )

    # normalization: first sample against the short-time prediction
    if m.kind == "debye":
        pred = math.exp(-m.Lambda * grid[0] / m.B)
        first_err = 4e-16
    else:
        pred = float(relaxation._f_short_time(m, np.array([grid[0]]))[0])
        first_err = errors[closed_name or "inversion"][0] or 0.0
    first_name = closed_name or ("inversion" if m.kind != "debye" else "debye")
    fv = values[first_name][0]
    checks.append(
        Check(
            name="normalization: first point matches the short-time expansion",
            passed=abs(fv - pred) <= max(tol, 10.0 * (first_err + 1e-12)),
            tolerance=tol,
            evidence={"first_t": float(grid[0]), "value": fv, "short_time_prediction": pred},
        )
    )

    return DiagnosticsReport(
        title=f"cross-validation on {len(grid)} points",
        checks=tuple(checks),
        notes=(f"best method per point: {_tally(best)}",),
    )


def _tally(tags: list[str]) -> str:
    out = {}
    for tag in tags:
        out[tag] = out.get(tag, 0) + 1
    return ", ".join(f"{k}:{v}" for k, v in sorted(out.items()))
