"""Command-line interface.

Subcommands: ``eval`` (special functions), ``solve`` (relaxation curves as
CSV/JSON), ``verify`` (diagnostic report), ``sweep`` (regime-boundary scans).
Exit codes: 0 ok, 1 usage error, 2 non-convergence, 3 no method converged,
4 verification failure.  Numeric output uses 17 significant digits so that
emitted files round-trip doubles exactly.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys

import numpy as np

from . import laplace, relaxation, validation
from .relaxation import Curve, RelaxationModel
from .report import DiagnosticsReport, merge_reports
from .special import NonConvergence, PrabhakarParams, mittag_leffler_3p, prabhakar_kernel

CSV_HEADER = "t,f,method,error_estimate"


def g17(x: float) -> str:
    return f"{float(x):.17g}"


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_grid_args(p: argparse.ArgumentParser):
    p.add_argument("--t-min", type=float, default=None, help="grid start (default 1e-2 * t_char)")
    p.add_argument("--t-max", type=float, default=None, help="grid end (default 1e2 * t_char)")
    p.add_argument("--points", type=int, default=64, help="grid points (default 64)")
    p.add_argument("--spacing", choices=["geometric", "linear"], default="geometric")


def _add_model_args(p: argparse.ArgumentParser):
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="kernel rate (<= 0 in models)")
    p.add_argument("--M", type=float, default=None, help="relaxation strength (direct form)")
    p.add_argument("--tau", type=float, default=None, help="effective relaxation time (tau form)")
    p.add_argument("--b", type=float, default=None, help="rate constant (tau form)")
    p.add_argument("--debye", action="store_true", help="constant-kernel (Debye) mode")
    p.add_argument("--Lambda", type=float, default=None, help="Debye strength")
    p.add_argument("--B", type=float, default=None, help="Debye kernel constant")


def build_parser() -> _Parser:
    top = _Parser(prog="prabrelax", description=__doc__.split("\n", 1)[0])
    sub = top.add_subparsers(dest="command", required=True)

    pe = sub.add_parser("eval", parents=[], help="evaluate special functions", add_help=True)
    pe_sub = pe.add_subparsers(dest="what", required=True)
    pml = pe_sub.add_parser("ml3", help="three-parameter Mittag-Leffler E^gamma_{alpha,beta}(x)")
    pml.add_argument("--alpha", type=float, required=True)
    pml.add_argument("--beta", type=float, required=True)
    pml.add_argument("--gamma", type=float, required=True)
    pml.add_argument("--x", type=float, required=True)
    pml.add_argument("--tol", type=float, default=1e-12)
    pml.add_argument("--config", type=str, default=None)
    pml.set_defaults(func=cmd_eval_ml3)
    pk = pe_sub.add_parser("kernel", help="Prabhakar kernel t^(beta-1) E^gamma_{alpha,beta}(lambda t^alpha)")
    pk.add_argument("--alpha", type=float, required=True)
    pk.add_argument("--beta", type=float, required=True)
    pk.add_argument("--gamma", type=float, required=True)
    pk.add_argument("--lambda", dest="lam", type=float, required=True)
    pk.add_argument("--t", type=float, required=True)
    pk.add_argument("--tol", type=float, default=1e-12)
    pk.add_argument("--config", type=str, default=None)
    pk.set_defaults(func=cmd_eval_kernel)

    ps = sub.add_parser("solve", help="solve a relaxation model on a time grid")
    _add_model_args(ps)
    _add_grid_args(ps)
    ps.add_argument("--tol", type=float, default=1e-9)
    ps.add_argument("--format", choices=["csv", "json"], default="csv")
    ps.add_argument("--output", type=str, default=None, help="output path (default stdout)")
    ps.add_argument("--plot", type=str, default=None, help="also render the curve to this image file")
    ps.add_argument("--config", type=str, default=None, help="flat key=value file mirroring the flags")
    ps.set_defaults(func=cmd_solve)

    pv = sub.add_parser("verify", help="run diagnostic checks on a model or an emitted curve")
    _add_model_args(pv)
    _add_grid_args(pv)
    pv.add_argument("--curve", type=str, default=None, help="previously emitted curve file (.json or .csv)")
    pv.add_argument("--checks", type=str, default=None,
                    help="comma list among kochubei,cross,monotonicity,residual (default: all applicable)")
    pv.add_argument("--tol", type=float, default=1e-6)
    pv.add_argument("--format", choices=["text", "json"], default="text")
    pv.add_argument("--output", type=str, default=None)
    pv.add_argument("--plot", type=str, default=None)
    pv.add_argument("--config", type=str, default=None)
    pv.set_defaults(func=cmd_verify)

    pw = sub.add_parser("sweep", help="sweep a parameter; emit tau* and series coverage")
    pw.add_argument("--var", choices=["alpha", "tau", "b"], required=True)
    pw.add_argument("--start", type=float, required=True)
    pw.add_argument("--stop", type=float, required=True)
    pw.add_argument("--steps", type=int, required=True)
    pw.add_argument("--alpha", type=float, default=None)
    pw.add_argument("--tau", type=float, default=None, help="fixed tau (default: tau* of each point)")
    pw.add_argument("--b", type=float, default=1.0)
    pw.add_argument("--points", type=int, default=33, help="grid points per coverage run")
    pw.add_argument("--output", type=str, default=None)
    pw.add_argument("--plot", type=str, default=None)
    pw.add_argument("--config", type=str, default=None)
    pw.set_defaults(func=cmd_sweep)
    return top


# ---------------------------------------------------------------------------
# config files: flat key=value, flags win on conflict
# ---------------------------------------------------------------------------

def _inject_config(argv: list[str]) -> list[str]:
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        return argv
    path = argv[i + 1]
    tokens: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"config line without '=': {line!r}")
            key, _, val = line.partition("=")
            key = key.strip().replace("_", "-")
            val = val.strip()
            if val.lower() in ("true", "false"):  # boolean flags
                if val.lower() == "true":
                    tokens.append(f"--{key}")
            else:
                tokens += [f"--{key}", val]
    # insert right after the subcommand words so explicit flags parse later and win
    head = 0
    while head < len(argv) and not argv[head].startswith("-"):
        head += 1
    return argv[:head] + tokens + argv[head:]


# ---------------------------------------------------------------------------
# model/grid construction from flags
# ---------------------------------------------------------------------------

def _model_from_args(ns) -> RelaxationModel:
    forms = [ns.debye, ns.tau is not None, ns.M is not None]
    if sum(bool(f) for f in forms) > 1:
        raise ValueError("parameter forms are mutually exclusive: pick one of --debye / --tau / --M")
    if ns.debye:
        if ns.Lambda is None or ns.B is None:
            raise ValueError("--debye requires --Lambda and --B")
        return RelaxationModel.debye(ns.Lambda, ns.B)
    if ns.tau is not None:
        if ns.alpha is None or ns.b is None:
            raise ValueError("tau form requires --alpha and --b")
        return RelaxationModel.from_tau(ns.alpha, ns.tau, ns.b)
    if ns.M is not None:
        if ns.alpha is None or ns.beta is None or ns.gamma is None:
            raise ValueError("direct form requires --alpha, --beta, --gamma (and optional --lambda)")
        params = PrabhakarParams(ns.alpha, ns.beta, ns.gamma, 0.0 if ns.lam is None else ns.lam)
        return RelaxationModel.direct(params, ns.M)
    raise ValueError("no model given: use --tau/--b, --M, or --debye")


def _grid_from_args(ns, m: RelaxationModel) -> np.ndarray:
    tc = m.t_char
    t_min = 1e-2 * tc if ns.t_min is None else ns.t_min
    t_max = 1e2 * tc if ns.t_max is None else ns.t_max
    return relaxation.make_grid(t_min, t_max, ns.points, ns.spacing)


# ---------------------------------------------------------------------------
# curve serialization
# ---------------------------------------------------------------------------

def curve_to_csv(curve: Curve) -> str:
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for t, f, meth, err in zip(curve.grid, curve.values, curve.methods, curve.error_estimates):
        out.write(f"{g17(t)},{g17(f)},{meth},{g17(err)}\n")
    return out.getvalue()


def curve_from_csv(text: str, model: RelaxationModel | None = None) -> Curve:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines or lines[0].strip() != CSV_HEADER:
        raise ValueError(f"expected header {CSV_HEADER!r}")
    ts, fs, methods, errs = [], [], [], []
    for ln in lines[1:]:
        t, f, meth, err = ln.split(",")
        ts.append(float(t))
        fs.append(float(f))
        methods.append(meth)
        errs.append(float(err))
    return Curve(np.array(ts), np.array(fs), tuple(methods), np.array(errs), model=model)


def _write(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _print_series_eval(se) -> int:
    print(f"value = {g17(se.value)}")
    print(f"terms_used = {se.terms_used}")
    print(f"error_estimate = {g17(se.error_estimate)}")
    print(f"converged = {str(se.converged).lower()}")
    return 0 if se.converged else 2


def cmd_eval_ml3(ns) -> int:
    return _print_series_eval(mittag_leffler_3p(ns.alpha, ns.beta, ns.gamma, ns.x, tol=ns.tol))


def cmd_eval_kernel(ns) -> int:
    p = PrabhakarParams(ns.alpha, ns.beta, ns.gamma, ns.lam)
    return _print_series_eval(prabhakar_kernel(p, ns.t, tol=ns.tol))


def cmd_solve(ns) -> int:
    m = _model_from_args(ns)
    grid = _grid_from_args(ns, m)
    curve = relaxation.solve_auto(m, grid, tol=ns.tol)
    if m.parameterization == "tau-form":
        ts = relaxation.tau_star(m.params.alpha, m.b)
        side = "<" if m.tau < ts else ">"
        print(f"tau* = {g17(ts)}  (tau = {g17(m.tau)} {side} tau*)", file=sys.stderr)
        print(f"dispatch: {_tally(curve.methods)}", file=sys.stderr)
    if ns.format == "csv":
        _write(curve_to_csv(curve), ns.output)
    else:
        _write(json.dumps(curve.to_dict(), indent=2), ns.output)
    if ns.plot:
        from . import plotting

        plotting.save_curve_plot(curve, ns.plot, title=_model_title(m))
        print(f"plot written to {ns.plot}", file=sys.stderr)
    return 0


def _load_curve(ns) -> tuple[RelaxationModel | None, Curve]:
    with open(ns.curve, encoding="utf-8") as fh:
        text = fh.read()
    if ns.curve.endswith(".json") or text.lstrip().startswith("{"):
        curve = Curve.from_dict(json.loads(text))
        return curve.model, curve
    model = None
    try:
        model = _model_from_args(ns)
    except ValueError:
        pass
    return model, curve_from_csv(text, model=model)


def cmd_verify(ns) -> int:
    wanted = None if ns.checks is None else {w.strip() for w in ns.checks.split(",") if w.strip()}
    known = {"kochubei", "cross", "monotonicity", "residual"}
    if wanted is not None and not wanted <= known:
        raise ValueError(f"unknown checks: {sorted(wanted - known)}; known: {sorted(known)}")

    if ns.curve is not None:
        m, curve = _load_curve(ns)
        default_checks = {"monotonicity", "residual"} | ({"kochubei"} if _has_kernel(m) else set())
    else:
        m = _model_from_args(ns)
        curve = relaxation.solve_auto(m, _grid_from_args(ns, m), tol=1e-9)
        default_checks = {"cross", "monotonicity", "residual"} | ({"kochubei"} if _has_kernel(m) else set())
    run = wanted if wanted is not None else default_checks

    reports: list[DiagnosticsReport] = []
    if "kochubei" in run:
        if not _has_kernel(m):
            raise ValueError("kochubei check needs a Prabhakar-kernel model with lambda <= 0")
        reports.append(laplace.check_kochubei_conditions(m.params))
    if "cross" in run:
        if m is None:
            raise ValueError("cross check needs model parameters")
        reports.append(validation.cross_validate(m, curve.grid, tol=ns.tol))
    if "monotonicity" in run:
        reports.append(validation.complete_monotonicity_check(curve, max_order=4))
    if "residual" in run:
        if m is None:
            raise ValueError("residual check needs model parameters")
        value, floor = relaxation.residual_report(m, curve)
        threshold = max(ns.tol * m.M, 4.0 * floor)
        from .report import Check

        reports.append(DiagnosticsReport(
            title="equation residual",
            checks=(Check(
                name="curve satisfies the defining equation",
                passed=value <= threshold,
                tolerance=threshold,
                evidence={"max_residual": value, "interpolation_floor": floor,
                          "relaxation_strength_M": m.M},
            ),),
        ))

    report = merge_reports("verification report", reports)
    _write(report.to_text() if ns.format == "text" else report.to_json(), ns.output)
    if ns.plot:
        from . import plotting

        plotting.save_curve_plot(curve, ns.plot, title=_model_title(m))
        print(f"plot written to {ns.plot}", file=sys.stderr)
    return 0 if report.overall else 4


def _has_kernel(m) -> bool:
    return m is not None and m.kind == "prabhakar" and m.params.lam <= 0


def cmd_sweep(ns) -> int:
    if not (math.isfinite(ns.start) and math.isfinite(ns.stop) and ns.start < ns.stop and ns.steps >= 2):
        raise ValueError("need finite start < stop and steps >= 2")
    xs = np.linspace(ns.start, ns.stop, ns.steps)
    rows = []
    for x in xs:
        alpha = x if ns.var == "alpha" else ns.alpha
        b = x if ns.var == "b" else ns.b
        if alpha is None:
            raise ValueError("sweeping tau/b requires --alpha")
        ts = relaxation.tau_star(alpha, b)
        tau = x if ns.var == "tau" else (ns.tau if ns.tau is not None else ts)
        m = RelaxationModel.from_tau(alpha, tau, b)
        rep = validation.cross_validate(m, relaxation.default_grid(m, points=ns.points))
        rows.append({
            ns.var: float(x),
            "tau_star": ts,
            "coverage_small": _coverage(rep, "series-small"),
            "coverage_large": _coverage(rep, "series-large"),
        })
    out = io.StringIO()
    out.write(f"{ns.var},tau_star,coverage_small,coverage_large\n")
    for r in rows:
        out.write(f"{g17(r[ns.var])},{g17(r['tau_star'])},{g17(r['coverage_small'])},{g17(r['coverage_large'])}\n")
    _write(out.getvalue(), ns.output)
    if ns.plot:
        from . import plotting

        plotting.save_sweep_plot(ns.var, rows, ns.plot)
        print(f"plot written to {ns.plot}", file=sys.stderr)
    return 0


def _coverage(rep: DiagnosticsReport, series: str) -> float:
    for c in rep.checks:
        if c.name == f"{series} vs inversion" or c.name == f"inversion vs {series}":
            n = c.evidence.get("points_compared", 0)
            bad = c.evidence.get("disagreements", 0)
            total = n  # points where the series produced a value at all
            return (n - bad) / total if total else 0.0
    return 0.0


def _tally(tags) -> str:
    out = {}
    for tag in tags:
        out[tag] = out.get(tag, 0) + 1
    return ", ".join(f"{k}:{v}" for k, v in sorted(out.items()))


def _model_title(m: RelaxationModel | None) -> str:
    if m is None:
        return "curve"
    if m.kind == "debye":
        return f"Debye: Lambda={m.Lambda:g}, B={m.B:g}"
    p = m.params
    base = f"alpha={p.alpha:g}, beta={p.beta:g}, gamma={p.gamma:g}, lambda={p.lam:g}, M={m.M:g}"
    if m.parameterization == "tau-form":
        base += f" (tau={m.tau:g}, b={m.b:g})"
    return base


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _inject_config(argv)
        parser = build_parser()
        try:
            ns = parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
        return ns.func(ns)
    except NonConvergence as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return 2
    except relaxation.NoMethodConverged as exc:
        print(f"no method converged: {exc}", file=sys.stderr)
        for k, v in exc.diagnostics.items():
            print(f"  {k}: {v}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
