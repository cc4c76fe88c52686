"""Solvers for the anomalous-relaxation equation with a Prabhakar memory kernel.

The model is the convolution equation

    int_0^t k(t-u) f'(u) du = -M f(t),      k(u) = u^(beta-1) E^{-gamma}_{alpha,beta}(lam u^alpha),

with f(0+) = 1.  Four routes to f(t) are implemented:

* a short-time series in powers of M (``solve_series_small_regime``),
* a long-time series in powers of 1/M whose terms carry negative upper
  indices and decaying t-powers (``solve_series_large_regime``), treated as
  asymptotic with smallest-term truncation,
* the closed form valid for gamma = 1, beta = 1 - alpha at every tau > 0
  (``solve_closed_gamma1``), and
* certified numerical Laplace inversion (through :mod:`prabrelax.laplace`).

``solve_auto`` dispatches between them per point, and ``residual`` pushes a
solution curve back through the defining equation as an end-to-end check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import rgamma, roots_legendre

from . import laplace
from .special import (
    DEFAULT_TOL,
    NonConvergence,
    PrabhakarParams,
    SeriesEval,
    ml3_vec,
    mittag_leffler_3p,
)

__all__ = [
    "AsymptoticBreakdown",
    "ClosedFormMismatch",
    "Curve",
    "InsufficientGrid",
    "NoMethodConverged",
    "ParameterViolation",
    "RelaxationModel",
    "default_grid",
    "make_grid",
    "residual",
    "solve_auto",
    "solve_closed_gamma1",
    "solve_debye",
    "solve_series_large_regime",
    "solve_series_small_regime",
    "tau_star",
]

_OUTER_CAP = 600  # cap on kernel-series terms of the two f(t) expansions


class AsymptoticBreakdown(ArithmeticError):
    """Long-time series terms grow from the start: t too small for this regime."""


class NoMethodConverged(ArithmeticError):
    """No route produced a certified value at some grid point."""

    def __init__(self, msg: str, diagnostics: dict | None = None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}


class InsufficientGrid(ValueError):
    """Curve too coarse: interpolation error estimate exceeds the requested tol."""


class ParameterViolation(ValueError):
    """Operation called outside its parameter domain (e.g. gamma != 1 closed form)."""


class ClosedFormMismatch(ArithmeticError):
    """The two equivalent closed forms disagree; indicates an evaluator defect."""


@dataclass(frozen=True)
class RelaxationModel:
    """A relaxation model: kernel parameters plus the strength M.

    ``parameterization`` records how the model was built: "direct-M",
    "tau-form" (tau, b with Lambda = 1/tau, N = 1/(1-alpha), so
    M = (1-alpha)/tau and lam = -b*alpha/(1-alpha), gamma = 1), or "debye"
    (constant kernel B, strength Lambda).
    """

    params: PrabhakarParams | None
    M: float
    parameterization: str = "direct-M"
    tau: float | None = None
    b: float | None = None
    Lambda: float | None = None
    B: float | None = None

    @property
    def kind(self) -> str:
        return "debye" if self.parameterization == "debye" else "prabhakar"

    @staticmethod
    def direct(params: PrabhakarParams, M: float) -> "RelaxationModel":
        if not (M > 0 and math.isfinite(M)):
            raise ValueError("M must be a positive finite real")
        params.require_model()
        return RelaxationModel(params=params, M=M)

    @staticmethod
    def from_tau(alpha: float, tau: float, b: float) -> "RelaxationModel":
        """The worked parameterization: gamma=1, beta=1-alpha, Lambda=1/tau."""
        if not (0.0 < alpha < 1.0):
            raise ValueError("tau-form requires 0 < alpha < 1")
        if not (tau > 0 and b > 0):
            raise ValueError("tau-form requires tau > 0 and b > 0")
        params = PrabhakarParams(alpha=alpha, beta=1.0 - alpha, gamma=1.0,
                                 lam=-b * alpha / (1.0 - alpha))
        return RelaxationModel(params=params, M=(1.0 - alpha) / tau,
                               parameterization="tau-form", tau=tau, b=b)

    @staticmethod
    def debye(Lambda: float, B: float) -> "RelaxationModel":
        if not (Lambda > 0 and B > 0):
            raise ValueError("Debye mode requires Lambda > 0 and B > 0")
        return RelaxationModel(params=None, M=Lambda, parameterization="debye",
                               Lambda=Lambda, B=B)

    @property
    def t_char(self) -> float:
        """Characteristic time (1/M)^(1/(1-beta)); B/Lambda in Debye mode."""
        if self.kind == "debye":
            return self.B / self.Lambda
        return (1.0 / self.M) ** (1.0 / (1.0 - self.params.beta))

    @property
    def is_closed_gamma1(self) -> bool:
        p = self.params
        return (p is not None and p.gamma == 1.0
                and abs(p.alpha + p.beta - 1.0) <= 1e-12)


@dataclass(frozen=True)
class Curve:
    """A sampled solution f(t) with per-point method tags and error estimates."""

    grid: np.ndarray
    values: np.ndarray
    methods: tuple[str, ...]
    error_estimates: np.ndarray
    model: RelaxationModel | None = None

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        if g.ndim != 1 or g.size < 2:
            raise ValueError("grid must be a 1-d array with >= 2 points")
        if not np.all(g > 0) or not np.all(np.diff(g) > 0):
            raise ValueError("grid must be strictly increasing and positive")
        if not (len(self.values) == len(g) == len(self.methods) == len(self.error_estimates)):
            raise ValueError("grid/values/methods/error_estimates lengths differ")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        object.__setattr__(self, "error_estimates", np.asarray(self.error_estimates, dtype=float))

    def to_dict(self) -> dict:
        d = {
            "grid": self.grid.tolist(),
            "values": self.values.tolist(),
            "methods": list(self.methods),
            "errors": self.error_estimates.tolist(),
            "model": _model_dict(self.model),
        }
        return d

    @staticmethod
    def from_dict(d: dict) -> "Curve":
        return Curve(
            grid=np.asarray(d["grid"], dtype=float),
            values=np.asarray(d["values"], dtype=float),
            methods=tuple(d["methods"]),
            error_estimates=np.asarray(d["errors"], dtype=float),
            model=_model_from_dict(d.get("model")),
        )


def _model_dict(m: RelaxationModel | None) -> dict | None:
    if m is None:
        return None
    d = {"parameterization": m.parameterization, "M": m.M}
    if m.params is not None:
        d.update(alpha=m.params.alpha, beta=m.params.beta,
                 gamma=m.params.gamma, **{"lambda": m.params.lam})
    for k in ("tau", "b", "Lambda", "B"):
        v = getattr(m, k)
        if v is not None:
            d[k] = v
    return d


def _model_from_dict(d: dict | None) -> RelaxationModel | None:
    if d is None:
        return None
    params = None
    if "alpha" in d:
        params = PrabhakarParams(alpha=d["alpha"], beta=d["beta"],
                                 gamma=d["gamma"], lam=d["lambda"])
    return RelaxationModel(params=params, M=d["M"],
                           parameterization=d.get("parameterization", "direct-M"),
                           tau=d.get("tau"), b=d.get("b"),
                           Lambda=d.get("Lambda"), B=d.get("B"))


def tau_star(alpha: float, b: float) -> float:
    """Regime boundary (1-alpha)^2/(b*alpha) between the two series.

    The long-time expansion targets tau < tau*, the short-time expansion
    tau > tau*; the closed form needs no restriction beyond tau > 0.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must be in (0, 1)")
    if not (b > 0):
        raise ValueError("b must be > 0")
    return (1.0 - alpha) ** 2 / (b * alpha)


def make_grid(t_min: float, t_max: float, points: int, spacing: str = "geometric") -> np.ndarray:
    if not (0 < t_min < t_max) or points < 2:
        raise ValueError("need 0 < t_min < t_max and points >= 2")
    if spacing == "geometric":
        return np.geomspace(t_min, t_max, points)
    if spacing == "linear":
        return np.linspace(t_min, t_max, points)
    raise ValueError(f"unknown spacing {spacing!r}")


def default_grid(m: RelaxationModel, points: int = 64) -> np.ndarray:
    """64 geometric points spanning [1e-2, 1e2] * t_char."""
    tc = m.t_char
    return make_grid(1e-2 * tc, 1e2 * tc, points)


# ---------------------------------------------------------------------------
# series solutions
# ---------------------------------------------------------------------------

def _require_prabhakar(m: RelaxationModel):
    if m.kind != "prabhakar":
        raise ParameterViolation("series solvers need a Prabhakar-kernel model")
    return m.params


def solve_series_small_regime(m: RelaxationModel, t: float, tol: float = DEFAULT_TOL) -> SeriesEval:
    """Short-time expansion: f(t) = sum_r (-M)^r t^(r(1-beta)) E^{r gamma}_{alpha, 1+r(1-beta)}(lam t^alpha).

    Terms are Prabhakar-kernel evaluations with positive upper index; the
    expansion converges for every t but its floating-point floor grows
    exponentially with t, so convergence is only reported where the floor
    stays below tol.  Raises NonConvergence when terms leave the double
    range (regime mismatch: use the long-time series or inversion).
    """
    p = _require_prabhakar(m)
    if not (t > 0):
        raise ValueError("t must be > 0")
    a, beta, g, lam, M = p.alpha, p.beta, p.gamma, p.lam, m.M
    log_t = math.log(t)
    log_M = math.log(M)

    total, inner_err, max_abs = 0.0, 0.0, 0.0
    consec, prev_abs = 0, math.inf
    r = 0
    stopped = False
    while r < _OUTER_CAP:
        B = 1.0 + r * (1.0 - beta)
        log_pref = r * (log_M + (1.0 - beta) * log_t)
        if log_pref > 680.0:
            raise NonConvergence(f"short-time series prefactor overflows at r={r}, t={t}")
        inner = mittag_leffler_3p(a, B, r * g, lam * t**a, tol=min(tol, 1e-13))
        pref = math.exp(log_pref)
        term = (-1.0) ** r * pref * inner.value
        if not math.isfinite(term):
            raise NonConvergence(f"short-time series term overflows at r={r}, t={t}")
        total += term
        inner_err += pref * inner.error_estimate
        abs_t = abs(term)
        max_abs = max(max_abs, abs_t)
        r += 1
        if abs_t <= tol * max(abs(total), 5e-324):
            consec += 1
            if consec >= 3 and r > 3:
                stopped = True
                break
        else:
            consec = 0
        if abs_t > 1e280:
            raise NonConvergence(f"short-time series diverging at r={r}, t={t}")
        prev_abs = abs_t

    floor = 4.0 * np.finfo(float).eps * max_abs * math.sqrt(max(r, 1))
    est = max(abs_t, floor) + inner_err
    if not stopped and abs_t >= prev_abs:
        raise NonConvergence(f"short-time series cap {_OUTER_CAP} hit while growing at t={t}")
    converged = stopped and est <= tol * max(1.0, abs(total))
    return SeriesEval(total, r, est, converged)


def solve_series_large_regime(m: RelaxationModel, t: float, tol: float = DEFAULT_TOL) -> SeriesEval:
    """Long-time expansion:
    f(t) = (1/M) sum_r (-1/M)^r t^(-(1+r)(1-beta)) E^{-(1+r) gamma}_{alpha, 1-(1+r)(1-beta)}(lam t^alpha).

    The upper indices are negative and the t-powers decay, so the expansion
    behaves asymptotically for large t; it is truncated at the smallest
    term (superasymptotic rule) and the error estimate is that term's
    magnitude plus the inner-evaluation floors.  Raises AsymptoticBreakdown
    when terms grow from the start (t too small for this regime).
    """
    p = _require_prabhakar(m)
    if not (t > 0):
        raise ValueError("t must be > 0")
    a, beta, g, lam, M = p.alpha, p.beta, p.gamma, p.lam, m.M
    log_t = math.log(t)
    log_M = math.log(M)

    terms: list[float] = []
    inner_errs: list[float] = []
    r = 0
    while r < _OUTER_CAP:
        B = 1.0 - (1.0 + r) * (1.0 - beta)
        log_pref = -(1.0 + r) * (log_M + (1.0 - beta) * log_t)
        if log_pref > 680.0:
            break
        try:
            inner = mittag_leffler_3p(a, B, -(1.0 + r) * g, lam * t**a, tol=min(tol, 1e-13))
        except NonConvergence:
            break
        pref = math.exp(log_pref)
        term = (-1.0) ** r * pref * inner.value
        if not math.isfinite(term):
            break
        terms.append(term)
        inner_errs.append(pref * inner.error_estimate)
        r += 1
        if r >= 2 and abs(terms[-1]) > abs(terms[-2]):
            break  # smallest-term truncation point passed
        if r > 3 and abs(term) <= tol * max(abs(sum(terms)), 5e-324) \
                and abs(terms[-2]) <= tol * max(abs(sum(terms)), 5e-324):
            break

    if len(terms) >= 2 and abs(terms[-1]) > abs(terms[-2]):
        trunc = abs(terms[-1])
        terms = terms[:-1]
        inner_errs = inner_errs[:-1]
    elif terms:
        trunc = abs(terms[-1])
    else:
        raise AsymptoticBreakdown(f"no usable terms in the long-time series at t={t}")

    total = math.fsum(terms)
    est = trunc + math.fsum(inner_errs)
    if len(terms) == 1 and est > 0.5 * max(abs(total), 5e-324):
        raise AsymptoticBreakdown(
            f"long-time series terms grow immediately at t={t}: t too small for this regime"
        )
    converged = est <= tol * max(1.0, abs(total))
    return SeriesEval(total, len(terms), est, converged)


# ---------------------------------------------------------------------------
# closed forms and limits
# ---------------------------------------------------------------------------

def _closed_gamma1_with_err(m: RelaxationModel, t: float, identity_tol: float = 1e-10) -> tuple[float, float]:
    p = _require_prabhakar(m)
    if not (p.gamma == 1.0 and abs(p.alpha + p.beta - 1.0) <= 1e-12):
        raise ParameterViolation("closed form requires gamma = 1 and beta = 1 - alpha")
    if not (t > 0):
        raise ValueError("t must be > 0")
    a, lam, M = p.alpha, p.lam, m.M
    c = M - lam
    x = -c * t**a
    e1 = laplace.mittag_leffler_2p(a, 1.0, x)
    # two-term form: E_a(x) - lam t^a E_{a,1+a}(x)
    e2 = laplace.mittag_leffler_2p(a, 1.0 + a, x)
    form_two_term = e1.value - lam * t**a * e2.value
    # constant-plus-scaled form: M/(M-lam) E_a(x) - lam/(M-lam)
    form_const = (M / c) * e1.value - lam / c
    diff = abs(form_two_term - form_const)
    scale = max(1.0, abs(form_const))
    allowed = max(identity_tol * scale, 4.0 * (e1.error_estimate + abs(lam) * t**a * e2.error_estimate))
    if diff > allowed:
        raise ClosedFormMismatch(
            f"closed-form variants disagree at t={t}: {form_two_term!r} vs {form_const!r}"
        )
    err = (M / c) * e1.error_estimate + diff
    return form_const, err


def solve_closed_gamma1(m: RelaxationModel, t: float) -> float:
    """Closed-form solution for gamma = 1, beta = 1 - alpha, any tau > 0:

        f(t) = M/(M-lam) E_alpha(-(M-lam) t^alpha) - lam/(M-lam).

    The equivalent two-term form E_alpha(x) - lam t^alpha E_{alpha,1+alpha}(x)
    is evaluated alongside and both must agree to 1e-10 (an in-situ check of
    the Mittag-Leffler shift identity); at lam = 0 this is the Cole-Cole
    relaxation E_alpha(-M t^alpha).
    """
    return _closed_gamma1_with_err(m, t)[0]


def solve_debye(Lambda: float, B: float, t: float) -> float:
    """Debye limit (constant kernel B, strength Lambda): f(t) = exp(-Lambda t / B)."""
    if not (Lambda > 0 and B > 0 and t > 0):
        raise ValueError("Lambda, B, t must be > 0")
    return math.exp(-Lambda * t / B)


# ---------------------------------------------------------------------------
# automatic dispatch
# ---------------------------------------------------------------------------

def solve_auto(m: RelaxationModel, grid: np.ndarray, tol: float = 1e-9) -> Curve:
    """Solve on a grid, choosing the method per point.

    Debye models use the exponential; gamma = 1, beta = 1 - alpha models the
    closed form (tagged "cole-cole" when lam = 0).  Otherwise both series
    are computed per point, each series is certified against the inversion
    oracle at three sentinel points, and the smaller certified error wins;
    points where no series qualifies fall back to certified inversion.
    lam > 0 kernels are rejected (non-physical: monotonicity premises fail).
    """
    grid = np.asarray(grid, dtype=float)
    if m.kind == "debye":
        vals = np.exp(-m.Lambda * grid / m.B)
        errs = 4.0 * np.finfo(float).eps * np.abs(vals)
        return Curve(grid, vals, ("debye",) * len(grid), errs, model=m)

    p = m.params
    if p.lam > 0:
        raise ParameterViolation("solve_auto rejects lam > 0 (non-physical kernel)")

    if m.is_closed_gamma1:
        tag = "cole-cole" if p.lam == 0.0 else "closed-gamma1"
        vals = np.empty(len(grid))
        errs = np.empty(len(grid))
        for i, t in enumerate(grid):
            vals[i], errs[i] = _closed_gamma1_with_err(m, t)
        return Curve(grid, vals, (tag,) * len(grid), errs, model=m)

    H = laplace.solution_transform(m)
    point_tol = max(tol, 1e-6)

    def run(solver, t):
        try:
            return solver(m, t, tol=tol)
        except (NonConvergence, AsymptoticBreakdown):
            return None

    small = [run(solve_series_small_regime, t) for t in grid]
    large = [run(solve_series_large_regime, t) for t in grid]

    sentinels = sorted({len(grid) // 6, len(grid) // 2, (5 * len(grid)) // 6})
    oracle_at = {}
    for i in sentinels:
        oracle_at[i] = laplace.certified_invert(H, grid[i])

    def certified(series_vals) -> bool:
        for i, (ov, oe) in oracle_at.items():
            sv = series_vals[i]
            if sv is None:
                continue
            if abs(sv.value - ov) > max(point_tol, sv.error_estimate + oe):
                return False
        return True

    ok_small = certified(small)
    ok_large = certified(large)

    vals = np.empty(len(grid))
    errs = np.empty(len(grid))
    methods: list[str] = []
    for i, t in enumerate(grid):
        cands = []
        if ok_small and small[i] is not None and small[i].error_estimate <= point_tol * max(1.0, abs(small[i].value)):
            cands.append(("series-small", small[i].value, small[i].error_estimate))
        if ok_large and large[i] is not None and large[i].error_estimate <= point_tol * max(1.0, abs(large[i].value)):
            cands.append(("series-large", large[i].value, large[i].error_estimate))
        if cands:
            tag, v, e = min(cands, key=lambda c: c[2])
        else:
            try:
                v, e = laplace.certified_invert(H, t)
                tag = "inversion"
            except (laplace.NonAgreement, laplace.OscillationDetected) as exc:
                raise NoMethodConverged(
                    f"no method produced a certified value at t={t}",
                    diagnostics={
                        "t": t,
                        "series_small": None if small[i] is None else vars(small[i]),
                        "series_large": None if large[i] is None else vars(large[i]),
                        "inversion_error": str(exc),
                    },
                ) from exc
        vals[i], errs[i] = v, e
        methods.append(tag)
    return Curve(grid, vals, tuple(methods), errs, model=m)


# ---------------------------------------------------------------------------
# residual of the defining equation
# ---------------------------------------------------------------------------

_GLX, _GLW = roots_legendre(10)


def _panels(fn, edges: np.ndarray) -> float:
    a = edges[:-1][:, None]
    b = edges[1:][:, None]
    x = 0.5 * (a + b) + 0.5 * (b - a) * _GLX[None, :]
    w = 0.5 * (b - a) * _GLW[None, :]
    return float(np.sum(w * fn(x.ravel()).reshape(x.shape)))


def _graded_edges(hi: float, n: int, lo_frac: float = 1e-24) -> np.ndarray:
    return np.concatenate(([0.0], np.geomspace(hi * lo_frac, hi, n)))


def _kernel_vals(m: RelaxationModel, v: np.ndarray) -> np.ndarray:
    """Memory kernel e^{-gamma}_{alpha,beta}(v; lam) on an array of lags."""
    p = m.params
    v = np.asarray(v, dtype=float)
    if p.gamma == 1.0:  # upper index -1: exact two-term polynomial
        return v ** (p.beta - 1.0) * rgamma(p.beta) - p.lam * v ** (p.alpha + p.beta - 1.0) * rgamma(p.alpha + p.beta)
    vals, errs, conv = ml3_vec(p.alpha, p.beta, -p.gamma, p.lam * v**p.alpha, tol=1e-13)
    out = v ** (p.beta - 1.0) * vals
    bad = ~conv
    if np.any(bad):  # cancellation-unsafe lags: invert K(s) there instead
        K = laplace.kernel_transform(p)
        for idx in np.nonzero(bad)[0]:
            out[idx] = laplace.certified_invert(K, float(v[idx]))[0]
    return out


def _kernel_smooth_part(m: RelaxationModel, v: np.ndarray) -> np.ndarray:
    """kernel(v) / v^(beta-1): bounded as v -> 0."""
    p = m.params
    v = np.asarray(v, dtype=float)
    if p.gamma == 1.0:
        return rgamma(p.beta) - p.lam * v**p.alpha * rgamma(p.alpha + p.beta)
    vals, _, _ = ml3_vec(p.alpha, p.beta, -p.gamma, p.lam * v**p.alpha, tol=1e-13)
    return vals


def _fprime_short_time(m: RelaxationModel, u: np.ndarray, rmax: int = 80, tol: float = 1e-11) -> np.ndarray:
    """f'(u) from the short-time expansion, valid for u below the first grid point."""
    p = m.params
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    for r in range(1, rmax):
        B = r * (1.0 - p.beta)
        vals, _, _ = ml3_vec(p.alpha, B, r * p.gamma, p.lam * u**p.alpha, tol=1e-13)
        term = (-1.0) ** r * m.M**r * u ** (B - 1.0) * vals
        out += term
        if np.all(np.abs(term) <= tol * np.maximum(np.abs(out), 1e-300)):
            break
    return out


def _f_short_time(m: RelaxationModel, u: np.ndarray, rmax: int = 80, tol: float = 1e-12) -> np.ndarray:
    p = m.params
    u = np.asarray(u, dtype=float)
    out = np.ones_like(u)
    for r in range(1, rmax):
        B = 1.0 + r * (1.0 - p.beta)
        vals, _, _ = ml3_vec(p.alpha, B, r * p.gamma, p.lam * u**p.alpha, tol=1e-13)
        term = (-1.0) ** r * m.M**r * u ** (B - 1.0) * vals
        out += term
        if np.all(np.abs(term) <= tol * np.abs(out)):
            break
    return out


def _residual_at(m: RelaxationModel, T: float, grid: np.ndarray, fvals: np.ndarray,
                 dpch, f_at) -> float:
    """|int_0^T k(T-u) f'(u) du + M f(T)| for one checkpoint T (grid member)."""
    p = m.params
    beta = p.beta
    t1 = grid[0]
    ub = min(t1, T)

    # -- u in (0, ub]: short-time model expansion below the sampled range.
    # substitution u = z^(1/(1-beta)) absorbs the u^-beta endpoint of f'.
    pw = 1.0 - beta
    IB = 0.0
    if T > 8.0 * t1:
        zmax = ub**pw

        def fnB(z):
            u = z ** (1.0 / pw)
            return _kernel_vals(m, T - u) * (u**beta * _fprime_short_time(m, u)) / pw

        IB = _panels(fnB, _graded_edges(zmax, 70))
    else:
        # kernel lag T-u is small near u=ub: treat both singular ends
        zmax = (ub / 2.0) ** pw

        def fnB1(z):
            u = z ** (1.0 / pw)
            return _kernel_vals(m, T - u) * (u**beta * _fprime_short_time(m, u)) / pw

        IB = _panels(fnB1, _graded_edges(zmax, 60))
        vlo, vhi = T - ub, T - ub / 2.0
        whi = vhi**beta

        def fnB2(w):
            v = w ** (1.0 / beta)
            return _kernel_smooth_part(m, v) * _fprime_short_time(m, T - v) / beta

        edges2 = _graded_edges(whi, 60) if vlo == 0.0 else np.geomspace(vlo**beta, whi, 60)
        IB += _panels(fnB2, edges2)

    # -- jump between the model's short-time value and the curve data at t1
    IJ = 0.0
    if T > t1:
        IJ = (fvals[0] - float(_f_short_time(m, np.array([t1]))[0])) * float(_kernel_vals(m, np.array([T - t1]))[0])

    # -- u in [t1, T]: interpolated curve data
    IA = 0.0
    if T > t1:
        V = T - t1
        vs = V / 2.0
        whi = vs**beta

        def fnA1(w):  # v in [0, vs] with w = v^beta absorbing the kernel weight
            v = w ** (1.0 / beta)
            return _kernel_smooth_part(m, v) * dpch(T - v) / beta

        IA += _panels(fnA1, _graded_edges(whi, 70))
        n_panels = max(6, int(14 * math.log10((T - vs) / t1)) + 2)

        def fnA2(u):  # u in [t1, T - vs], both factors smooth
            return _kernel_vals(m, T - u) * dpch(u)

        IA += _panels(fnA2, np.geomspace(t1, T - vs, n_panels))

    return abs(IB + IJ + IA + m.M * f_at(T))


def residual(m: RelaxationModel, c: Curve, tol: float | None = None,
             checkpoints: int = 12) -> float:
    """Max over checkpoints of |int_0^t k(t-u) f'(u) du + M f(t)| for the curve.

    f' comes from a monotone cubic (PCHIP) interpolant of the curve;
    quadrature uses meshes graded to the (t-u)^(beta-1) kernel endpoint and
    the u^-beta short-time endpoint of f'.  Below the first grid point the
    model's short-time expansion closes the integral (the f(0+) = 1
    constraint), and any mismatch with the first sample enters as an exact
    jump contribution.  Raises InsufficientGrid when the interpolation-error
    floor (estimated by grid decimation) exceeds ``tol``.
    """
    if m.kind == "debye":
        return _residual_debye(m, c, tol)
    _require_prabhakar(m)
    grid, fvals = c.grid, c.values
    pch = PchipInterpolator(grid, fvals, extrapolate=False)
    dpch = pch.derivative()

    idx = np.unique(np.round(np.linspace(0, len(grid) - 1, checkpoints)).astype(int))
    worst = 0.0
    for i in idx:
        worst = max(worst, _residual_at(m, float(grid[i]), grid, fvals, dpch,
                                        lambda T, i=i: fvals[i]))

    if tol is not None:
        floor = _interp_floor(m, c, dpch)
        if floor > tol:
            raise InsufficientGrid(
                f"interpolation floor {floor:.3e} exceeds requested tol {tol:.3e}; "
                f"sample the curve more densely"
            )
    return worst


def residual_report(m: RelaxationModel, c: Curve, checkpoints: int = 12) -> tuple[float, float]:
    """(max residual, interpolation floor estimate) for pass/fail decisions.

    A curve cannot certify residuals below the floor of its own sampling
    density; callers should compare the residual against max(tol, ~4*floor).
    """
    if m.kind == "debye":
        dpch = PchipInterpolator(c.grid, c.values, extrapolate=False).derivative()
        half = slice(0, len(c.grid), 2)
        dp_half = PchipInterpolator(c.grid[half], c.values[half], extrapolate=False).derivative()
        floor = float(np.max(np.abs(dp_half(c.grid[half]) - dpch(c.grid[half])) * m.B)) / 3.0
        return _residual_debye(m, c, None), floor
    value = residual(m, c, tol=None, checkpoints=checkpoints)
    dpch = PchipInterpolator(c.grid, c.values, extrapolate=False).derivative()
    return value, _interp_floor(m, c, dpch)


def _interp_floor(m: RelaxationModel, c: Curve, dpch) -> float:
    """Crude residual floor from half-grid decimation at three checkpoints."""
    grid, fvals = c.grid, c.values
    half = slice(0, len(grid), 2)
    dp_half = PchipInterpolator(grid[half], fvals[half], extrapolate=False).derivative()
    probe_idx = [len(grid) // 4, len(grid) // 2, (3 * len(grid)) // 4]
    worst = 0.0
    for i in probe_idx:
        T = float(grid[i])
        if T <= grid[half][0]:
            continue
        full = _residual_at(m, T, grid, fvals, dpch, lambda _t, i=i: fvals[i])
        halfr = _residual_at(m, T, grid[half], fvals[half], dp_half,
                             lambda _t, i=i: fvals[i])
        worst = max(worst, abs(halfr - full) / 3.0)
    return worst


def _residual_debye(m: RelaxationModel, c: Curve, tol: float | None) -> float:
    """Debye kernel is B*delta(t): the equation reduces to B f' = -Lambda f."""
    dpch = PchipInterpolator(c.grid, c.values, extrapolate=False).derivative()
    res = np.abs(m.B * dpch(c.grid) + m.Lambda * c.values)
    if tol is not None:
        half = slice(0, len(c.grid), 2)
        dp_half = PchipInterpolator(c.grid[half], c.values[half], extrapolate=False).derivative()
        floor = float(np.max(np.abs(dp_half(c.grid[half]) - dpch(c.grid[half])) * m.B)) / 3.0
        if floor > tol:
            raise InsufficientGrid(f"interpolation floor {floor:.3e} exceeds tol {tol:.3e}")
    return float(np.max(res))
