"""Gamma-related primitives, Mittag-Leffler functions and the Prabhakar kernel.

All evaluations are plain-double power series with explicit truncation
diagnostics.  The three-parameter series

    E^g_{a,b}(x) = sum_r (g)_r x^r / (r! Gamma(a r + b))

is summed with the Pochhammer/power part carried in log magnitude + sign, so
the only overflow that can occur is in the value itself.  Reciprocal-gamma
factors are applied term by term (never through ratio recurrences), which
keeps terms correct across the zeros of 1/Gamma at nonpositive integers.

Alternating arguments cost precision: the round-off floor of a sum is
proportional to its largest intermediate term, and that floor is tracked and
folded into every ``error_estimate``.  Callers that need values beyond the
series' floating-point range should go through the Laplace-inversion based
evaluators in :mod:`prabrelax.laplace`.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, rgamma

__all__ = [
    "DEFAULT_TOL",
    "NonConvergence",
    "PrabhakarParams",
    "SeriesEval",
    "mittag_leffler_3p",
    "mittag_leffler_neg_int",
    "prabhakar_kernel",
    "reciprocal_gamma",
    "term_cap",
]

DEFAULT_TOL = 1e-12

_EPS = float(np.finfo(float).eps)
_LOG_HUGE = 700.0  # log of the largest magnitude we allow a term to reach


class NonConvergence(ArithmeticError):
    """Series did not converge: term cap hit while terms were still growing,
    or a term left the representable range.  Signals that |x| is too large
    for direct summation at these parameters."""


def term_cap() -> int:
    """Maximum number of series terms; overridable via RELAX_MAX_TERMS."""
    raw = os.environ.get("RELAX_MAX_TERMS")
    if raw is None:
        return 10_000
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ValueError(f"RELAX_MAX_TERMS must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise ValueError("RELAX_MAX_TERMS must be >= 1")
    return cap


@dataclass(frozen=True)
class PrabhakarParams:
    """Parameter tuple (alpha, beta, gamma, lam) of the kernel family.

    ``lam`` is the kernel rate (units t^-alpha).  Bare function evaluation
    places no restriction on beta and gamma; the relaxation-model usage
    additionally requires ``is_model_valid``.
    """

    alpha: float
    beta: float
    gamma: float
    lam: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "lam"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")

    def is_model_valid(self, tol: float = 1e-12) -> bool:
        """True when usable as a relaxation-model kernel: 0 < gamma <= 1,
        beta > 0, and either alpha + beta = 1 or beta = 1 - alpha*gamma."""
        if not (0.0 < self.gamma <= 1.0 and self.beta > 0.0):
            return False
        return (
            abs(self.alpha + self.beta - 1.0) <= tol
            or abs(self.beta - (1.0 - self.alpha * self.gamma)) <= tol
        )

    def require_model(self) -> "PrabhakarParams":
        if not self.is_model_valid():
            raise ValueError(
                "parameters violate the model constraints "
                "(0 < gamma <= 1, beta > 0, alpha+beta=1 or beta=1-alpha*gamma): "
                f"{self}"
            )
        return self


@dataclass(frozen=True)
class SeriesEval:
    """A series value with truncation diagnostics.

    ``error_estimate`` is the magnitude of the first omitted term plus the
    round-off floor of the summation; ``converged`` guarantees
    error_estimate <= tol * max(1, |value|) for the tol of the call.
    """

    value: float
    terms_used: int
    error_estimate: float
    converged: bool


def reciprocal_gamma(z: float) -> float:
    """1/Gamma(z) as an entire function: exactly 0 at z = 0, -1, -2, ...

    Relative accuracy ~1e-14 away from the zeros (delegates to scipy).
    """
    if not math.isfinite(z):
        raise ValueError("argument must be finite")
    return float(rgamma(z))


def _log_rgamma(z: float) -> tuple[float, float]:
    """(log|1/Gamma(z)|, sign).  sign = 0.0 exactly at nonpositive integers."""
    if z > 0:
        return -float(gammaln(z)), 1.0
    n = math.floor(z)
    frac = z - n
    if frac == 0.0:
        return -math.inf, 0.0
    # reflection: 1/Gamma(z) = Gamma(1-z) sin(pi z)/pi, with sin reduced mod 1
    s = math.sin(math.pi * frac)
    sign = 1.0 if (n % 2 == 0) else -1.0
    return float(gammaln(1.0 - z)) + math.log(abs(s)) - math.log(math.pi), sign * math.copysign(1.0, s)


def _round_off_floor(max_abs_term: float, n_terms: int) -> float:
    return 4.0 * _EPS * max_abs_term * math.sqrt(max(n_terms, 1))


def mittag_leffler_3p(
    alpha: float,
    beta: float,
    gamma: float,
    x: float,
    tol: float = DEFAULT_TOL,
    max_terms: int | None = None,
) -> SeriesEval:
    """Three-parameter Mittag-Leffler function E^gamma_{alpha,beta}(x).

    Summation stops once three consecutive terms fall below tol*|partial sum|
    (single small terms near alternating-series cancellations are not
    trusted).  For gamma a nonpositive integer the series terminates exactly
    and the result is the corresponding polynomial.

    Raises NonConvergence when the term cap is hit with non-decreasing terms
    or a term exceeds the double range.
    """
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    if not (tol > 0):
        raise ValueError("tol must be > 0")
    if not all(math.isfinite(v) for v in (alpha, beta, gamma, x)):
        raise ValueError("arguments must be finite")
    cap = term_cap() if max_terms is None else int(max_terms)

    log_a = 0.0  # log |(gamma)_k x^k / k!|
    sgn_a = 1.0
    total = 0.0
    max_abs = 0.0
    prev_abs = math.inf
    consec_small = 0
    k = 0
    terminated = False  # Pochhammer hit zero: polynomial case
    stopped_by_rule = False
    next_term_abs = 0.0

    while k < cap:
        lg, sg = _log_rgamma(alpha * k + beta)
        log_t = log_a + lg
        if log_t > _LOG_HUGE:
            raise NonConvergence(
                f"term magnitude exceeds double range at k={k} "
                f"(alpha={alpha}, beta={beta}, gamma={gamma}, x={x})"
            )
        term = sgn_a * sg * math.exp(log_t) if sg != 0.0 else 0.0
        total += term
        abs_t = abs(term)
        max_abs = max(max_abs, abs_t)
        k += 1

        # advance the Pochhammer/power part
        fac = gamma + (k - 1)
        if fac == 0.0 or x == 0.0:
            terminated = True
            break
        log_a += math.log(abs(x)) + math.log(abs(fac)) - math.log(k)
        sgn_a *= math.copysign(1.0, x) * math.copysign(1.0, fac)

        # zero terms from 1/Gamma zeros say nothing about tail decay: skip them
        if sg != 0.0:
            if abs_t <= tol * max(abs(total), 5e-324):
                consec_small += 1
                if consec_small >= 3 and k > 3:
                    stopped_by_rule = True
                    # peek at the first omitted term for the estimate
                    lg2, sg2 = _log_rgamma(alpha * k + beta)
                    lt2 = log_a + lg2
                    next_term_abs = math.exp(lt2) if (sg2 != 0.0 and lt2 < _LOG_HUGE) else 0.0
                    break
            else:
                consec_small = 0
            prev_abs = abs_t

    floor = _round_off_floor(max_abs, k)
    if terminated:
        est = floor
        converged = est <= tol * max(1.0, abs(total))
        return SeriesEval(total, k, est, converged)
    if stopped_by_rule:
        est = max(next_term_abs, floor)
        converged = est <= tol * max(1.0, abs(total))
        return SeriesEval(total, k, est, converged)
    # cap exhausted
    if abs_t >= prev_abs or not math.isfinite(total):
        raise NonConvergence(
            f"series cap {cap} hit with non-decreasing terms "
            f"(alpha={alpha}, beta={beta}, gamma={gamma}, x={x})"
        )
    return SeriesEval(total, k, max(abs_t, floor), False)


def ml3_vec(
    alpha: float,
    beta: float,
    gamma: float,
    xs: np.ndarray,
    tol: float = DEFAULT_TOL,
    max_terms: int | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized E^gamma_{alpha,beta} over an array of arguments.

    Returns (values, error_estimates, converged_mask).  Elements whose terms
    leave the double range get value nan and converged False instead of the
    scalar path's NonConvergence.
    """
    xs = np.asarray(xs, dtype=float)
    cap = term_cap() if max_terms is None else int(max_terms)
    shape = xs.shape
    x = xs.ravel()
    n = x.size
    with np.errstate(divide="ignore"):
        log_x = np.where(x == 0.0, -np.inf, np.log(np.abs(x)))
    sgn_x = np.sign(x)

    log_a = np.zeros(n)
    sgn_a = np.ones(n)
    total = np.zeros(n)
    max_abs = np.zeros(n)
    consec = np.zeros(n, dtype=int)
    done = np.zeros(n, dtype=bool)
    last_abs = np.zeros(n)
    overflow = np.zeros(n, dtype=bool)

    k = 0
    while k < cap and not done.all():
        lg, sg = _log_rgamma(alpha * k + beta)
        log_t = log_a + lg
        bad = (log_t > _LOG_HUGE) & ~done
        overflow |= bad
        done |= bad
        term = np.where(done, 0.0, sgn_a * sg * np.exp(np.minimum(log_t, _LOG_HUGE)))
        total = total + term
        abs_t = np.abs(term)
        max_abs = np.maximum(max_abs, np.where(done, max_abs, abs_t))
        last_abs = np.where(done, last_abs, abs_t)
        k += 1

        fac = gamma + (k - 1)
        if fac == 0.0:  # Pochhammer zero: exact polynomial, nothing omitted
            last_abs = np.where(done, last_abs, 0.0)
            done[:] = True
            break
        log_a = log_a + log_x + math.log(abs(fac)) - math.log(k)
        sgn_a = sgn_a * sgn_x * math.copysign(1.0, fac)

        if sg != 0.0:  # zero terms from 1/Gamma zeros don't witness tail decay
            small = abs_t <= tol * np.maximum(np.abs(total), 5e-324)
            consec = np.where(small & ~done, consec + 1, 0)
            done |= (consec >= 3) & (k > 3)

    floor = 4.0 * _EPS * max_abs * math.sqrt(max(k, 1))
    est = np.maximum(last_abs, floor)
    values = np.where(overflow, np.nan, total)
    est = np.where(overflow, np.inf, est)
    converged = done & ~overflow & (est <= tol * np.maximum(1.0, np.abs(values)))
    return values.reshape(shape), est.reshape(shape), converged.reshape(shape)


def mittag_leffler_neg_int(alpha: float, beta: float, n: int, x: float) -> float:
    """E^{-n}_{alpha,beta}(x) as its exact degree-n polynomial,

        sum_{k=0..n} (-n)_k x^k / (k! Gamma(alpha k + beta)),

    which is the generic series with the terms beyond k=n vanishing.
    """
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ValueError("n must be a positive integer")
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    poch = 1.0  # (-n)_k / k!
    total = 0.0
    for k in range(n + 1):
        total += poch * reciprocal_gamma(alpha * k + beta) * x**k
        poch *= (-n + k) / (k + 1)
    return total


def prabhakar_kernel(p: PrabhakarParams, t: float, tol: float = DEFAULT_TOL) -> SeriesEval:
    """Prabhakar function t^(beta-1) E^gamma_{alpha,beta}(lam t^alpha).

    The upper index used is exactly ``p.gamma``; relaxation-model callers
    that need the kernel with negative upper index pass it explicitly.  For
    beta < 1 the value diverges as t -> 0+; no regularization is applied.
    """
    if not (t > 0):
        raise ValueError("t must be > 0")
    inner = mittag_leffler_3p(p.alpha, p.beta, p.gamma, p.lam * t**p.alpha, tol=tol)
    scale = t ** (p.beta - 1.0)
    if not math.isfinite(scale) or not math.isfinite(inner.value * scale):
        raise NonConvergence(f"kernel prefactor t^(beta-1) overflows at t={t}, beta={p.beta}")
    return SeriesEval(inner.value * scale, inner.terms_used, inner.error_estimate * scale, inner.converged)
