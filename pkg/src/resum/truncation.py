"""Optimal truncation of the Euler series and its rigorous remainder bound."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional

import mpmath

from .errors import PreconditionError, SeriesOverflowError
from .exact_oracle import euler_exact, laplace_along_ray
from .series_core import MAX_FACTORIAL_ORDER

#: Term magnitude above which partial sums and remainders switch to mpmath.
EXTENDED_PRECISION_THRESHOLD = 1e3

CSV_HEADER = ("k", "partial_sum_re", "partial_sum_im", "bound", "actual_error", "remainder_integral")


@dataclass(frozen=True)
class TruncationReport:
    k: int
    partial_sum: complex
    bound: float
    actual_error: Optional[float]
    superasymptotic: float
    remainder_integral: Optional[float] = None
    # |R_k - (f - f_k)| evaluated before rounding to double
    identity_defect: Optional[float] = None

    def __post_init__(self):
        if self.bound < 0:
            raise PreconditionError("bound must be non-negative")


def _check_x(x: float) -> float:
    x = float(x)
    if not x > 0:
        raise PreconditionError("x must be positive")
    return x


def remainder_bound(k: int, x: float) -> float:
    """First neglected term ``k! x**(k+1)`` bounding ``|f(x) - f_k(x)|``."""
    x = _check_x(x)
    if k < 0:
        raise PreconditionError("k must be non-negative")
    if k > MAX_FACTORIAL_ORDER:
        raise SeriesOverflowError(f"{k}! overflows a double")
    log_b = math.lgamma(k + 1) + (k + 1) * math.log(x)
    if log_b > 709.7:
        raise SeriesOverflowError(f"k! x^(k+1) overflows for k={k}, x={x}")
    return float(math.factorial(k)) * x ** (k + 1)


def optimal_k(x: float) -> int:
    """Index minimising ``k! x**(k+1)``; ties go to the smaller k.

    Consecutive bounds differ by the factor ``(k+1) x``, so the scan stops at the
    first k where that factor reaches 1.
    """
    x = _check_x(x)
    if x > 1:
        raise PreconditionError("optimal_k needs 0 < x <= 1")
    k = 0
    while (k + 1) * x < 1:
        k += 1
    return k


def superasymptotic_estimate(x: float) -> float:
    """``sqrt(2 pi x) exp(-1/x)``, the error left at optimal truncation."""
    x = _check_x(x)
    return math.sqrt(2 * math.pi * x) * math.exp(-1 / x)


def stirling_approx(k: int) -> float:
    """``sqrt(2 pi) k**(k + 1/2) exp(-k)``, assembled in log space."""
    if k < 1:
        raise PreconditionError("k must be >= 1")
    log_s = 0.5 * math.log(2 * math.pi) + (k + 0.5) * math.log(k) - k
    try:
        return math.exp(log_s)
    except OverflowError as exc:
        raise SeriesOverflowError(f"Stirling value for k={k} overflows a double") from exc


def _working_dps(k: int, x: float) -> int:
    log_peak = max(math.lgamma(n + 1) + (n + 1) * math.log(x) for n in range(k + 1))
    return 20 + max(0, int(log_peak / math.log(10)))


def _needs_extended(k: int, x: float) -> bool:
    log_peak = max(math.lgamma(n + 1) + (n + 1) * math.log(x) for n in range(k + 1))
    return log_peak > math.log(EXTENDED_PRECISION_THRESHOLD)


def remainder_integral(k: int, x: float, tol: float = 1e-12, *, as_mpf: bool = False):
    """``(-1)**k int_0^inf zeta**k exp(-zeta/x) / (1 + zeta) dzeta`` by quadrature.

    Small magnitudes use Gauss-Laguerre in double precision; large ones use
    tanh-sinh quadrature in mpmath at a precision covering the magnitude.
    """
    x = _check_x(x)
    if k < 0:
        raise PreconditionError("k must be non-negative")
    sign = -1 if k % 2 else 1
    if not _needs_extended(k, x) and not as_mpf:
        res = laplace_along_ray(lambda z: z**k / (1 + z), 0.0, x, tol, poles=(-1.0,))
        return sign * res.value.real
    with mpmath.workdps(_working_dps(k, x)):
        X = mpmath.mpf(x)
        inner = mpmath.quad(lambda u: u**k * mpmath.exp(-u) / (1 + X * u), [0, max(k, 1), 2 * k + 10, mpmath.inf])
        val = sign * X ** (k + 1) * inner
        return +val if as_mpf else float(val)


def _euler_partial_sum_mp(x: float, k: int):
    X = mpmath.mpf(x)
    total = mpmath.mpf(0)
    term = X
    for n in range(k):
        total += term
        term *= -(n + 1) * X
    return total


def truncation_sweep(x: float, k_max: int, tol: float = 1e-12) -> list[TruncationReport]:
    """Partial sums, bounds, true errors and remainder integrals for ``k = 0..k_max``."""
    x = _check_x(x)
    if x > 0.5:
        raise PreconditionError("truncation_sweep expects x <= 0.5")
    if not 0 <= k_max <= MAX_FACTORIAL_ORDER:
        raise PreconditionError(f"k_max must lie in [0, {MAX_FACTORIAL_ORDER}]")
    f = euler_exact(x, "laplace", tol).value.real
    sup = superasymptotic_estimate(x)
    reports = []
    for k in range(k_max + 1):
        with mpmath.workdps(_working_dps(k, x)):
            fk = _euler_partial_sum_mp(x, k)
            diff = mpmath.mpf(f) - fk
            if _needs_extended(k, x):
                rk = remainder_integral(k, x, tol, as_mpf=True)
            else:
                rk = mpmath.mpf(remainder_integral(k, x, tol))
            defect = float(abs(rk - diff))
            reports.append(
                TruncationReport(
                    k=k,
                    partial_sum=complex(float(fk)),
                    bound=remainder_bound(k, x),
                    actual_error=float(abs(diff)),
                    superasymptotic=sup,
                    remainder_integral=float(rk),
                    identity_defect=defect,
                )
            )
    return reports


def reports_to_csv(reports: list[TruncationReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in reports:
        w.writerow(
            [
                r.k,
                repr(r.partial_sum.real),
                repr(r.partial_sum.imag),
                repr(r.bound),
                "" if r.actual_error is None else repr(r.actual_error),
                "" if r.remainder_integral is None else repr(r.remainder_integral),
            ]
        )
    return buf.getvalue()


def optimal_report(x: float, tol: float = 1e-12) -> TruncationReport:
    """Report at ``k = optimal_k(x)`` with the true error against the exact solution."""
    k = optimal_k(x)
    f = euler_exact(x, "laplace", tol).value.real
    fk = float(_euler_partial_sum_mp(x, k))
    return TruncationReport(k, complex(fk), remainder_bound(k, x), abs(f - fk), superasymptotic_estimate(x))


__all__ = [
    "TruncationReport",
    "remainder_bound",
    "optimal_k",
    "superasymptotic_estimate",
    "stirling_approx",
    "remainder_integral",
    "truncation_sweep",
    "optimal_report",
    "reports_to_csv",
]
