"""Truncated formal power series and the recurrences generating formal ODE solutions.

A :class:`FormalSeries` stores ``sum_n a_n x**(n + offset)`` with the offset carried
explicitly (0 or 1). Coefficients are double-precision complex and immutable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import OffsetError, PreconditionError, SeriesOverflowError

#: Largest n with n! representable as a double.
MAX_FACTORIAL_ORDER = 170


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=complex).ravel()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class FormalSeries:
    offset: int
    coeffs: np.ndarray
    label: str = ""

    def __post_init__(self):
        coeffs = _frozen(self.coeffs)
        if coeffs.size == 0:
            raise PreconditionError("a series needs at least one coefficient")
        if not np.all(np.isfinite(coeffs)):
            raise PreconditionError("series coefficients must be finite")
        if self.offset not in (0, 1):
            raise OffsetError(f"offset must be 0 or 1, got {self.offset!r}")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def order(self) -> int:
        """Index N of the last stored coefficient."""
        return self.coeffs.size - 1

    def __len__(self) -> int:
        return self.coeffs.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, FormalSeries):
            return NotImplemented
        return (
            self.offset == other.offset
            and self.coeffs.shape == other.coeffs.shape
            and bool(np.all(self.coeffs == other.coeffs))
        )

    __hash__ = None  # type: ignore[assignment]

    def truncate(self, N: int) -> "FormalSeries":
        if not 0 <= N <= self.order:
            raise PreconditionError(f"cannot truncate order {self.order} series at {N}")
        return FormalSeries(self.offset, self.coeffs[: N + 1], self.label)

    def __call__(self, x):
        """Evaluate the full stored polynomial at ``x`` (scalar or array)."""
        return eval_partial_sum(self, x, len(self))

    def to_dict(self) -> dict:
        return {
            "offset": self.offset,
            "re": [float(c.real) for c in self.coeffs],
            "im": [float(c.imag) for c in self.coeffs],
            "label": self.label,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "FormalSeries":
        re = list(data["re"])
        im = list(data.get("im") or [0.0] * len(re))
        if len(re) != len(im):
            raise PreconditionError("'re' and 'im' must have equal length")
        coeffs = np.array(re, dtype=float) + 1j * np.array(im, dtype=float)
        return cls(int(data.get("offset", 0)), coeffs, str(data.get("label", "")))

    @classmethod
    def from_json(cls, text: str) -> "FormalSeries":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class BorelSeries:
    """Borel-plane coefficients ``b_n = a_n / n!`` of an offset-1 formal series."""

    coeffs: np.ndarray
    source_offset: int = 1
    radius_estimate: float = field(default=math.nan)

    def __post_init__(self):
        coeffs = _frozen(self.coeffs)
        if coeffs.size == 0 or not np.all(np.isfinite(coeffs)):
            raise PreconditionError("Borel coefficients must be finite and non-empty")
        object.__setattr__(self, "coeffs", coeffs)
        if math.isnan(self.radius_estimate):
            object.__setattr__(self, "radius_estimate", estimate_radius(coeffs))

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    def __len__(self) -> int:
        return self.coeffs.size

    def __call__(self, zeta):
        """Evaluate the truncated Taylor polynomial of the Borel transform."""
        return np.polynomial.polynomial.polyval(zeta, self.coeffs)


def estimate_radius(coeffs: Sequence[complex], tail: int | None = None) -> float:
    """Radius of convergence from a log-linear fit of ``|b_n|`` over the tail.

    The fit uses the last ``max(5, N // 4)`` coefficients; zero coefficients are
    skipped. Returns ``inf`` when fewer than two nonzero tail terms remain.
    """
    b = np.abs(np.asarray(coeffs, dtype=complex))
    N = b.size - 1
    if tail is None:
        tail = max(5, N // 4)
    start = max(1, N - tail + 1)
    n = np.arange(start, N + 1)
    mags = b[start:]
    keep = mags > 0
    if np.count_nonzero(keep) < 2:
        return math.inf
    slope = np.polyfit(n[keep], np.log(mags[keep]), 1)[0]
    return float(np.exp(-slope))


def euler_formal_coeffs(N: int) -> FormalSeries:
    """Coefficients ``a_n = (-1)**n n!`` of the formal solution of x^2 y' + y = x.

    The series is returned with offset 1, i.e. ``sum a_n x**(n+1)``.
    """
    if N < 0:
        raise PreconditionError("N must be non-negative")
    if N > MAX_FACTORIAL_ORDER:
        raise SeriesOverflowError(
            f"a_{N} = {N}! overflows a double; use the Borel-plane coefficients instead"
        )
    a = [1.0]
    for n in range(1, N + 1):
        a.append(-n * a[-1])
    return FormalSeries(1, np.array(a, dtype=complex), f"euler(N={N})")


def generalized_euler_coeffs(g: FormalSeries, N: int) -> FormalSeries:
    """Formal solution vanishing at 0 of ``x^2 y' + y = g(x)``.

    ``g`` must have offset 0 and ``g(0) = 0``; its stored coefficients are read as a
    polynomial, so entries past ``g.order`` are zero. The result (offset 0) obeys
    ``c_n = g_n - (n - 1) c_{n-1}``.
    """
    if g.offset != 0:
        raise OffsetError("g must be given with offset 0")
    if g.coeffs[0] != 0:
        raise PreconditionError("g(0) must vanish")
    if N < 0:
        raise PreconditionError("N must be non-negative")
    gn = np.zeros(N + 1, dtype=complex)
    m = min(N + 1, len(g))
    gn[:m] = g.coeffs[:m]
    c = np.zeros(N + 1, dtype=complex)
    with np.errstate(over="raise", invalid="raise"):
        try:
            for n in range(1, N + 1):
                c[n] = gn[n] - (n - 1) * c[n - 1]
        except FloatingPointError as exc:
            raise SeriesOverflowError(f"coefficient overflow before order {N}") from exc
    if not np.all(np.isfinite(c)):
        raise SeriesOverflowError(f"coefficient overflow before order {N}")
    return FormalSeries(0, c, f"x^2 y' + y = g, N={N}")


def _inverse_factorials(N: int) -> np.ndarray:
    out = np.empty(N + 1)
    for n in range(N + 1):
        if n <= MAX_FACTORIAL_ORDER:
            out[n] = 1.0 / math.factorial(n)
        else:
            out[n] = math.exp(-math.lgamma(n + 1))
    return out


def borel_transform(s: FormalSeries) -> BorelSeries:
    """Map ``sum a_n x**(n+1)`` to ``sum a_n zeta**n / n!``."""
    if s.offset != 1:
        raise OffsetError("the Borel transform is defined here for offset-1 series")
    b = s.coeffs * _inverse_factorials(s.order)
    return BorelSeries(b, source_offset=1)


def shift_offset(s: FormalSeries) -> tuple[complex, FormalSeries]:
    """Split an offset-0 series into ``(a_0, rest)`` with ``rest`` of offset 1."""
    if s.offset == 1:
        return 0j, s
    if len(s) == 1:
        return complex(s.coeffs[0]), FormalSeries(1, [0.0], s.label)
    return complex(s.coeffs[0]), FormalSeries(1, s.coeffs[1:], s.label)


def cauchy_product(a: FormalSeries, b: FormalSeries) -> FormalSeries:
    """Coefficientwise convolution, truncated at the shorter input's order."""
    if a.offset != 0 or b.offset != 0:
        raise OffsetError("cauchy_product needs two offset-0 series")
    N = min(a.order, b.order)
    c = np.convolve(a.coeffs[: N + 1], b.coeffs[: N + 1])[: N + 1]
    return FormalSeries(0, c, f"({a.label})*({b.label})")


def formal_derivative(s: FormalSeries) -> FormalSeries:
    """Term-by-term derivative; the result always has offset 0.

    An offset-0 series of order N gives order N-1 (a constant gives the zero
    series); an offset-1 series ``sum a_n x**(n+1)`` gives ``sum (n+1) a_n x**n``.
    """
    n = np.arange(len(s))
    if s.offset == 1:
        return FormalSeries(0, (n + 1) * s.coeffs, f"d/dx {s.label}")
    if len(s) == 1:
        return FormalSeries(0, [0.0], f"d/dx {s.label}")
    return FormalSeries(0, n[1:] * s.coeffs[1:], f"d/dx {s.label}")


def eval_partial_sum(s: FormalSeries, x, k: int):
    """``sum_{n<k} a_n x**(n + offset)`` by Horner's scheme."""
    if not 0 <= k <= len(s):
        raise PreconditionError(f"k={k} outside [0, {len(s)}]")
    x = np.asarray(x, dtype=complex)
    acc = np.zeros_like(x)
    for c in s.coeffs[:k][::-1]:
        acc = acc * x + c
    if s.offset:
        acc = acc * x
    return acc[()] if acc.ndim == 0 else acc
