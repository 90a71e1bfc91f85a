"""Directional Borel-Laplace summation with Padé continuation of the Borel transform.

The Borel transform of ``sum a_n x**(n+1)`` is continued beyond its disk of
convergence by a diagonal Padé approximant, and the Laplace integral is taken along
a chosen ray. Singularities of the continuation mark exceptional (Stokes)
directions; summing on either side of one exposes the Stokes jump.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import linalg

from .errors import ConfigurationError, DegenerateOrderError, DomainError, OffsetError, PreconditionError, StokesError
from .exact_oracle import Ray, laplace_along_ray, normalize_angle
from .series_core import BorelSeries, FormalSeries, borel_transform, estimate_radius, shift_offset

#: Pole-zero pairs closer than this are Froissart doublets.
DOUBLET_DISTANCE = 1e-6
#: Poles with smaller residue are dropped as spurious.
MIN_RESIDUE = 1e-10
#: A pole is stable if the order-2 refit has a pole within this distance.
POLE_DRIFT = 1e-3
#: Minimum angle between a summation ray and an exceptional direction.
STOKES_CLEARANCE = 0.05
#: Relative singular-value cutoff for the rank-revealing Padé.
SVD_TOL = 1e-13


@dataclass(frozen=True)
class PadeApproximant:
    p: np.ndarray
    q: np.ndarray
    poles: tuple[complex, ...] = ()
    residues: tuple[complex, ...] = ()
    zeros: tuple[complex, ...] = ()

    @property
    def order(self) -> tuple[int, int]:
        return len(self.p) - 1, len(self.q) - 1

    def __call__(self, zeta):
        return P.polyval(zeta, self.p) / P.polyval(zeta, self.q)

    def taylor(self, n: int) -> np.ndarray:
        """First ``n + 1`` Taylor coefficients of P/Q."""
        out = np.zeros(n + 1, dtype=complex)
        p = np.zeros(n + 1, dtype=complex)
        p[: min(n + 1, len(self.p))] = self.p[: n + 1]
        for k in range(n + 1):
            acc = p[k]
            for j in range(1, min(k, len(self.q) - 1) + 1):
                acc -= self.q[j] * out[k - j]
            out[k] = acc / self.q[0]
        return out


def _rescale_radius(c: np.ndarray) -> float:
    # full-range fit balances |c_0| against |c_N|
    r = estimate_radius(c, tail=c.size)
    if not math.isfinite(r) or r <= 0:
        return 1.0
    return min(max(r, 1e-3), 1e3)


def _trim(v: np.ndarray, tol: float) -> np.ndarray:
    big = np.nonzero(np.abs(v) > tol * np.max(np.abs(v)))[0]
    return v[: big[-1] + 1] if big.size else v[:1]


def pade_fit(B: BorelSeries, L: int, M: int, *, robust: bool = False, svd_tol: float = SVD_TOL) -> PadeApproximant:
    """Padé approximant ``P/Q`` of type ``(L, M)`` with ``Q(0) = 1``.

    The denominator solves the ``M`` linear conditions on coefficients
    ``L+1 .. L+M``; the numerator follows by convolution. Coefficients are rescaled
    by the estimated radius of convergence before solving. With ``robust=True`` the
    system is solved by SVD and the type is lowered until the block has full
    numerical rank, so exactly rational inputs of low degree come back in reduced
    form instead of raising :class:`DegenerateOrderError`.

    Poles closer than 1e-6 to a zero of P, or with residue below 1e-10, are
    reported as Froissart doublets and left out of ``poles``.
    """
    if L < 0 or M < 0:
        raise PreconditionError("Padé orders must be non-negative")
    if L + M + 1 > len(B):
        raise PreconditionError(f"type ({L}, {M}) needs {L + M + 1} coefficients, have {len(B)}")
    c = np.array(B.coeffs[: L + M + 1], dtype=complex)
    if not np.any(c):
        return _finish(np.zeros(1, dtype=complex), np.ones(1, dtype=complex), 1.0)
    r = _rescale_radius(c)
    c = c * r ** np.arange(c.size)

    while True:
        if M == 0:
            q = np.ones(1, dtype=complex)
            break
        col = c[: L + M + 1]
        row = np.zeros(M + 1, dtype=complex)
        row[0] = c[0]
        Z = linalg.toeplitz(col, row)
        C = Z[L + 1 : L + M + 1, :]
        if not robust:
            A = C[:, 1:]
            cond = np.linalg.cond(A)
            if not np.isfinite(cond) or cond > 1e13:
                raise DegenerateOrderError(
                    f"Padé system of type ({L}, {M}) is singular (cond={cond:.2g}); try a smaller M"
                )
            q = np.concatenate([[1.0], linalg.solve(A, -C[:, 0])])
            break
        _, S, Vh = linalg.svd(C, full_matrices=True)
        rank = int(np.sum(S > svd_tol * np.linalg.norm(c)))
        if rank == M:
            q = np.conj(Vh[M, :])
            break
        L, M = max(0, L - (M - rank)), rank

    q = q[: M + 1]
    p = linalg.toeplitz(c[: L + 1], np.r_[c[0], np.zeros(M, dtype=complex)]) @ q
    if robust:
        lead = np.nonzero(np.abs(q) > svd_tol * np.max(np.abs(q)))[0][0]
        if lead > 0:
            raise DegenerateOrderError("denominator vanishes at the origin")
    if abs(q[0]) == 0:
        raise DegenerateOrderError("denominator vanishes at the origin")
    p, q = p / q[0], q / q[0]
    if robust:
        q = _trim(q, svd_tol)
        p = _trim(p, svd_tol)
    return _finish(p, q, r)


def _finish(p: np.ndarray, q: np.ndarray, r: float) -> PadeApproximant:
    p = p / r ** np.arange(p.size)
    q = q / r ** np.arange(q.size)
    poles = P.polyroots(q) if q.size > 1 else np.array([], dtype=complex)
    zeros = P.polyroots(p) if p.size > 1 else np.array([], dtype=complex)
    dq = P.polyder(q)
    keep_p, keep_r = [], []
    used = np.zeros(zeros.size, dtype=bool)
    for pole in poles:
        if zeros.size:
            d = np.abs(zeros - pole)
            d[used] = np.inf
            j = int(np.argmin(d))
            if d[j] < DOUBLET_DISTANCE:
                used[j] = True
                continue
        res = P.polyval(pole, p) / P.polyval(pole, dq)
        if abs(res) < MIN_RESIDUE:
            continue
        keep_p.append(complex(pole))
        keep_r.append(complex(res))
    p.flags.writeable = False
    q.flags.writeable = False
    return PadeApproximant(p, q, tuple(keep_p), tuple(keep_r), tuple(complex(z) for z in zeros))


@dataclass(frozen=True)
class StokesReport:
    singularities: tuple[complex, ...]
    exceptional_directions: tuple[Ray, ...]
    summable_elsewhere: bool
    pade_order: tuple[int, int] = (0, 0)

    def to_dict(self) -> dict:
        return {
            "singularities": [[z.real, z.imag] for z in self.singularities],
            "exceptional_directions": [d.theta for d in self.exceptional_directions],
            "summable_elsewhere": self.summable_elsewhere,
            "pade_order": list(self.pade_order),
        }

    def to_csv(self) -> str:
        lines = ["sing_re,sing_im,theta"]
        for z, d in zip(self.singularities, self.exceptional_directions):
            lines.append(f"{z.real!r},{z.imag!r},{d.theta!r}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SummationResult:
    value: complex
    direction: Ray
    err_estimate: float
    pade_order: tuple[int, int]
    diagnostics: str = ""

    def to_dict(self) -> dict:
        return {
            "value": [self.value.real, self.value.imag],
            "theta": self.direction.theta,
            "err": self.err_estimate,
            "pade_order": list(self.pade_order),
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _stable_poles(fit: PadeApproximant, ref: PadeApproximant, drift: float) -> list[complex]:
    ref_poles = np.array(ref.poles, dtype=complex)
    if ref_poles.size == 0:
        return []
    return [p for p in fit.poles if np.min(np.abs(ref_poles - p)) < drift]


def detect_stokes(B: BorelSeries, order: int, *, drift: float = POLE_DRIFT) -> StokesReport:
    """Singularities of the continued Borel transform and their directions.

    A pole of the diagonal Padé fit of type ``(order//2, order//2)`` is kept only if
    the fit two orders lower has a pole within ``drift`` of it.
    """
    if order < 2:
        raise PreconditionError("detect_stokes needs order >= 2")
    if order > B.order:
        raise PreconditionError(f"order {order} exceeds the {B.order} available coefficients")
    n = order // 2
    fit = pade_fit(B, n, n, robust=True)
    ref = pade_fit(B, n - 1, n - 1, robust=True)
    stable = sorted(_stable_poles(fit, ref, drift), key=lambda z: (abs(z), cmath.phase(z)))
    return StokesReport(
        singularities=tuple(stable),
        exceptional_directions=tuple(Ray(cmath.phase(z)) for z in stable),
        summable_elsewhere=bool(stable),
        pade_order=fit.order,
    )


def _angle_gap(a: float, b: float) -> float:
    return abs(normalize_angle(a - b))


def exponential_type(coeffs: np.ndarray) -> float:
    """Geometric growth rate ``limsup |a_n|**(1/n)`` estimated from the tail.

    Returns 0 for a series whose tail vanishes (a polynomial).
    """
    r = estimate_radius(coeffs)
    return 0.0 if math.isinf(r) else 1.0 / r


def _convergent_at(s: FormalSeries, c: complex, tol: float) -> tuple[bool, float]:
    """Whether the offset-1 series is absolutely convergent for Laplace rate ``c``.

    Compares the exponential type with ``Re(c)`` and bounds the neglected tail by a
    geometric series. Returns ``(converged, ratio)``.
    """
    a = np.abs(s.coeffs)
    rate = c.real
    sigma = exponential_type(s.coeffs)
    rho = sigma / rate
    if rho >= 1:
        return False, rho
    N = s.order
    window = np.arange(max(0, N - max(5, N // 4) + 1), N + 1)
    with np.errstate(over="ignore", under="ignore", divide="ignore"):
        log_terms = np.log(a[window] + 0.0) - (window + 1) * math.log(rate) + (N + 1 - window) * math.log(max(rho, 1e-300))
    tail = float(np.exp(np.max(log_terms))) / (1 - rho) if np.any(a[window]) else 0.0
    return tail <= tol, rho


class BorelPolynomial:
    """Truncated Borel transform ``sum a_n zeta**n / n!`` evaluated term by term in
    log space, so terms with ``n! > 1e308`` still contribute where ``zeta`` is large.

    Behaves as the Padé approximant of type ``(N, 0)``: no poles.
    """

    poles: tuple = ()

    def __init__(self, a):
        self.a = np.array(a, dtype=complex)
        n = np.arange(self.a.size)
        with np.errstate(divide="ignore"):
            self._log_a = np.log(self.a) - np.array([math.lgamma(k + 1) for k in n])
        self._n = n

    @property
    def order(self) -> tuple[int, int]:
        return self.a.size - 1, 0

    def __call__(self, zeta):
        z = np.atleast_1d(np.asarray(zeta, dtype=complex))
        out = np.full(z.shape, self.a[0], dtype=complex)
        nz = z != 0
        if self.a.size > 1 and np.any(nz):
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                logt = self._log_a[1:, None] + self._n[1:, None] * np.log(z[nz])[None, :]
                terms = np.exp(logt)
            terms[~np.isfinite(logt.real) & (logt.real < 0)] = 0
            out[nz] += terms.sum(axis=0)
        return out if np.ndim(zeta) else out[0]


def _continuation(s: FormalSeries, order: int, c: complex, tol: float, continuation: str):
    B = borel_transform(s)
    if continuation not in ("auto", "pade", "taylor"):
        raise PreconditionError(f"unknown continuation {continuation!r}")
    use_taylor = continuation == "taylor"
    rho = math.nan
    if continuation == "auto":
        use_taylor, rho = _convergent_at(s, c, tol)
    if use_taylor:
        # type (N, 0): the Borel polynomial itself, exact for entire transforms whose
        # growth the Laplace kernel dominates
        main = BorelPolynomial(s.coeffs)
        low = BorelPolynomial(s.coeffs[: max(1, len(s) - 2)])
        return main, low, f"taylor continuation (type ratio {rho:.3g})"
    order = min(order, B.order)
    n = order // 2
    main = pade_fit(B, n, n, robust=True)
    low = pade_fit(B, max(n - 1, 0), max(n - 1, 0), robust=True) if n > 0 else main
    return main, low, "diagonal Padé continuation"


def borel_sum(
    s: FormalSeries,
    x: complex,
    theta=0.0,
    order: int = 24,
    tol: float = 1e-10,
    *,
    continuation: str = "auto",
    clearance: float = STOKES_CLEARANCE,
) -> SummationResult:
    """Borel-Laplace sum of ``s`` at ``x`` along the ray at angle ``theta``.

    The Borel transform is continued by a diagonal Padé approximant of type
    ``(order//2, order//2)`` (capped by the available coefficients); when the series
    is absolutely convergent for this ``x`` the Borel polynomial itself is used
    (``continuation="auto"``). Offset-0 input is summed as ``a_0`` plus the Borel
    sum of the remaining offset-1 series.

    ``err_estimate`` is the larger of the quadrature error and the change under a
    refit two orders lower.
    """
    ray = theta if isinstance(theta, Ray) else Ray(float(theta))
    x = complex(x)
    if x == 0:
        raise DomainError("x must be nonzero")
    c = ray.direction / x
    if c.real <= 0:
        raise DomainError(f"Re(e^(i theta)/x) = {c.real:.3g} <= 0: no decay along theta={ray.theta:.4g}")
    a0, rest = shift_offset(s)
    main, low, how = _continuation(rest, order, c, tol, continuation)
    for p in main.poles:
        if _angle_gap(cmath.phase(p), ray.theta) < clearance:
            raise StokesError(
                f"theta={ray.theta:.4g} lies within {clearance} rad of the singular direction {cmath.phase(p):.6g}"
            )
    q = laplace_along_ray(main, ray, x, tol, poles=main.poles)
    diag = [how, f"quadrature err {q.err_estimate:.3g}, {q.n_evals} evals"]
    try:
        q_low = laplace_along_ray(low, ray, x, tol, poles=low.poles)
        sens = abs(q_low.value - q.value)
    except Exception as exc:  # refit failure only weakens the error estimate
        sens = math.inf
        diag.append(f"order-2 refit failed: {exc}")
    err = max(q.err_estimate, sens)
    return SummationResult(a0 + q.value, ray, float(err), main.order, "; ".join(diag))


def _directions_between(directions, lo: float, hi: float) -> list[float]:
    out = []
    for d in directions:
        phi = d.theta if isinstance(d, Ray) else float(d)
        k = math.ceil((lo - phi) / (2 * math.pi))
        cand = phi + 2 * math.pi * k
        if cand == lo:
            cand += 2 * math.pi
        if lo < cand < hi:
            out.append(phi)
    return out


def stokes_jump(
    s: FormalSeries,
    x: complex,
    theta_minus: float,
    theta_plus: float,
    order: int = 24,
    tol: float = 1e-10,
    *,
    full_output: bool = False,
):
    """Difference ``S_plus(x) - S_minus(x)`` of Borel sums on two sides of a Stokes line.

    The angles are read as real numbers with ``theta_minus < theta_plus`` and the
    sector between them must contain at most one exceptional direction. With no
    exceptional direction inside, the jump is (numerically) zero. With
    ``full_output`` the pair ``(jump, err_estimate)`` is returned.
    """
    if not theta_minus < theta_plus < theta_minus + 2 * math.pi:
        raise ConfigurationError("need theta_minus < theta_plus < theta_minus + 2 pi")
    if s.offset != 1:
        _, s_b = shift_offset(s)
    else:
        s_b = s
    B = borel_transform(s_b)
    dirs: list = []
    if B.order >= 4:
        dirs = list(detect_stokes(B, min(order, B.order)).exceptional_directions)
    inside = _directions_between(dirs, theta_minus, theta_plus)
    if len(set(round(p, 6) for p in inside)) > 1:
        raise ConfigurationError(f"{len(inside)} exceptional directions lie between the rays")
    plus = borel_sum(s, x, theta_plus, order, tol)
    minus = borel_sum(s, x, theta_minus, order, tol)
    jump = plus.value - minus.value
    if full_output:
        return jump, plus.err_estimate + minus.err_estimate
    return jump
