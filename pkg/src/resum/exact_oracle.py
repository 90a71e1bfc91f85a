"""Ground-truth numerics: Laplace integrals along rays, the exact Euler solution,
and complex-path integration of ``(x^2 - eps) y' + y = g(x)``.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate
from scipy.special import roots_laguerre

from .errors import AccuracyError, DomainError, PathError, PoleOnRayError, PreconditionError, StiffnessError

#: Gauss-Laguerre node counts tried in turn; each doubling supplies the error estimate.
GL_LADDER = (32, 64, 128, 256)

#: Poles of the Borel integrand closer than this to the ray trigger the adaptive fallback.
NEAR_POLE_DISTANCE = 0.5

#: Default clearance of a path from the singular points, as a multiple of sqrt(eps).
PATH_CLEARANCE_FACTOR = 0.1


def normalize_angle(theta: float) -> float:
    """Map an angle to (-pi, pi]."""
    t = math.fmod(float(theta), 2 * math.pi)
    if t <= -math.pi:
        t += 2 * math.pi
    elif t > math.pi:
        t -= 2 * math.pi
    return t


@dataclass(frozen=True)
class Ray:
    """Half-line ``{t e^{i theta} : t >= 0}`` of the Borel plane."""

    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    @property
    def direction(self) -> complex:
        return cmath.exp(1j * self.theta)

    def distance_to(self, p: complex) -> float:
        rot = complex(p) * cmath.exp(-1j * self.theta)
        if rot.real <= 0:
            return abs(rot)
        return abs(rot.imag)


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    err_estimate: float
    n_evals: int

    def to_dict(self) -> dict:
        v = complex(self.value)
        return {"value": [v.real, v.imag], "err": float(self.err_estimate), "n_evals": int(self.n_evals)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _check_tol(tol: float) -> None:
    if not 1e-14 <= tol <= 1e-3:
        raise PreconditionError(f"tol={tol} outside [1e-14, 1e-3]")


@lru_cache(maxsize=None)
def _gl_rule(m: int) -> tuple[np.ndarray, np.ndarray]:
    u, w = roots_laguerre(m)
    u.flags.writeable = False
    w.flags.writeable = False
    return u, w


def _as_ray(theta) -> Ray:
    return theta if isinstance(theta, Ray) else Ray(float(theta))


def laplace_along_ray(
    B: Callable,
    theta,
    x: complex,
    tol: float = 1e-10,
    *,
    poles: Sequence[complex] = (),
    near_pole_distance: float = NEAR_POLE_DISTANCE,
) -> QuadratureResult:
    """``int_d B(zeta) exp(-zeta/x) dzeta`` along the ray ``d`` at angle ``theta``.

    The ray is parametrised as ``zeta = t e^{i theta}`` and rescaled by
    ``u = t Re(e^{i theta}/x)``, after which Gauss-Laguerre rules of increasing size
    are applied; the difference between consecutive rules is the error estimate.
    ``B`` must accept numpy arrays. When one of ``poles`` lies within
    ``near_pole_distance`` of the ray, or the Gauss-Laguerre ladder fails to
    converge, adaptive QUADPACK integration takes over.
    """
    ray = _as_ray(theta)
    x = complex(x)
    if x == 0:
        raise DomainError("x = 0 has no Laplace integral")
    e = ray.direction
    c = e / x
    if c.real <= 0:
        raise DomainError(f"Re(e^(i theta)/x) = {c.real:.3g} <= 0: integrand does not decay on the ray")
    scale = 1.0 / c.real
    rot = c.imag / c.real
    n_evals = 0

    def integrand(u):
        nonlocal n_evals
        u = np.asarray(u, dtype=float)
        n_evals += u.size
        zeta = u * scale * e
        with np.errstate(all="ignore"):
            vals = np.asarray(B(zeta), dtype=complex)
        if not np.all(np.isfinite(vals)):
            raise PoleOnRayError(
                f"Borel integrand is not finite on the ray theta={ray.theta:.6g}: exceptional direction?"
            )
        return vals * np.exp(-1j * rot * u)

    # a pole close to the ray either in zeta or in the rescaled variable u spoils
    # the polynomial approximation behind Gauss-Laguerre
    if any(min(ray.distance_to(p), ray.distance_to(p) / scale) < near_pole_distance for p in poles):
        return _adaptive_ray(integrand, e * scale, tol, lambda: n_evals, ray, poles)

    prev = None
    for m in GL_LADDER:
        u, w = _gl_rule(m)
        # nodes whose weight underflowed contribute nothing; skipping them keeps
        # fast-growing entire integrands from overflowing there
        live = w > 0
        u, w = u[live], w[live]
        f = integrand(u)
        val = complex(np.dot(w, f)) * e * scale
        floor = 64 * np.finfo(float).eps * float(np.dot(w, np.abs(f))) * scale
        if prev is not None:
            err = abs(val - prev)
            if err <= max(tol, floor):
                return QuadratureResult(val, max(err, floor), n_evals)
        prev = val
    return _adaptive_ray(integrand, e * scale, tol, lambda: n_evals, ray, poles)


def _adaptive_ray(integrand, factor, tol, count, ray, poles) -> QuadratureResult:
    """QUADPACK fallback on ``u in [0, inf)`` with breakpoints at nearby poles."""
    c_scale = abs(factor)
    breaks = set()
    for p in poles:
        proj = (complex(p) * np.conj(ray.direction)).real / c_scale
        near = ray.distance_to(p) / c_scale
        if proj > 0 and ray.distance_to(p) < 2 * NEAR_POLE_DISTANCE:
            breaks.add(proj)
        # graded points resolve a pole hugging the start of the ray
        base = max(proj, 0.0) + near
        if base < 1:
            breaks.update(base * 4.0**j for j in range(-2, 4) if base * 4.0**j < 1)
    breaks = sorted(b for b in breaks if b > 0)
    split = max([1.0] + [2 * b for b in breaks])
    def scalar(u):
        return complex(integrand(np.array([u]))[0]) * np.exp(-u)

    opts = dict(epsabs=tol / (4 * c_scale), epsrel=0.0, limit=400, complex_func=True)
    v1, e1 = integrate.quad(scalar, 0.0, split, points=breaks or None, **opts)
    v2, e2 = integrate.quad(scalar, split, np.inf, **opts)
    val = (v1 + v2) * factor
    err = float(abs(complex(e1)) + abs(complex(e2))) * c_scale
    if err > tol:
        raise AccuracyError(f"adaptive Laplace quadrature reached only {err:.3g}", val, err)
    return QuadratureResult(complex(val), err, count())


def euler_exact(x: complex, method: str = "laplace", tol: float = 1e-12) -> QuadratureResult:
    """The solution of ``x^2 y' + y = x`` that tends to 0 as ``x -> 0+``.

    ``method="laplace"`` evaluates ``int_0^inf exp(-zeta/x) / (1 + zeta) dzeta``;
    ``method="direct"`` evaluates ``exp(1/x) int_0^x exp(-1/z) / z dz`` on the
    straight segment from 0 to ``x``. Valid on the half-plane ``Re(1/x) > 0``;
    ``x = 0`` returns the limit 0.
    """
    _check_tol(tol)
    x = complex(x)
    if x == 0:
        return QuadratureResult(0j, 0.0, 1)
    w = 1 / x
    if w.real <= 0:
        raise DomainError(f"Re(1/x) = {w.real:.3g} <= 0 is outside the convergence half-plane")
    if method == "laplace":
        # the ray through x itself makes the exponential real; the pole at -1 stays
        # at distance >= 1 from it for every admissible x
        return laplace_along_ray(lambda z: 1.0 / (1.0 + z), cmath.phase(x), x, tol, poles=(-1.0,))
    if method == "direct":
        return _euler_direct(w, tol)
    raise PreconditionError(f"unknown method {method!r}")


def _euler_direct(w: complex, tol: float) -> QuadratureResult:
    # z = x s, s in (0, 1]: integrand exp(w (1 - 1/s)) / s, combined to avoid overflow
    calls = 0

    def f(s):
        nonlocal calls
        calls += 1
        if s <= 0:
            return 0j
        arg = w * (1 - 1 / s)
        if arg.real < -745:
            return 0j
        return cmath.exp(arg) / s

    width = 1 / abs(w)
    points = sorted({max(0.0, 1 - k * width) for k in (1, 4, 16, 64)} - {0.0, 1.0})
    val, err = integrate.quad(f, 0.0, 1.0, points=points or None, epsabs=tol / 4, epsrel=0.0, limit=500, complex_func=True)
    err = float(abs(complex(err)))
    if err > tol:
        raise AccuracyError(f"direct quadrature reached only {err:.3g}", complex(val), err)
    return QuadratureResult(complex(val), err, calls)


def _segment_distance(a: complex, b: complex, p: complex) -> float:
    d = b - a
    if d == 0:
        return abs(p - a)
    t = ((p - a) * d.conjugate()).real / abs(d) ** 2
    t = min(1.0, max(0.0, t))
    return abs(a + t * d - p)


def singular_points(eps: float) -> tuple[complex, ...]:
    if eps < 0:
        raise PreconditionError("eps must be non-negative")
    s = math.sqrt(eps)
    return (0j,) if s == 0 else (complex(s), complex(-s))


def check_path(eps: float, path: Sequence[complex], clearance: float | None = None) -> None:
    """Raise :class:`PathError` if a polyline comes within ``clearance`` of ``+-sqrt(eps)``."""
    if clearance is None:
        clearance = PATH_CLEARANCE_FACTOR * math.sqrt(eps)
    pts = [complex(p) for p in path]
    for sp in singular_points(eps):
        segs = zip(pts, pts[1:]) if len(pts) > 1 else [(pts[0], pts[0])]
        for a, b in segs:
            d = _segment_distance(a, b, sp)
            if d <= clearance or d == 0:
                raise PathError(f"path passes within {d:.3g} of the singular point {sp.real:+.6g}")


def integrate_path(
    eps: float,
    g: Callable,
    y_start: complex,
    path: Sequence[complex],
    tol: float = 1e-12,
    *,
    clearance: float | None = None,
    method: str = "RK45",
) -> np.ndarray:
    """Values of ``y`` at every waypoint of ``path`` (the first being the start)."""
    pts = [complex(p) for p in path]
    if not pts:
        raise PreconditionError("path needs at least one waypoint")
    check_path(eps, pts, clearance)
    out = [complex(y_start)]
    y = complex(y_start)
    for a, b in zip(pts, pts[1:]):
        d = b - a
        if d != 0:
            y = _integrate_segment(eps, g, a, d, y, tol, method)
        out.append(y)
    return np.array(out)


def _integrate_segment(eps, g, a, d, y, tol, method):
    def rhs(t, yv):
        xx = a + t * d
        return d * (g(xx) - yv) / (xx * xx - eps)

    sol = integrate.solve_ivp(rhs, (0.0, 1.0), np.array([y], dtype=complex), method=method, rtol=tol, atol=tol * abs(d))
    if sol.status != 0:
        if "step size" in sol.message:
            raise StiffnessError(sol.message)
        raise StiffnessError(f"integration failed: {sol.message}")
    return complex(sol.y[0, -1])


def ode_continue(
    eps: float,
    g: Callable,
    x_start: complex,
    y_start: complex,
    path: Sequence[complex],
    tol: float = 1e-12,
    *,
    clearance: float | None = None,
    method: str = "RK45",
) -> complex:
    """Continue a solution of ``(x^2 - eps) y' + y = g(x)`` along a polyline.

    ``path[0]`` must be ``x_start``. Integration uses an embedded Runge-Kutta 4(5)
    pair per segment in complex arithmetic.
    """
    if not path or complex(path[0]) != complex(x_start):
        raise PreconditionError("x_start must be the first waypoint of the path")
    return complex(integrate_path(eps, g, y_start, path, tol, clearance=clearance, method=method)[-1])


def path_to_json(path: Sequence[complex]) -> str:
    return json.dumps([[complex(p).real, complex(p).imag] for p in path])


def path_from_json(text: str) -> list[complex]:
    return [complex(re, im) for re, im in json.loads(text)]
