"""Unfolding of the double singular point: ``(x^2 - eps) y' + y = g(x)``.

For ``eps > 0`` the equation has simple singular points ``x1 = sqrt(eps)`` and
``x2 = -sqrt(eps)``. The solution bounded at ``x1`` is a power series ``h1``; near
``x2`` every solution is ``h2 + C H`` with the homogeneous solution
``H = ((x + s)/(x - s))**(1/(2 s))``, ``s = sqrt(eps)``. Continuing ``h1`` to ``x2``
along a path below the real segment fixes the connection coefficient ``C2``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import BranchError, OffsetError, PreconditionError, ResonanceError, ResumError
from .exact_oracle import integrate_path
from .series_core import FormalSeries, estimate_radius

#: Distance of 1/(2 sqrt(eps)) to an integer below which eps counts as resonant.
RESONANCE_TOL = 1e-9

#: fit_residual above this raises BranchError.
MAX_FIT_RESIDUAL = 1e-4

SWEEP_HEADER = ("eps", "C2_re", "C2_im", "abs_C2", "fit_residual", "nearest_resonance")

# sample density used to follow arguments continuously along a path
_SAMPLES_PER_SEGMENT = 64


@dataclass(frozen=True)
class UnfoldingConfig:
    eps: float
    g: FormalSeries
    N: int = 60
    path_clearance: Optional[float] = None

    def __post_init__(self):
        eps = float(self.eps)
        if not (eps > 0 and math.isfinite(eps)):
            raise PreconditionError("eps must be a positive real number")
        if self.g.offset != 0:
            raise OffsetError("g must be given with offset 0")
        if int(self.N) < 2:
            raise PreconditionError("N must be at least 2")
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "N", int(self.N))
        if self.path_clearance is None:
            object.__setattr__(self, "path_clearance", 0.1 * math.sqrt(eps))
        elif not self.path_clearance > 0:
            raise PreconditionError("path_clearance must be positive")

    @property
    def s(self) -> float:
        return math.sqrt(self.eps)

    def g_at(self, x):
        return self.g(x)


@dataclass(frozen=True)
class LocalSolution:
    center: complex
    coeffs: np.ndarray
    radius_estimate: float
    note: str = ""

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if not np.all(np.isfinite(c)):
            raise PreconditionError("local series coefficients must be finite")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    def __call__(self, x):
        u = np.asarray(x, dtype=complex) - self.center
        acc = np.zeros_like(u)
        for c in self.coeffs[::-1]:
            acc = acc * u + c
        return acc[()] if acc.ndim == 0 else acc


@dataclass(frozen=True)
class ConnectionReport:
    C2: complex
    fit_residual: float
    resonance: bool
    resonance_order: Optional[int]
    branch_note: str
    eps: float = math.nan
    approach_radius: float = math.nan
    side: str = "below"
    C1: complex = 0j
    landing_points: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if not self.fit_residual >= 0:
            raise PreconditionError("fit_residual must be non-negative")

    @property
    def x1(self) -> float:
        return math.sqrt(self.eps)

    @property
    def x2(self) -> float:
        return -math.sqrt(self.eps)

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "x1": self.x1,
            "x2": self.x2,
            "C1": [complex(self.C1).real, complex(self.C1).imag],
            "C2": [complex(self.C2).real, complex(self.C2).imag],
            "abs_C2": abs(self.C2),
            "fit_residual": self.fit_residual,
            "resonance": self.resonance,
            "resonance_order": self.resonance_order,
            "branch_note": self.branch_note,
            "approach_radius": self.approach_radius,
            "side": self.side,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


# ---- resonance ----------------------------------------------------------------------


def resonance_order(eps: float) -> Optional[int]:
    """``n`` if ``1/(2 sqrt(eps))`` is within RESONANCE_TOL of the positive integer n."""
    q = 1 / (2 * math.sqrt(eps))
    n = round(q)
    if n >= 1 and abs(q - n) <= RESONANCE_TOL:
        return int(n)
    return None


def resonance_set(eps_max: float, n_max: int) -> list[float]:
    """Resonant values ``1/(4 n**2) <= eps_max`` for ``n = 1..n_max``, descending."""
    if eps_max > 1:
        raise PreconditionError("eps_max must be <= 1")
    return [1 / (4 * n * n) for n in range(1, int(n_max) + 1) if 1 / (4 * n * n) <= eps_max]


def nearest_resonance(eps: float) -> float:
    """Distance in eps to the closest resonant value ``1/(4 n**2)``."""
    q = 1 / (2 * math.sqrt(eps))
    cands = {max(1, math.floor(q)), max(1, math.ceil(q))}
    return min(abs(eps - 1 / (4 * n * n)) for n in cands)


# ---- local series -------------------------------------------------------------------


def taylor_shift(coeffs: Sequence[complex], c: complex) -> np.ndarray:
    """Coefficients of ``p(u + c)`` in powers of ``u``, by repeated synthetic division."""
    a = np.array(coeffs, dtype=complex)
    n = a.size
    for k in range(n - 1):
        for j in range(n - 2, k - 1, -1):
            a[j] += c * a[j + 1]
    return a


def _local_recurrence(g_tilde: np.ndarray, N: int, sign: int, s: float):
    """Run ``h_n = (g_n - (n-1) h_{n-1}) / (1 + sign 2 s n)``.

    Returns ``(h, resonant_n, note)``. At a vanishing denominator the numerator
    decides: zero gives the convention ``h_n = 0``; nonzero raises ResonanceError.
    """
    n_res = resonance_order(s * s) if sign < 0 else None
    top = max(N, n_res or 0)
    gt = np.zeros(top + 1, dtype=complex)
    m = min(top + 1, g_tilde.size)
    gt[:m] = g_tilde[:m]
    h = np.zeros(top + 1, dtype=complex)
    h[0] = gt[0]
    note = ""
    for n in range(1, top + 1):
        num = gt[n] - (n - 1) * h[n - 1]
        if n == n_res:
            scale = max(1.0, abs(gt[n]), abs((n - 1) * h[n - 1]))
            if abs(num) > 1e-12 * scale:
                raise ResonanceError(
                    f"resonant order n={n}: 1/(2 sqrt(eps)) = {n}, numerator {abs(num):.3g} != 0 "
                    "(the local solution at -sqrt(eps) carries a logarithm)",
                    n,
                )
            h[n] = 0
            note = f"resonant order n={n} with vanishing numerator; convention h_{n} := 0"
            continue
        h[n] = num / (1 + sign * 2 * s * n)
    return h[: N + 1], n_res, note


def _local(cfg: UnfoldingConfig, sign: int) -> LocalSolution:
    s = cfg.s
    center = sign * s
    g_tilde = taylor_shift(cfg.g.coeffs, center)
    h, _, note = _local_recurrence(g_tilde, cfg.N, sign, s)
    # the other singular point lies at distance 2 s
    radius = min(estimate_radius(h), 2 * s)
    return LocalSolution(complex(center), h, radius, note)


def local_series_plus(cfg: UnfoldingConfig) -> LocalSolution:
    """Taylor coefficients at ``+sqrt(eps)`` of the solution bounded there."""
    return _local(cfg, +1)


def local_series_minus(cfg: UnfoldingConfig) -> LocalSolution:
    """Taylor coefficients at ``-sqrt(eps)`` of the analytic solution there.

    Raises :class:`ResonanceError` (with ``order``) when ``1/(2 sqrt(eps))`` is an
    integer n and the numerator at order n does not vanish.
    """
    return _local(cfg, -1)


def homogeneous(eps: float, x, log_plus=None, log_minus=None):
    """``((x + s)/(x - s))**(1/(2 s))``; principal logs unless continued ones are given."""
    s = math.sqrt(eps)
    x = np.asarray(x, dtype=complex)
    lp = np.log(x + s) if log_plus is None else log_plus
    lm = np.log(x - s) if log_minus is None else log_minus
    return np.exp((lp - lm) / (2 * s))


# ---- continuation -------------------------------------------------------------------


def _dense(path: Sequence[complex]) -> np.ndarray:
    pts = [complex(p) for p in path]
    out = [pts[0]]
    for a, b in zip(pts, pts[1:]):
        t = np.linspace(0, 1, _SAMPLES_PER_SEGMENT + 1)[1:]
        out.extend(a + t * (b - a))
    return np.array(out)


def continued_log(w: np.ndarray) -> complex:
    """Log of ``w[-1]`` continued from the principal value at ``w[0]`` through the samples."""
    ang = np.unwrap(np.angle(w))
    return complex(math.log(abs(w[-1])), ang[-1])


def _arc(center: complex, r: float, phi0: float, phi1: float) -> list[complex]:
    steps = max(1, math.ceil(abs(phi1 - phi0) / (math.pi / 16)))
    return [center + r * np.exp(1j * p) for p in np.linspace(phi0, phi1, steps + 1)[1:]]


def _default_radius(cfg: UnfoldingConfig) -> float:
    return cfg.s


def _check_radius(cfg: UnfoldingConfig, r: float, h1: LocalSolution, h2: LocalSolution) -> None:
    s, d = cfg.s, cfg.path_clearance
    if not r > d:
        raise PreconditionError(f"approach_radius {r:.3g} must exceed the path clearance {d:.3g}")
    if not r < 2 * s - d:
        raise PreconditionError(f"approach_radius {r:.3g} must stay below 2 sqrt(eps) - clearance = {2 * s - d:.3g}")
    if not r < min(h1.radius_estimate, h2.radius_estimate):
        raise PreconditionError("approach_radius must lie inside both local discs of convergence")


def connection_coefficient(
    cfg: UnfoldingConfig,
    approach_radius: Optional[float] = None,
    *,
    side: str = "below",
    n_landing: int = 5,
    tol: float = 1e-12,
) -> ConnectionReport:
    """Continue ``h1`` from ``+sqrt(eps)`` to ``-sqrt(eps)`` and fit ``C2``.

    The path starts at ``s -+ i r`` (``r = approach_radius``, default ``sqrt(eps)``),
    runs parallel to the real segment to ``-s -+ i r`` and then along the circle
    ``|x + s| = r`` to ``n_landing`` points spread over a quarter turn either way.
    ``side="above"`` mirrors the path. The logs in ``H`` start principal at the
    seed and are continued along the same path. ``C2`` is the least-squares
    solution of ``y - h2 = C2 H`` over the landing points; ``fit_residual`` is the
    largest misfit relative to ``max |y|``.
    """
    if side not in ("below", "above"):
        raise PreconditionError("side must be 'below' or 'above'")
    if n_landing < 3:
        raise PreconditionError("need at least 3 landing points")
    s, eps = cfg.s, cfg.eps
    h1 = local_series_plus(cfg)
    h2 = local_series_minus(cfg)
    n_res = resonance_order(eps)
    r = _default_radius(cfg) if approach_radius is None else float(approach_radius)
    _check_radius(cfg, r, h1, h2)

    sg = -1 if side == "below" else 1
    start = complex(s, sg * r)
    corner = complex(-s, sg * r)
    phi_c = sg * math.pi / 2
    phis = phi_c + np.linspace(-math.pi / 4, math.pi / 4, n_landing)

    y0 = complex(h1(start))
    y_corner = complex(integrate_path(eps, cfg.g_at, y0, [start, corner], tol, clearance=cfg.path_clearance)[-1])
    xs, ys, Hs = [], [], []
    for phi in phis:
        arc = _arc(-s, r, phi_c, phi) if phi != phi_c else []
        path = [corner] + arc
        y = integrate_path(eps, cfg.g_at, y_corner, path, tol, clearance=cfg.path_clearance)[-1]
        dense = _dense([start] + path)
        H = homogeneous(eps, dense[-1], continued_log(dense + s), continued_log(dense - s))
        xs.append(dense[-1])
        ys.append(complex(y))
        Hs.append(complex(H))
    xs, ys, Hs = np.array(xs), np.array(ys), np.array(Hs)
    d = ys - h2(xs)
    C2 = complex(np.vdot(Hs, d) / np.vdot(Hs, Hs))
    resid = float(np.max(np.abs(d - C2 * Hs)) / max(np.max(np.abs(ys)), np.finfo(float).tiny))
    note = (
        f"log(x -+ sqrt(eps)) principal at the seed {start:.6g}, continued {side} the segment "
        "[-sqrt(eps), sqrt(eps)]"
    )
    if h2.note:
        note += "; " + h2.note
    if resid > MAX_FIT_RESIDUAL:
        raise BranchError(f"fit residual {resid:.3g} exceeds {MAX_FIT_RESIDUAL:g}")
    return ConnectionReport(
        C2=C2,
        fit_residual=resid,
        resonance=n_res is not None,
        resonance_order=n_res,
        branch_note=note,
        eps=eps,
        approach_radius=r,
        side=side,
        landing_points=tuple(complex(x) for x in xs),
    )


def monodromy_factor(eps: float) -> complex:
    """Factor ``e^{2 pi i/(2 sqrt(eps))}`` gained by ``H`` on one positive turn about ``-sqrt(eps)``."""
    return complex(np.exp(2j * math.pi / (2 * math.sqrt(eps))))


def monodromy_defect(
    cfg: UnfoldingConfig,
    approach_radius: Optional[float] = None,
    *,
    side: str = "below",
    tol: float = 1e-12,
) -> complex:
    """``y`` after one positive loop about ``-sqrt(eps)`` minus ``y`` before it.

    ``y`` is the continuation of ``h1`` along the path of
    :func:`connection_coefficient`. Zero exactly when the continued solution is
    single-valued near ``-sqrt(eps)``. Computed by direct integration, it does not
    use ``h2``, so it is also defined at resonant ``eps``.
    """
    s, eps = cfg.s, cfg.eps
    h1 = local_series_plus(cfg)
    r = _default_radius(cfg) if approach_radius is None else float(approach_radius)
    if not cfg.path_clearance < r < 2 * s - cfg.path_clearance or not r < h1.radius_estimate:
        raise PreconditionError("approach_radius incompatible with clearance or local radius")
    sg = -1 if side == "below" else 1
    start = complex(s, sg * r)
    corner = complex(-s, sg * r)
    y0 = complex(h1(start))
    y_corner = complex(integrate_path(eps, cfg.g_at, y0, [start, corner], tol, clearance=cfg.path_clearance)[-1])
    phi_c = sg * math.pi / 2
    loop = [corner] + _arc(-s, r, phi_c, phi_c + 2 * math.pi)
    y_after = complex(integrate_path(eps, cfg.g_at, y_corner, loop, tol, clearance=cfg.path_clearance)[-1])
    return y_after - y_corner


# ---- sweeps -------------------------------------------------------------------------

GSource = Union[FormalSeries, Callable[[float], FormalSeries]]

_RULE = re.compile(r"^\s*(?:(?P<c>[0-9.eE+-]+)\s*\*\s*)?sqrt\(eps\)\s*$")


def approach_radius_from_rule(rule: str, eps: float) -> float:
    """``"sqrt(eps)"``, ``"c*sqrt(eps)"`` or a plain number."""
    m = _RULE.match(rule)
    if m:
        c = float(m.group("c")) if m.group("c") else 1.0
        return c * math.sqrt(eps)
    try:
        return float(rule)
    except ValueError:
        raise PreconditionError(f"cannot parse approach-radius rule {rule!r}") from None


def unfolding_sweep(
    g: GSource,
    eps_list: Sequence[float],
    approach_radius_rule: str = "sqrt(eps)",
    *,
    N: int = 60,
    tol: float = 1e-12,
) -> list[dict]:
    """One row per eps: C2, |C2|, fit residual and distance to the nearest resonance.

    ``g`` may depend on eps through a callable ``eps -> FormalSeries``. Failures are
    recorded in the row's ``error`` field and leave its C2 entries empty.
    """
    rows = []
    for eps in eps_list:
        eps = float(eps)
        row = {"eps": eps, "C2": None, "abs_C2": None, "fit_residual": None, "nearest_resonance": None, "error": None}
        try:
            if not eps > 0:
                raise PreconditionError("eps must be positive")
            row["nearest_resonance"] = nearest_resonance(eps)
            gs = g(eps) if callable(g) and not isinstance(g, FormalSeries) else g
            cfg = UnfoldingConfig(eps, gs, N)
            rep = connection_coefficient(cfg, approach_radius_from_rule(approach_radius_rule, eps), tol=tol)
            row.update(C2=rep.C2, abs_C2=abs(rep.C2), fit_residual=rep.fit_residual)
        except ResumError as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows


def sweep_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        c2 = r["C2"]
        w.writerow(
            [
                repr(r["eps"]),
                "" if c2 is None else repr(c2.real),
                "" if c2 is None else repr(c2.imag),
                "" if r["abs_C2"] is None else repr(r["abs_C2"]),
                "" if r["fit_residual"] is None else repr(r["fit_residual"]),
                "" if r["nearest_resonance"] is None else repr(r["nearest_resonance"]),
            ]
        )
    return buf.getvalue()


def sweep_to_json(rows: list[dict]) -> str:
    out = []
    for r in rows:
        c2 = r["C2"]
        out.append({**r, "C2": None if c2 is None else [c2.real, c2.imag]})
    return json.dumps({"rows": out})


__all__ = [
    "UnfoldingConfig",
    "LocalSolution",
    "ConnectionReport",
    "local_series_plus",
    "local_series_minus",
    "connection_coefficient",
    "monodromy_defect",
    "monodromy_factor",
    "homogeneous",
    "resonance_set",
    "resonance_order",
    "nearest_resonance",
    "unfolding_sweep",
    "sweep_to_csv",
    "sweep_to_json",
    "approach_radius_from_rule",
    "taylor_shift",
]
