"""Borel sums of numeric series and a harness for the six properties a good
resummation method should have: consistency with convergent sums, linearity,
absolute summability, products, tail shift and termwise differentiation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .borel_engine import borel_sum, detect_stokes, exponential_type, STOKES_CLEARANCE
from .errors import PreconditionError, ResumError, StokesError, SummabilityError
from .series_core import FormalSeries, borel_transform, euler_formal_coeffs, formal_derivative

DEFAULT_SEED = 20240611


@dataclass(frozen=True)
class NumericSeries:
    terms: np.ndarray
    label: str = ""

    def __post_init__(self):
        t = np.array(self.terms, dtype=complex).ravel()
        if t.size == 0 or not np.all(np.isfinite(t)):
            raise PreconditionError("numeric series needs finite, non-empty terms")
        t.flags.writeable = False
        object.__setattr__(self, "terms", t)

    @property
    def order(self) -> int:
        return self.terms.size - 1

    def as_formal(self) -> FormalSeries:
        """``sum a_n`` is the value at x = 1 of ``sum a_n x**(n+1)``."""
        return FormalSeries(1, self.terms, self.label)


def borel_sum_numeric(a: NumericSeries, order: int = 24, tol: float = 1e-10) -> complex:
    """``int_0^inf (sum a_n z**n / n!) e^{-z} dz`` with the integrand continued along R+.

    Raises :class:`SummabilityError` when the continued Borel transform has a
    singularity on the positive axis.
    """
    if order > a.order and a.order >= 2:
        raise PreconditionError(f"order {order} exceeds the {a.order} available terms")
    try:
        return borel_sum(a.as_formal(), 1.0, 0.0, order, tol).value
    except StokesError as exc:
        raise SummabilityError(f"{a.label or 'series'} is not Borel summable along R+: {exc}") from exc


def is_borel_summable_on_positive_axis(a: NumericSeries, order: int = 24, tol: float = 1e-10) -> tuple[bool, str]:
    """Classify ``sum a_n`` as Borel summable along R+ or not.

    Intended for series with non-negative terms (the absolute series of property 3).
    For those, a finite Borel radius forces a singularity on R+ (Pringsheim), so
    the answer reduces to: absolutely convergent, or entire of exponential type
    below 1 with no stable singularity on the positive axis.
    """
    s = a.as_formal()
    sigma = exponential_type(s.coeffs)
    B = borel_transform(s)
    if B.order >= 4:
        rep = detect_stokes(B, min(order, B.order))
        on_axis = [z for z in rep.singularities if abs(math.atan2(z.imag, z.real)) < STOKES_CLEARANCE]
        if on_axis:
            return False, f"Borel singularity on R+ at {on_axis[0]:.6g}"
        if rep.singularities:
            return True, "finite Borel radius, singularities off R+"
    if sigma < 1:
        return True, f"exponential type {sigma:.3g} < 1"
    return False, f"exponential type {sigma:.3g} >= 1: Laplace integral diverges"


@dataclass
class PropertyRecord:
    property_id: int
    name: str
    instances: list = field(default_factory=list)
    max_deviation: float = 0.0
    tolerance: float = 0.0
    passed: bool = True

    def add(self, label: str, deviation: float, **extra):
        self.instances.append({"label": label, "deviation": deviation, **extra})
        if not deviation <= self.max_deviation:
            self.max_deviation = deviation
        self.passed = bool(self.max_deviation <= self.tolerance)

    def fail(self, label: str, error: str):
        self.instances.append({"label": label, "deviation": math.inf, "error": error})
        self.max_deviation = math.inf
        self.passed = False


@dataclass
class AxiomReport:
    records: list[PropertyRecord]
    seed: int
    config: dict

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def record(self, property_id: int) -> PropertyRecord:
        return next(r for r in self.records if r.property_id == property_id)

    def to_dict(self) -> dict:
        def clean(v):
            if isinstance(v, complex):
                return [v.real, v.imag]
            if isinstance(v, float) and math.isinf(v):
                return "inf"
            return v

        return {
            "seed": self.seed,
            "config": self.config,
            "passed": self.passed,
            "properties": [
                {
                    "id": r.property_id,
                    "name": r.name,
                    "max_deviation": clean(r.max_deviation),
                    "tolerance": r.tolerance,
                    "pass": r.passed,
                    "instances": [{k: clean(v) for k, v in inst.items()} for inst in r.instances],
                }
                for r in self.records
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def table(self) -> str:
        lines = [f"{'property':<28} {'instances':>9} {'max dev':>11} {'tol':>9}  result"]
        for r in self.records:
            dev = "inf" if math.isinf(r.max_deviation) else f"{r.max_deviation:.2e}"
            lines.append(
                f"({r.property_id}) {r.name:<24} {len(r.instances):>9} {dev:>11} {r.tolerance:>9.1e}  "
                + ("PASS" if r.passed else "FAIL")
            )
        return "\n".join(lines)


# ---- instance families ---------------------------------------------------------------


def geometric(r: complex, N: int = 400) -> NumericSeries:
    """``sum r**n`` truncated at ``N``; the default leaves a tail below 1e-16 for |r| <= 0.9."""
    r = complex(r)
    if not abs(r) < 1:
        raise PreconditionError("geometric instances need |r| < 1")
    return NumericSeries(r ** np.arange(N + 1), f"geometric r={r:g}")


def alternating_ones(N: int = 40) -> NumericSeries:
    return NumericSeries((-1.0) ** np.arange(N + 1), "sum (-1)^n")


def euler_terms(x: float, N: int = 40) -> NumericSeries:
    """Terms ``(-1)**n n! x**(n+1)`` of the Euler series at a fixed ``x``."""
    a = euler_formal_coeffs(N).coeffs * x ** (np.arange(N + 1) + 1)
    return NumericSeries(a, f"euler x={x:g}")


def borel_geometric(r: complex, N: int = 40) -> NumericSeries:
    """``a_n = n! r**n``, whose Borel transform is ``1 / (1 - r z)``."""
    a = np.array([math.factorial(n) * complex(r) ** n for n in range(N + 1)], dtype=complex)
    return NumericSeries(a, f"n! r^n r={complex(r):g}")


def _cauchy(a: NumericSeries, b: NumericSeries) -> NumericSeries:
    N = min(a.order, b.order)
    c = np.convolve(a.terms[: N + 1], b.terms[: N + 1])[: N + 1]
    return NumericSeries(c, f"({a.label})*({b.label})")


# ---- property checks -----------------------------------------------------------------


def _five_point_derivative(F, x: float, h: float) -> complex:
    return (-F(x + 2 * h) + 8 * F(x + h) - 8 * F(x - h) + F(x - 2 * h)) / (12 * h)


def run_axiom_suite(config: dict | None = None) -> AxiomReport:
    """Evaluate properties (1)-(6) on fixed instance sets and report deviations.

    ``config`` keys: ``order`` (Padé order, default 24), ``tol`` (quadrature
    tolerance, default 1e-10), ``tolerance`` (pass threshold, default 1e-8),
    ``seed`` (generator for the linearity constants), ``n_random`` (random
    constants per linearity pair, default 2), ``h`` (finite-difference step for
    property 6, default 1e-3). Instance-level failures are recorded, not raised.
    """
    cfg = {"order": 24, "tol": 1e-10, "tolerance": 1e-8, "seed": DEFAULT_SEED, "n_random": 2, "h": 1e-3}
    if config:
        unknown = set(config) - set(cfg)
        if unknown:
            raise PreconditionError(f"unknown config keys {sorted(unknown)}")
        cfg.update(config)
    if cfg["order"] < 2 or not 0 < cfg["tol"] < 1 or cfg["n_random"] < 0:
        raise PreconditionError("invalid axiom-suite configuration")
    order, tol, lim = int(cfg["order"]), float(cfg["tol"]), float(cfg["tolerance"])
    rng = np.random.default_rng(cfg["seed"])

    def S(a: NumericSeries) -> complex:
        return borel_sum_numeric(a, min(order, a.order), tol)

    names = {
        1: "convergent consistency",
        2: "linearity",
        3: "absolute summability",
        4: "Cauchy product",
        5: "tail shift",
        6: "termwise derivative",
    }
    recs = {i: PropertyRecord(i, names[i], tolerance=lim) for i in names}
    recs[3].tolerance = 0.0

    # (1) convergent series keep their usual sum
    for r in (0.5, -0.5, 0.9, -0.9, 0.3 + 0.4j, 0.1):
        a = geometric(r)
        try:
            recs[1].add(a.label, abs(S(a) - 1 / (1 - r)))
        except ResumError as exc:
            recs[1].fail(a.label, str(exc))

    # (2) linearity, with the fixed constant 2+i and seeded random ones
    pairs = [
        (euler_terms(0.1), borel_geometric(-0.5)),
        (borel_geometric(-1.0), borel_geometric(-0.3 + 0.2j)),
        (geometric(0.5), geometric(-0.7)),
        (alternating_ones(), NumericSeries((-0.5) ** np.arange(41), "sum (-1/2)^n, N=40")),
    ]
    constants = [2 + 1j] + [complex(*rng.normal(size=2)) for _ in range(int(cfg["n_random"]))]
    for a, b in pairs:
        try:
            sa, sb = S(a), S(b)
        except ResumError as exc:
            recs[2].fail(f"{a.label} + C {b.label}", str(exc))
            continue
        for C in constants:
            N = min(a.order, b.order)
            ab = NumericSeries(a.terms[: N + 1] + C * b.terms[: N + 1], "")
            label = f"{a.label} + ({C:.4g}) {b.label}"
            try:
                recs[2].add(label, abs(S(ab) - (sa + C * sb)), C=C)
            except ResumError as exc:
                recs[2].fail(label, str(exc))

    # (3) classification of the absolute series
    cases = [
        (geometric(0.5), True),
        (geometric(-0.9), True),
        (alternating_ones(), False),
        (euler_terms(1.0), False),
        (euler_terms(0.1), False),
    ]
    for a, expected in cases:
        absa = NumericSeries(np.abs(a.terms), f"|{a.label}|")
        try:
            got, why = is_borel_summable_on_positive_axis(absa, order, tol)
        except ResumError as exc:
            recs[3].fail(absa.label, str(exc))
            continue
        recs[3].add(absa.label, float(got != expected), absolutely_summable=got, expected=expected, reason=why)

    # (4) products of absolutely summable series
    for a, b in [(geometric(0.5), geometric(-0.7)), (geometric(0.3 + 0.4j), geometric(0.9)), (geometric(0.1), geometric(-0.5))]:
        label = f"({a.label}) x ({b.label})"
        try:
            recs[4].add(label, abs(S(_cauchy(a, b)) - S(a) * S(b)))
        except ResumError as exc:
            recs[4].fail(label, str(exc))

    # (5) dropping the first term subtracts it from the sum
    for a in (euler_terms(1.0), euler_terms(0.1), alternating_ones(), geometric(0.5), borel_geometric(-0.5)):
        tail = NumericSeries(a.terms[1:], f"tail of {a.label}")
        try:
            recs[5].add(a.label, abs(S(tail) - (S(a) - a.terms[0])))
        except ResumError as exc:
            recs[5].fail(a.label, str(exc))

    # (6) sum of the termwise derivative vs finite difference of the sum
    h = float(cfg["h"])
    series_list = [euler_formal_coeffs(40)]
    for s in series_list:
        dfs = formal_derivative(s)
        for x in (0.2, 0.1, 0.05):
            label = f"{s.label} at x={x:g}"
            try:
                fd = _five_point_derivative(lambda t: borel_sum(s, t, 0.0, order, tol).value, x, h)
                recs[6].add(label, abs(borel_sum(dfs, x, 0.0, order, tol).value - fd))
            except ResumError as exc:
                recs[6].fail(label, str(exc))

    return AxiomReport([recs[i] for i in sorted(recs)], int(cfg["seed"]), cfg)
