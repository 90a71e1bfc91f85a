import json
import math

import numpy as np
import pytest

from resum.axioms import (
    NumericSeries,
    alternating_ones,
    borel_geometric,
    borel_sum_numeric,
    euler_terms,
    geometric,
    is_borel_summable_on_positive_axis,
    run_axiom_suite,
)
from resum.borel_engine import borel_sum
from resum.series_core import euler_formal_coeffs, formal_derivative
from resum.errors import PreconditionError, SummabilityError
from resum.exact_oracle import euler_exact


@pytest.fixture(scope="module")
def report():
    return run_axiom_suite()


class TestNumericSums:
    def test_grandi(self):
        assert abs(borel_sum_numeric(alternating_ones()) - 0.5) <= 1e-9

    def test_geometric_half(self):
        assert abs(borel_sum_numeric(geometric(0.5)) - 2) <= 1e-9

    def test_euler_series_at_one(self):
        # sum (-1)^n n! = e E1(1)
        assert abs(borel_sum_numeric(euler_terms(1.0)) - euler_exact(1.0).value) < 1e-12

    def test_borel_geometric(self):
        # sum n! r^n = int_0^inf e^{-z}/(1 - r z) dz; for r = -1/2 this is 2 e^2 E1(2)
        ref = euler_exact(0.5).value / 0.5
        assert abs(borel_sum_numeric(borel_geometric(-0.5)) - ref) < 1e-12

    def test_not_summable(self):
        with pytest.raises(SummabilityError):
            borel_sum_numeric(borel_geometric(0.5))

    def test_geometric_needs_unit_disc(self):
        with pytest.raises(PreconditionError):
            geometric(1.0)


class TestClassifier:
    @pytest.mark.parametrize(
        "series,expected",
        [
            (geometric(0.5), True),
            (NumericSeries(np.ones(41)), False),
            (NumericSeries([math.factorial(n) for n in range(41)]), False),
            (NumericSeries([0.5**n / math.factorial(n) for n in range(41)]), True),
        ],
    )
    def test_classify(self, series, expected):
        got, why = is_borel_summable_on_positive_axis(series)
        assert got is expected, why


class TestSuite:
    @pytest.mark.parametrize("pid", [1, 2, 3, 4, 5, 6])
    def test_property_passes(self, report, pid):
        rec = report.record(pid)
        assert rec.passed, rec.instances
        assert rec.max_deviation <= 1e-8

    def test_instances_exist(self, report):
        counts = {r.property_id: len(r.instances) for r in report.records}
        assert all(c >= 3 for c in counts.values())

    def test_linearity_tracks_quadrature_tolerance(self):
        for tol in (1e-8, 1e-11):
            rec = run_axiom_suite({"tol": tol, "n_random": 1}).record(2)
            assert rec.max_deviation <= max(tol, 1e-12)

    @pytest.mark.parametrize("x", [0.05, 0.1, 0.2])
    def test_termwise_derivative_central_difference(self, x):
        s = euler_formal_coeffs(40)
        h = 1e-4
        fd = (borel_sum(s, x + h).value - borel_sum(s, x - h).value) / (2 * h)
        assert abs(borel_sum(formal_derivative(s), x).value - fd) <= 1e-5

    def test_deterministic(self, report):
        assert run_axiom_suite().to_json() == report.to_json()

    def test_seed_changes_constants(self, report):
        other = run_axiom_suite({"seed": 7})
        c1 = [i.get("C") for i in report.record(2).instances]
        c2 = [i.get("C") for i in other.record(2).instances]
        assert c1[0] == c2[0] == 2 + 1j and c1[1:] != c2[1:]

    def test_json(self, report):
        d = json.loads(report.to_json())
        assert d["seed"] == report.seed and d["passed"] is True
        assert [p["id"] for p in d["properties"]] == [1, 2, 3, 4, 5, 6]

    def test_table(self, report):
        lines = report.table().split("\n")
        assert len(lines) == 7 and all(l.endswith("PASS") for l in lines[1:])

    def test_unknown_config(self):
        with pytest.raises(PreconditionError):
            run_axiom_suite({"colour": 1})
