import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resum.errors import PreconditionError, SeriesOverflowError
from resum.truncation import (
    CSV_HEADER,
    optimal_k,
    optimal_report,
    remainder_bound,
    remainder_integral,
    reports_to_csv,
    stirling_approx,
    superasymptotic_estimate,
    truncation_sweep,
)


def remainder_reference(k, x):
    """(-1)^k x^(k+1) int_0^inf u^k e^{-u}/(1+xu) du, computed as f - f_k in 50 digits."""
    with mpmath.workdps(50):
        X = mpmath.mpf(x)
        f = mpmath.exp(1 / X) * mpmath.e1(1 / X)
        fk = mpmath.fsum((-1) ** n * mpmath.factorial(n) * X ** (n + 1) for n in range(k))
        return f - fk


class TestBound:
    def test_values(self):
        assert remainder_bound(0, 0.1) == pytest.approx(0.1)
        assert remainder_bound(3, 0.1) == pytest.approx(6e-4)

    def test_overflow(self):
        with pytest.raises(SeriesOverflowError):
            remainder_bound(171, 0.1)
        with pytest.raises(SeriesOverflowError):
            remainder_bound(170, 10.0)

    def test_rejects_bad_input(self):
        with pytest.raises(PreconditionError):
            remainder_bound(-1, 0.1)
        with pytest.raises(PreconditionError):
            remainder_bound(1, -0.1)


class TestOptimalK:
    @pytest.mark.parametrize("x,k", [(0.05, 19), (0.2, 4), (1.0, 0), (0.5, 1), (0.3, 3), (0.15, 6)])
    def test_examples(self, x, k):
        assert optimal_k(x) == k

    def test_tie_goes_to_smaller_k(self):
        # at x = 0.1 the bounds for k = 9 and k = 10 coincide
        assert remainder_bound(9, 0.1) == pytest.approx(remainder_bound(10, 0.1), rel=1e-12)
        assert optimal_k(0.1) == 9

    @given(st.floats(0.011, 1.0))
    @settings(max_examples=60)
    def test_is_argmin(self, x):
        k = optimal_k(x)
        bounds = [math.lgamma(j + 1) + (j + 1) * math.log(x) for j in range(int(2 / x) + 2)]
        assert bounds[k] <= min(bounds) + 1e-12

    def test_domain(self):
        with pytest.raises(PreconditionError):
            optimal_k(1.5)


class TestEstimates:
    def test_superasymptotic(self):
        assert superasymptotic_estimate(0.1) == pytest.approx(math.sqrt(0.2 * math.pi) * math.exp(-10))

    @pytest.mark.parametrize("x", [0.05 + 0.01 * j for j in range(16)])
    def test_optimal_error_within_factor_three(self, x):
        k = optimal_k(x)
        err = abs(float(remainder_reference(k, x)))
        assert superasymptotic_estimate(x) / 3 <= err <= 3 * superasymptotic_estimate(x)

    @given(st.floats(0.011, 1.0), st.floats(0.011, 1.0))
    @settings(max_examples=60)
    def test_optimal_k_non_increasing(self, x1, x2):
        lo, hi = sorted((x1, x2))
        assert optimal_k(lo) >= optimal_k(hi)
        assert abs(optimal_k(lo) - 1 / lo) <= 1

    @pytest.mark.parametrize("k", [1, 5, 10, 50, 150])
    def test_stirling_relative_error(self, k):
        rel = abs(stirling_approx(k) / math.factorial(k) - 1)
        assert rel < 1 / (12 * k) * 1.01
        assert rel > 1 / (12 * k) * 0.9

    def test_stirling_overflow(self):
        with pytest.raises(SeriesOverflowError):
            stirling_approx(200)


class TestRemainderIntegral:
    @pytest.mark.parametrize("k,x", [(0, 0.1), (3, 0.1), (10, 0.05), (20, 0.2), (30, 0.2)])
    def test_against_reference(self, k, x):
        ref = remainder_reference(k, x)
        got = remainder_integral(k, x, as_mpf=True)
        assert abs(got - ref) <= 1e-12 * max(1, abs(ref))

    def test_sign_alternates(self):
        assert remainder_integral(2, 0.1) > 0 > remainder_integral(3, 0.1)


class TestSweep:
    def test_rows_and_defects(self):
        reps = truncation_sweep(0.1, 15)
        assert [r.k for r in reps] == list(range(16))
        for r in reps:
            assert r.actual_error <= r.bound + 1e-10
            assert r.identity_defect <= 1e-9

    def test_domain(self):
        with pytest.raises(PreconditionError):
            truncation_sweep(0.6, 5)
        with pytest.raises(PreconditionError):
            truncation_sweep(0.1, 171)

    def test_csv(self):
        text = reports_to_csv(truncation_sweep(0.1, 2))
        lines = text.strip().split("\n")
        assert lines[0] == ",".join(CSV_HEADER)
        assert len(lines) == 4

    def test_optimal_report(self):
        rep = optimal_report(0.05)
        assert rep.k == 19
        assert rep.actual_error < rep.bound
