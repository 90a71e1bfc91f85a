import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resum.errors import OffsetError, PreconditionError, SeriesOverflowError
from resum.series_core import (
    BorelSeries,
    FormalSeries,
    borel_transform,
    cauchy_product,
    estimate_radius,
    euler_formal_coeffs,
    eval_partial_sum,
    formal_derivative,
    generalized_euler_coeffs,
    shift_offset,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)
coeff_lists = st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False), min_size=1, max_size=12)


class TestFormalSeries:
    def test_immutable_coefficients(self):
        s = FormalSeries(0, [1, 2, 3])
        with pytest.raises(ValueError):
            s.coeffs[0] = 5

    def test_rejects_bad_offset(self):
        with pytest.raises(OffsetError):
            FormalSeries(2, [1.0])

    @pytest.mark.parametrize("coeffs", [[], [1.0, math.nan], [math.inf]])
    def test_rejects_bad_coeffs(self, coeffs):
        with pytest.raises(PreconditionError):
            FormalSeries(0, coeffs)

    def test_truncate(self):
        s = FormalSeries(1, [1, 2, 3, 4])
        assert s.truncate(1) == FormalSeries(1, [1, 2])
        with pytest.raises(PreconditionError):
            s.truncate(4)

    @given(coeff_lists, st.sampled_from([0, 1]))
    def test_json_round_trip(self, coeffs, offset):
        s = FormalSeries(offset, coeffs, "lbl")
        back = FormalSeries.from_json(s.to_json())
        assert back == s and back.label == "lbl"

    def test_json_layout(self):
        d = FormalSeries(1, [1 + 2j]).to_dict()
        assert d == {"offset": 1, "re": [1.0], "im": [2.0], "label": ""}

    def test_call_matches_polyval(self):
        s = FormalSeries(1, [1, -1, 2])
        x = 0.3
        assert s(x) == pytest.approx(x - x**2 + 2 * x**3)


class TestEulerCoefficients:
    def test_first_terms(self):
        a = euler_formal_coeffs(5).coeffs.real
        assert list(a) == [1, -1, 2, -6, 24, -120]

    def test_offset_is_one(self):
        assert euler_formal_coeffs(3).offset == 1

    def test_largest_representable(self):
        a = euler_formal_coeffs(170).coeffs
        assert abs(a[-1]) == pytest.approx(math.factorial(170), rel=1e-13)

    def test_overflow(self):
        with pytest.raises(SeriesOverflowError):
            euler_formal_coeffs(171)

    def test_solves_the_equation_coefficientwise(self):
        # x^2 y' + y - x with y = sum a_n x^(n+1): coefficient of x^(n+1) is n a_{n-1} + a_n
        a = euler_formal_coeffs(30).coeffs.real
        assert a[0] == 1
        for n in range(1, 31):
            assert n * a[n - 1] + a[n] == 0


class TestGeneralizedEuler:
    def test_reduces_to_euler(self):
        c = generalized_euler_coeffs(FormalSeries(0, [0, 1]), 10).coeffs
        assert np.allclose(c[1:], euler_formal_coeffs(9).coeffs)
        assert c[0] == 0

    def test_polynomial_solution(self):
        # y = x solves x^2 y' + y = x + x^2
        c = generalized_euler_coeffs(FormalSeries(0, [0, 1, 1]), 8).coeffs
        assert np.allclose(c, [0, 1, 0, 0, 0, 0, 0, 0, 0])

    def test_cubic_forcing(self):
        # g = x^3: c_3 = 1, then c_{n+1} = -n c_n
        c = generalized_euler_coeffs(FormalSeries(0, [0, 0, 0, 1]), 5).coeffs
        assert list(c.real) == [0, 0, 0, 1, -3, 12]

    def test_requires_g0_zero(self):
        with pytest.raises(PreconditionError):
            generalized_euler_coeffs(FormalSeries(0, [1, 1]), 4)

    def test_requires_offset_zero(self):
        with pytest.raises(OffsetError):
            generalized_euler_coeffs(FormalSeries(1, [1]), 4)

    def test_overflow(self):
        with pytest.raises(SeriesOverflowError):
            generalized_euler_coeffs(FormalSeries(0, [0, 1]), 400)


class TestBorel:
    def test_euler_transform_is_geometric(self):
        b = borel_transform(euler_formal_coeffs(20)).coeffs
        assert np.allclose(b, (-1.0) ** np.arange(21))

    def test_radius_of_euler_transform(self):
        assert borel_transform(euler_formal_coeffs(40)).radius_estimate == pytest.approx(1.0, rel=1e-10)

    def test_requires_offset_one(self):
        with pytest.raises(OffsetError):
            borel_transform(FormalSeries(0, [1, 1]))

    def test_beyond_factorial_range(self):
        s = FormalSeries(1, np.ones(200))
        b = borel_transform(s).coeffs
        assert b[180] == pytest.approx(math.exp(-math.lgamma(181)), rel=1e-12, abs=1e-320)

    def test_radius_estimate_geometric(self):
        assert estimate_radius(0.5 ** np.arange(30)) == pytest.approx(2.0, rel=1e-10)

    def test_radius_entire(self):
        assert estimate_radius([1.0, 0, 0, 0]) == math.inf

    def test_borel_series_eval(self):
        B = BorelSeries([1, 2, 3])
        assert B(2.0) == pytest.approx(17.0)


class TestArithmetic:
    def test_shift_offset(self):
        a0, rest = shift_offset(FormalSeries(0, [5, 1, 2]))
        assert a0 == 5 and rest == FormalSeries(1, [1, 2])

    def test_cauchy_product_geometric(self):
        g = FormalSeries(0, np.ones(10))
        c = cauchy_product(g, g).coeffs
        assert np.allclose(c, np.arange(1, 11))

    def test_cauchy_product_truncates_at_shorter(self):
        c = cauchy_product(FormalSeries(0, [1, 1, 1]), FormalSeries(0, [1, 1]))
        assert c.order == 1

    def test_cauchy_product_requires_offset_zero(self):
        with pytest.raises(OffsetError):
            cauchy_product(FormalSeries(1, [1]), FormalSeries(0, [1]))

    @given(coeff_lists, coeff_lists)
    @settings(max_examples=50)
    def test_cauchy_product_commutes(self, a, b):
        A, B = FormalSeries(0, a), FormalSeries(0, b)
        assert np.allclose(cauchy_product(A, B).coeffs, cauchy_product(B, A).coeffs)

    @given(*(st.lists(st.integers(-50, 50), min_size=1, max_size=10) for _ in range(3)))
    @settings(max_examples=50)
    def test_cauchy_product_associative_exact(self, a, b, c):
        A, B, C = (FormalSeries(0, v) for v in (a, b, c))
        left = cauchy_product(cauchy_product(A, B), C).coeffs
        right = cauchy_product(A, cauchy_product(B, C)).coeffs
        assert np.array_equal(left, right)

    def test_derivative_offsets(self):
        d1 = formal_derivative(FormalSeries(1, [1, 2, 3]))
        assert d1 == FormalSeries(0, [1, 4, 9])
        d0 = formal_derivative(FormalSeries(0, [7, 2, 3]))
        assert d0 == FormalSeries(0, [2, 6])
        assert formal_derivative(FormalSeries(0, [7])) == FormalSeries(0, [0])

    @given(coeff_lists, st.floats(-0.9, 0.9))
    @settings(max_examples=50)
    def test_derivative_matches_polynomial(self, coeffs, x):
        s = FormalSeries(1, coeffs)
        h = 1e-6
        fd = (s(x + h) - s(x - h)) / (2 * h)
        scale = max(1.0, float(np.sum(np.abs(coeffs))) * len(coeffs))
        assert abs(formal_derivative(s)(x) - fd) <= 1e-5 * scale

    def test_partial_sum(self):
        s = euler_formal_coeffs(5)
        assert eval_partial_sum(s, 0.1, 3) == pytest.approx(0.1 - 0.01 + 0.002)
        assert eval_partial_sum(s, 0.1, 0) == 0
        with pytest.raises(PreconditionError):
            eval_partial_sum(s, 0.1, 7)

    def test_partial_sum_vectorised(self):
        s = FormalSeries(0, [1, 1])
        assert np.allclose(eval_partial_sum(s, np.array([0.0, 1.0, 2.0]), 2), [1, 2, 3])
