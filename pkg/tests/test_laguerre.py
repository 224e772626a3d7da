import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polya_aeppli.laguerre import (
    ScaledValue,
    laguerre_direct,
    laguerre_eval,
    laguerre_row,
    log_laguerre_excess_table,
    log_laguerre_table,
)


class TestScaledValue:
    def test_zero_is_canonical(self):
        z = ScaledValue.from_float(0.0)
        assert z.mantissa == 0.0 and z.exponent == 0
        with pytest.raises(ValueError):
            ScaledValue(0.0, 3)

    def test_mantissa_normalised(self):
        with pytest.raises(ValueError):
            ScaledValue(0.5, 0)
        v = ScaledValue.from_float(-12.0)
        assert v.mantissa == -1.5 and v.exponent == 3 and v.sign == -1

    @given(st.floats(min_value=-1e300, max_value=1e300, allow_nan=False))
    def test_round_trip_through_float(self, value):
        v = ScaledValue.from_float(value)
        assert float(v) == value
        if value != 0:
            assert 1.0 <= abs(v.mantissa) < 2.0

    def test_range_beyond_native_floats(self):
        big = ScaledValue.from_log(5000.0)
        assert big.log() == pytest.approx(5000.0, rel=1e-14)
        assert (big * big).log() == pytest.approx(10000.0, rel=1e-14)
        assert float(ScaledValue.from_log(-math.inf)) == 0.0

    def test_arithmetic(self):
        a, b = ScaledValue.from_float(3.0), ScaledValue.from_float(0.25)
        assert float(a * b) == 0.75
        assert float(a + b) == 3.25
        assert float(a + (-a)) == 0.0
        assert float(2.0 * a) == 6.0
        with pytest.raises(ValueError):
            (-a).log()

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            ScaledValue.from_float(math.inf)


class TestLaguerreValues:
    def test_low_orders(self):
        assert float(laguerre_eval(0, 0, -3.7)) == 1.0
        for x in (-5.0, -0.3, 0.0, 2.0, 11.5):
            assert float(laguerre_eval(1, 0, x)) == pytest.approx(1 - x, rel=1e-15)

    def test_small_hand_value(self):
        # 3 + 3 + 1/2
        assert float(laguerre_eval(2, 1, -1.0)) == pytest.approx(6.5, rel=1e-15)

    def test_rows(self):
        assert [float(v) for v in laguerre_row(1, 0, 2.0)] == [1.0, -1.0]
        assert [float(v) for v in laguerre_row(0, 5, 0.0)] == [1.0]
        row = laguerre_row(3, 2, -0.5)
        for n, v in enumerate(row):
            assert float(v) == pytest.approx(laguerre_direct(n, 2, -0.5), rel=1e-14)

    def test_row_matches_single_evaluation_exactly(self):
        for alpha in range(4):
            row = laguerre_row(60, alpha, -7.25)
            for n in (0, 1, 17, 60):
                assert laguerre_eval(n, alpha, -7.25) == row[n]

    @given(st.integers(0, 20), st.integers(0, 8), st.floats(-30.0, -1e-3))
    @settings(max_examples=200, deadline=None)
    def test_against_direct_sum(self, n, alpha, x):
        assert float(laguerre_eval(n, alpha, x)) == pytest.approx(laguerre_direct(n, alpha, x), rel=1e-12)

    def test_positive_x_sign_changes(self):
        # L_2^0(x) = (x^2 - 4x + 2)/2 has a root near 0.586
        assert float(laguerre_eval(2, 0, 1.0)) == pytest.approx(-0.5)

    def test_no_overflow_at_high_degree(self):
        v = laguerre_eval(3000, 3, -3000.0)
        assert v.exponent > 1024  # beyond the float range
        assert math.isfinite(v.log())

    def test_negative_order_rejected(self):
        with pytest.raises(ValueError):
            laguerre_row(-1, 0, -1.0)
        with pytest.raises(ValueError):
            laguerre_row(3, -1, -1.0)


class TestLogTables:
    def test_matches_scaled_rows(self):
        x = -3.3
        table = log_laguerre_table(80, 6, x)
        assert table.shape == (7, 81)
        for a in range(7):
            row = laguerre_row(80, a, x)
            np.testing.assert_allclose(table[a], [v.log() for v in row], rtol=1e-13, atol=1e-13)

    def test_zero_argument(self):
        table = log_laguerre_table(10, 3, 0.0)
        for a in range(4):
            np.testing.assert_allclose(np.exp(table[a]), [math.comb(n + a, n) for n in range(11)], rtol=1e-13)

    def test_positive_argument_rejected(self):
        with pytest.raises(ValueError):
            log_laguerre_table(5, 1, 0.1)

    @pytest.mark.parametrize("x", [-1e-9, -1e-3, -0.7, -25.0])
    def test_excess_has_no_cancellation(self, x):
        excess = log_laguerre_excess_table(12, 3, x)
        assert np.all(np.isneginf(excess[:, 0]))
        for a in range(4):
            for n in range(1, 13):
                terms = [math.comb(n + a, n - m) * (-x) ** m / math.factorial(m) for m in range(1, n + 1)]
                assert excess[a, n] == pytest.approx(math.log(math.fsum(terms)), rel=1e-13)

    def test_excess_needs_negative_argument(self):
        with pytest.raises(ValueError):
            log_laguerre_excess_table(3, 1, 0.0)


class TestIdentityResiduals:
    """Identity residuals measured against the size of the terms involved.

    Near ``x = 0`` the difference identities subtract nearly equal values;
    scaled by the largest term the residual stays at rounding level.
    """

    @pytest.mark.parametrize("x", [-1e-6, -1e-3, -0.5, -10.0, -50.0])
    def test_difference_identities_at_rounding_level(self, x):
        L = [[float(v) for v in laguerre_row(52, a, x)] for a in range(3)]
        for n in range(1, 51):
            lhs = x * x / (n + 1) * L[2][n - 1]
            terms = (abs((1 - x) * L[0][n]), abs(L[0][n + 1]), abs(lhs))
            assert abs(lhs - ((1 - x) * L[0][n] - L[0][n + 1])) <= 1e-13 * max(terms)
            lhs = -x / n * L[1][n - 1]
            terms = (abs(L[0][n]), abs(L[0][n - 1]), abs(lhs))
            assert abs(lhs - (L[0][n] - L[0][n - 1])) <= 1e-13 * max(terms)
