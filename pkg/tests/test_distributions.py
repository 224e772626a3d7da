import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polya_aeppli.distributions import (
    Model,
    MpaParams,
    WmpaParams,
    as_counts,
    gdi_generic,
    gdi_mpa,
    iter_grid,
    log_pmf,
    log_pmf_cells,
    moments,
    mpa_log_pmf,
    mpa_moments,
    pa_pmf,
    params_for,
    wmpa_log_pmf,
    wmpa_moments,
    wpa_pmf,
)
from polya_aeppli.oracle import brute_force_marginal, brute_force_pmf

rates = st.floats(0.05, 2.0)
rhos = st.floats(0.02, 0.9)


def _mpa(*v):
    return params_for("mpa", v)


def _wmpa(*v):
    return params_for("wmpa", v)


class TestParams:
    def test_vector_round_trip(self):
        p = _mpa(0.5, 0.7, 0.3, 0.2)
        assert p.lambdas == (0.5, 0.7) and p.lambda_common == 0.3 and p.rho == 0.2 and p.k == 2
        assert MpaParams.from_vector(p.as_vector()) == p
        assert params_for("wmpa", p.as_vector()).model is Model.WMPA

    @pytest.mark.parametrize(
        "vec, msg",
        [
            ((0.6, 0.6, 0.3, 1.2), "rho must lie in"),
            ((0.6, 0.6, 0.3, 0.0), "rho must lie in"),
            ((0.6, -0.1, 0.3, 0.5), "margin rate"),
            ((0.6, 0.6, 0.0, 0.5), "lambda_common"),
            ((0.6, 0.3, 0.5), "needs"),
        ],
    )
    def test_invalid(self, vec, msg):
        with pytest.raises(ValueError, match=msg):
            params_for("mpa", vec)

    def test_laguerre_argument(self):
        np.testing.assert_allclose(_mpa(0.5, 0.7, 0.3, 0.2).x, [-2.0, -2.8])

    def test_model_parse(self):
        assert Model.parse("WMPA") is Model.WMPA
        with pytest.raises(ValueError):
            Model.parse("zip")

    def test_permuted(self):
        p = _wmpa(0.1, 0.2, 0.3, 0.4, 0.5)
        assert p.permuted([2, 0, 1]).lambdas == (0.3, 0.1, 0.2)
        assert isinstance(p.permuted([1, 0, 2]), WmpaParams)

    def test_as_counts(self):
        assert as_counts([1, 2.0]) == (1, 2)
        for bad in ([1, -1], [1.5, 2], [[1, 2]]):
            with pytest.raises(ValueError):
                as_counts(bad)
        with pytest.raises(ValueError):
            as_counts([1, 2], k=3)


class TestUnivariate:
    def test_pa_zero_cell(self):
        assert pa_pmf(0, 0.8, 0.3) == pytest.approx(math.exp(-0.8), rel=1e-15)

    def test_pa_sums_to_one(self):
        assert math.fsum(pa_pmf(n, 1.3, 0.4) for n in range(200)) == pytest.approx(1.0, abs=1e-12)

    def test_wpa_zero_cell(self):
        lam = 0.8
        assert wpa_pmf(0, lam, 0.3) == pytest.approx(lam / math.expm1(lam), rel=1e-14)

    def test_wpa_sums_to_one(self):
        assert math.fsum(wpa_pmf(n, 1.3, 0.4) for n in range(200)) == pytest.approx(1.0, abs=1e-12)

    def test_pa_mean(self):
        lam, rho = 1.1, 0.35
        mean = math.fsum(n * pa_pmf(n, lam, rho) for n in range(300))
        assert mean == pytest.approx(lam / (1 - rho), rel=1e-10)


class TestBivariatePmf:
    def test_zero_cells(self):
        p = _mpa(0.5, 0.7, 0.3, 0.2)
        assert math.exp(mpa_log_pmf((0, 0), p)) == pytest.approx(math.exp(-1.5), rel=1e-14)
        w = _wmpa(0.1832, 0.7714, 0.2382, 0.3328)
        want = math.prod(lam / math.expm1(lam) for lam in (0.1832, 0.7714, 0.2382))
        assert math.exp(wmpa_log_pmf((0, 0), w)) == pytest.approx(want, rel=1e-14)

    def test_mixed_zero_case(self):
        w = _wmpa(0.4, 0.6, 0.2, 0.25)
        f00 = math.exp(wmpa_log_pmf((0, 0), w))
        # at n1 = 1 the Laguerre factor is 1
        want = 0.4 * (1 - 0.25) / 2 * f00
        assert math.exp(wmpa_log_pmf((1, 0), w)) == pytest.approx(want, rel=1e-13)

    def test_one_one_against_oracle(self):
        w = _wmpa(0.4, 0.4, 0.2, 0.15)
        assert math.exp(wmpa_log_pmf((1, 1), w)) == pytest.approx(brute_force_pmf((1, 1), w), rel=1e-10)

    def test_dispatch(self):
        p = _mpa(0.5, 0.7, 0.3, 0.2)
        assert log_pmf((2, 3), p) == mpa_log_pmf((2, 3), p)
        w = _wmpa(0.5, 0.7, 0.3, 0.2)
        assert log_pmf((2, 3), w) == wmpa_log_pmf((2, 3), w)

    @pytest.mark.parametrize("model", ["mpa", "wmpa"])
    def test_vectorised_matches_scalar(self, model):
        p = params_for(model, (0.9, 0.4, 0.6, 0.45))
        cells = iter_grid((25, 25))
        vec = log_pmf_cells(cells, p)
        scalar = np.array([log_pmf(c, p) for c in cells])
        np.testing.assert_allclose(vec, scalar, rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize("model", ["mpa", "wmpa"])
    def test_large_counts_stay_finite(self, model):
        p = params_for(model, (2.0, 3.0, 1.5, 0.6))
        for cell in [(300, 250), (1000, 0), (0, 800), (500, 500)]:
            v = log_pmf(cell, p)
            assert math.isfinite(v) and v < 0
        assert np.all(np.isfinite(log_pmf_cells(np.array([[300, 250], [1000, 2]]), p)))

    @pytest.mark.parametrize("model", ["mpa", "wmpa"])
    def test_huge_rates_do_not_overflow(self, model):
        p = params_for(model, (1e3, 2e3, 5e3, 0.3))
        assert math.isfinite(float(log_pmf_cells(np.array([[0, 0], [3000, 4000]]), p)[1]))

    @pytest.mark.parametrize("model", ["mpa", "wmpa"])
    def test_values_in_unit_interval(self, model):
        p = params_for(model, (0.6, 0.6, 0.3, 0.1))
        logs = log_pmf_cells(iter_grid((30, 30)), p)
        assert np.all(np.isfinite(logs)) and np.all(logs < 0)

    @pytest.mark.parametrize("model", ["mpa", "wmpa"])
    def test_first_moment_from_pmf(self, model):
        p = params_for(model, (0.5, 0.7, 0.3, 0.2))
        cells = iter_grid((60, 60))
        f = np.exp(log_pmf_cells(cells, p))
        mean = moments(p).mean
        assert math.fsum(cells[:, 0] * f) == pytest.approx(mean[0], abs=1e-4)
        assert math.fsum(cells[:, 1] * f) == pytest.approx(mean[1], abs=1e-4)

    @pytest.mark.parametrize("model", ["mpa", "wmpa"])
    def test_marginal_consistency(self, model):
        p = params_for(model, (0.5, 0.7, 0.3, 0.2))
        for n1 in range(11):
            row = np.array([[n1, n2] for n2 in range(120)])
            total = math.fsum(np.exp(log_pmf_cells(row, p)))
            assert total == pytest.approx(brute_force_marginal(n1, p, index=0), rel=1e-10)

    @given(rates, rates, rates, rhos, st.integers(0, 6), st.integers(0, 6), st.sampled_from(["mpa", "wmpa"]))
    @settings(max_examples=60, deadline=None)
    def test_matches_oracle(self, l1, l2, l3, rho, n1, n2, model):
        p = params_for(model, (l1, l2, l3, rho))
        exact = brute_force_pmf((n1, n2), p)
        assert math.exp(log_pmf((n1, n2), p)) == pytest.approx(exact, rel=1e-9)

    @given(rates, rates, rates, rhos, st.integers(0, 8), st.integers(0, 8), st.sampled_from(["mpa", "wmpa"]))
    @settings(max_examples=60, deadline=None)
    def test_permutation_symmetry(self, l1, l2, l3, rho, n1, n2, model):
        p = params_for(model, (l1, l2, l3, rho))
        assert log_pmf((n1, n2), p) == pytest.approx(log_pmf((n2, n1), p.permuted([1, 0])), rel=1e-12, abs=1e-12)


class TestTrivariate:
    @pytest.mark.parametrize("model", ["mpa", "wmpa"])
    def test_permutation_symmetry(self, model):
        p = params_for(model, (0.3, 0.5, 0.8, 0.4, 0.25))
        order = [2, 0, 1]
        for cell in itertools.product(range(4), repeat=3):
            moved = tuple(cell[i] for i in order)
            assert log_pmf(moved, p.permuted(order)) == pytest.approx(log_pmf(cell, p), rel=1e-12)

    @pytest.mark.parametrize("model", ["mpa", "wmpa"])
    def test_mass_close_to_one(self, model):
        p = params_for(model, (0.3, 0.5, 0.4, 0.2, 0.25))
        assert math.fsum(np.exp(log_pmf_cells(iter_grid((25, 25, 25)), p))) == pytest.approx(1.0, abs=1e-9)


class TestMoments:
    def test_mpa_closed_forms(self):
        m = mpa_moments(_mpa(0.6, 0.6, 0.3, 0.1))
        np.testing.assert_allclose(m.mean, [1.0, 1.0])
        assert m.covariance[0, 1] == pytest.approx(0.3 / 0.81)
        assert m.variance[0] == pytest.approx(1.1 * 0.9 / 0.81)
        assert m.correlation[0, 1] == pytest.approx(m.covariance[0, 1] / m.variance[0])

    def test_gdi_generic_examples(self):
        assert gdi_generic([1, 1], np.eye(2)) == pytest.approx(1.0)
        assert gdi_generic([4, 1], np.diag([4.0, 1.0])) == pytest.approx(1.0)

    def test_gdi_generic_rejects_bad_input(self):
        with pytest.raises(ValueError):
            gdi_generic([1, 0], np.eye(2))
        with pytest.raises(ValueError):
            gdi_generic([1, 1], [[1.0, 0.2], [0.1, 1.0]])

    def test_gdi_mpa_matches_generic(self):
        p = _mpa(0.5, 0.7, 0.3, 0.2)
        m = mpa_moments(p)
        assert gdi_mpa(p) == pytest.approx(gdi_generic(m.mean, m.covariance), rel=1e-12)
        assert m.gdi == pytest.approx(gdi_mpa(p), rel=1e-12)

    @pytest.mark.parametrize("model", ["mpa", "wmpa"])
    def test_moments_match_pmf_sums(self, model):
        p = params_for(model, (0.5, 0.7, 0.3, 0.2))
        cells = iter_grid((70, 70)).astype(float)
        f = np.exp(log_pmf_cells(cells.astype(int), p))
        mean = cells.T @ f
        second = (cells * f[:, None]).T @ cells
        cov = second - np.outer(mean, mean)
        m = moments(p)
        np.testing.assert_allclose(m.mean, mean, rtol=1e-8)
        np.testing.assert_allclose(m.covariance, cov, rtol=1e-7)
        fact = second - np.diag(mean)
        np.testing.assert_allclose(m.factorial_second, fact, rtol=1e-7)

    def test_wmpa_overdispersed_relative_to_mpa(self):
        grid = itertools.product([0.1, 0.5, 1.0, 2.0, 4.0], [0.1, 0.5, 1.0, 2.0], [0.05, 0.3, 0.6, 0.9])
        for lam, lc, rho in grid:
            vec = (lam, 0.7, lc, rho)
            g = gdi_mpa(_mpa(*vec))
            assert g > 1
            assert wmpa_moments(_wmpa(*vec)).gdi > g

    def test_k_variate_moments(self):
        p = _mpa(0.2, 0.4, 0.6, 0.3, 0.5)
        m = mpa_moments(p)
        assert m.mean.shape == (3,)
        assert m.covariance[0, 2] == pytest.approx(0.3 / 0.25)
        assert m.gdi == pytest.approx(gdi_generic(m.mean, m.covariance), rel=1e-12)
