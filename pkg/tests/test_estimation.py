import math
import warnings

import numpy as np
import pytest

from polya_aeppli import MpaParams, WmpaParams, embedded_dataset, sample
from polya_aeppli.errors import (
    ConvergenceWarning,
    NegativeCommonRate,
    NegativeMarginRate,
    NonConvergence,
    UnderdispersedSample,
)
from polya_aeppli.estimation import (
    FitResult,
    Method,
    fallback_init,
    information_criteria,
    mle,
    mom,
    mom_mpa,
    mom_wmpa,
    numerical_gradient,
    sample_moments,
)
from polya_aeppli.model_selection import log_likelihood
from polya_aeppli.samples import CountSample


@pytest.fixture(scope="module")
def australian():
    return embedded_dataset("australian_health")


@pytest.fixture(scope="module")
def australian_mle(australian):
    return {m: mle(australian, m) for m in ("mpa", "wmpa")}


class TestSampleMoments:
    def test_hand_computed(self):
        sm = sample_moments(CountSample(np.array([[0, 0], [2, 2]])))
        np.testing.assert_array_equal(sm.means, [1, 1])
        np.testing.assert_array_equal(sm.covariances, [[2, 2], [2, 2]])

    def test_identical_rows(self):
        sm = sample_moments(CountSample(np.array([[3, 1], [3, 1]])))
        np.testing.assert_array_equal(sm.variances, [0, 0])

    def test_table_equals_records(self, australian):
        a, b = sample_moments(australian), sample_moments(australian.to_records())
        np.testing.assert_allclose(a.means, b.means, rtol=1e-14)
        np.testing.assert_allclose(a.covariances, b.covariances, rtol=1e-12)

    def test_needs_two_observations(self):
        with pytest.raises(ValueError):
            sample_moments(CountSample(np.array([[1, 1]])))


class TestInformationCriteria:
    def test_identity(self):
        aic, bic = information_criteria(-100.0, 4, 5190)
        assert aic == 208.0
        assert aic - bic == pytest.approx(8 - 4 * math.log(5190), abs=1e-12)

    def test_fit_result_round_trip(self, australian):
        fit = mom_mpa(australian)
        again = FitResult.from_dict(fit.to_dict())
        assert again == fit
        assert fit.p == 4 and fit.m == 5190


class TestMomMpa:
    def test_australian(self, australian):
        p = mom_mpa(australian).params
        assert p.as_vector() == pytest.approx([0.0544, 0.3978, 0.1303, 0.3879], abs=1e-4)

    def test_equidispersed_sample_rejected(self):
        # both margins have variance equal to their mean
        data = CountSample(np.array([[0, 0], [2, 2]] * 1 + [[1, 1]] * 2))
        sm = sample_moments(data)
        assert sm.variances.sum() < sm.means.sum() + 1e-12
        with pytest.raises(UnderdispersedSample):
            mom_mpa(data)

    def test_negative_covariance_rejected(self):
        data = CountSample(np.array([[0, 4], [4, 0], [0, 3], [5, 0], [0, 0]]))
        with pytest.raises(NegativeCommonRate):
            mom_mpa(data)

    def test_negative_margin_rate_names_index(self):
        # strong covariance pulls the shared rate above coordinate 1's share
        data = CountSample(np.array([[0, 0]] * 20 + [[1, 8], [2, 9], [0, 7], [1, 12]]))
        with pytest.raises(NegativeMarginRate) as err:
            mom_mpa(data)
        assert err.value.index == 0

    def test_consistency(self):
        # the sampling sd of rho-hat alone is about 5% of rho at this size, so
        # the 5% band is applied to the average over the seeds
        truth = MpaParams((0.6, 0.6), 0.3, 0.1)
        fits = [mom_mpa(sample(truth, 10_000, seed=seed)).params.as_vector() for seed in range(20)]
        np.testing.assert_allclose(np.mean(fits, axis=0), truth.as_vector(), rtol=0.05)


class TestMomWmpa:
    def test_australian(self, australian):
        fit = mom_wmpa(australian)
        assert fit.params.as_vector() == pytest.approx([0.1076, 0.7835, 0.2731, 0.3454], abs=5e-3)
        assert fit.method is Method.MOM and fit.iterations > 0

    def test_reproduces_anchor_moments(self, australian):
        from polya_aeppli import moments

        fit = mom_wmpa(australian)
        sm = sample_moments(australian)
        theory = moments(fit.params)
        # the iteration stops on a 1e-3 step, which leaves a small residual
        assert theory.mean[0] == pytest.approx(sm.means[0], rel=1e-4)
        assert theory.covariance[0, 0] == pytest.approx(sm.covariances[0, 0], rel=1e-4)
        assert theory.covariance[0, 1] == pytest.approx(sm.covariances[0, 1], rel=1e-4)

    def test_max_iter_reached(self, australian):
        with pytest.raises(NonConvergence):
            mom_wmpa(australian, tol=0.0, max_iter=3)

    def test_anchor_choice(self, australian):
        assert mom_wmpa(australian, anchor="max_mean").params == mom_wmpa(australian, anchor=1).params
        with pytest.raises(ValueError):
            mom_wmpa(australian, anchor=2)

    def test_permutation_with_max_mean_anchor(self, australian):
        a = mom_wmpa(australian, anchor="max_mean")
        b = mom_wmpa(australian.permuted([1, 0]), anchor="max_mean")
        assert b.params.lambdas == pytest.approx(a.params.lambdas[::-1], rel=1e-10)
        assert b.params.rho == pytest.approx(a.params.rho, rel=1e-10)

    def test_simulated_sample(self):
        truth = WmpaParams((0.6, 0.6), 0.3, 0.1)
        fit = mom(sample(truth, 5000, seed=3), "wmpa")
        assert fit.params.lambdas == pytest.approx(truth.lambdas, rel=0.15)
        assert abs(fit.params.rho - 0.1) < 0.05


class TestMle:
    def test_australian_mpa(self, australian_mle):
        fit = australian_mle["mpa"]
        assert fit.converged
        assert fit.params.as_vector() == pytest.approx([0.0930, 0.4148, 0.1257, 0.3479], abs=5e-3)
        assert fit.aic == pytest.approx(19890.39, abs=1.0)
        assert fit.bic == pytest.approx(19916.61, abs=1.0)

    @pytest.mark.parametrize("model", ["mpa", "wmpa"])
    def test_ascent_over_moment_start(self, australian, australian_mle, model):
        start = mom(australian, model)
        assert australian_mle[model].log_likelihood >= start.log_likelihood - 1e-9

    @pytest.mark.parametrize("model", ["mpa", "wmpa"])
    def test_stationary(self, australian, australian_mle, model):
        fit = australian_mle[model]
        cls = type(fit.params)
        grad = numerical_gradient(lambda v: log_likelihood(australian, params=cls.from_vector(v)),
                                  fit.params.as_vector())
        assert np.max(np.abs(grad)) < 0.05

    def test_permutation(self, australian, australian_mle):
        a = australian_mle["mpa"]
        b = mle(australian.permuted([1, 0]), "mpa")
        assert b.params.lambdas == pytest.approx(a.params.lambdas[::-1], abs=2e-3)
        assert b.params.rho == pytest.approx(a.params.rho, abs=2e-3)
        assert b.log_likelihood == pytest.approx(a.log_likelihood, abs=1e-3)

    def test_records_and_table_agree(self):
        data = sample(MpaParams((0.6, 0.6), 0.3, 0.1), 500, seed=8)
        a, b = mle(data, "mpa"), mle(data.to_table(), "mpa")
        assert a.log_likelihood == b.log_likelihood

    def test_fallback_start(self):
        data = CountSample(np.array([[0, 4], [4, 0], [0, 3], [5, 0], [0, 0], [1, 1]]))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            fit = mle(data, "mpa")
        assert any("fallback" in n for n in fit.notes)
        assert math.isfinite(fit.log_likelihood)

    def test_fallback_init_values(self, australian):
        init = fallback_init(australian, "wmpa")
        assert isinstance(init, WmpaParams)
        assert init.lambda_common == 0.01 and init.rho == 0.5

    def test_max_iter_flags_non_convergence(self, australian):
        with pytest.warns(ConvergenceWarning):
            fit = mle(australian, "mpa", tol=0.0, max_iter=2)
        assert not fit.converged and fit.iterations == 2

    def test_wrong_dimension_init(self, australian):
        with pytest.raises(ValueError):
            mle(australian, "mpa", init=MpaParams((0.1, 0.1, 0.1), 0.1, 0.3))


class TestNumericalGradient:
    def test_quadratic(self):
        g = numerical_gradient(lambda v: float(v @ v), np.array([1.0, -2.0, 3.0]))
        np.testing.assert_allclose(g, [2.0, -4.0, 6.0], rtol=1e-8)
