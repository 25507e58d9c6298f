"""Power law process core: intensity, likelihood, MLEs, simulator."""

import math

import numpy as np
import pytest
from scipy import stats
from scipy.optimize import minimize_scalar

from plpbayes import (
    DataError,
    EstimationError,
    FailureTimes,
    PlpParams,
    conditional_reliability,
    count_pmf,
    cumulative_intensity,
    intensity,
    log_likelihood,
    mle_beta,
    mle_beta_trajectory,
    mle_theta,
    simulate_failure_times,
)

# extended-precision reference values (60-digit arithmetic, rounded to double)
CUM_INTENSITY_049 = 40.074211256478884775  # exp(0.49 * log(3256.3 / 1.7441))
CROW_LOGLIK_049 = -202.8590892256711158  # term-by-term at (0.49, 1.7441)
COND_REL_BAYES = 0.62731865890936185  # exp(-a*(t^b+1 - s^b+1)/(b+1)) closed form


class TestFailureTimes:
    def test_basic_record(self):
        rec = FailureTimes([0.7, 3.7, 13.2])
        assert rec.n == 3
        assert rec.t_last == 13.2
        assert len(rec) == 3

    def test_times_are_immutable(self):
        rec = FailureTimes([1.0, 2.0])
        with pytest.raises(ValueError):
            rec.times[0] = 5.0

    @pytest.mark.parametrize(
        "times",
        [[], [0.0, 1.0], [-1.0, 2.0], [1.0, 1.0], [2.0, 1.0], [1.0, np.inf]],
    )
    def test_invalid_records_rejected(self, times):
        with pytest.raises(DataError):
            FailureTimes(times)


class TestPlpParams:
    def test_valid(self):
        p = PlpParams(beta=0.5, theta=2.0)
        assert (p.beta, p.theta) == (0.5, 2.0)

    @pytest.mark.parametrize("beta,theta", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0), (np.nan, 1.0)])
    def test_invalid(self, beta, theta):
        with pytest.raises(DataError):
            PlpParams(beta=beta, theta=theta)


class TestIntensity:
    def test_constant_when_shape_is_one(self):
        p = PlpParams(beta=1.0, theta=2.0)
        assert intensity(p, 17.3) == 0.5
        assert intensity(p, 0.001) == 0.5

    def test_linear_case(self):
        assert intensity(PlpParams(beta=2.0, theta=1.0), 3.0) == 6.0

    def test_fitted_form_value(self):
        # 0.347933 * t**-0.498801 at t = 1
        v = intensity(PlpParams(beta=0.501199, theta=2.07144), 1.0)
        assert abs(v - 0.347933) < 1e-5

    def test_rejects_nonpositive_time(self):
        p = PlpParams(beta=0.5, theta=1.0)
        with pytest.raises(DataError):
            intensity(p, 0.0)
        with pytest.raises(DataError):
            intensity(p, [1.0, -2.0])

    def test_vectorised(self):
        p = PlpParams(beta=2.0, theta=1.0)
        np.testing.assert_allclose(intensity(p, [1.0, 3.0]), [2.0, 6.0])


class TestCumulativeIntensity:
    @pytest.mark.parametrize("beta", [0.3, 1.0, 2.7])
    def test_one_at_scale(self, beta):
        assert cumulative_intensity(PlpParams(beta=beta, theta=3.1), 3.1) == 1.0

    def test_homogeneous(self):
        assert cumulative_intensity(PlpParams(beta=1.0, theta=2.0), 6.0) == 3.0

    def test_zero_at_origin(self):
        assert cumulative_intensity(PlpParams(beta=0.49, theta=1.7441), 0.0) == 0.0

    def test_extended_precision_reference(self):
        v = cumulative_intensity(PlpParams(beta=0.49, theta=1.7441), 3256.3)
        assert v == pytest.approx(CUM_INTENSITY_049, rel=1e-12)

    def test_monotone_nondecreasing(self):
        p = PlpParams(beta=0.7, theta=1.5)
        grid = np.linspace(0.0, 100.0, 200)
        vals = cumulative_intensity(p, grid)
        assert np.all(np.diff(vals) >= 0.0)

    def test_rejects_negative_time(self):
        with pytest.raises(DataError):
            cumulative_intensity(PlpParams(beta=1.0, theta=1.0), -0.1)


class TestCountPmf:
    def test_empty_count(self):
        p = PlpParams(beta=0.7, theta=1.7)
        assert count_pmf(p, 0, 10.0) == pytest.approx(
            math.exp(-cumulative_intensity(p, 10.0)), rel=1e-15
        )

    def test_unit_poisson(self):
        assert count_pmf(PlpParams(beta=1.0, theta=1.0), 1, 1.0) == pytest.approx(
            math.exp(-1.0), rel=1e-14
        )

    def test_normalisation(self):
        p = PlpParams(beta=0.7, theta=1.7)
        total = sum(count_pmf(p, n, 10.0) for n in range(201))
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_rejects_negative_count(self):
        with pytest.raises(DataError):
            count_pmf(PlpParams(beta=1.0, theta=1.0), -1, 1.0)


class TestConditionalReliability:
    def test_zero_length_window(self):
        assert conditional_reliability(PlpParams(beta=0.7, theta=3.0), 5.0, 5.0) == 1.0

    def test_homogeneous_gap(self):
        r = conditional_reliability(PlpParams(beta=1.0, theta=1.0), 2.0, 5.0)
        assert r == pytest.approx(math.exp(-3.0), rel=1e-14)

    def test_closed_form_reference(self):
        r = conditional_reliability(PlpParams(beta=0.501199, theta=2.07144), 3181.0, 3256.3)
        assert r == pytest.approx(COND_REL_BAYES, rel=1e-12)

    def test_multiplicative_over_adjacent_windows(self):
        p = PlpParams(beta=0.7054, theta=1.7441)
        for a, b, c in [(0.0, 1.0, 2.0), (3.0, 10.0, 50.0), (100.0, 100.0, 250.0)]:
            lhs = conditional_reliability(p, a, b) * conditional_reliability(p, b, c)
            assert lhs == pytest.approx(conditional_reliability(p, a, c), rel=1e-12)

    def test_monotone_in_endpoint(self):
        p = PlpParams(beta=0.7, theta=1.5)
        grid = np.linspace(5.0, 50.0, 100)
        vals = [conditional_reliability(p, 5.0, t) for t in grid]
        assert np.all(np.diff(vals) <= 0.0)

    def test_rejects_reversed_window(self):
        with pytest.raises(DataError):
            conditional_reliability(PlpParams(beta=1.0, theta=1.0), 5.0, 2.0)
        with pytest.raises(DataError):
            conditional_reliability(PlpParams(beta=1.0, theta=1.0), -1.0, 2.0)


class TestLogLikelihood:
    def test_single_failure_at_scale(self):
        theta = 2.5
        ll = log_likelihood(FailureTimes([theta]), PlpParams(beta=1.0, theta=theta))
        assert ll == pytest.approx(math.log(1.0 / theta) - 1.0, rel=1e-15)

    def test_extended_precision_reference(self, crow):
        ll = log_likelihood(crow, PlpParams(beta=0.49, theta=1.7441))
        assert ll == pytest.approx(CROW_LOGLIK_049, abs=1e-10)

    def test_summation_order_invariance(self, crow):
        params = PlpParams(beta=0.49, theta=1.7441)
        ll = log_likelihood(crow, params)
        # independent evaluation, summing the log terms in reverse order
        t = crow.times[::-1]
        alt = (
            -math.exp(params.beta * math.log(crow.t_last / params.theta))
            + crow.n * math.log(params.beta / params.theta)
            + (params.beta - 1.0) * math.fsum(math.log(x / params.theta) for x in t)
        )
        assert ll == pytest.approx(alt, abs=1e-10)

    def test_profile_argmax_is_shape_mle(self, crow, crow_mle):
        beta_hat, theta_hat = crow_mle
        res = minimize_scalar(
            lambda b: -log_likelihood(crow, PlpParams(beta=b, theta=theta_hat)),
            bracket=(0.1, 0.5, 2.0),
            method="golden",
            options={"xtol": 1e-12},
        )
        assert abs(res.x - beta_hat) < 1e-6


class TestMleBeta:
    def test_two_point_closed_form(self):
        assert mle_beta([1.0, math.e]) == pytest.approx(2.0, rel=1e-14)

    def test_crow_rounds_to_049(self, crow):
        assert round(mle_beta(crow), 2) == 0.49

    def test_crow_prefix_rounds_to_048(self, crow):
        assert round(mle_beta(crow.times[:39]), 2) == 0.48

    def test_needs_two_failures(self):
        with pytest.raises(EstimationError):
            mle_beta([5.0])

    def test_scale_invariance_exact(self, crow):
        base = mle_beta(crow)
        for c in (0.25, 4.0, 1024.0):  # powers of two keep the ratios bit-exact
            assert mle_beta(c * crow.times) == base
        assert mle_beta(3.7 * crow.times) == pytest.approx(base, rel=1e-12)


class TestMleTheta:
    def test_two_point_value(self):
        assert mle_theta([1.0, math.e], 2.0) == pytest.approx(math.e / math.sqrt(2.0), rel=1e-14)

    def test_crow_value(self, crow, crow_mle):
        assert abs(crow_mle[1] - 1.7441) < 0.01

    def test_scales_with_data(self, crow, crow_mle):
        beta_hat, theta_hat = crow_mle
        assert mle_theta(4.0 * crow.times, beta_hat) == 4.0 * theta_hat

    def test_rejects_bad_shape(self, crow):
        with pytest.raises(DataError):
            mle_theta(crow, 0.0)


class TestSimulateFailureTimes:
    def test_deterministic_given_seed(self):
        p = PlpParams(beta=0.7054, theta=1.7441)
        a = simulate_failure_times(p, 40, np.random.default_rng(123))
        b = simulate_failure_times(p, 40, np.random.default_rng(123))
        assert np.array_equal(a.times, b.times)

    def test_strictly_increasing(self):
        p = PlpParams(beta=0.5, theta=2.0)
        for seed in range(20):
            rec = simulate_failure_times(p, 50, np.random.default_rng(seed))
            assert np.all(np.diff(rec.times) > 0.0)

    def test_homogeneous_interarrivals_are_exponential(self):
        rec = simulate_failure_times(
            PlpParams(beta=1.0, theta=1.0), 10_000, np.random.default_rng(5678)
        )
        gaps = np.diff(np.concatenate([[0.0], rec.times]))
        assert stats.kstest(gaps, "expon").pvalue > 0.01

    def test_mean_count_matches_cumulative_intensity(self):
        # E[N(T)] = (T/theta)**beta; 1e4 runs, 3 standard errors
        p = PlpParams(beta=0.7054, theta=1.7441)
        T = 17.0
        lam = cumulative_intensity(p, T)
        counts = np.array(
            [
                np.sum(simulate_failure_times(p, 20, np.random.default_rng((11, k))).times <= T)
                for k in range(10_000)
            ],
            dtype=float,
        )
        se = counts.std(ddof=1) / 100.0
        assert abs(counts.mean() - lam) < 3.0 * se

    def test_shape_mle_overestimates_on_average(self):
        p = PlpParams(beta=0.7054, theta=1.7441)
        ests = [
            mle_beta(simulate_failure_times(p, 40, np.random.default_rng((7, k))))
            for k in range(1000)
        ]
        assert np.mean(ests) > p.beta

    def test_rejects_bad_count(self):
        with pytest.raises(DataError):
            simulate_failure_times(PlpParams(beta=1.0, theta=1.0), 0, np.random.default_rng(0))


class TestMleBetaTrajectory:
    def test_crow_tail_values(self, crow):
        traj = mle_beta_trajectory(crow, n_min=39)
        assert [round(b, 2) for b in traj] == [0.48, 0.49]

    def test_single_element_when_nmin_is_n(self, crow):
        # summation order differs from the one-shot MLE, hence approx
        traj = mle_beta_trajectory(crow, n_min=crow.n)
        assert traj.shape == (1,)
        assert traj[0] == pytest.approx(mle_beta(crow), rel=1e-13)

    def test_matches_per_prefix_recomputation(self, crow):
        traj = mle_beta_trajectory(crow, n_min=5)
        expected = [mle_beta(crow.times[:k]) for k in range(5, crow.n + 1)]
        np.testing.assert_allclose(traj, expected, rtol=1e-13)

    def test_simulated_records_give_finite_positive_paths(self):
        p = PlpParams(beta=0.7054, theta=1.7441)
        for seed in range(100):
            rec = simulate_failure_times(p, 30, np.random.default_rng(seed))
            traj = mle_beta_trajectory(rec, n_min=5)
            assert traj.shape == (26,)
            assert np.all(np.isfinite(traj)) and np.all(traj > 0.0)

    def test_nmin_validation(self, crow):
        with pytest.raises(EstimationError):
            mle_beta_trajectory(crow, n_min=1)
        with pytest.raises(DataError):
            mle_beta_trajectory(crow, n_min=crow.n + 1)
