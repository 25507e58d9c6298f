"""Monte Carlo campaign engine, error metrics and serialisation."""

import hashlib
import math

import numpy as np
import pytest

from plpbayes import (
    BurrParams,
    BurrPrior,
    BurrSampledBeta,
    DataError,
    EstimationError,
    FixedBeta,
    HtLoss,
    JeffreysPrior,
    PlpParams,
    SimConfig,
    imse,
    intensity,
    mle_beta,
    mse,
    relative_efficiency,
    run_campaign,
    sensitivity_sweep,
    simresult_to_csv,
    simresult_to_dict,
)
from plpbayes.bayes import IntensityForm

PINNED_BURR = BurrParams(2.0, 0.65, 0.05, 2.0)


def small_config(**overrides):
    base = dict(
        theta_values=(1.7441,),
        sample_sizes=(20,),
        replicates=5,
        beta_source=FixedBeta(0.7054),
        priors=(("jeffreys", JeffreysPrior()),),
        master_seed=0,
    )
    base.update(overrides)
    return SimConfig(**base)


class TestMse:
    def test_zero_on_equal(self):
        assert mse([0.5, 0.7, 0.9], [0.5, 0.7, 0.9]) == 0.0

    def test_constant_shift(self):
        x = np.array([0.5, 0.7, 0.9])
        assert mse(x + 0.1, x) == pytest.approx(0.01, rel=1e-12)

    def test_matches_two_pass_summation(self):
        rng = np.random.default_rng(12)
        est = rng.normal(0.7, 0.1, size=100)
        tru = rng.normal(0.7, 0.1, size=100)
        direct = math.fsum((a - b) ** 2 for a, b in zip(est, tru)) / 100.0
        assert mse(est, tru) == pytest.approx(direct, abs=1e-14)

    def test_length_mismatch(self):
        with pytest.raises(DataError, match="length mismatch"):
            mse([0.5, 0.7], [0.5])

    def test_empty(self):
        with pytest.raises(DataError):
            mse([], [])


class TestImse:
    TRUTH = PlpParams(beta=0.7054, theta=1.7441)

    def test_negligible_for_identical_fit(self):
        # the fitted form and the true intensity evaluate along different
        # floating point paths, so the integrand is rounding noise, not 0
        assert imse(self.TRUTH, self.TRUTH, (0.7, 100.0)) < 1e-20

    def test_constant_offset_closed_form(self):
        # two homogeneous fits differing by a constant intensity offset c
        fitted = IntensityForm.from_params(PlpParams(beta=1.0, theta=1.0 / 0.6))
        truth = PlpParams(beta=1.0, theta=2.0)
        a, b = 0.7, 10.7
        assert imse(fitted, truth, (a, b)) == pytest.approx(0.1**2 * (b - a), abs=1e-9)

    def test_matches_brute_force_midpoint_rule(self):
        fitted = IntensityForm.from_params(PlpParams(beta=0.55, theta=1.9))
        edges = np.linspace(0.7, 50.0, 1_000_001)
        mids = 0.5 * (edges[:-1] + edges[1:])
        h = edges[1] - edges[0]
        brute = float(np.sum((fitted(mids) - intensity(self.TRUTH, mids)) ** 2) * h)
        assert imse(fitted, self.TRUTH, (0.7, 50.0)) == pytest.approx(brute, rel=1e-6)

    def test_rejects_nonpositive_lower_limit(self):
        with pytest.raises(DataError):
            imse(self.TRUTH, self.TRUTH, (0.0, 10.0))

    def test_rejects_reversed_range(self):
        with pytest.raises(DataError):
            imse(self.TRUTH, self.TRUTH, (5.0, 1.0))


class TestRelativeEfficiency:
    def test_equal_errors_give_one(self):
        assert relative_efficiency(0.37, 0.37) == 1.0

    def test_zero_numerator(self):
        assert relative_efficiency(0.0, 0.5) == 0.0

    def test_zero_denominator_rejected(self):
        with pytest.raises(DataError):
            relative_efficiency(0.1, 0.0)

    def test_negative_rejected(self):
        with pytest.raises(DataError):
            relative_efficiency(-0.1, 0.5)


class TestSimConfig:
    def test_estimator_label_order(self):
        cfg = small_config(
            priors=(("jeffreys", JeffreysPrior()), ("burr", BurrPrior(PINNED_BURR)))
        )
        assert cfg.estimator_labels() == [
            "mle.beta", "mle.theta",
            "jeffreys.beta", "jeffreys.theta",
            "burr.beta", "burr.theta",
        ]

    def test_digest_is_stable_and_seed_sensitive(self):
        a = small_config().digest()
        b = small_config().digest()
        c = small_config(master_seed=1).digest()
        assert a == b
        assert a != c
        assert len(a) == 64 and set(a) <= set("0123456789abcdef")

    def test_reserved_and_duplicate_prior_names(self):
        with pytest.raises(DataError):
            small_config(priors=(("mle", JeffreysPrior()),))
        with pytest.raises(DataError):
            small_config(priors=(("p", JeffreysPrior()), ("p", BurrPrior(PINNED_BURR))))

    def test_sample_size_floor(self):
        with pytest.raises(DataError):
            small_config(sample_sizes=(1,))

    def test_empty_grids_rejected(self):
        with pytest.raises(DataError):
            small_config(theta_values=())
        with pytest.raises(DataError):
            small_config(sample_sizes=())

    def test_re_range_needs_fixed_beta(self):
        with pytest.raises(DataError):
            small_config(beta_source=BurrSampledBeta(PINNED_BURR), re_range=(0.7, 100.0))
        with pytest.raises(DataError):
            small_config(re_range=(5.0, 1.0))


class TestRunCampaign:
    def test_single_replicate_rerun_is_identical(self):
        cfg = small_config(replicates=1)
        a = run_campaign(cfg)
        b = run_campaign(cfg)
        assert simresult_to_csv(a) == simresult_to_csv(b)
        assert a.cells == b.cells

    def test_parallelism_does_not_change_output(self):
        cfg = small_config(replicates=12)
        serial = simresult_to_csv(run_campaign(cfg, n_jobs=1))
        threaded = simresult_to_csv(run_campaign(cfg, n_jobs=2))
        assert serial == threaded

    def test_aggregates_match_replicate_records(self):
        cfg = small_config(replicates=8, keep_replicates=True)
        res = run_campaign(cfg)
        cell = res.cells[(1.7441, 20, "jeffreys.beta")]
        vals = np.array([r["estimates"]["jeffreys.beta"] for r in res.replicate_records])
        assert cell.count == 8
        assert cell.mean == float(np.mean(vals))
        assert cell.mse == float(np.mean((vals - 0.7054) ** 2))

    def test_replicate_stream_depends_only_on_seed_and_index(self):
        # common random numbers: shape estimates coincide across scale cells
        cfg = small_config(theta_values=(0.5, 4.0), replicates=30, master_seed=5)
        res = run_campaign(cfg)
        a = res.cells[(0.5, 20, "mle.beta")]
        b = res.cells[(4.0, 20, "mle.beta")]
        assert a.mean == b.mean
        assert a.mse == b.mse

    def test_burr_sampled_truths_scored_per_replicate(self):
        cfg = small_config(
            beta_source=BurrSampledBeta(PINNED_BURR), replicates=6, keep_replicates=True
        )
        res = run_campaign(cfg)
        truths = [r["beta_true"] for r in res.replicate_records]
        assert len(set(truths)) == 6
        assert all(t > PINNED_BURR.gamma for t in truths)

    def test_campaign_fails_when_error_rate_exceeds_threshold(self):
        # a prior supported far above any plausible shape value cannot score
        far = BurrPrior(BurrParams(2.0, 50.0, 0.05, 2.0))
        cfg = small_config(priors=(("far", far),), replicates=3)
        with pytest.raises(EstimationError, match="campaign failed"):
            run_campaign(cfg)

    def test_mse_decreases_with_record_size(self):
        cfg = SimConfig(
            theta_values=(1.7441,),
            sample_sizes=(20, 40, 80, 160),
            replicates=1000,
            beta_source=FixedBeta(0.7054),
            priors=(("jeffreys", JeffreysPrior()),),
            master_seed=3,
        )
        res = run_campaign(cfg, n_jobs=4)
        assert res.error_count == 0
        for label in cfg.estimator_labels():
            mses = [res.cells[(1.7441, n, label)].mse for n in cfg.sample_sizes]
            inversions = sum(1 for lo, hi in zip(mses, mses[1:]) if hi >= lo)
            assert inversions <= 1, f"{label}: {mses}"

    def test_relative_efficiency_table(self):
        cfg = small_config(
            replicates=20,
            priors=(("burr", BurrPrior(PINNED_BURR)),),
            re_range=(0.7, 3256.3),
        )
        res = run_campaign(cfg)
        assert len(res.relative_efficiencies) == 1
        row = res.relative_efficiencies[0]
        assert row["prior"] == "burr"
        assert row["relative_efficiency"] == pytest.approx(
            row["imse_bayes"] / row["imse_mle"], rel=1e-12
        )
        assert relative_efficiency(row["imse_mle"], row["imse_mle"]) == 1.0


class TestSensitivitySweep:
    def test_needs_two_priors(self):
        with pytest.raises(DataError):
            sensitivity_sweep(small_config())

    def test_priors_share_each_replicates_dataset(self):
        cfg = small_config(
            priors=(("jeffreys", JeffreysPrior()), ("burr", BurrPrior(PINNED_BURR))),
            replicates=6,
        )
        res = sensitivity_sweep(cfg)
        assert res.replicate_records is not None
        for rec in res.replicate_records:
            times = np.array(rec["times"])
            # one dataset per replicate, hashed, scored by every estimator
            assert rec["dataset_sha256"] == hashlib.sha256(times.tobytes()).hexdigest()
            assert rec["estimates"]["mle.beta"] == mle_beta(times)
            assert {"jeffreys.beta", "burr.beta"} <= set(rec["estimates"])


class TestSerialisation:
    def test_csv_layout(self):
        res = run_campaign(small_config(replicates=2))
        lines = simresult_to_csv(res).splitlines()
        assert lines[0] == "theta,n,estimator,mean,mse,replicates,errors"
        assert len(lines) == 1 + len(res.config.estimator_labels())
        first = lines[1].split(",")
        assert first[0] == "1.7441"
        assert first[1] == "20"
        assert first[2] == "mle.beta"
        assert first[5] == "2"
        assert first[6] == "0"

    def test_dict_is_full_precision(self):
        res = run_campaign(small_config(replicates=2))
        doc = simresult_to_dict(res)
        assert doc["metadata"]["master_seed"] == 0
        assert doc["metadata"]["config_digest"] == res.config_digest
        assert doc["metadata"]["total_replicates"] == 2
        assert doc["metadata"]["error_count"] == 0
        cell = next(
            c for c in doc["cells"] if c["estimator"] == "jeffreys.beta"
        )
        assert cell["mean"] == res.cells[(1.7441, 20, "jeffreys.beta")].mean

    def test_dict_includes_re_section_when_configured(self):
        cfg = small_config(replicates=5, re_range=(0.7, 100.0))
        doc = simresult_to_dict(run_campaign(cfg))
        assert "relative_efficiency" in doc
        assert doc["relative_efficiency"][0]["prior"] == "jeffreys"
