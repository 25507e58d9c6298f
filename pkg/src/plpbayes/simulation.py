"""Monte Carlo study engine comparing shape estimators.

A campaign simulates failure-truncated records over a grid of scale values
and sample sizes.  Each replicate draws a true shape value (fixed or sampled
from a Burr distribution), simulates a record, then scores the MLE and the
Higgins-Tsokos Bayes estimate under every configured prior on that same
record, so comparisons between estimators are paired.

Replicate k always consumes the stream seeded by (master_seed, k); results
are aggregated in replicate order after all work completes, so output is
byte-identical no matter how many workers run the replicates.
"""

import hashlib
import json
import time
from dataclasses import dataclass, field, replace

import numpy as np
from joblib import Parallel, delayed

from .bayes import HtLoss, IntensityForm, PosteriorSpec, adjusted_theta, ht_bayes_estimate
from .exceptions import DataError, EstimationError
from .process import FailureTimes, PlpParams, intensity, mle_beta, mle_theta, simulate_failure_times
from .priors import BurrParams, burr_sample
from .quadrature import QuadratureConfig, adaptive_simpson
from .validation import check_positive, check_positive_int

__all__ = [
    "FixedBeta",
    "BurrSampledBeta",
    "SimConfig",
    "CellStats",
    "SimResult",
    "run_campaign",
    "sensitivity_sweep",
    "mse",
    "imse",
    "relative_efficiency",
    "DEFAULT_IMSE_RANGE",
    "simresult_to_csv",
    "simresult_to_dict",
]

# integration window for intensity comparisons: the first and last failure
# times of the benchmark vehicle record
DEFAULT_IMSE_RANGE = (0.7, 3256.3)


@dataclass(frozen=True)
class FixedBeta:
    """Every replicate uses the same true shape value."""

    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", check_positive(self.value, "value"))


@dataclass(frozen=True)
class BurrSampledBeta:
    """Each replicate draws its true shape from a Burr distribution and the
    estimate is scored against that replicate's own draw."""

    params: BurrParams


@dataclass(frozen=True)
class SimConfig:
    """Campaign definition.

    Attributes
    ----------
    theta_values : tuple of float
        True scale values (the posterior also conditions on these).
    sample_sizes : tuple of int
        Record sizes to simulate (each >= 2).
    replicates : int
        Replicates per (theta, n) cell.
    beta_source : FixedBeta or BurrSampledBeta
    priors : tuple of (name, prior) pairs
        Priors scored on every replicate, in a fixed order.
    loss : HtLoss
    master_seed : int
    quad : QuadratureConfig
    re_range : tuple of float, optional
        When set (and beta_source is fixed), intensity-fit relative
        efficiencies over this time window are added to the result.
    keep_replicates : bool
        Retain per-replicate records (datasets, estimates, hashes).
    """

    theta_values: tuple
    sample_sizes: tuple
    replicates: int
    beta_source: object
    priors: tuple
    loss: HtLoss = HtLoss()
    master_seed: int = 0
    quad: QuadratureConfig = QuadratureConfig()
    re_range: tuple | None = None
    keep_replicates: bool = False

    def __post_init__(self):
        thetas = tuple(check_positive(t, "theta") for t in self.theta_values)
        if not thetas:
            raise DataError("theta_values must not be empty")
        object.__setattr__(self, "theta_values", thetas)
        sizes = tuple(check_positive_int(n, "sample size") for n in self.sample_sizes)
        if not sizes:
            raise DataError("sample_sizes must not be empty")
        if any(n < 2 for n in sizes):
            raise DataError("sample sizes must be >= 2 (the shape MLE needs two failures)")
        object.__setattr__(self, "sample_sizes", sizes)
        object.__setattr__(self, "replicates", check_positive_int(self.replicates, "replicates"))
        if not isinstance(self.beta_source, (FixedBeta, BurrSampledBeta)):
            raise DataError("beta_source must be FixedBeta or BurrSampledBeta")
        priors = tuple((str(name), prior) for name, prior in self.priors)
        names = [name for name, _ in priors]
        if len(set(names)) != len(names):
            raise DataError("prior names must be unique")
        for name, prior in priors:
            if name == "mle":
                raise DataError("prior name 'mle' is reserved")
            if not hasattr(prior, "log_density"):
                raise DataError(f"prior {name!r} does not expose log_density")
        object.__setattr__(self, "priors", priors)
        if not isinstance(self.loss, HtLoss):
            raise DataError("loss must be an HtLoss")
        if not isinstance(self.quad, QuadratureConfig):
            raise DataError("quad must be a QuadratureConfig")
        seed = int(self.master_seed)
        if seed < 0:
            raise DataError("master_seed must be >= 0")
        object.__setattr__(self, "master_seed", seed)
        if self.re_range is not None:
            lo, hi = (float(x) for x in self.re_range)
            if not (0.0 < lo < hi):
                raise DataError("re_range must satisfy 0 < lo < hi")
            if not isinstance(self.beta_source, FixedBeta):
                raise DataError("re_range needs a fixed beta_source (a single true intensity)")
            object.__setattr__(self, "re_range", (lo, hi))

    def estimator_labels(self):
        labels = ["mle.beta", "mle.theta"]
        for name, _ in self.priors:
            labels.extend([f"{name}.beta", f"{name}.theta"])
        return labels

    def digest(self):
        """Stable identifier of the campaign definition."""
        payload = {
            "theta_values": list(self.theta_values),
            "sample_sizes": list(self.sample_sizes),
            "replicates": self.replicates,
            "beta_source": (
                {"fixed": self.beta_source.value}
                if isinstance(self.beta_source, FixedBeta)
                else {"burr": vars(self.beta_source.params)}
            ),
            "priors": [[name, prior.describe()] for name, prior in self.priors],
            "loss": {"f1": self.loss.f1, "f2": self.loss.f2},
            "master_seed": self.master_seed,
            "quad": {
                "lower": self.quad.lower,
                "rel_tol": self.quad.rel_tol,
                "abs_tol": self.quad.abs_tol,
                "max_refinements": self.quad.max_refinements,
                "tail_drop_nats": self.quad.tail_drop_nats,
            },
            "re_range": list(self.re_range) if self.re_range else None,
        }
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass
class CellStats:
    """Aggregates for one (theta, n, estimator) cell."""

    mean: float
    mse: float
    count: int
    errors: int


@dataclass
class SimResult:
    """Campaign output: per-cell aggregates plus metadata."""

    cells: dict
    config: SimConfig
    config_digest: str
    wall_time: float
    error_count: int
    total_replicates: int
    relative_efficiencies: list = field(default_factory=list)
    replicate_records: list | None = None


def _one_replicate(config, theta_idx, n_idx, k):
    """Simulate and score replicate k of one (theta, n) cell.

    Returns a dict of estimates, or the error message if any estimator
    failed; the record never raises so a campaign can tally failures.
    """
    theta = config.theta_values[theta_idx]
    n = config.sample_sizes[n_idx]
    rng = np.random.default_rng((config.master_seed, k))
    try:
        if isinstance(config.beta_source, FixedBeta):
            beta_true = config.beta_source.value
        else:
            beta_true = float(burr_sample(config.beta_source.params, rng))
        data = simulate_failure_times(PlpParams(beta=beta_true, theta=theta), n, rng)
        estimates = {}
        beta_hat = mle_beta(data)
        estimates["mle.beta"] = beta_hat
        estimates["mle.theta"] = mle_theta(data, beta_hat)
        for name, prior in config.priors:
            spec = PosteriorSpec(data=data, theta=theta, prior=prior)
            beta_b = ht_bayes_estimate(spec, loss=config.loss, quad=config.quad)
            estimates[f"{name}.beta"] = beta_b
            estimates[f"{name}.theta"] = adjusted_theta(data, beta_b)
    except EstimationError as exc:
        return {
            "theta_idx": theta_idx, "n_idx": n_idx, "replicate": k,
            "error": str(exc),
        }
    record = {
        "theta_idx": theta_idx, "n_idx": n_idx, "replicate": k,
        "beta_true": beta_true, "estimates": estimates, "error": None,
    }
    if config.keep_replicates:
        record["times"] = data.times.tolist()
        record["dataset_sha256"] = hashlib.sha256(data.times.tobytes()).hexdigest()
    return record


def run_campaign(config, n_jobs=1):
    """Run a Monte Carlo campaign.

    Parameters
    ----------
    config : SimConfig
    n_jobs : int, default 1
        Worker processes/threads for replicate execution.  Results are
        identical for any value because aggregation happens in replicate
        order after the fact.

    Returns
    -------
    SimResult

    Raises
    ------
    EstimationError
        If more than 1% of replicates fail.
    """
    start = time.perf_counter()
    tasks = [
        (ti, ni, k)
        for ti in range(len(config.theta_values))
        for ni in range(len(config.sample_sizes))
        for k in range(config.replicates)
    ]
    if n_jobs == 1:
        records = [_one_replicate(config, *t) for t in tasks]
    else:
        records = Parallel(n_jobs=n_jobs)(delayed(_one_replicate)(config, *t) for t in tasks)
    records.sort(key=lambda r: (r["theta_idx"], r["n_idx"], r["replicate"]))

    total = len(records)
    error_count = sum(1 for r in records if r["error"] is not None)
    if error_count > 0.01 * total:
        raise EstimationError(
            f"campaign failed: {error_count} of {total} replicates errored (> 1%)"
        )

    cells = {}
    for ti, theta in enumerate(config.theta_values):
        for ni, n in enumerate(config.sample_sizes):
            group = [r for r in records if r["theta_idx"] == ti and r["n_idx"] == ni]
            ok = [r for r in group if r["error"] is None]
            errs = len(group) - len(ok)
            for label in config.estimator_labels():
                truth = (
                    np.array([r["beta_true"] for r in ok])
                    if label.endswith(".beta")
                    else np.full(len(ok), theta)
                )
                values = np.array([r["estimates"][label] for r in ok])
                cells[(theta, n, label)] = CellStats(
                    mean=float(np.mean(values)) if ok else float("nan"),
                    mse=float(np.mean((values - truth) ** 2)) if ok else float("nan"),
                    count=len(ok),
                    errors=errs,
                )

    res = SimResult(
        cells=cells,
        config=config,
        config_digest=config.digest(),
        wall_time=time.perf_counter() - start,
        error_count=error_count,
        total_replicates=total,
        replicate_records=records if config.keep_replicates else None,
    )
    if config.re_range is not None:
        res.relative_efficiencies = _re_table(config, cells)
    return res


def _re_table(config, cells):
    """Relative efficiency of each prior's mean fitted intensity against the
    MLE's, both built from cell-average parameter estimates."""
    out = []
    beta_true = config.beta_source.value
    for theta in config.theta_values:
        truth = PlpParams(beta=beta_true, theta=theta)
        for n in config.sample_sizes:
            mle_form = IntensityForm.from_params(
                PlpParams(
                    beta=cells[(theta, n, "mle.beta")].mean,
                    theta=cells[(theta, n, "mle.theta")].mean,
                )
            )
            imse_mle = imse(mle_form, truth, config.re_range)
            for name, _ in config.priors:
                form = IntensityForm.from_params(
                    PlpParams(
                        beta=cells[(theta, n, f"{name}.beta")].mean,
                        theta=cells[(theta, n, f"{name}.theta")].mean,
                    )
                )
                imse_b = imse(form, truth, config.re_range)
                out.append(
                    {
                        "theta": theta,
                        "n": n,
                        "prior": name,
                        "imse_bayes": imse_b,
                        "imse_mle": imse_mle,
                        "relative_efficiency": relative_efficiency(imse_b, imse_mle),
                    }
                )
    return out


def sensitivity_sweep(config, n_jobs=1):
    """Paired prior comparison: every replicate's record is scored by every
    configured prior, and the per-replicate records (with dataset hashes)
    are retained so pairings can be audited.

    Requires at least two priors.
    """
    if len(config.priors) < 2:
        raise DataError("sensitivity sweep needs at least two priors")
    config = replace(config, keep_replicates=True)
    return run_campaign(config, n_jobs=n_jobs)


def mse(estimates, truths):
    """Mean squared error of per-replicate estimates against their truths."""
    estimates = np.atleast_1d(np.asarray(estimates, dtype=float))
    truths = np.atleast_1d(np.asarray(truths, dtype=float))
    if estimates.size == 0:
        raise DataError("estimates must not be empty")
    if estimates.shape != truths.shape:
        raise DataError(
            f"length mismatch: {estimates.shape[0]} estimates vs {truths.shape[0]} truths"
        )
    diff = estimates - truths
    return float(np.mean(diff * diff))


def imse(fitted, truth, t_range=DEFAULT_IMSE_RANGE):
    """Integrated squared error between a fitted and a true intensity.

        integral of (fitted(t) - v_true(t))**2 over [t_lo, t_hi]

    Parameters
    ----------
    fitted : IntensityForm or PlpParams
    truth : PlpParams
    t_range : (float, float)
        Integration window; t_lo must be strictly positive because the
        squared intensity difference is not integrable at 0 for decreasing
        intensities.

    Returns
    -------
    float
    """
    if isinstance(fitted, PlpParams):
        fitted = IntensityForm.from_params(fitted)
    t_lo, t_hi = (float(x) for x in t_range)
    if t_lo <= 0.0:
        raise DataError("t_lo must be strictly positive")
    if t_hi <= t_lo:
        raise DataError("t_range must be increasing")

    def integrand(t):
        diff = fitted(t) - intensity(truth, t)
        return diff * diff

    # the intensity is monotone, so the endpoint values bound it on the
    # window; squared differences below (1e-12 * scale)**2 are rounding
    # noise between the two evaluation forms and must not drive refinement
    scale = max(intensity(truth, t_lo), intensity(truth, t_hi))
    floor = (1e-12 * scale) ** 2 * (t_hi - t_lo)
    return adaptive_simpson(integrand, t_lo, t_hi, rel_tol=1e-9, abs_tol=floor)


def relative_efficiency(imse_bayes, imse_mle):
    """Ratio of integrated squared errors; below 1 favours the first fit."""
    imse_bayes = float(imse_bayes)
    imse_mle = float(imse_mle)
    if imse_bayes < 0.0 or imse_mle < 0.0:
        raise DataError("integrated squared errors must be non-negative")
    if imse_mle == 0.0:
        raise DataError("reference fit has zero integrated squared error (exact fit)")
    return imse_bayes / imse_mle


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------


def simresult_to_csv(result):
    """Render the per-cell table as CSV text (6 significant digits)."""
    lines = ["theta,n,estimator,mean,mse,replicates,errors"]
    config = result.config
    for theta in config.theta_values:
        for n in config.sample_sizes:
            for label in config.estimator_labels():
                cell = result.cells[(theta, n, label)]
                lines.append(
                    f"{theta:.6g},{n},{label},{cell.mean:.6g},{cell.mse:.6g},"
                    f"{cell.count},{cell.errors}"
                )
    return "\n".join(lines) + "\n"


def simresult_to_dict(result):
    """Full-precision dictionary form of a campaign result."""
    config = result.config
    cells = [
        {
            "theta": theta,
            "n": n,
            "estimator": label,
            "mean": result.cells[(theta, n, label)].mean,
            "mse": result.cells[(theta, n, label)].mse,
            "replicates": result.cells[(theta, n, label)].count,
            "errors": result.cells[(theta, n, label)].errors,
        }
        for theta in config.theta_values
        for n in config.sample_sizes
        for label in config.estimator_labels()
    ]
    out = {
        "metadata": {
            "master_seed": config.master_seed,
            "config_digest": result.config_digest,
            "wall_time_s": result.wall_time,
            "total_replicates": result.total_replicates,
            "error_count": result.error_count,
        },
        "cells": cells,
    }
    if result.relative_efficiencies:
        out["relative_efficiency"] = result.relative_efficiencies
    return out
