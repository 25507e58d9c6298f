"""Power law process reliability growth analysis.

Maximum likelihood and Higgins-Tsokos Bayesian estimation of the shape
parameter of a failure-truncated power law process, with Burr, Jeffreys,
inverted gamma, and kernel density priors, plus a Monte Carlo study engine
for comparing the estimators.
"""

from .bayes import (
    PRIOR_CHOICES,
    HtLoss,
    IntensityForm,
    PosteriorSpec,
    adjusted_theta,
    bayes_intensity,
    bayes_reliability,
    default_prior,
    ht_bayes_estimate,
    ht_loss,
    posterior_log_unnorm,
    posterior_mean,
)
from .estimators import HtBayesPowerLawProcess, PowerLawProcess
from .exceptions import DataError, EstimationError, QuadratureError
from .io import load_crow_times, parse_failure_file, parse_failure_text, write_failure_file
from .priors import (
    BurrParams,
    BurrPrior,
    InvGammaParams,
    InvGammaPrior,
    JeffreysPrior,
    KdePrior,
    amise_bandwidth,
    burr_cdf,
    burr_fit,
    burr_loglik,
    burr_ppf,
    burr_sample,
    invgamma_fit_moments,
    kde_build,
    prior_log_density,
)
from .process import (
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
from .quadrature import QuadratureConfig, adaptive_simpson
from .simulation import (
    DEFAULT_IMSE_RANGE,
    BurrSampledBeta,
    CellStats,
    FixedBeta,
    SimConfig,
    SimResult,
    imse,
    mse,
    relative_efficiency,
    run_campaign,
    sensitivity_sweep,
    simresult_to_csv,
    simresult_to_dict,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "DataError", "EstimationError", "QuadratureError",
    "PlpParams", "FailureTimes",
    "intensity", "cumulative_intensity", "count_pmf", "conditional_reliability",
    "log_likelihood", "mle_beta", "mle_theta", "mle_beta_trajectory",
    "simulate_failure_times",
    "BurrParams", "BurrPrior", "JeffreysPrior", "InvGammaParams", "InvGammaPrior",
    "KdePrior", "burr_cdf", "burr_ppf", "burr_sample", "burr_fit", "burr_loglik",
    "invgamma_fit_moments", "prior_log_density", "amise_bandwidth", "kde_build",
    "QuadratureConfig", "adaptive_simpson",
    "PRIOR_CHOICES", "HtLoss", "ht_loss", "PosteriorSpec", "posterior_log_unnorm",
    "ht_bayes_estimate", "posterior_mean", "adjusted_theta", "IntensityForm",
    "bayes_intensity", "bayes_reliability", "default_prior",
    "FixedBeta", "BurrSampledBeta", "SimConfig", "CellStats", "SimResult",
    "run_campaign", "sensitivity_sweep", "mse", "imse", "relative_efficiency",
    "DEFAULT_IMSE_RANGE", "simresult_to_csv", "simresult_to_dict",
    "parse_failure_text", "parse_failure_file", "write_failure_file", "load_crow_times",
    "PowerLawProcess", "HtBayesPowerLawProcess",
]
