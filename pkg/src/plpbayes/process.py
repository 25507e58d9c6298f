"""Power law process (Crow-AMSAA) model core.

A power law process is a non-homogeneous Poisson process whose intensity

    v(t) = (beta / theta) * (t / theta)**(beta - 1),    t > 0

decreases over time when beta < 1 (reliability growth) and increases when
beta > 1 (deterioration).  The expected number of failures by time t is the
cumulative intensity (t / theta)**beta.

All observation records here are failure truncated: testing stops at the
n-th failure, so the truncation time equals the last recorded failure time.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .exceptions import DataError, EstimationError
from .validation import check_failure_times_array, check_positive, check_positive_int

__all__ = [
    "PlpParams",
    "FailureTimes",
    "intensity",
    "cumulative_intensity",
    "count_pmf",
    "conditional_reliability",
    "log_likelihood",
    "mle_beta",
    "mle_theta",
    "simulate_failure_times",
    "mle_beta_trajectory",
]


@dataclass(frozen=True)
class PlpParams:
    """Parameter pair of a power law process.

    Attributes
    ----------
    beta : float
        Shape parameter.  Values below 1 mean the failure intensity is
        decreasing (the system improves as testing progresses).
    theta : float
        Scale parameter, in the same time unit as the failure record.
    """

    beta: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "beta", check_positive(self.beta, "beta"))
        object.__setattr__(self, "theta", check_positive(self.theta, "theta"))


@dataclass(frozen=True)
class FailureTimes:
    """Ordered record of cumulative failure times, truncated at the last failure.

    Parameters
    ----------
    times : array_like
        Strictly increasing positive failure times.

    Examples
    --------
    >>> rec = FailureTimes([0.7, 3.7, 13.2])
    >>> rec.n, rec.t_last
    (3, 13.2)
    """

    times: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = check_failure_times_array(self.times)
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "times", arr)

    @property
    def n(self):
        """Number of recorded failures."""
        return int(self.times.size)

    @property
    def t_last(self):
        """Truncation time (the last failure time)."""
        return float(self.times[-1])

    def __len__(self):
        return self.n


def _as_failure_times(data):
    if isinstance(data, FailureTimes):
        return data
    return FailureTimes(data)


def _check_times_arg(t, name="t", minimum=0.0):
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise DataError(f"{name} contains non-finite values")
    if np.any(t < minimum):
        raise DataError(f"{name} must be >= {minimum}")
    return t


def intensity(params, t):
    """Failure intensity v(t) = (beta/theta) * (t/theta)**(beta - 1).

    Parameters
    ----------
    params : PlpParams
    t : float or array_like
        Time(s) at which to evaluate.  Must be strictly positive: for
        beta < 1 the intensity diverges at t = 0.

    Returns
    -------
    float or ndarray
    """
    t = _check_times_arg(t)
    if np.any(t <= 0.0):
        raise DataError("t must be strictly positive")
    b, th = params.beta, params.theta
    out = (b / th) * (t / th) ** (b - 1.0)
    return out if out.ndim else float(out)


def cumulative_intensity(params, t):
    """Expected number of failures by time t, (t/theta)**beta.

    Defined for t >= 0 and equal to 0 at t = 0.
    """
    t = _check_times_arg(t)
    b, th = params.beta, params.theta
    out = (t / th) ** b
    return out if out.ndim else float(out)


def count_pmf(params, n, t):
    """Probability of observing exactly ``n`` failures by time ``t``.

    The count by time t is Poisson with mean (t/theta)**beta; the mass is
    computed in log space to stay finite for large means or counts.
    """
    n = int(n)
    if n < 0:
        raise DataError(f"n must be >= 0, got {n}")
    t = _check_times_arg(t)
    if np.any(t <= 0.0):
        raise DataError("t must be strictly positive")
    lam = (t / params.theta) ** params.beta
    log_p = n * np.log(lam) - lam - gammaln(n + 1) if n > 0 else -lam
    out = np.exp(log_p)
    return out if np.ndim(out) else float(out)


def conditional_reliability(params, t_prev, t):
    """Probability of surviving (t_prev, t] without failure, given the history.

    For a Poisson process this only depends on the expected number of
    failures in the window:

        R = exp(-[Lambda(t) - Lambda(t_prev)])

    Parameters
    ----------
    params : PlpParams
    t_prev : float
        Start of the window (typically the last observed failure), >= 0.
    t : float
        End of the window, >= t_prev.
    """
    t_prev = float(t_prev)
    t = float(t)
    if not (np.isfinite(t_prev) and np.isfinite(t)):
        raise DataError("times must be finite")
    if t_prev < 0.0:
        raise DataError("t_prev must be >= 0")
    if t < t_prev:
        raise DataError("t must be >= t_prev")
    b, th = params.beta, params.theta
    return float(np.exp(-((t / th) ** b - (t_prev / th) ** b)))


def log_likelihood(data, params):
    """Log likelihood of a failure-truncated record under a power law process.

    Computed entirely in log space:

        -(t_n/theta)**beta + n*log(beta/theta) + (beta-1) * sum(log(t_i/theta))

    Parameters
    ----------
    data : FailureTimes or array_like
    params : PlpParams

    Returns
    -------
    float
    """
    data = _as_failure_times(data)
    b, th = params.beta, params.theta
    t = data.times
    n = data.n
    log_ratios = np.log(t) - np.log(th)
    return float(
        -np.exp(b * log_ratios[-1])
        + n * (np.log(b) - np.log(th))
        + (b - 1.0) * np.sum(log_ratios)
    )


def mle_beta(data):
    """Maximum likelihood estimate of the shape parameter.

    For a failure-truncated record,

        beta_hat = n / sum(log(t_n / t_i), i = 1..n)

    Parameters
    ----------
    data : FailureTimes or array_like

    Returns
    -------
    float

    Examples
    --------
    >>> round(mle_beta([1.0, np.e]), 12)
    2.0
    """
    data = _as_failure_times(data)
    if data.n < 2:
        raise EstimationError("shape MLE needs at least two failure times")
    t = data.times
    denom = np.sum(np.log(t[-1] / t))
    if denom <= 0.0:
        raise EstimationError("shape MLE undefined: no spread in failure times")
    return float(data.n / denom)


def mle_theta(data, beta_hat):
    """Maximum likelihood estimate of the scale parameter given a shape estimate.

        theta_hat = t_n / n**(1/beta_hat)
    """
    data = _as_failure_times(data)
    beta_hat = check_positive(beta_hat, "beta_hat")
    return float(data.t_last / data.n ** (1.0 / beta_hat))


def simulate_failure_times(params, n, rng):
    """Draw a failure-truncated record of ``n`` failures from a power law process.

    Uses the inverse transform on the conditional waiting time: with
    u_i ~ uniform(0, 1),

        t_i = theta * [ (t_{i-1}/theta)**beta - log(1 - u_i) ]**(1/beta)

    i.e. the cumulative intensity at successive failures gains independent
    standard exponential increments.  Deterministic given ``rng``'s state.

    Parameters
    ----------
    params : PlpParams
    n : int
        Number of failures to generate.
    rng : numpy.random.Generator

    Returns
    -------
    FailureTimes
    """
    n = check_positive_int(n, "n")
    u = rng.random(n)
    increments = -np.log1p(-u)
    lam = np.cumsum(increments)
    times = params.theta * lam ** (1.0 / params.beta)
    return FailureTimes(times)


def mle_beta_trajectory(data, n_min=2):
    """Shape MLE recomputed on every truncation of the record.

    Returns the vector (beta_hat(t_1..t_k) for k = n_min..n), the path the
    shape estimate traces as failures accumulate.  Used as the reference
    sample when fitting prior hyperparameters from data.

    Parameters
    ----------
    data : FailureTimes or array_like
    n_min : int, default 2
        Smallest truncation size, must satisfy 2 <= n_min <= n.

    Returns
    -------
    ndarray
    """
    data = _as_failure_times(data)
    n_min = check_positive_int(n_min, "n_min")
    if n_min < 2:
        raise EstimationError("n_min must be >= 2: shape MLE needs two failures")
    if n_min > data.n:
        raise DataError(f"n_min={n_min} exceeds record size n={data.n}")
    log_t = np.log(data.times)
    # sum(log(t_k/t_i), i<=k) = k*log(t_k) - cumsum(log t)_k
    k = np.arange(1, data.n + 1)
    denom = k * log_t - np.cumsum(log_t)
    sizes = np.arange(n_min, data.n + 1)
    return sizes / denom[sizes - 1]
