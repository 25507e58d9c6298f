"""Estimator facade over the functional core.

Both classes follow the scikit-learn protocol: hyperparameters are stored
verbatim by __init__, validation happens in fit, fitted state lives in
trailing-underscore attributes, and get_params/set_params come from
BaseEstimator.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .bayes import (
    PRIOR_CHOICES,
    HtLoss,
    PosteriorSpec,
    adjusted_theta,
    default_prior,
    ht_bayes_estimate,
)
from .exceptions import DataError
from .process import (
    FailureTimes,
    PlpParams,
    conditional_reliability,
    cumulative_intensity,
    intensity,
    mle_beta,
    mle_theta,
)
from .quadrature import QuadratureConfig

__all__ = ["PowerLawProcess", "HtBayesPowerLawProcess"]


class _FittedPlpMixin:
    """Query methods shared by the fitted estimators."""

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise NotFittedError(
                f"This {type(self).__name__} instance is not fitted yet;"
                " call fit with failure times first."
            )

    def predict(self, t):
        """Expected cumulative failure count at each time in ``t``."""
        self._check_fitted()
        t = np.asarray(t, dtype=float)
        return cumulative_intensity(self.params_, t)

    def predict_intensity(self, t):
        """Failure intensity at each time in ``t``."""
        self._check_fitted()
        t = np.asarray(t, dtype=float)
        return intensity(self.params_, t)

    def reliability(self, t, t_prev=None):
        """Probability of surviving from ``t_prev`` (default: the last
        observed failure) to ``t`` without failure."""
        self._check_fitted()
        if t_prev is None:
            t_prev = self.t_last_
        return conditional_reliability(self.params_, t_prev, t)


class PowerLawProcess(_FittedPlpMixin, BaseEstimator):
    """Maximum likelihood power law process.

    Fitted attributes: beta_, theta_, params_, n_failures_, t_last_.

    Examples
    --------
    >>> model = PowerLawProcess().fit([1.0, 2.7182818284590451])
    >>> round(model.beta_, 12)
    2.0
    """

    def fit(self, X, y=None):
        """Fit from cumulative failure times (failure truncated).

        Parameters
        ----------
        X : array-like of shape (n,)
            Strictly increasing positive failure times, n >= 2.
        y : ignored
        """
        data = X if isinstance(X, FailureTimes) else FailureTimes(X)
        self.beta_ = mle_beta(data)
        self.theta_ = mle_theta(data, self.beta_)
        self.params_ = PlpParams(beta=self.beta_, theta=self.theta_)
        self.n_failures_ = data.n
        self.t_last_ = data.t_last
        return self


class HtBayesPowerLawProcess(_FittedPlpMixin, BaseEstimator):
    """Bayes shape estimate under the Higgins-Tsokos loss, with the scale
    treated as known.

    Parameters
    ----------
    prior : str or prior object, default "jeffreys"
        One of "burr", "jeffreys", "invgamma", "kde-gauss", "kde-epan",
        or any object with log_density/support_lower.  Named data-driven
        priors are built from the record's shape-MLE trajectory.
    f1, f2 : float, default 1.0
        Loss asymmetry weights (f1 penalises overestimation).
    theta : float or "mle", default "mle"
        Known scale for the posterior; "mle" plugs in the record's own
        scale MLE.
    trajectory_min : int, default 5
        Smallest prefix length used when building a data-driven prior.
    bandwidth : float, optional
        Kernel bandwidth override for the kde priors.

    Fitted attributes: beta_, theta_, params_, prior_, n_failures_, t_last_.
    """

    def __init__(self, prior="jeffreys", f1=1.0, f2=1.0, theta="mle",
                 trajectory_min=5, bandwidth=None):
        self.prior = prior
        self.f1 = f1
        self.f2 = f2
        self.theta = theta
        self.trajectory_min = trajectory_min
        self.bandwidth = bandwidth

    def fit(self, X, y=None):
        data = X if isinstance(X, FailureTimes) else FailureTimes(X)
        if isinstance(self.prior, str):
            if self.prior not in PRIOR_CHOICES:
                raise DataError(
                    f"unknown prior {self.prior!r}; choose from {PRIOR_CHOICES}"
                )
            prior = default_prior(
                data, self.prior, n_min=self.trajectory_min, bandwidth=self.bandwidth
            )
        else:
            if not hasattr(self.prior, "log_density"):
                raise DataError("prior object must expose log_density")
            prior = self.prior
        if self.theta == "mle":
            theta = mle_theta(data, mle_beta(data))
        else:
            theta = float(self.theta)
            if not theta > 0.0:
                raise DataError("theta must be positive or 'mle'")
        loss = HtLoss(f1=self.f1, f2=self.f2)
        spec = PosteriorSpec(data=data, theta=theta, prior=prior)
        self.beta_ = ht_bayes_estimate(spec, loss=loss, quad=QuadratureConfig())
        self.theta_ = adjusted_theta(data, self.beta_)
        self.params_ = PlpParams(beta=self.beta_, theta=self.theta_)
        self.prior_ = prior
        self.n_failures_ = data.n
        self.t_last_ = data.t_last
        return self
