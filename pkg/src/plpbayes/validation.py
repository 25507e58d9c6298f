"""Input validation helpers.

Small checks shared by the model functions, the estimator classes and the
command line front end.  All of them raise :class:`~plpbayes.exceptions.DataError`
(a ``ValueError`` subclass) so user-facing code can map bad input to a single
error category.
"""

import numbers

import numpy as np

from .exceptions import DataError

__all__ = [
    "check_positive",
    "check_positive_int",
    "as_float_array_1d",
    "check_failure_times_array",
]


def check_positive(value, name):
    """Validate that ``value`` is a finite real number > 0 and return it as float."""
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise DataError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise DataError(f"{name} must be positive and finite, got {value}")
    return value


def check_positive_int(value, name):
    """Validate that ``value`` is an integer >= 1 and return it as int."""
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise DataError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < 1:
        raise DataError(f"{name} must be >= 1, got {value}")
    return value


def as_float_array_1d(values, name):
    """Coerce ``values`` to a 1-d float64 array, rejecting empties and non-finite entries."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        arr = np.atleast_1d(np.squeeze(arr))
    if arr.ndim != 1:
        raise DataError(f"{name} must be one dimensional, got shape {np.shape(values)}")
    if arr.size == 0:
        raise DataError(f"{name} must not be empty")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite values")
    return arr


def check_failure_times_array(times, name="failure times"):
    """Validate an ordered failure record: positive, strictly increasing."""
    arr = as_float_array_1d(times, name)
    if np.any(arr <= 0.0):
        raise DataError(f"{name} must all be positive")
    diffs = np.diff(arr)
    if np.any(diffs == 0.0):
        raise DataError(f"{name} contain duplicate values")
    if np.any(diffs < 0.0):
        raise DataError(f"{name} must be strictly increasing")
    return arr
