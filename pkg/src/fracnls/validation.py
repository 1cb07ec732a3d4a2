"""Input validation helpers shared by the estimators."""

from __future__ import annotations

import numbers

import numpy as np

from .exceptions import DegenerateInputError, InvalidParameterError
from .field import Field, GridSpec


def check_field(u, *, allow_zero: bool = True, grid: GridSpec | None = None) -> Field:
    """Validate that ``u`` is a finite :class:`Field` (optionally on ``grid``)."""
    if not isinstance(u, Field):
        raise TypeError(f"expected a Field, got {type(u).__name__}")
    if not np.all(np.isfinite(u.values)):
        raise InvalidParameterError("field contains NaN or Inf")
    if grid is not None and u.grid != grid:
        raise InvalidParameterError(f"field grid {u.grid} differs from {grid}")
    if not allow_zero and not np.any(u.values):
        raise DegenerateInputError("field is identically zero")
    return u


def check_scalar(value, name: str, *, low=None, high=None, low_open=True, high_open=True) -> float:
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    v = float(value)
    if not np.isfinite(v):
        raise InvalidParameterError(f"{name} must be finite")
    if low is not None and (v <= low if low_open else v < low):
        raise InvalidParameterError(f"{name}={v} below allowed range")
    if high is not None and (v >= high if high_open else v > high):
        raise InvalidParameterError(f"{name}={v} above allowed range")
    return v


def check_positive_int(value, name: str) -> int:
    if not isinstance(value, numbers.Integral) or value <= 0:
        raise InvalidParameterError(f"{name} must be a positive integer, got {value!r}")
    return int(value)
