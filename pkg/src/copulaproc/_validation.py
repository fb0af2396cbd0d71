"""Error types and input validation helpers shared across the package."""

from __future__ import annotations

import numpy as np


class InvalidArgumentError(ValueError):
    """Raised when an argument violates a documented precondition."""


class DomainError(ValueError):
    """Raised when a quantity is evaluated outside its domain of definition."""


class QuadratureError(RuntimeError):
    """Raised when a numerical integration fails to converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


def as_points(u, d=None, name="u"):
    """Return ``u`` as a float array of shape (..., d).

    A 1-D input is interpreted as a single point.
    """
    arr = np.asarray(u, dtype=float)
    if arr.ndim == 0:
        raise InvalidArgumentError(f"{name} must be a point or an array of points")
    if d is not None and arr.shape[-1] != d:
        raise InvalidArgumentError(
            f"{name} has dimension {arr.shape[-1]}, expected {d}"
        )
    return arr


def check_unit_cube(u, name="u"):
    if np.any(np.isnan(u)) or np.any(u < 0.0) or np.any(u > 1.0):
        raise InvalidArgumentError(f"{name} must lie in [0, 1]^d")


def check_sample(x, min_dim=1, name="sample"):
    """Validate a raw n x d sample and return it as a float array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise InvalidArgumentError(f"{name} must be a 2-D array")
    if arr.shape[0] < 1:
        raise InvalidArgumentError(f"{name} must contain at least one row")
    if arr.shape[1] < min_dim:
        raise InvalidArgumentError(f"{name} must have at least {min_dim} columns")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} contains non-finite entries")
    return arr
