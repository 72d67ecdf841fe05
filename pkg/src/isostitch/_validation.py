"""Input validation helpers used by the public entry points."""

from __future__ import annotations

import numbers

import numpy as np

from .errors import DimensionMismatch, ValidationError


def as_vector(x, dim=None, name="x"):
    """Coerce to a finite 1-d float vector, optionally checking its length."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValidationError(f"{name} must be a 1-d coordinate vector, got shape {v.shape}")
    if v.size == 0:
        raise ValidationError(f"{name} must be nonempty")
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"{name} has non-finite entries")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatch(f"{name} has dimension {v.shape[0]}, expected {dim}")
    return v


def as_points(X, dim=None, name="points", allow_empty=False):
    """Coerce to a finite (n, dim) float array of row points."""
    P = np.asarray(X, dtype=float)
    if P.ndim == 1:
        P = P.reshape(1, -1)
    if P.ndim != 2:
        raise ValidationError(f"{name} must be a 2-d array of row points, got shape {P.shape}")
    if P.shape[0] == 0 and not allow_empty:
        raise ValidationError(f"{name} must be nonempty")
    if P.size and not np.all(np.isfinite(P)):
        raise ValidationError(f"{name} has non-finite entries")
    if dim is not None and P.shape[1] != dim:
        raise DimensionMismatch(f"{name} has dimension {P.shape[1]}, expected {dim}")
    return P


def as_matrix(A, dim=None, name="matrix"):
    M = np.asarray(A, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValidationError(f"{name} has non-finite entries")
    if dim is not None and M.shape[0] != dim:
        raise DimensionMismatch(f"{name} is {M.shape[0]}x{M.shape[0]}, expected {dim}x{dim}")
    return M


def check_positive(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(float(value)) or float(value) <= 0:
        raise ValidationError(f"{name} must be a positive finite real, got {value!r}")
    return float(value)


def check_nonnegative(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(float(value)) or float(value) < 0:
        raise ValidationError(f"{name} must be a nonnegative finite real, got {value!r}")
    return float(value)


def check_seed(seed, name="seed"):
    if isinstance(seed, bool) or not isinstance(seed, numbers.Integral):
        raise ValidationError(f"{name} must be an integer, got {seed!r}")
    s = int(seed)
    if not 0 <= s < 2**64:
        raise ValidationError(f"{name} must fit in an unsigned 64-bit integer, got {s}")
    return s
