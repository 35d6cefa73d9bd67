"""Input validation helpers shared by the estimators and the numeric kernels."""

import numbers

import numpy as np
from sklearn.utils import check_array

from .exceptions import ConfigurationError, DomainError, EmptySetError

SIMPLEX_TOL = 1e-12


def check_matrix(A, name="A", min_dim=2):
    """Return ``A`` as a finite float64 2-D array with both sides >= ``min_dim``."""
    if isinstance(A, np.ndarray) and A.dtype == np.float64 and A.ndim == 2 and A.size:
        # hot path inside the learners; sklearn's checks cost ~0.1 ms per call
        if not np.isfinite(A).all():
            raise ConfigurationError(f"{name}: Input contains NaN or infinity.")
        arr = A
    else:
        arr = _checked_array(A, name)
    d1, d2 = arr.shape
    if d1 < min_dim or d2 < min_dim:
        raise ConfigurationError(f"{name} must be at least {min_dim}x{min_dim}, got {d1}x{d2}")
    return arr


def _checked_array(A, name):
    try:
        arr = check_array(A, dtype=np.float64, ensure_2d=True, ensure_min_samples=1,
                          ensure_min_features=1)
    except ValueError as exc:
        raise ConfigurationError(f"{name}: {exc}") from exc
    return arr


def check_vector(v, name="vector", size=None):
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise ConfigurationError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if size is not None and arr.shape[0] != size:
        raise ConfigurationError(f"{name} has length {arr.shape[0]}, expected {size}")
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError(f"{name} contains non-finite values")
    return arr


def check_floor(theta, d, name="theta"):
    """Validate a simplex floor ``0 <= theta <= 1/d``; return it as float."""
    if not isinstance(theta, numbers.Real) or not np.isfinite(theta):
        raise ConfigurationError(f"{name} must be a finite real, got {theta!r}")
    theta = float(theta)
    if theta < 0:
        raise DomainError(f"{name} must be nonnegative, got {theta}")
    if theta * d > 1.0 + SIMPLEX_TOL:
        raise EmptySetError(f"{name}={theta} exceeds 1/d={1.0 / d}: the restricted simplex is empty")
    return min(theta, 1.0 / d)


def check_positive(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise ConfigurationError(f"{name} must be a positive finite real, got {value!r}")
    return float(value)


def check_in_simplex(w, floor=0.0, name="strategy", tol=SIMPLEX_TOL):
    """Raise ``DomainError`` unless ``w`` sums to one and every weight is >= floor."""
    s = w.sum()
    if abs(s - 1.0) > tol * max(1, w.shape[0]):
        raise DomainError(f"{name} sums to {s!r}, not 1")
    if w.min() < floor - tol:
        raise DomainError(f"{name} has weight {w.min()!r} below the floor {floor!r}")


def check_same_dims(A, x, y):
    d1, d2 = A.shape
    if x.shape[0] != d1 or y.shape[0] != d2:
        raise ConfigurationError(
            f"dimension mismatch: matrix is {d1}x{d2}, strategies have lengths "
            f"{x.shape[0]} and {y.shape[0]}")
