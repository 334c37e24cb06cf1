"""Input validation helpers shared across the package."""

import numbers

import numpy as np
from sklearn.utils import check_array

_SYM_TOL = 1e-9


def check_points(X, min_points=1):
    """Return ``X`` as a 2-D float array of finite coordinates."""
    X = check_array(X, dtype=np.float64, ensure_2d=True, ensure_min_samples=0)
    if X.shape[0] < min_points:
        raise ValueError(
            f"point cloud needs at least {min_points} point(s), got {X.shape[0]}"
        )
    return X


def check_distance_matrix(D, tol=_SYM_TOL):
    """Validate a square, symmetric, zero-diagonal, nonnegative matrix.

    The returned array is exactly symmetric (the upper triangle wins).
    """
    D = np.asarray(D, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError(f"distance matrix must be square, got shape {D.shape}")
    if D.shape[0] == 0:
        raise ValueError("distance matrix is empty")
    if not np.all(np.isfinite(D)):
        raise ValueError("distance matrix contains non-finite entries")
    if np.any(D < 0):
        raise ValueError("distance matrix has negative entries")
    if np.any(np.abs(np.diag(D)) > tol):
        raise ValueError("distance matrix has a nonzero diagonal")
    if np.max(np.abs(D - D.T)) > tol * max(1.0, float(D.max())):
        raise ValueError("distance matrix is not symmetric")
    D = np.triu(D, 1)
    return D + D.T


def check_scalar(x, name, min_val=None, include_min=True, integer=False):
    if integer:
        if not isinstance(x, numbers.Integral) or isinstance(x, bool):
            raise TypeError(f"{name} must be an integer, got {x!r}")
        x = int(x)
    else:
        if not isinstance(x, numbers.Real) or isinstance(x, bool):
            raise TypeError(f"{name} must be a real number, got {x!r}")
        x = float(x)
        if np.isnan(x):
            raise ValueError(f"{name} is NaN")
    if min_val is not None:
        if include_min and x < min_val:
            raise ValueError(f"{name} must be >= {min_val}, got {x}")
        if not include_min and x <= min_val:
            raise ValueError(f"{name} must be > {min_val}, got {x}")
    return x


def check_random_state(seed):
    """Return a ``numpy.random.Generator`` for ``seed``."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
