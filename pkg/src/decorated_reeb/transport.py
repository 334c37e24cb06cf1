"""Exact optimal transport between uniform measures."""

import math

import numpy as np
from scipy.optimize import linear_sum_assignment, linprog
from scipy.sparse import coo_matrix

# Above this many replicated nodes the assignment problem gets slower than an LP.
ASSIGNMENT_LIMIT = 600


def _lp_transport(M):
    n1, n2 = M.shape
    rows = np.concatenate([np.repeat(np.arange(n1), n2), n1 + np.tile(np.arange(n2), n1)])
    cols = np.concatenate([np.arange(n1 * n2), np.arange(n1 * n2)])
    A = coo_matrix((np.ones(rows.size), (rows, cols)), shape=(n1 + n2, n1 * n2))
    b = np.concatenate([np.full(n1, 1.0 / n1), np.full(n2, 1.0 / n2)])
    res = linprog(M.ravel(), A_eq=A.tocsr(), b_eq=b, bounds=(0, None), method="highs-ds")
    if res.status != 0:
        raise FloatingPointError(f"transport LP failed: {res.message}")
    X = np.maximum(res.x.reshape(n1, n2), 0.0)
    # polish marginals lost to solver tolerance
    X *= (1.0 / n1) / X.sum(axis=1, keepdims=True)
    return X


def uniform_transport(M):
    """Optimal coupling of the uniform measures for cost matrix ``M``.

    With ``L = lcm(n1, n2)`` the problem is an ``L x L`` assignment problem
    (each row node split into ``L / n1`` copies of mass ``1/L``, likewise for
    columns), solved exactly by ``scipy.optimize.linear_sum_assignment``.
    Very unbalanced sizes fall back to a simplex LP.

    Returns
    -------
    ndarray of shape (n1, n2)
        A vertex of the transportation polytope.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or 0 in M.shape:
        raise ValueError(f"cost matrix must be 2-D and nonempty, got {M.shape}")
    if not np.all(np.isfinite(M)):
        raise FloatingPointError("non-finite transport cost")
    n1, n2 = M.shape
    L = n1 * n2 // math.gcd(n1, n2)
    if L > ASSIGNMENT_LIMIT:
        return _lp_transport(M)
    k1, k2 = L // n1, L // n2
    big = np.repeat(np.repeat(M, k1, axis=0), k2, axis=1)
    ri, ci = linear_sum_assignment(big)
    X = np.zeros((n1, n2))
    np.add.at(X, (ri // k1, ci // k2), 1.0 / L)
    return X
