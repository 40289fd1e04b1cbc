"""Couple pairwise win probabilities into one multiclass distribution.

Given r[i, j] ~ P(class i | i or j), the coupled p minimizes
sum_{i<j} (r[j,i] p_i - r[i,j] p_j)^2 subject to sum p = 1, p >= 0.
The quadratic form is p' Q p with

    Q[k, k] = sum_{j != k} r[j, k]^2,   Q[k, j] = -r[j, k] r[k, j].

Stationarity says Q p must be a constant vector; eliminating the
multiplier by differencing rows and replacing the last row with the
normalization constraint gives a square linear system. Any negative
round-off is clipped and the vector renormalized.
"""

from __future__ import annotations

import numpy as np

from ..errors import CouplingError, ValidationError

__all__ = ["pairwise_coupling"]


def coupling_objective(r: np.ndarray, p: np.ndarray) -> float:
    """The residual sum of squares the coupled vector minimizes."""
    m = len(p)
    total = 0.0
    for i in range(m):
        for j in range(i + 1, m):
            total += (r[j, i] * p[i] - r[i, j] * p[j]) ** 2
    return float(total)


def pairwise_coupling(r) -> np.ndarray:
    """Solve for class probabilities from a pairwise matrix.

    r must be m x m with off-diagonal entries in (0, 1) satisfying
    r[i, j] + r[j, i] = 1; the diagonal is ignored.
    """
    r = np.asarray(r, dtype=float)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise ValidationError("pairwise matrix must be square")
    m = r.shape[0]
    if m < 2:
        raise ValidationError("need at least two classes")
    off = ~np.eye(m, dtype=bool)
    if np.any(r[off] <= 0.0) or np.any(r[off] >= 1.0):
        raise ValidationError("off-diagonal entries must lie strictly in (0, 1)")
    if np.max(np.abs(r[off] + r.T[off] - 1.0)) > 1e-9:
        raise ValidationError("r[i,j] + r[j,i] must equal 1")

    Q = np.zeros((m, m))
    for k in range(m):
        for j in range(m):
            if j == k:
                continue
            Q[k, k] += r[j, k] * r[j, k]
            Q[k, j] = -r[j, k] * r[k, j]

    system = np.empty((m, m))
    system[: m - 1] = Q[: m - 1] - Q[m - 1]
    system[m - 1] = 1.0
    rhs = np.zeros(m)
    rhs[m - 1] = 1.0

    try:
        p = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as exc:
        raise CouplingError(f"coupling system is singular: {exc}") from None
    if not np.all(np.isfinite(p)):
        raise CouplingError("coupling system produced non-finite values")

    p = np.clip(p, 0.0, None)
    total = p.sum()
    if total <= 0.0:
        raise CouplingError("coupling collapsed to the zero vector")
    return p / total
