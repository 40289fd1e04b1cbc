"""Sigmoid calibration of decision values into probabilities.

Fits P(y=+1 | f) = 1 / (1 + exp(A f + B)) by regularized maximum
likelihood with the usual target smoothing: positives aim at
(N+ + 1) / (N+ + 2), negatives at 1 / (N- + 2), which keeps the fit
away from 0/1 plateaus on separable data. Newton steps with a
backtracking line search; every expression is written in the
overflow-safe branch form.
"""

from __future__ import annotations

import numpy as np

from ..errors import CalibrationError, ConvergenceError

__all__ = ["platt_calibrate", "platt_probability"]


def platt_probability(f, A: float, B: float):
    """Stable evaluation of 1 / (1 + exp(A f + B))."""
    f = np.asarray(f, dtype=float)
    z = A * f + B
    out = np.empty_like(z)
    pos = z >= 0
    ez = np.exp(-z[pos])
    out[pos] = ez / (1.0 + ez)
    ez = np.exp(z[~pos])
    out[~pos] = 1.0 / (1.0 + ez)
    return out if out.ndim else float(out)


def _nll(f, t, A, B) -> float:
    z = A * f + B
    # t*z + log(1 + exp(-z)) computed without overflow on either sign.
    pos = z >= 0
    val = np.empty_like(z)
    val[pos] = t[pos] * z[pos] + np.log1p(np.exp(-z[pos]))
    val[~pos] = (t[~pos] - 1.0) * z[~pos] + np.log1p(np.exp(z[~pos]))
    return float(val.sum())


def platt_calibrate(
    decision_values,
    labels,
    max_iters: int = 200,
    min_step: float = 1e-10,
    sigma: float = 1e-12,
) -> tuple[float, float]:
    """Fit (A, B) on paired decision values and +/-1 labels.

    Raises CalibrationError when only one class is present and
    ConvergenceError if the optimizer stalls with a large gradient.
    """
    f = np.asarray(decision_values, dtype=float)
    y = np.asarray(labels)
    if f.shape != y.shape or f.ndim != 1:
        raise CalibrationError("decision values and labels must align")
    positive = y > 0
    n_pos = int(positive.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise CalibrationError("calibration needs both classes")

    hi = (n_pos + 1.0) / (n_pos + 2.0)
    lo = 1.0 / (n_neg + 2.0)
    t = np.where(positive, hi, lo)

    A = 0.0
    B = float(np.log((n_neg + 1.0) / (n_pos + 1.0)))
    fval = _nll(f, t, A, B)

    for _ in range(max_iters):
        z = A * f + B
        pos = z >= 0
        p = np.empty_like(z)
        q = np.empty_like(z)
        ez = np.exp(-z[pos])
        p[pos] = ez / (1.0 + ez)
        q[pos] = 1.0 / (1.0 + ez)
        ez = np.exp(z[~pos])
        p[~pos] = 1.0 / (1.0 + ez)
        q[~pos] = ez / (1.0 + ez)

        d1 = t - p
        g1 = float(np.sum(f * d1))
        g2 = float(np.sum(d1))
        if abs(g1) < 1e-10 and abs(g2) < 1e-10:
            break

        d2 = p * q
        h11 = float(np.sum(f * f * d2)) + sigma
        h22 = float(np.sum(d2)) + sigma
        h21 = float(np.sum(f * d2))
        det = h11 * h22 - h21 * h21
        dA = -(h22 * g1 - h21 * g2) / det
        dB = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * dA + g2 * dB

        step = 1.0
        while step >= min_step:
            new_A, new_B = A + step * dA, B + step * dB
            new_f = _nll(f, t, new_A, new_B)
            if new_f < fval + 1e-4 * step * gd:
                A, B, fval = new_A, new_B, new_f
                break
            step /= 2.0
        else:
            break  # stalled; the gradient check below decides

    z_res = max(
        abs(float(np.sum(f * (t - platt_probability(f, A, B))))),
        abs(float(np.sum(t - platt_probability(f, A, B)))),
    )
    if z_res > 1e-5:
        raise ConvergenceError("sigmoid fit did not converge", residual=z_res)
    return A, B
