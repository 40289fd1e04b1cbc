"""Binary soft-margin SVM trained by sequential minimal optimization.

The optimizer follows the classic two-loop scheme: an outer loop that
alternates between all samples and the non-bound subset, and an inner
working-set step that solves the two-variable subproblem analytically.
Heuristics are deterministic (max |E1 - E2| second choice, fixed cyclic
fallbacks), so training is a pure function of the inputs.

Decision function: f(x) = sum_i alpha_i y_i K(x_i, x) + b.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConvergenceError, TrainingError, ValidationError

__all__ = ["BinarySvmModel", "kernel_matrix", "train_binary_svm", "dual_objective"]

_BOUND_EPS = 1e-12


def kernel_matrix(A, B, kernel: str, gamma: float | None = None) -> np.ndarray:
    """Gram matrix between row sets A and B."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise ValidationError("kernel operands differ in dimension")
    if kernel == "linear":
        return A @ B.T
    if kernel == "rbf":
        if gamma is None or gamma <= 0:
            raise ValidationError("rbf kernel needs gamma > 0")
        sq = (
            np.sum(A * A, axis=1)[:, None]
            + np.sum(B * B, axis=1)[None, :]
            - 2.0 * (A @ B.T)
        )
        return np.exp(-gamma * np.maximum(sq, 0.0))
    raise ValidationError(f"unknown kernel {kernel!r}")


def dual_objective(alpha, y, K) -> float:
    """W(alpha) = sum alpha - 1/2 alpha' (yy' o K) alpha."""
    alpha = np.asarray(alpha, dtype=float)
    y = np.asarray(y, dtype=float)
    v = alpha * y
    return float(alpha.sum() - 0.5 * v @ K @ v)


@dataclass
class BinarySvmModel:
    """Trained binary SVM. Only support vectors are kept; coef holds
    alpha_i * y_i so decision() is a plain kernel expansion."""

    kernel: str
    gamma: float | None
    C: float
    sv_X: np.ndarray
    sv_coef: np.ndarray
    b: float
    dual_value: float = 0.0
    kkt_residual: float = 0.0

    def decision(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if len(self.sv_coef) == 0:
            return np.full(len(X), self.b)
        K = kernel_matrix(X, self.sv_X, self.kernel, self.gamma)
        return K @ self.sv_coef + self.b

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision(X) >= 0.0, 1, -1)


def train_binary_svm(
    X,
    y,
    kernel: str = "rbf",
    C: float = 1.0,
    gamma: float | None = None,
    tol: float = 1e-3,
    step_eps: float = 1e-10,
    max_epochs: int = 2000,
) -> BinarySvmModel:
    """Fit the dual problem to KKT tolerance `tol`.

    Parameters
    ----------
    X : array (n, d)
        Training vectors.
    y : array (n,)
        Labels, strictly +1 / -1, both classes present.
    C : float
        Box constraint. Larger C penalizes margin violations harder.
    tol : float
        KKT violation tolerance; also the convergence criterion.
    step_eps : float
        Minimum meaningful change of a dual variable.
    max_epochs : int
        Cap on outer-loop passes; exceeding it raises ConvergenceError.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    n = len(y)
    if len(X) != n or n < 2:
        raise TrainingError("need at least two labeled samples")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise TrainingError("labels must be +1 or -1")
    if np.all(y == y[0]):
        raise TrainingError("both classes must be present")
    if C <= 0:
        raise ValidationError("C must be positive")
    if kernel == "rbf" and (gamma is None or gamma <= 0):
        raise ValidationError("rbf kernel needs gamma > 0")

    K = kernel_matrix(X, X, kernel, gamma)
    alpha = np.zeros(n)
    state = {"b": 0.0}
    E = -y.copy()  # f(x) = 0 initially, so E_i = f(x_i) - y_i = -y_i

    def take_step(i1: int, i2: int) -> bool:
        nonlocal E
        if i1 == i2:
            return False
        a1o, a2o = alpha[i1], alpha[i2]
        y1, y2 = y[i1], y[i2]
        E1, E2 = E[i1], E[i2]
        s = y1 * y2
        if s > 0:
            L, H = max(0.0, a1o + a2o - C), min(C, a1o + a2o)
        else:
            L, H = max(0.0, a2o - a1o), min(C, C + a2o - a1o)
        if H - L < _BOUND_EPS:
            return False
        k11, k12, k22 = K[i1, i1], K[i1, i2], K[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > 0.0:
            a2 = a2o + y2 * (E1 - E2) / eta
            a2 = min(max(a2, L), H)
        else:
            # Flat or concave direction: pick the better interval end by
            # evaluating the objective restricted to the segment.
            # E - b isolates the kernel expansion from the threshold.
            b_cur = state["b"]
            f1 = y1 * (E1 - b_cur) - a1o * k11 - s * a2o * k12
            f2 = y2 * (E2 - b_cur) - s * a1o * k12 - a2o * k22
            L1 = a1o + s * (a2o - L)
            H1 = a1o + s * (a2o - H)
            Lobj = (
                L1 * f1 + L * f2 + 0.5 * L1 * L1 * k11
                + 0.5 * L * L * k22 + s * L * L1 * k12
            )
            Hobj = (
                H1 * f1 + H * f2 + 0.5 * H1 * H1 * k11
                + 0.5 * H * H * k22 + s * H * H1 * k12
            )
            if Lobj < Hobj - 1e-12:
                a2 = L
            elif Lobj > Hobj + 1e-12:
                a2 = H
            else:
                a2 = a2o
        if abs(a2 - a2o) < step_eps * (a2 + a2o + step_eps):
            return False
        a1 = a1o + s * (a2o - a2)
        if a1 < 0.0:
            a1 = 0.0
        elif a1 > C:
            a1 = C

        d1 = (a1 - a1o) * y1
        d2 = (a2 - a2o) * y2
        b_old = state["b"]
        b1 = b_old - E1 - d1 * k11 - d2 * k12
        b2 = b_old - E2 - d1 * k12 - d2 * k22
        if _BOUND_EPS < a1 < C - _BOUND_EPS:
            b_new = b1
        elif _BOUND_EPS < a2 < C - _BOUND_EPS:
            b_new = b2
        else:
            b_new = 0.5 * (b1 + b2)

        alpha[i1], alpha[i2] = a1, a2
        E += d1 * K[i1] + d2 * K[i2] + (b_new - b_old)
        state["b"] = b_new
        return True

    def examine(i2: int) -> int:
        y2, a2, E2 = y[i2], alpha[i2], E[i2]
        r2 = E2 * y2
        if not (
            (r2 < -tol and a2 < C - _BOUND_EPS)
            or (r2 > tol and a2 > _BOUND_EPS)
        ):
            return 0
        nonbound = np.nonzero(
            (alpha > _BOUND_EPS) & (alpha < C - _BOUND_EPS)
        )[0]
        if len(nonbound) > 1:
            i1 = int(nonbound[np.argmax(np.abs(E[nonbound] - E2))])
            if take_step(i1, i2):
                return 1
        start = (i2 + 1) % n
        rotation = list(range(start, n)) + list(range(0, start))
        nonbound_set = set(nonbound.tolist())
        for i1 in rotation:
            if i1 in nonbound_set and take_step(i1, i2):
                return 1
        for i1 in rotation:
            if take_step(i1, i2):
                return 1
        return 0

    examine_all = True
    epoch = 0
    while True:
        changed = 0
        if examine_all:
            for i2 in range(n):
                changed += examine(i2)
        else:
            for i2 in np.nonzero(
                (alpha > _BOUND_EPS) & (alpha < C - _BOUND_EPS)
            )[0]:
                changed += examine(int(i2))
        epoch += 1
        if examine_all:
            if changed == 0:
                break
            examine_all = False
        elif changed == 0:
            examine_all = True
        if epoch > max_epochs:
            raise ConvergenceError(
                f"no convergence in {max_epochs} epochs",
                residual=_kkt_residual(alpha, y, K, state["b"], C),
            )

    b = state["b"]
    residual = _kkt_residual(alpha, y, K, b, C)
    sv = alpha > 0.0
    value = dual_objective(alpha, y, K)
    return BinarySvmModel(
        kernel=kernel,
        gamma=gamma,
        C=C,
        sv_X=X[sv].copy(),
        sv_coef=(alpha * y)[sv].copy(),
        b=b,
        dual_value=value,
        kkt_residual=residual,
    )


def _kkt_residual(alpha, y, K, b, C) -> float:
    """Largest violation of the optimality conditions."""
    f = (alpha * y) @ K + b
    margin = y * f
    viol = np.zeros(len(y))
    at_zero = alpha <= _BOUND_EPS
    at_c = alpha >= C - _BOUND_EPS
    interior = ~at_zero & ~at_c
    viol[at_zero] = np.maximum(0.0, 1.0 - margin[at_zero])
    viol[at_c] = np.maximum(0.0, margin[at_c] - 1.0)
    viol[interior] = np.abs(margin[interior] - 1.0)
    return float(viol.max()) if len(viol) else 0.0
