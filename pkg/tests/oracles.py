"""Independent reference implementations used only by the tests.

Each oracle recomputes a quantity through a different algorithm than
the library (exhaustive QP, projected gradient, brute-force path
enumeration, duplicate formulas), so agreement between the two is
evidence rather than tautology.
"""

from __future__ import annotations

import numpy as np


# ---------------------------------------------------------------- metrics

def kappa_reference(cm) -> float:
    """Cohen's kappa, written as explicit loops over the matrix."""
    cm = np.asarray(cm, dtype=float)
    total = cm.sum()
    observed = 0.0
    for k in range(cm.shape[0]):
        observed += cm[k, k]
    observed /= total
    expected = 0.0
    for k in range(cm.shape[0]):
        row = sum(cm[k, j] for j in range(cm.shape[1]))
        col = sum(cm[j, k] for j in range(cm.shape[0]))
        expected += row * col
    expected /= total * total
    if expected >= 1.0:
        return 1.0 if observed >= 1.0 else 0.0
    return (observed - expected) / (1.0 - expected)


def per_class_reference(cm) -> list:
    cm = np.asarray(cm, dtype=float)
    out = []
    for k in range(cm.shape[0]):
        row = cm[k].sum()
        out.append(cm[k, k] / row if row > 0 else float("nan"))
    return out


# ------------------------------------------------------------ SVM via QP

def svm_qp_reference(K, y, C):
    """Solve the dual soft-margin problem with an interior-point QP.

    Returns (alpha, b_lo, b_hi, dual_value). [b_lo, b_hi] is the KKT
    feasible interval for the bias; it collapses to a point whenever a
    support vector sits strictly inside the box, and stays a genuine
    interval otherwise (every value in it is optimal).
    """
    from cvxopt import matrix, solvers

    y = np.asarray(y, dtype=float)
    n = len(y)
    P = matrix(np.outer(y, y) * np.asarray(K, dtype=float))
    q = matrix(-np.ones(n))
    G = matrix(np.vstack([-np.eye(n), np.eye(n)]))
    h = matrix(np.concatenate([np.zeros(n), np.full(n, C)]))
    A = matrix(y.reshape(1, -1))
    b_eq = matrix(np.zeros(1))
    opts = {
        "show_progress": False,
        "abstol": 1e-12,
        "reltol": 1e-12,
        "feastol": 1e-12,
        "maxiters": 200,
    }
    sol = solvers.qp(P, q, G, h, A, b_eq, options=opts)
    alpha = np.array(sol["x"]).ravel()
    alpha = np.clip(alpha, 0.0, C)

    u = (alpha * y) @ np.asarray(K, dtype=float)
    eps = 1e-8 * C
    lo, hi = -np.inf, np.inf
    for i in range(n):
        bound = y[i] - u[i]
        if alpha[i] > eps and alpha[i] < C - eps:
            lo = max(lo, bound)
            hi = min(hi, bound)
        elif alpha[i] <= eps:
            if y[i] > 0:
                lo = max(lo, bound)
            else:
                hi = min(hi, bound)
        else:
            if y[i] > 0:
                hi = min(hi, bound)
            else:
                lo = max(lo, bound)
    if lo > hi:
        lo, hi = min(lo, hi), max(lo, hi)
    if not np.isfinite(lo):
        lo = hi
    if not np.isfinite(hi):
        hi = lo

    v = alpha * y
    dual = float(alpha.sum() - 0.5 * v @ np.asarray(K, dtype=float) @ v)
    return alpha, float(lo), float(hi), dual


# ---------------------------------------- coupling via projected gradient

def _project_simplex_rows(V: np.ndarray) -> np.ndarray:
    """Euclidean projection of every row onto the probability simplex."""
    B, m = V.shape
    U = np.sort(V, axis=1)[:, ::-1]
    css = np.cumsum(U, axis=1) - 1.0
    ind = np.arange(1, m + 1, dtype=float)
    cond = U - css / ind > 0
    rho = cond.sum(axis=1)
    theta = css[np.arange(B), rho - 1] / rho
    return np.maximum(V - theta[:, None], 0.0)


def coupling_pg_reference(R: np.ndarray, iters: int = 8000) -> np.ndarray:
    """Minimize sum_{i<j} (r[j,i] p_i - r[i,j] p_j)^2 over the simplex
    by accelerated projected gradient with value restarts.

    R has shape (B, m, m); returns (B, m).
    """
    R = np.asarray(R, dtype=float)
    B, m, _ = R.shape
    RT = np.transpose(R, (0, 2, 1))

    def gradient(P):
        E = RT * P[:, :, None] - R * P[:, None, :]
        return 2.0 * np.sum(E * RT, axis=2)

    def value(P):
        E = RT * P[:, :, None] - R * P[:, None, :]
        return 0.5 * np.sum(E * E, axis=(1, 2))

    step = 1.0 / (4.0 * m)  # Gershgorin bound on the curvature
    P = np.full((B, m), 1.0 / m)
    Y = P.copy()
    t = np.ones(B)
    best_val = value(P)
    for _ in range(iters):
        P_next = _project_simplex_rows(Y - step * gradient(Y))
        val = value(P_next)
        worse = val > best_val
        if np.any(worse):
            # restart momentum where the objective went up: retake the
            # step from the current iterate instead of the extrapolation
            Y[worse] = P[worse]
            t[worse] = 1.0
            retaken = _project_simplex_rows(Y - step * gradient(Y))
            P_next[worse] = retaken[worse]
            val = value(P_next)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        Y = P_next + ((t - 1.0) / t_next)[:, None] * (P_next - P)
        P = P_next
        t = t_next
        best_val = np.minimum(best_val, val)
    # polish with plain projected-gradient steps
    for _ in range(200):
        P = _project_simplex_rows(P - step * gradient(P))
    return P


def random_pairwise_matrices(count: int, rng: np.random.Generator):
    """Valid pairwise win matrices with entries away from 0 and 1."""
    out = []
    for _ in range(count):
        m = int(rng.integers(2, 10))
        r = np.full((m, m), 0.5)
        for i in range(m):
            for j in range(i + 1, m):
                v = float(rng.uniform(0.02, 0.98))
                r[i, j] = v
                r[j, i] = 1.0 - v
        out.append(r)
    return out


# ------------------------------------------- OPF via brute-force search

def mst_kruskal(D: np.ndarray) -> list[tuple[int, int]]:
    """Minimum spanning tree by sorted-edge union-find."""
    n = len(D)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    edges = sorted(
        ((D[i, j], i, j) for i in range(n) for j in range(i + 1, n)),
        key=lambda e: (e[0], e[1], e[2]),
    )
    chosen = []
    for w, i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            chosen.append((i, j))
            if len(chosen) == n - 1:
                break
    return chosen


def opf_costs_reference(D: np.ndarray, y, prototypes) -> np.ndarray:
    """Exhaustive enumeration of every simple path in the complete graph
    from any prototype; cost is the bottleneck (max) edge weight."""
    n = len(D)
    best = np.full(n, np.inf)
    protos = sorted(prototypes)
    for s in protos:
        best[s] = 0.0

    def walk(node, visited, current_max):
        for nxt in range(n):
            if nxt in visited:
                continue
            new_max = max(current_max, D[node, nxt])
            if new_max < best[nxt]:
                best[nxt] = new_max
            walk(nxt, visited | {nxt}, new_max)

    for s in protos:
        walk(s, frozenset(protos) | {s}, 0.0)
    return best


def opf_prototypes_reference(D: np.ndarray, y) -> list[int]:
    protos = set()
    for i, j in mst_kruskal(D):
        if y[i] != y[j]:
            protos.add(i)
            protos.add(j)
    return sorted(protos)


# ------------------------------------------------------- Platt grid scan

def platt_nll_exact(decision_values, labels, A, B) -> float:
    """NLL = -sum t log(p) + (1-t) log(1-p) with p = 1/(1+exp(A f + B))."""
    f = np.asarray(decision_values, dtype=float)
    y = np.asarray(labels)
    n_pos = int((y > 0).sum())
    n_neg = len(y) - n_pos
    t_pos = (n_pos + 1.0) / (n_pos + 2.0)
    t_neg = 1.0 / (n_neg + 2.0)
    t = np.where(y > 0, t_pos, t_neg)
    z = A * f + B
    softplus = np.where(z > 0, z + np.log1p(np.exp(-z)), np.log1p(np.exp(z)))
    # -[t log p + (1-t) log(1-p)]; log p = -softplus(z), log(1-p) = z - softplus(z)
    return float(np.sum(t * softplus - (1.0 - t) * (z - softplus)))
