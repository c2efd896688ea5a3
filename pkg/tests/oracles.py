"""Independent oracles used by the test suite.

These deliberately avoid the production solve paths: the QP oracle enumerates
active sets and solves KKT systems directly, and gradients are checked by
central finite differences.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np


def solve_qp_by_enumeration(Q, c, A, b, G, h, tol=1e-9):
    """Globally solve a convex QP by enumerating all 2^m inequality subsets.

    Returns (x, objective).  For each candidate active set the equality-KKT
    system is solved and the point is accepted when it is primal feasible with
    nonnegative multipliers on the active rows.
    """
    Q, c = np.asarray(Q, float), np.asarray(c, float)
    A, b = np.atleast_2d(np.asarray(A, float)), np.asarray(b, float)
    G, h = np.atleast_2d(np.asarray(G, float)), np.asarray(h, float)
    if A.size == 0:
        A = A.reshape(0, Q.shape[0])
    if G.size == 0:
        G = G.reshape(0, Q.shape[0])
    n, p, m = Q.shape[0], A.shape[0], G.shape[0]

    best_x, best_obj = None, np.inf
    for size in range(m + 1):
        for subset in combinations(range(m), size):
            S = list(subset)
            Gs = G[S]
            k = n + p + len(S)
            K = np.zeros((k, k))
            K[:n, :n] = Q
            K[:n, n : n + p] = A.T
            K[:n, n + p :] = Gs.T
            K[n : n + p, :n] = A
            K[n + p :, :n] = Gs
            rhs = np.concatenate([-c, b, h[S]])
            try:
                sol = np.linalg.solve(K, rhs)
            except np.linalg.LinAlgError:
                sol, *_ = np.linalg.lstsq(K, rhs, rcond=None)
            if not np.all(np.isfinite(sol)):
                continue
            if np.max(np.abs(K @ sol - rhs)) > 1e-7 * (1 + np.max(np.abs(rhs))):
                continue
            x = sol[:n]
            lam = sol[n + p :]
            if m and np.any(G @ x - h > tol):
                continue
            if len(S) and np.any(lam < -tol):
                continue
            obj = float(0.5 * x @ Q @ x + c @ x)
            if obj < best_obj - 1e-12:
                best_obj, best_x = obj, x
    if best_x is None:
        raise AssertionError("enumeration oracle found no KKT point")
    return best_x, best_obj


def random_feasible_qp(seed, n_max=20, m_max=10):
    """Random strictly convex QP with a known interior-feasible point."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, n_max + 1))
    p = int(rng.integers(0, min(5, n - 1) + 1))
    m = int(rng.integers(1, m_max + 1))
    M = rng.normal(size=(n, n))
    Q = M.T @ M + (0.1 + rng.uniform()) * np.eye(n)
    c = rng.normal(size=n)
    x_feas = rng.normal(size=n)
    A = rng.normal(size=(p, n))
    b = A @ x_feas
    G = rng.normal(size=(m, n))
    h = G @ x_feas + rng.uniform(0.1, 2.0, size=m)
    return Q, c, A, b, G, h


def central_difference_gradient(f, x, eps=1e-6):
    x = np.asarray(x, float)
    grad = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = eps
        grad[i] = (f(x + e) - f(x - e)) / (2 * eps)
    return grad
