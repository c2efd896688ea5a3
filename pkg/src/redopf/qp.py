"""Primal-dual interior-point solver for convex QPs with one-sided inequalities.

Mehrotra-style predictor-corrector on ``min 0.5 x'Qx + c'x  s.t.  Ax = b,
Gx + s = h, s >= 0``.  Dense linear algebra; the KKT system is condensed to
``[[Q + G'WG + dI, A'], [A, -dI]]`` and factored once per iteration.  A static
diagonal regularization tolerates redundant equality rows.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, ValidationError
from .dc_model import DcOpfProblem


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    MAX_ITERS = "max_iters"
    NUMERICAL_FAILURE = "numerical_failure"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class SolverOptions:
    tol_residual: float = 1e-8
    tol_gap: float = 1e-8
    max_iters: int = 200
    bound_push: float = 1e-9  # warm start: minimum initial slack
    regularization: float = 1e-10
    divergence_threshold: float = 1e10
    step_fraction: float = 0.995
    collect_trace: bool = False

    def __post_init__(self):
        if min(self.tol_residual, self.tol_gap, self.bound_push) <= 0:
            raise ValidationError("solver tolerances must be positive")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be >= 1")


@dataclass
class SolveReport:
    status: SolveStatus
    primal: np.ndarray
    eq_duals: np.ndarray
    ineq_duals: np.ndarray
    objective: float
    iterations: int
    wall_time: float
    work_units: float
    trace: list[dict] | None = None

    @property
    def ok(self) -> bool:
        return self.status == SolveStatus.OPTIMAL

    def to_record(self, include_wall_time: bool = True) -> dict:
        rec = {
            "status": self.status.value,
            "objective": self.objective,
            "iterations": self.iterations,
            "work_units": self.work_units,
        }
        if include_wall_time:
            rec["wall_time"] = self.wall_time
        return rec


@dataclass
class KktCheck:
    stationarity: float
    eq_residual: float
    ineq_violation: float
    dual_negativity: float
    comp_gap: float
    ok: bool


def check_kkt(
    problem: DcOpfProblem, report: SolveReport, options: SolverOptions = SolverOptions(), factor: float = 10.0
) -> KktCheck:
    """Independent certificate check; never uses solver internals."""
    x, y, z = report.primal, report.eq_duals, report.ineq_duals
    grad = problem.Q @ x + problem.c
    if problem.n_eq:
        grad = grad + problem.A_eq.T @ y
    if problem.n_ineq:
        grad = grad + problem.G.T @ z
    stationarity = float(np.max(np.abs(grad))) if grad.size else 0.0
    eq_res = (
        float(np.max(np.abs(problem.A_eq @ x - problem.b_eq))) if problem.n_eq else 0.0
    )
    if problem.n_ineq:
        slack = problem.h - problem.G @ x
        ineq_violation = float(max(0.0, np.max(-slack)))
        dual_negativity = float(max(0.0, np.max(-z)))
        comp_gap = float(abs(z @ np.maximum(slack, 0.0)) / problem.n_ineq)
    else:
        ineq_violation = dual_negativity = comp_gap = 0.0
    tol_r = factor * options.tol_residual
    ok = (
        stationarity <= tol_r
        and eq_res <= tol_r
        and ineq_violation <= tol_r
        and dual_negativity <= tol_r
        and comp_gap <= factor * options.tol_gap
    )
    return KktCheck(stationarity, eq_res, ineq_violation, dual_negativity, comp_gap, ok)


def _structured_start(problem: DcOpfProblem) -> np.ndarray:
    """theta = 0, P at the midpoint of its bounds, F from the flow equalities."""
    layout = problem.layout
    x = np.zeros(problem.n_vars)
    lo, hi = problem.pg_bounds
    for k in range(layout.n_gen):
        x[layout.pg(k)] = 0.5 * (lo[k] + hi[k])
    # theta = 0 makes every flow-definition row give F = 0, already set.
    return x


def _generic_start(problem: DcOpfProblem) -> np.ndarray:
    if problem.n_eq:
        x, *_ = np.linalg.lstsq(problem.A_eq, problem.b_eq, rcond=None)
        return x
    return np.zeros(problem.n_vars)


def _cold_start(problem: DcOpfProblem) -> np.ndarray:
    if problem.layout is not None and problem.pg_bounds is not None:
        return _structured_start(problem)
    return _generic_start(problem)


def _dual_scale(problem: DcOpfProblem, x0: np.ndarray) -> float:
    """Initial magnitude for inequality duals: at least 1, at most 1e4."""
    grad = problem.Q @ x0 + problem.c
    scale = float(np.max(np.abs(grad))) if grad.size else 1.0
    return float(min(max(1.0, scale), 1e4))


def solve(problem: DcOpfProblem, options: SolverOptions = SolverOptions()) -> SolveReport:
    """Cold-started solve; deterministic except for the wall_time field."""
    x0 = _cold_start(problem)
    s0 = None
    if problem.n_ineq:
        s0 = np.maximum(problem.h - problem.G @ x0, 1.0)  # strict positivity, min 1
    return _ipm(problem, x0, s0, options)


def warm_solve(
    problem: DcOpfProblem, primal_init: np.ndarray, options: SolverOptions = SolverOptions()
) -> SolveReport:
    """Primal-only warm start: slacks clamped to the interior by bound_push."""
    primal_init = np.asarray(primal_init, dtype=float)
    if primal_init.shape != (problem.n_vars,):
        raise DimensionMismatch(
            f"primal_init has shape {primal_init.shape}, expected ({problem.n_vars},)"
        )
    s0 = None
    if problem.n_ineq:
        s0 = np.maximum(problem.h - problem.G @ primal_init, options.bound_push)
    return _ipm(problem, primal_init.copy(), s0, options)


def _solve_equality_qp(problem: DcOpfProblem, options: SolverOptions, t0: float) -> SolveReport:
    """No inequality rows: one regularized KKT solve."""
    n, p = problem.n_vars, problem.n_eq
    delta = options.regularization
    K = np.zeros((n + p, n + p))
    K[:n, :n] = problem.Q + delta * np.eye(n)
    K[:n, n:] = problem.A_eq.T
    K[n:, :n] = problem.A_eq
    K[n:, n:] = -delta * np.eye(p)
    rhs = np.concatenate([-problem.c, problem.b_eq])
    try:
        sol = scipy.linalg.lu_solve(scipy.linalg.lu_factor(K), rhs)
    except (scipy.linalg.LinAlgError, ValueError):
        return _report(problem, SolveStatus.NUMERICAL_FAILURE, np.zeros(n), np.zeros(p), np.zeros(0), 1, t0, None)
    x, y = sol[:n], sol[n:]
    r_d = np.max(np.abs(problem.Q @ x + problem.c + problem.A_eq.T @ y)) if p else np.max(np.abs(problem.Q @ x + problem.c))
    r_p = np.max(np.abs(problem.A_eq @ x - problem.b_eq)) if p else 0.0
    status = SolveStatus.OPTIMAL if max(r_d, r_p) <= options.tol_residual else SolveStatus.NUMERICAL_FAILURE
    return _report(problem, status, x, y, np.zeros(0), 1, t0, None)


def _report(problem, status, x, y, z, iterations, t0, trace) -> SolveReport:
    work = float(iterations) * (problem.n_vars + problem.n_eq + problem.n_ineq)
    return SolveReport(
        status=status,
        primal=x,
        eq_duals=y,
        ineq_duals=z,
        objective=problem.objective_value(x),
        iterations=iterations,
        wall_time=time.perf_counter() - t0,
        work_units=work,
        trace=trace,
    )


def _max_step(v: np.ndarray, dv: np.ndarray) -> float:
    """Largest alpha in (0, 1] keeping v + alpha*dv > 0."""
    neg = dv < 0
    if not np.any(neg):
        return 1.0
    return float(min(1.0, np.min(-v[neg] / dv[neg])))


def _ipm(problem: DcOpfProblem, x: np.ndarray, s: np.ndarray | None, options: SolverOptions) -> SolveReport:
    t0 = time.perf_counter()
    n, p, m = problem.n_vars, problem.n_eq, problem.n_ineq
    if m == 0:
        return _solve_equality_qp(problem, options, t0)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        return _ipm_loop(problem, x, s, options, t0)


def _ipm_loop(problem: DcOpfProblem, x: np.ndarray, s: np.ndarray, options: SolverOptions, t0: float) -> SolveReport:
    n, p, m = problem.n_vars, problem.n_eq, problem.n_ineq

    Q, c = problem.Q, problem.c
    A, b = problem.A_eq, problem.b_eq
    G, h = problem.G, problem.h
    delta = options.regularization

    y = np.zeros(p)
    # Duals start on the problem's gradient scale so the complementarity gap
    # begins above its converged path and descends monotonically.
    z = np.full(m, _dual_scale(problem, x))
    s = s.copy()

    trace: list[dict] | None = [] if options.collect_trace else None
    prev_objective = np.inf
    iterations = 0
    diag = np.arange(n)

    while True:
        r_d = Q @ x + c + G.T @ z + (A.T @ y if p else 0.0)
        r_p = A @ x - b if p else np.zeros(0)
        r_g = G @ x + s - h
        mu = float(s @ z) / m

        norm_rd = float(np.max(np.abs(r_d)))
        norm_rp = float(np.max(np.abs(r_p))) if p else 0.0
        norm_rg = float(np.max(np.abs(r_g)))
        if trace is not None:
            trace.append(
                {"iter": iterations, "mu": mu, "r_dual": norm_rd, "r_eq": norm_rp, "r_ineq": norm_rg}
            )
        if max(norm_rd, norm_rp, norm_rg) <= options.tol_residual and mu <= options.tol_gap:
            return _report(problem, SolveStatus.OPTIMAL, x, y, z, iterations, t0, trace)
        if iterations >= options.max_iters:
            return _report(problem, SolveStatus.MAX_ITERS, x, y, z, iterations, t0, trace)

        if not (np.isfinite(mu) and np.all(np.isfinite(x))):
            return _report(problem, SolveStatus.NUMERICAL_FAILURE, np.nan_to_num(x), y, z, iterations, t0, trace)
        objective = problem.objective_value(x)
        if float(np.max(np.abs(x))) > options.divergence_threshold:
            status = SolveStatus.UNBOUNDED if objective < prev_objective else SolveStatus.NUMERICAL_FAILURE
            return _report(problem, status, x, y, z, iterations, t0, trace)
        prev_objective = objective

        w = z / s
        K = np.zeros((n + p, n + p))
        K[:n, :n] = Q + G.T @ (w[:, None] * G)
        K[diag, diag] += delta
        if p:
            K[:n, n:] = A.T
            K[n:, :n] = A
            K[n:, n:] = -delta * np.eye(p)
        try:
            lu = scipy.linalg.lu_factor(K, check_finite=False)
        except (scipy.linalg.LinAlgError, ValueError):
            return _report(problem, SolveStatus.NUMERICAL_FAILURE, x, y, z, iterations, t0, trace)

        def newton(r_c: np.ndarray):
            rhs_x = -r_d - G.T @ (w * r_g - r_c / s)
            rhs = np.concatenate([rhs_x, -r_p]) if p else rhs_x
            sol = scipy.linalg.lu_solve(lu, rhs, check_finite=False)
            sol += scipy.linalg.lu_solve(lu, rhs - K @ sol, check_finite=False)  # one refinement
            dx, dy = sol[:n], sol[n:]
            dz = w * (G @ dx + r_g) - r_c / s
            ds = -(r_c + s * dz) / z
            return dx, dy, dz, ds

        # Predictor (affine scaling) step.
        dx_a, dy_a, dz_a, ds_a = newton(s * z)
        if not np.all(np.isfinite(dx_a)):
            return _report(problem, SolveStatus.NUMERICAL_FAILURE, x, y, z, iterations, t0, trace)
        alpha_p_a = _max_step(s, ds_a)
        alpha_d_a = _max_step(z, dz_a)
        mu_aff = float((s + alpha_p_a * ds_a) @ (z + alpha_d_a * dz_a)) / m
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3 if mu > 0 else 0.0

        # Corrector step reuses the factorization.
        dx, dy, dz, ds = newton(s * z + ds_a * dz_a - sigma * mu)
        if not np.all(np.isfinite(dx)):
            return _report(problem, SolveStatus.NUMERICAL_FAILURE, x, y, z, iterations, t0, trace)

        eta = options.step_fraction
        alpha_p = min(1.0, eta * _max_step(s, ds))
        alpha_d = min(1.0, eta * _max_step(z, dz))

        # Safeguard: if the Mehrotra step would raise the gap (possible while
        # infeasibility dominates), fall back to a strongly centered step with
        # a common step length, which keeps mu non-increasing without stalling.
        mu_new = float((s + alpha_p * ds) @ (z + alpha_d * dz)) / m
        if mu_new > mu:
            for sigma_safe in (max(sigma, 0.9), 0.99):
                dx2, dy2, dz2, ds2 = newton(s * z - sigma_safe * mu)
                alpha = min(1.0, eta * _max_step(s, ds2), eta * _max_step(z, dz2))
                mu_try = float((s + alpha * ds2) @ (z + alpha * dz2)) / m
                tries = 0
                while mu_try > mu and tries < 8:
                    alpha *= 0.5
                    mu_try = float((s + alpha * ds2) @ (z + alpha * dz2)) / m
                    tries += 1
                if mu_try <= mu:
                    dx, dy, dz, ds = dx2, dy2, dz2, ds2
                    alpha_p = alpha_d = alpha
                    break

        x = x + alpha_p * dx
        s = s + alpha_p * ds
        y = y + alpha_d * dy
        z = z + alpha_d * dz
        iterations += 1
