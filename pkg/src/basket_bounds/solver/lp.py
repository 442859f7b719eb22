"""LP front end: reduce to standard form, solve, map results and certificates back."""

from __future__ import annotations

import numpy as np

from . import ipm
from .cones import Cone
from .problems import (DEFAULT_TOL, MAX_ITER, STALL_ITERS, Certificate,
                       LinearProgram, Sense, SolveResult, Status)


class _StandardForm:
    """x = T u + x0 with u >= 0; inequality and box rows get explicit slacks."""

    def __init__(self, lp: LinearProgram):
        n = lp.n
        lo, hi = lp.lower, lp.upper
        cols = []  # (user index, sign)
        boxed = []  # (column index, width)
        x0 = np.zeros(n)
        for j in range(n):
            if np.isfinite(lo[j]) and lo[j] == hi[j]:
                x0[j] = lo[j]
            elif np.isfinite(lo[j]):
                x0[j] = lo[j]
                cols.append((j, 1.0))
                if np.isfinite(hi[j]):
                    boxed.append((len(cols) - 1, hi[j] - lo[j]))
            elif np.isfinite(hi[j]):
                x0[j] = hi[j]
                cols.append((j, -1.0))
            else:
                cols.append((j, 1.0))
                cols.append((j, -1.0))
        nu = len(cols)
        T = np.zeros((n, nu))
        for k, (j, sign) in enumerate(cols):
            T[j, k] = sign
        self.T, self.x0, self.nu = T, x0, nu

        m_eq, m_ub, m_box = lp.A_eq.shape[0], lp.A_ub.shape[0], len(boxed)
        size = nu + m_ub + m_box
        A = np.zeros((m_eq + m_ub + m_box, size))
        A[:m_eq, :nu] = lp.A_eq @ T
        A[m_eq:m_eq + m_ub, :nu] = lp.A_ub @ T
        A[m_eq:m_eq + m_ub, nu:nu + m_ub] = np.eye(m_ub)
        for r, (k, width) in enumerate(boxed):
            A[m_eq + m_ub + r, k] = 1.0
            A[m_eq + m_ub + r, nu + m_ub + r] = 1.0
        b = np.concatenate([lp.b_eq - lp.A_eq @ x0, lp.b_ub - lp.A_ub @ x0,
                            [w for _, w in boxed]])
        sign = -1.0 if lp.sense is Sense.MAXIMIZE else 1.0
        c = np.zeros(size)
        c[:nu] = sign * (T.T @ lp.c)
        self.A, self.b, self.c, self.sign = A, b, c, sign
        self.m_eq, self.m_ub = m_eq, m_ub
        self.cone = Cone(nonneg=size)


def farkas_violation(lp: LinearProgram, multipliers: np.ndarray) -> float:
    """Contradiction proved by multipliers on (equality rows, inequality rows).

    The combination g'x <= h holds for every feasible x (inequality
    multipliers must be nonnegative); minimizing g'x over the variable box
    and subtracting h gives the violation. Positive means infeasibility is
    certified.
    """
    multipliers = np.asarray(multipliers, dtype=float)
    m_eq = lp.A_eq.shape[0]
    mu_eq, mu_ub = multipliers[:m_eq], multipliers[m_eq:]
    if np.any(mu_ub < 0):
        return -np.inf
    g = lp.A_eq.T @ mu_eq + lp.A_ub.T @ mu_ub
    h = lp.b_eq @ mu_eq + lp.b_ub @ mu_ub
    scale = max(1.0, np.abs(multipliers).max(initial=0.0))
    g[np.abs(g) <= 1e-12 * scale] = 0.0
    lo = np.where(g > 0, lp.lower, lp.upper)
    with np.errstate(invalid="ignore"):
        terms = np.where(g == 0, 0.0, g * lo)
    if np.any(np.isnan(terms)) or np.any(np.isinf(terms) & (terms < 0)):
        return -np.inf
    return float(terms.sum() - h)


def solve_lp(problem: LinearProgram, tolerance: float = DEFAULT_TOL, *,
             max_iter: int = MAX_ITER, dump: str | None = None) -> SolveResult:
    """Solve a LinearProgram with the homogeneous interior-point method.

    Raises ValueError for inconsistent dimensions (checked when the
    LinearProgram is built) or a nonpositive tolerance.
    """
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    sf = _StandardForm(problem)
    if dump:
        from .sdpa import write_sdpa
        write_sdpa(dump, sf.c, sf.A, sf.b, sf.cone)
    sol = ipm.solve_conic(sf.c, sf.A, sf.b, sf.cone, tol=tolerance,
                          max_iter=max_iter, stall_iters=STALL_ITERS)
    common = dict(primal_residual=sol.primal_residual, dual_residual=sol.dual_residual,
                  iterations=sol.iterations, message=sol.message, tolerance=tolerance)

    if sol.status == ipm.OPTIMAL:
        u = sol.x[:sf.nu] / sol.tau
        x = sf.T @ u + sf.x0
        y = sf.sign * sol.y[:sf.m_eq + sf.m_ub] / sol.tau
        return SolveResult(Status.OPTIMAL, float(problem.c @ x), x, y,
                           abs(sol.primal_objective - sol.dual_objective), **common)

    if sol.status == ipm.PRIMAL_INFEASIBLE:
        mu = -sol.y[:sf.m_eq + sf.m_ub]
        mu = mu / max(np.abs(mu).max(initial=0.0), 1e-300)
        cert = Certificate("farkas", mu, farkas_violation(problem, mu))
        return SolveResult(Status.INFEASIBLE, np.nan, None, None, np.nan,
                           certificate=cert, **common)

    if sol.status == ipm.DUAL_INFEASIBLE:
        d = sf.T @ sol.x[:sf.nu]
        d = d / max(np.abs(d).max(initial=0.0), 1e-300)
        rate = float(-sf.sign * (problem.c @ d))
        cert = Certificate("ray", d, rate)
        inf = np.inf if problem.sense is Sense.MAXIMIZE else -np.inf
        return SolveResult(Status.UNBOUNDED, inf, None, None, np.nan,
                           certificate=cert, **common)

    # last iterate, reported for diagnostics only
    x = sf.T @ (sol.x[:sf.nu] / sol.tau) + sf.x0 if sol.tau > 0 else None
    obj = float(problem.c @ x) if x is not None else np.nan
    return SolveResult(Status.NUMERICAL_FAILURE, obj, x, None, sol.gap, **common)
