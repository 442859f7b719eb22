"""SDP front end for matrix-variable programs and LMI programs over scalars."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from . import ipm
from .cones import Cone, smat, svec
from .problems import (DEFAULT_TOL, MAX_ITER, STALL_ITERS, Certificate,
                       SemidefiniteProgram, Sense, SolveResult, Status)


def _common(sol, tolerance):
    return dict(primal_residual=sol.primal_residual, dual_residual=sol.dual_residual,
                iterations=sol.iterations, message=sol.message, tolerance=tolerance)


def _solve_matrix(problem: SemidefiniteProgram, tolerance, max_iter, dump):
    n = problem.dim
    sign = -1.0 if problem.sense is Sense.MAXIMIZE else 1.0
    c = sign * svec(problem.objective)
    if problem.equalities:
        A = np.array([svec(Ai) for Ai, _ in problem.equalities])
        b = np.array([bi for _, bi in problem.equalities])
    else:
        A = np.zeros((0, c.size))
        b = np.zeros(0)
    cone = Cone(0, (n,))
    if dump:
        from .sdpa import write_sdpa
        write_sdpa(dump, c, A, b, cone)
    sol = ipm.solve_conic(c, A, b, cone, tol=tolerance, max_iter=max_iter,
                          stall_iters=STALL_ITERS)
    common = _common(sol, tolerance)

    if sol.status == ipm.OPTIMAL:
        X = smat(sol.x / sol.tau, n)
        return SolveResult(Status.OPTIMAL, float(np.sum(problem.objective * X)), X,
                           sign * sol.y / sol.tau,
                           abs(sol.primal_objective - sol.dual_objective), **common)
    if sol.status == ipm.PRIMAL_INFEASIBLE:
        y = sol.y / np.abs(sol.y).max()
        return SolveResult(Status.INFEASIBLE, np.nan, None, None, np.nan,
                           certificate=Certificate("farkas", y, matrix_farkas_violation(problem, y)),
                           **common)
    if sol.status == ipm.DUAL_INFEASIBLE:
        X = smat(sol.x, n)
        X /= np.trace(X)
        rate = float(-sign * np.sum(problem.objective * X))
        inf = np.inf if problem.sense is Sense.MAXIMIZE else -np.inf
        return SolveResult(Status.UNBOUNDED, inf, None, None, np.nan,
                           certificate=Certificate("ray", X, rate), **common)
    X = smat(sol.x / sol.tau, n) if sol.tau > 0 else None
    obj = float(np.sum(problem.objective * X)) if X is not None else np.nan
    return SolveResult(Status.NUMERICAL_FAILURE, obj, X, None, sol.gap, **common)


def matrix_farkas_violation(problem: SemidefiniteProgram, y) -> float:
    """b'y for a certificate with sum_i y_i A_i <= 0, else -inf.

    For any feasible X >= 0 we would have b'y = Tr(sum y_i A_i X) <= 0, so a
    positive value proves infeasibility.
    """
    y = np.asarray(y, dtype=float)
    S = sum(yi * Ai for yi, (Ai, _) in zip(y, problem.equalities))
    b = np.array([bi for _, bi in problem.equalities])
    scale = max(1.0, float(np.abs(S).max()))
    if np.linalg.eigvalsh(S)[-1] > 1e-10 * scale:
        return -np.inf
    return float(b @ y)


class _ScalarForm:
    """LMI program as the dual side of a standard-form conic program.

    Scalar equalities are eliminated first: y = y_p + Z t.
    """

    def __init__(self, problem: SemidefiniteProgram, tolerance: float):
        k = problem.n_scalars
        self.y_p = np.zeros(k)
        self.Z = np.eye(k)
        self.inconsistent = None
        if problem.scalar_equalities is not None and problem.scalar_equalities[0].shape[0]:
            E, f = problem.scalar_equalities
            self.y_p = np.linalg.lstsq(E, f, rcond=None)[0]
            resid = f - E @ self.y_p
            if np.linalg.norm(resid) > tolerance * (1.0 + np.linalg.norm(f)):
                self.inconsistent = resid / np.linalg.norm(resid)
            self.Z = scipy.linalg.null_space(E)
        self.lmis = problem.lmis
        scalars = [i for i, L in enumerate(problem.lmis) if L.size == 1]
        blocks = [i for i, L in enumerate(problem.lmis) if L.size > 1]
        self.order = scalars + blocks
        self.cone = Cone(len(scalars), tuple(problem.lmis[i].size for i in blocks))
        F0 = []
        F = []
        for i in self.order:
            L = problem.lmis[i]
            shifted = L.evaluate(self.y_p)
            reduced = np.tensordot(self.Z.T, L.F, axes=1)  # (k', p, p)
            if L.size == 1:
                F0.append(shifted.reshape(1))
                F.append(reduced.reshape(-1, 1))
            else:
                F0.append(svec(shifted))
                F.append(svec(reduced).reshape(reduced.shape[0], -1))
        self.c = np.concatenate(F0)
        self.A = -np.concatenate(F, axis=1) if F else np.zeros((self.Z.shape[1], 0))
        sign = -1.0 if problem.sense is Sense.MAXIMIZE else 1.0
        self.sign = sign
        self.b = -sign * (self.Z.T @ problem.scalar_objective)
        self.offset = float(problem.scalar_objective @ self.y_p)

    def blocks_of(self, x):
        """Split an internal primal vector into matrices, in the user's LMI order."""
        out = [None] * len(self.lmis)
        l = self.cone.nonneg
        for pos, i in enumerate(self.order[:l]):
            out[i] = np.array([[x[pos]]])
        for (sl, n), i in zip(self.cone.blocks(), self.order[l:]):
            out[i] = smat(x[sl], n)
        return out


def lmi_farkas_violation(problem: SemidefiniteProgram, blocks) -> float:
    """-sum_j Tr(F_j(y) Z_j) for y on the equality-feasible set, if constant there.

    Z_j >= 0 and F_j(y) >= 0 would force that sum to be nonnegative, so a
    positive return value proves the LMIs cannot hold together.
    """
    blocks = [np.asarray(Zb, dtype=float) for Zb in blocks]
    if any(np.linalg.eigvalsh(Zb)[0] < -1e-12 * max(1.0, np.abs(Zb).max()) for Zb in blocks):
        return -np.inf
    k = problem.n_scalars
    y_p, Z = np.zeros(k), np.eye(k)
    if problem.scalar_equalities is not None and problem.scalar_equalities[0].shape[0]:
        E, f = problem.scalar_equalities
        y_p = np.linalg.lstsq(E, f, rcond=None)[0]
        Z = scipy.linalg.null_space(E)
    const = sum(float(np.sum(L.evaluate(y_p) * Zb)) for L, Zb in zip(problem.lmis, blocks))
    lin = np.zeros(Z.shape[1])
    for L, Zb in zip(problem.lmis, blocks):
        lin += Z.T @ np.tensordot(L.F, Zb, axes=([1, 2], [0, 1]))
    scale = max(1.0, sum(np.abs(Zb).sum() for Zb in blocks))
    if np.abs(lin).max(initial=0.0) > 1e-9 * scale:
        return -np.inf
    return -const


def _solve_scalar(problem: SemidefiniteProgram, tolerance, max_iter, dump):
    sf = _ScalarForm(problem, tolerance)
    if sf.inconsistent is not None:
        E, f = problem.scalar_equalities
        cert = Certificate("farkas", sf.inconsistent, float(sf.inconsistent @ f))
        return SolveResult(Status.INFEASIBLE, np.nan, None, None, np.nan, certificate=cert,
                           tolerance=tolerance, message="inconsistent scalar equalities")
    if dump:
        from .sdpa import write_sdpa
        write_sdpa(dump, sf.c, sf.A, sf.b, sf.cone)
    sol = ipm.solve_conic(sf.c, sf.A, sf.b, sf.cone, tol=tolerance, max_iter=max_iter,
                          stall_iters=STALL_ITERS)
    common = _common(sol, tolerance)

    if sol.status == ipm.OPTIMAL:
        y = sf.y_p + sf.Z @ (sol.y / sol.tau)
        x = sol.x / sol.tau
        return SolveResult(Status.OPTIMAL, float(problem.scalar_objective @ y), y, x,
                           abs(sol.primal_objective - sol.dual_objective),
                           dual_blocks=sf.blocks_of(x), **common)
    if sol.status == ipm.DUAL_INFEASIBLE:
        x = sol.x / np.abs(sol.x).max()
        blocks = sf.blocks_of(x)
        total = sum(np.trace(Zb) for Zb in blocks)
        blocks = [Zb / total for Zb in blocks]
        cert = Certificate("farkas", x / total, lmi_farkas_violation(problem, blocks),
                           blocks=blocks)
        return SolveResult(Status.INFEASIBLE, np.nan, None, None, np.nan,
                           certificate=cert, **common)
    if sol.status == ipm.PRIMAL_INFEASIBLE:
        r = sf.Z @ sol.y
        r = r / np.abs(r).max()
        rate = float(-sf.sign * (problem.scalar_objective @ r))
        inf = np.inf if problem.sense is Sense.MAXIMIZE else -np.inf
        return SolveResult(Status.UNBOUNDED, inf, None, None, np.nan,
                           certificate=Certificate("ray", r, rate), **common)
    y = sf.y_p + sf.Z @ (sol.y / sol.tau) if sol.tau > 0 else None
    obj = float(problem.scalar_objective @ y) if y is not None else np.nan
    return SolveResult(Status.NUMERICAL_FAILURE, obj, y, None, sol.gap, **common)


def solve_sdp(problem: SemidefiniteProgram, tolerance: float = DEFAULT_TOL, *,
              max_iter: int = MAX_ITER, dump: str | None = None) -> SolveResult:
    """Solve a SemidefiniteProgram.

    Matrix form returns X as ``primal`` and the equality multipliers as
    ``dual``; scalar form returns y as ``primal`` and the LMI multipliers in
    ``dual_blocks``.
    """
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    if problem.matrix_form:
        return _solve_matrix(problem, tolerance, max_iter, dump)
    return _solve_scalar(problem, tolerance, max_iter, dump)
