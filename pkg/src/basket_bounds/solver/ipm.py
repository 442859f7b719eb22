"""Homogeneous self-dual interior-point method for standard-form conic programs.

Solves the primal-dual pair

    (P)  minimize c'x  subject to  A x = b,  x in K
    (D)  maximize b'y  subject to  A'y + s = c,  s in K

through the homogeneous embedding

    A x - b tau = 0,   A'y + s - c tau = 0,   b'y - c'x - kappa = 0,

with Nesterov-Todd scaling and a Mehrotra predictor-corrector. Dense linear
algebra throughout; the problems handled here have at most a few hundred
equality rows.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .cones import Cone, NTScaling, jordan, scale_rows

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
PRIMAL_INFEASIBLE = "primal_infeasible"
DUAL_INFEASIBLE = "dual_infeasible"
FAILED = "failed"

STEP_FRACTION = 0.98
REFINE_STEPS = 1
RANK_TOL = 1e-12


@dataclass
class ConicSolution:
    status: str
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    tau: float
    kappa: float
    iterations: int
    primal_residual: float = np.nan
    dual_residual: float = np.nan
    gap: float = np.nan
    message: str = ""
    primal_objective: float = np.nan
    dual_objective: float = np.nan
    history: list = field(default_factory=list)


class _ScaledSystem:
    """Range-space solver for the scaled Newton system.

    Given the scaled constraint matrix B = A P^{-1}, returns for a right-hand
    side (f, r) the pair (u, dy) with u = f + B'dy and B u = r, using a
    pivoted QR of B' so that accuracy degrades with cond(B), not cond(B)^2.
    """

    def __init__(self, B: np.ndarray):
        self.m = B.shape[0]
        if self.m == 0:
            self.rank = 0
            return
        Q, R, piv = scipy.linalg.qr(B.T, mode="economic", pivoting=True)
        d = np.abs(np.diag(R))
        rank = int(np.sum(d > RANK_TOL * d[0])) if d.size and d[0] > 0 else 0
        self.rank = rank
        self.Q = Q[:, :rank]
        self.R = R[:rank, :rank]
        self.piv = piv[:rank]

    def solve(self, f: np.ndarray, r: np.ndarray):
        dy = np.zeros(self.m)
        if self.rank == 0:
            return f.copy(), dy
        Qt_f = self.Q.T @ f
        z = scipy.linalg.solve_triangular(self.R, r[self.piv], trans="T")
        u = f - self.Q @ Qt_f + self.Q @ z
        dy[self.piv] = scipy.linalg.solve_triangular(self.R, z - Qt_f)
        return u, dy


def solve_conic(c, A, b, cone: Cone, tol: float = 1e-8, max_iter: int = 200,
                stall_iters: int = 20) -> ConicSolution:
    """Run the embedded IPM and classify the outcome.

    ``status`` is one of OPTIMAL, PRIMAL_INFEASIBLE (a ray y with A'y in -K and
    b'y > 0 is returned in ``y``), DUAL_INFEASIBLE (a ray x in K with Ax = 0
    and c'x < 0 is returned in ``x``) or FAILED.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(-1, cone.size)
    b = np.asarray(b, dtype=float)
    m = A.shape[0]
    if c.shape != (cone.size,) or b.shape != (m,):
        raise ValueError("inconsistent conic problem dimensions")

    e = cone.identity()
    x = e.copy()
    s = e.copy()
    W = NTScaling.identity(cone)
    y = np.zeros(m)
    tau = kappa = 1.0
    nu = cone.degree + 1
    bnorm = 1.0 + np.linalg.norm(b)
    cnorm = 1.0 + np.linalg.norm(c)

    best_merit = np.inf
    best = None
    snapshot_merit = np.inf
    since_best = 0
    history = []
    status = FAILED
    message = "iteration limit reached"
    it = 0
    pres = dres = gap = np.nan

    for it in range(max_iter + 1):
        rp = b * tau - A @ x
        rd = c * tau - A.T @ y - s
        pobj = c @ x
        dobj = b @ y
        rg = kappa + pobj - dobj
        mu = (x @ s + tau * kappa) / nu

        pres = np.linalg.norm(rp) / tau / bnorm
        dres = np.linalg.norm(rd) / tau / cnorm
        gap = abs(pobj - dobj) / tau
        gap_scale = max(1.0, abs(pobj) / tau)
        history.append((it, pres, dres, gap, tau, kappa, mu))

        if pres <= tol and dres <= tol and gap <= tol * gap_scale:
            status, message = OPTIMAL, "converged"
            break

        pinf = np.linalg.norm(A.T @ y + s) / dobj if dobj > 0 else np.inf
        dinf = np.linalg.norm(A @ x) / -pobj if pobj < 0 else np.inf
        # rays are only trusted once tau has collapsed relative to kappa
        if tau <= 1e-3 * max(1.0, kappa):
            if pinf <= tol:
                status, message = PRIMAL_INFEASIBLE, "primal infeasibility certificate"
                break
            if dinf <= tol:
                status, message = DUAL_INFEASIBLE, "dual infeasibility certificate"
                break

        if it == max_iter:
            break

        merit = min(max(pres, dres, gap / gap_scale), pinf, dinf)
        if merit < snapshot_merit:
            snapshot_merit = merit
            best = (x, y, s, tau, kappa, it, pres, dres, gap)
        if merit < 0.9 * best_merit:
            best_merit = merit
            since_best = 0
        else:
            since_best += 1
            if since_best >= stall_iters:
                message = f"no progress in {stall_iters} iterations"
                break

        lam = W.lam_vec()
        B = scale_rows(W, A)
        system = _ScaledSystem(B)
        ct = W.Q(c)
        v, q = system.solve(-ct, b)
        denom = -ct @ v + b @ q + kappa / tau

        def solve_newton(r1, r2, r3, xi, rtau):
            # scaled unknowns: P dx and Q ds, with P dx + Q ds = xi
            u, p = system.solve(xi - W.Q(r2), r1)
            dtau = (r3 + ct @ u - b @ p + rtau / tau) / denom
            dxt = u + v * dtau
            dy = p + q * dtau
            dx = W.Pinv(dxt)
            ds = r2 - A.T @ dy + c * dtau
            dkappa = (rtau - kappa * dtau) / tau
            return dx, dy, ds, dtau, dkappa

        def direction(eta, rc, rtau):
            r1, r2, r3, xi = eta * rp, eta * rd, eta * rg, W.lam_div(rc)
            d = solve_newton(r1, r2, r3, xi, rtau)
            for _ in range(REFINE_STEPS):
                dx, dy, ds, dtau, dkappa = d
                e1 = r1 - (A @ dx - b * dtau)
                e3 = r3 - (-c @ dx + b @ dy - dkappa)
                e4 = xi - (W.P(dx) + W.Q(ds))
                corr = solve_newton(e1, np.zeros_like(r2), e3, e4, 0.0)
                d = tuple(di + ci for di, ci in zip(d, corr))
            return d

        def step_length(dx, ds, dtau, dkappa):
            a = min(W.max_step(W.P(dx)), W.max_step(W.Q(ds)))
            if dtau < 0:
                a = min(a, -tau / dtau)
            if dkappa < 0:
                a = min(a, -kappa / dkappa)
            return a

        lamsq = jordan(cone, lam, lam)
        # predictor
        dxa, dya, dsa, dtaua, dkappaa = direction(1.0, -lamsq, -tau * kappa)
        alpha_a = min(1.0, step_length(dxa, dsa, dtaua, dkappaa))
        sigma = (1.0 - alpha_a) ** 3
        # corrector
        rc = sigma * mu * e - lamsq - jordan(cone, W.P(dxa), W.Q(dsa))
        rtau = sigma * mu - tau * kappa - dtaua * dkappaa
        dx, dy, ds, dtau, dkappa = direction(1.0 - sigma, rc, rtau)
        alpha = min(1.0, STEP_FRACTION * step_length(dx, ds, dtau, dkappa))
        if not np.isfinite(alpha) or alpha <= 0:
            message = "zero step length"
            break

        x_new = x + alpha * dx
        s_new = s + alpha * ds
        try:
            W = W.updated(x_new, s_new, W.P(dx), W.Q(ds), alpha)
        except np.linalg.LinAlgError:
            message = "iterate left the cone interior"
            break
        x = W.primal_point(x_new)
        s = W.dual_point(s_new)
        y = y + alpha * dy
        tau = tau + alpha * dtau
        kappa = kappa + alpha * dkappa

    log.debug("conic solve: %s after %d iterations (%s)", status, it, message)
    if status == FAILED and best is not None:
        # report the most accurate iterate seen, not the one we stopped at
        x, y, s, tau, kappa, best_it, pres, dres, gap = best
        message += f" (best iterate {best_it} reported)"
    return ConicSolution(
        status, x, y, s, tau, kappa, it, pres, dres, gap, message,
        primal_objective=float(c @ x / tau) if tau > 0 else np.nan,
        dual_objective=float(b @ y / tau) if tau > 0 else np.nan,
        history=history,
    )
