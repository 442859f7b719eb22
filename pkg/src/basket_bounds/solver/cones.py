"""Vectorized symmetric cones: a nonnegative orthant followed by PSD blocks.

Symmetric matrices are stored with ``svec`` (upper triangle, row-major,
off-diagonal entries scaled by sqrt(2)) so that the Euclidean inner product
of two svec vectors equals the trace inner product of the matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

SQRT2 = np.sqrt(2.0)


@lru_cache(maxsize=None)
def _triu(n: int):
    rows, cols = np.triu_indices(n)
    scale = np.where(rows == cols, 1.0, SQRT2)
    return rows, cols, scale


def svec_size(n: int) -> int:
    return n * (n + 1) // 2


def svec(mat: np.ndarray) -> np.ndarray:
    """Stack the upper triangle of one matrix or a batch of matrices."""
    n = mat.shape[-1]
    rows, cols, scale = _triu(n)
    return mat[..., rows, cols] * scale


def smat(vec: np.ndarray, n: int) -> np.ndarray:
    rows, cols, scale = _triu(n)
    out = np.zeros(vec.shape[:-1] + (n, n))
    vals = vec / scale
    out[..., rows, cols] = vals
    out[..., cols, rows] = vals
    return out


@dataclass(frozen=True)
class Cone:
    """Product cone R+^nonneg x S+^psd[0] x S+^psd[1] x ..."""

    nonneg: int = 0
    psd: tuple[int, ...] = ()

    @property
    def size(self) -> int:
        return self.nonneg + sum(svec_size(n) for n in self.psd)

    @property
    def degree(self) -> int:
        return self.nonneg + sum(self.psd)

    def blocks(self):
        """Yield ``(slice, n)`` for each PSD block."""
        start = self.nonneg
        for n in self.psd:
            stop = start + svec_size(n)
            yield slice(start, stop), n
            start = stop

    def identity(self) -> np.ndarray:
        e = np.zeros(self.size)
        e[: self.nonneg] = 1.0
        for sl, n in self.blocks():
            e[sl] = svec(np.eye(n))
        return e

    def min_eigenvalue(self, v: np.ndarray) -> float:
        """Smallest 'eigenvalue' of v over all blocks (+inf for the empty cone)."""
        lo = np.inf
        if self.nonneg:
            lo = min(lo, float(v[: self.nonneg].min()))
        for sl, n in self.blocks():
            lo = min(lo, float(np.linalg.eigvalsh(smat(v[sl], n))[0]))
        return lo

    def project(self, v: np.ndarray) -> np.ndarray:
        """Euclidean projection onto the cone."""
        out = v.copy()
        out[: self.nonneg] = np.maximum(out[: self.nonneg], 0.0)
        for sl, n in self.blocks():
            w, q = np.linalg.eigh(smat(v[sl], n))
            out[sl] = svec((q * np.maximum(w, 0.0)) @ q.T)
        return out


class NTScaling:
    """Nesterov-Todd scaling of a strictly interior pair (x, s).

    ``P`` maps primal quantities and ``Q = P^{-T}`` maps dual ones so that
    ``P x = Q s = lam``. For each PSD block lam is diagonal, which makes the
    Jordan-product solves elementwise.
    """

    def __init__(self, cone: Cone, lp_d, lp_lam, R, Rinv, lam):
        self.cone = cone
        self.lp_d = lp_d  # P on the orthant
        self.lp_lam = lp_lam
        self.R = R
        self.Rinv = Rinv
        self.lam = lam

    @classmethod
    def identity(cls, cone: Cone) -> "NTScaling":
        """Scaling of the pair x = s = e."""
        l = cone.nonneg
        return cls(cone, np.ones(l), np.ones(l),
                   [np.eye(n) for n in cone.psd], [np.eye(n) for n in cone.psd],
                   [np.ones(n) for n in cone.psd])

    def updated(self, x: np.ndarray, s: np.ndarray, px: np.ndarray, qs: np.ndarray,
                alpha: float) -> "NTScaling":
        """Scaling at (x + a dx, s + a ds), given P dx and Q ds.

        PSD blocks are refactored in the scaled space, where the iterates stay
        close to lam and the Cholesky factors remain well conditioned.
        """
        l = self.cone.nonneg
        lp_d = np.sqrt(s[:l] / x[:l])
        lp_lam = np.sqrt(x[:l] * s[:l])
        R, Rinv, lam = [], [], []
        for k, (sl, n) in enumerate(self.cone.blocks()):
            Xt = np.diag(self.lam[k]) + alpha * smat(px[sl], n)
            St = np.diag(self.lam[k]) + alpha * smat(qs[sl], n)
            L1 = np.linalg.cholesky(Xt)
            L2 = np.linalg.cholesky(St)
            _, sig, Vt = np.linalg.svd(L2.T @ L1)
            root = np.sqrt(sig)
            Rt = (L1 @ Vt.T) / root
            Rt_inv = (root[:, None] * Vt) @ scipy.linalg.solve_triangular(
                L1, np.eye(n), lower=True)
            R.append(self.R[k] @ Rt)
            Rinv.append(Rt_inv @ self.Rinv[k])
            lam.append(sig)
        return NTScaling(self.cone, lp_d, lp_lam, R, Rinv, lam)

    def primal_point(self, x: np.ndarray) -> np.ndarray:
        """x with PSD blocks re-synchronised to R lam R^T."""
        out = x.copy()
        for k, (sl, n) in enumerate(self.cone.blocks()):
            out[sl] = svec((self.R[k] * self.lam[k]) @ self.R[k].T)
        return out

    def dual_point(self, s: np.ndarray) -> np.ndarray:
        out = s.copy()
        for k, (sl, n) in enumerate(self.cone.blocks()):
            out[sl] = svec((self.Rinv[k].T * self.lam[k]) @ self.Rinv[k])
        return out

    # -- maps on full vectors -------------------------------------------------
    def _apply(self, v, lp_fn, blk_fn):
        out = np.empty_like(v)
        l = self.cone.nonneg
        out[:l] = lp_fn(v[:l])
        for k, (sl, n) in enumerate(self.cone.blocks()):
            out[sl] = svec(blk_fn(k, smat(v[sl], n)))
        return out

    def P(self, v):
        return self._apply(v, lambda u: u * self.lp_d,
                           lambda k, U: self.Rinv[k] @ U @ self.Rinv[k].T)

    def Pinv(self, v):
        return self._apply(v, lambda u: u / self.lp_d,
                           lambda k, U: self.R[k] @ U @ self.R[k].T)

    def PT(self, v):
        return self._apply(v, lambda u: u * self.lp_d,
                           lambda k, U: self.Rinv[k].T @ U @ self.Rinv[k])

    def Q(self, v):
        return self._apply(v, lambda u: u / self.lp_d,
                           lambda k, U: self.R[k].T @ U @ self.R[k])

    def D(self, v):
        """(P^T P)^{-1}: x/s on the orthant, U -> N U N with N = R R^T."""
        def blk(k, U):
            N = self.R[k] @ self.R[k].T
            return N @ U @ N
        return self._apply(v, lambda u: u / self.lp_d ** 2, blk)

    # -- Jordan algebra in the scaled space ----------------------------------
    def lam_vec(self) -> np.ndarray:
        out = np.empty(self.cone.size)
        out[: self.cone.nonneg] = self.lp_lam
        for k, (sl, n) in enumerate(self.cone.blocks()):
            out[sl] = svec(np.diag(self.lam[k]))
        return out

    def lam_prod(self, v):
        """lam o v."""
        def blk(k, U):
            d = self.lam[k]
            return 0.5 * (d[:, None] + d[None, :]) * U
        return self._apply(v, lambda u: u * self.lp_lam, blk)

    def lam_div(self, v):
        """Solve lam o u = v for u."""
        def blk(k, U):
            d = self.lam[k]
            return U / (0.5 * (d[:, None] + d[None, :]))
        return self._apply(v, lambda u: u / self.lp_lam, blk)

    def max_step(self, dv: np.ndarray) -> float:
        """Largest a with lam + a*dv in the cone (dv in the scaled space)."""
        amax = np.inf
        l = self.cone.nonneg
        neg = dv[:l] < 0
        if neg.any():
            amax = min(amax, float(np.min(-self.lp_lam[neg] / dv[:l][neg])))
        for k, (sl, n) in enumerate(self.cone.blocks()):
            r = 1.0 / np.sqrt(self.lam[k])
            W = smat(dv[sl], n) * r[:, None] * r[None, :]
            w = np.linalg.eigvalsh(W)[0]
            if w < 0:
                amax = min(amax, -1.0 / w)
        return amax


def jordan(cone: Cone, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Jordan product u o v (elementwise on the orthant, (UV+VU)/2 on blocks)."""
    out = np.empty_like(u)
    l = cone.nonneg
    out[:l] = u[:l] * v[:l]
    for sl, n in cone.blocks():
        U = smat(u[sl], n)
        V = smat(v[sl], n)
        out[sl] = svec(0.5 * (U @ V + V @ U))
    return out


def scale_rows(scaling: NTScaling, A: np.ndarray) -> np.ndarray:
    """Rows of A mapped by P^{-T}, i.e. the constraint matrix A P^{-1}."""
    cone = scaling.cone
    out = np.empty_like(A)
    l = cone.nonneg
    out[:, :l] = A[:, :l] / scaling.lp_d
    for k, (sl, n) in enumerate(cone.blocks()):
        R = scaling.R[k]
        out[:, sl] = svec(R.T @ smat(A[:, sl], n) @ R)
    return out
