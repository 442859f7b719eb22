"""Problem and result types shared by the LP and SDP front ends."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

DEFAULT_TOL = 1e-8
MAX_ITER = 200
STALL_ITERS = 20


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    NUMERICAL_FAILURE = "NumericalFailure"

    def __str__(self) -> str:
        return self.value


class Sense(str, enum.Enum):
    MINIMIZE = "minimize"
    MAXIMIZE = "maximize"


@dataclass
class Certificate:
    """Infeasibility (Farkas) or unboundedness (improving ray) certificate.

    ``violation`` is the size of the contradiction the certificate proves:
    for a Farkas vector, how far the aggregated constraint is from being
    satisfiable; for a ray, the objective improvement per unit step.
    """

    kind: str  # "farkas" or "ray"
    vector: np.ndarray
    violation: float
    blocks: Optional[list] = None


@dataclass
class SolveResult:
    status: Status
    objective: float
    primal: Optional[np.ndarray]
    dual: Optional[np.ndarray]
    gap: float
    primal_residual: float = np.nan
    dual_residual: float = np.nan
    iterations: int = 0
    certificate: Optional[Certificate] = None
    message: str = ""
    tolerance: float = DEFAULT_TOL
    dual_blocks: Optional[list] = None

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL

    def diagnostics(self) -> str:
        return (f"{self.status} after {self.iterations} iterations: "
                f"primal residual {self.primal_residual:.2e}, dual residual "
                f"{self.dual_residual:.2e}, gap {self.gap:.2e} ({self.message})")


def _sense(value) -> Sense:
    return value if isinstance(value, Sense) else Sense(str(value).lower())


def _matrix(a, ncols: int, name: str) -> np.ndarray:
    if a is None:
        return np.zeros((0, ncols))
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0:
        return np.zeros((0, ncols))
    if a.shape[1] != ncols:
        raise ValueError(f"{name} has {a.shape[1]} columns, expected {ncols}")
    return a


def _vector(v, n: int, name: str, fill: float = 0.0) -> np.ndarray:
    if v is None:
        return np.full(n, fill)
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape != (n,):
        raise ValueError(f"{name} has length {v.size}, expected {n}")
    return v


@dataclass
class LinearProgram:
    """minimize/maximize c'x s.t. A_eq x = b_eq, A_ub x <= b_ub, lower <= x <= upper.

    Bounds default to ``0 <= x < inf``; use ``-np.inf`` for free variables.
    """

    c: np.ndarray
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    A_ub: Optional[np.ndarray] = None
    b_ub: Optional[np.ndarray] = None
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    sense: Sense = Sense.MINIMIZE

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        n = self.c.size
        self.A_eq = _matrix(self.A_eq, n, "A_eq")
        self.A_ub = _matrix(self.A_ub, n, "A_ub")
        self.b_eq = _vector(self.b_eq, self.A_eq.shape[0], "b_eq")
        self.b_ub = _vector(self.b_ub, self.A_ub.shape[0], "b_ub")
        self.lower = _vector(self.lower, n, "lower", 0.0)
        self.upper = _vector(self.upper, n, "upper", np.inf)
        self.sense = _sense(self.sense)
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")
        if np.any(np.isnan(self.lower)) or np.any(np.isnan(self.upper)):
            raise ValueError("bounds must not be NaN")

    @property
    def n(self) -> int:
        return self.c.size


def _symmetric(M, n: int, name: str) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.shape != (n, n):
        raise ValueError(f"{name} has shape {M.shape}, expected {(n, n)}")
    scale = max(1.0, float(np.max(np.abs(M))) if M.size else 1.0)
    if not np.allclose(M, M.T, rtol=0.0, atol=1e-12 * scale):
        raise ValueError(f"{name} is not symmetric")
    return 0.5 * (M + M.T)


@dataclass
class LMI:
    """Linear matrix inequality F0 + sum_i y_i F_i >= 0 over the decision scalars y."""

    F0: np.ndarray
    F: Sequence[np.ndarray]

    def __post_init__(self):
        self.F0 = np.atleast_2d(np.asarray(self.F0, dtype=float))
        p = self.F0.shape[0]
        self.F0 = _symmetric(self.F0, p, "LMI constant term")
        self.F = np.array([_symmetric(np.atleast_2d(Fi), p, "LMI coefficient")
                           for Fi in self.F]).reshape(-1, p, p)

    @property
    def size(self) -> int:
        return self.F0.shape[0]

    def evaluate(self, y) -> np.ndarray:
        return self.F0 + np.tensordot(np.asarray(y, dtype=float), self.F, axes=1)


@dataclass
class SemidefiniteProgram:
    """Either a matrix-variable SDP or an LMI problem over decision scalars.

    Matrix form (``dim > 0``): optimize Tr(objective X) subject to
    Tr(A_i X) = b_i and X >= 0.

    Scalar form (``dim == 0``): optimize scalar_objective' y subject to every
    LMI in ``lmis`` and the linear equalities ``scalar_equalities = (E, f)``.
    """

    dim: int = 0
    objective: Optional[np.ndarray] = None
    equalities: Sequence[tuple] = ()
    lmis: Sequence[LMI] = ()
    scalar_objective: Optional[np.ndarray] = None
    scalar_equalities: Optional[tuple] = None
    sense: Sense = Sense.MINIMIZE
    n_scalars: int = field(init=False, default=0)

    def __post_init__(self):
        self.sense = _sense(self.sense)
        if self.dim < 0:
            raise ValueError("dim must be nonnegative")
        if self.dim > 0 and self.lmis:
            raise ValueError("mixed matrix/LMI programs are not supported")
        if self.dim > 0:
            n = self.dim
            self.objective = (np.zeros((n, n)) if self.objective is None
                              else _symmetric(self.objective, n, "objective"))
            self.equalities = [(_symmetric(A, n, f"constraint {i}"), float(b))
                               for i, (A, b) in enumerate(self.equalities)]
            return
        if not self.lmis:
            raise ValueError("an SDP needs a matrix variable or at least one LMI")
        self.lmis = [L if isinstance(L, LMI) else LMI(*L) for L in self.lmis]
        k = self.lmis[0].F.shape[0]
        if any(L.F.shape[0] != k for L in self.lmis):
            raise ValueError("all LMIs must share the decision-scalar dimension")
        self.n_scalars = k
        self.scalar_objective = _vector(self.scalar_objective, k, "scalar_objective")
        if self.scalar_equalities is not None:
            E, f = self.scalar_equalities
            E = _matrix(E, k, "scalar equality matrix")
            self.scalar_equalities = (E, _vector(f, E.shape[0], "scalar equality rhs"))

    @property
    def matrix_form(self) -> bool:
        return self.dim > 0
