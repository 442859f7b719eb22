"""Static-arbitrage price bounds on basket calls.

Outer bounds come from a relaxation: the basket-call price C(w, K) must
extend to a function that is nonnegative, convex and positively homogeneous
in z = (w, K), increasing in w and decreasing in K with slope at least -1.
Writing p_i for the price at z_i and g_i for a subgradient there, such an
extension exists on the finite set of price points iff

    g_i' z_i = p_i,   g_i' (z_j - z_i) <= p_j - p_i   for all i != j,
    g_i[:n] >= 0,     -1 <= g_i[n] <= 0,

and the target's price p_0 is optimized over this set.

Inner bounds optimize the target price over probability measures on a
lattice that reproduce every quote exactly; any such measure proves its
price is attainable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .market import MarketData, _exact, payoff
from .pricing import Basket, call_price_from_straddle
from .solver import (DEFAULT_TOL, Certificate, LinearProgram, SolveResult, Status,
                     solve_lp)

DEFAULT_ATOM_CAP = 100_000
DUPLICATE_TOL = 1e-12


class StaticDataError(ValueError):
    pass


@dataclass(frozen=True)
class PricePoint:
    z: tuple  # (w_1, ..., w_n, K)
    price: float
    role: str  # "quoted", "target" or "forward"
    source: Optional[int] = None  # index into data.instruments


def price_points(data: MarketData, extra_forward_weights=()) -> list:
    """Quotes and forwards as points of the price surface C(w, K).

    Straddles become calls by parity, which needs the basket forward.
    ``extra_forward_weights`` adds zero-strike points (w, 0) priced at w'F,
    which C(w, 0) = w'S makes exact for any w once the forwards are known.
    Repeated points with equal prices are merged; conflicting prices raise.
    """
    points = []
    for k, inst in enumerate(data.instruments):
        z = tuple(inst.weights) + (inst.strike,)
        if inst.kind == "forward":
            points.append(PricePoint(z, inst.price, "forward", k))
        elif inst.kind == "call":
            points.append(PricePoint(z, inst.price, "quoted", k))
        else:
            if data.forwards.size != data.n:
                raise StaticDataError("straddle quotes need the asset forwards")
            fwd = float(inst.w @ data.forwards)
            call = call_price_from_straddle(inst.price, fwd, inst.strike)
            if -DUPLICATE_TOL * max(1.0, abs(fwd), inst.strike) < call < 0:
                call = 0.0  # parity rounding on a worthless call
            points.append(PricePoint(z, call, "quoted", k))
    if data.forwards.size == data.n and not data.forward_instruments:
        eye = np.eye(data.n)
        for i, f in enumerate(data.forwards):
            points.append(PricePoint(tuple(eye[i]) + (0.0,), float(f), "forward"))
    if data.forwards.size == data.n:
        for w in extra_forward_weights:
            w = tuple(float(v) for v in w)
            points.append(PricePoint(w + (0.0,), float(np.dot(w, data.forwards)), "forward"))
    merged = {}
    for p in points:
        prev = merged.get(p.z)
        if prev is None:
            merged[p.z] = p
        elif abs(prev.price - p.price) > DUPLICATE_TOL * max(1.0, abs(p.price)):
            raise StaticDataError(
                f"conflicting prices {prev.price} and {p.price} for the point {p.z}")
    return list(merged.values())


class _OuterProgram:
    """Variables: [p_0 (if a target is present), g_0, g_1, ...]."""

    def __init__(self, points, target_z=None):
        self.points = points
        zs = [np.array(p.z) for p in points]
        prices = [p.price for p in points]
        has_target = target_z is not None
        if has_target:
            zs = [np.asarray(target_z, dtype=float)] + zs
            prices = [None] + prices
        d = zs[0].size
        P = len(zs)
        off = 1 if has_target else 0
        nvar = off + P * d
        col = lambda i: slice(off + i * d, off + (i + 1) * d)  # noqa: E731

        lower = np.full(nvar, -np.inf)
        upper = np.full(nvar, np.inf)
        if has_target:
            lower[0] = 0.0  # positivity of the price
        for i in range(P):
            start = off + i * d
            lower[start:start + d - 1] = 0.0
            lower[start + d - 1] = -1.0
            upper[start + d - 1] = 0.0

        A_eq = np.zeros((P, nvar))
        b_eq = np.zeros(P)
        for i in range(P):
            A_eq[i, col(i)] = zs[i]
            if prices[i] is None:
                A_eq[i, 0] = -1.0
            else:
                b_eq[i] = prices[i]

        rows, rhs = [], []
        for i, j in itertools.permutations(range(P), 2):
            row = np.zeros(nvar)
            row[col(i)] = zs[j] - zs[i]
            r = 0.0
            # p_j - p_i moved to the left where it is a variable
            if prices[j] is None:
                row[0] -= 1.0
            else:
                r += prices[j]
            if prices[i] is None:
                row[0] += 1.0
            else:
                r -= prices[i]
            rows.append(row)
            rhs.append(r)
        self.A_eq, self.b_eq = A_eq, b_eq
        self.A_ub = np.array(rows) if rows else np.zeros((0, nvar))
        self.b_ub = np.array(rhs)
        self.lower, self.upper = lower, upper
        self.nvar = nvar
        self.has_target = has_target

    def program(self, sense: str) -> LinearProgram:
        c = np.zeros(self.nvar)
        if self.has_target:
            c[0] = 1.0
        return LinearProgram(c, self.A_eq, self.b_eq, self.A_ub, self.b_ub,
                             self.lower, self.upper, sense)


@dataclass
class BoundPair:
    lower: float
    upper: float
    lower_result: SolveResult
    upper_result: SolveResult
    witness_lower: Optional[object] = None
    witness_upper: Optional[object] = None
    note: str = ""

    @property
    def status(self) -> str:
        for side, r in (("lower", self.lower_result), ("upper", self.upper_result)):
            if not r.optimal:
                return f"{side}:{r.status}"
        return "Optimal"

    @property
    def optimal(self) -> bool:
        return self.lower_result.optimal and self.upper_result.optimal


def _value(r: SolveResult) -> float:
    return r.objective if r.optimal else np.nan


def outer_bounds(data: MarketData, target: Basket, tolerance: float = DEFAULT_TOL) -> BoundPair:
    """Range of target prices consistent with the convexity/homogeneity relaxation."""
    points = price_points(data, [target.weights])
    prog = _OuterProgram(points, tuple(target.weights) + (target.strike,))
    lo = solve_lp(prog.program("minimize"), tolerance)
    hi = solve_lp(prog.program("maximize"), tolerance)
    return BoundPair(_value(lo), _value(hi), lo, hi)


@dataclass
class ArbitrageCheck:
    consistent: bool
    certificate: Optional[Certificate]
    result: SolveResult
    points: list = field(default_factory=list)

    def __str__(self) -> str:
        if self.consistent:
            return "Consistent"
        if self.result.status is Status.INFEASIBLE:
            if self.certificate is None:
                return f"Arbitrage({self.result.message})"
            return f"Arbitrage(violation={self.certificate.violation:.3g})"
        return f"Undecided({self.result.status})"

    def portfolio(self) -> list:
        """Farkas weights on the homogeneity rows, one per price point.

        These multiply the quoted prices in the contradiction, so they read
        as a candidate buy-and-hold position in the quoted instruments.
        """
        if self.certificate is None:
            return []
        m = len(self.points)
        return [(p, float(v)) for p, v in zip(self.points, self.certificate.vector[:m])]


def check_static_arbitrage(data: MarketData, tolerance: float = DEFAULT_TOL) -> ArbitrageCheck:
    """Feasibility of the outer relaxation on the quotes alone.

    Infeasible means the quotes admit a static arbitrage; feasible means no
    arbitrage is detectable at this relaxation level (the conditions are
    necessary, not sufficient, for more than one asset).
    """
    points = price_points(data)
    if any(p.price < 0 for p in points):
        bad = next(p for p in points if p.price < 0)
        r = SolveResult(Status.INFEASIBLE, np.nan, None, None, np.nan,
                        message=f"negative price at {bad.z}")
        return ArbitrageCheck(False, None, r, points)
    lp = _OuterProgram(points).program("minimize")
    r = solve_lp(lp, tolerance)
    return ArbitrageCheck(r.optimal, r.certificate, r, points)


# -- inner bounds ----------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Lattice with ``bins`` intervals per asset over a box (default the unit box)."""

    bins: int
    box: Optional[tuple] = None  # ((lo_1, hi_1), ...); None means [0, 1]^n
    cap: int = DEFAULT_ATOM_CAP

    def __post_init__(self):
        if self.bins < 1:
            raise ValueError("bins must be positive")

    def bounds(self, n: int):
        box = self.box if self.box is not None else [(0, 1)] * n
        if len(box) != n:
            raise ValueError("box needs one interval per asset")
        return [(_exact(lo), _exact(hi)) for lo, hi in box]

    def size(self, n: int) -> int:
        return (self.bins + 1) ** n

    def atoms_exact(self, n: int) -> list:
        if self.size(n) > self.cap:
            raise ValueError(f"{self.size(n)} atoms exceed the cap of {self.cap}")
        axes = [[lo + (hi - lo) * Fraction(k, self.bins) for k in range(self.bins + 1)]
                for lo, hi in self.bounds(n)]
        return list(itertools.product(*axes))


class InnerProgram:
    """Expectation constraints over lattice atoms, built once per dataset."""

    def __init__(self, data: MarketData, grid: GridSpec):
        self.data = data
        self.atoms_exact = grid.atoms_exact(data.n)
        self.atoms = np.array([[float(v) for v in a] for a in self.atoms_exact])
        rows = [np.ones(len(self.atoms))]
        rhs = [1.0]
        labels = ["total mass"]
        seen_fwd = set()
        for k, inst in enumerate(data.instruments):
            rows.append(self.payoffs(inst.kind, inst.weights, inst.strike))
            rhs.append(inst.price)
            labels.append(f"instruments[{k}]")
            if inst.kind == "forward":
                seen_fwd.add(inst.asset)
        eye = np.eye(data.n)
        for i, f in enumerate(data.forwards):
            if i not in seen_fwd:
                rows.append(self.payoffs("forward", eye[i], 0.0))
                rhs.append(float(f))
                labels.append(f"forwards[{i}]")
        self.A_eq = np.array(rows)
        self.b_eq = np.array(rhs)
        self.labels = labels

    def payoffs(self, kind, weights, strike) -> np.ndarray:
        """Payoff at every atom, evaluated in exact rational arithmetic."""
        w = [_exact(v) for v in weights]
        k = _exact(strike)
        return np.array([float(payoff(kind, w, k, a)) for a in self.atoms_exact])

    def bounds(self, target: Basket, kind: str = "call",
               tolerance: float = DEFAULT_TOL) -> BoundPair:
        c = self.payoffs(kind, target.weights, target.strike)
        res = []
        for sense in ("minimize", "maximize"):
            lp = LinearProgram(c, self.A_eq, self.b_eq, sense=sense)
            res.append(solve_lp(lp, tolerance))
        lo, hi = res
        note = ""
        if lo.status is Status.INFEASIBLE or hi.status is Status.INFEASIBLE:
            note = ("no lattice measure reproduces the quotes; refine the grid "
                    "(more bins) or check the data")
        return BoundPair(_value(lo), _value(hi), lo, hi,
                         self._witness(lo), self._witness(hi), note)

    def _witness(self, r: SolveResult):
        """Atoms and probabilities of an optimal measure (not unique in general)."""
        if not r.optimal:
            return None
        nu = np.clip(r.primal, 0.0, None)
        keep = nu > 1e-9
        return self.atoms[keep], nu[keep] / nu.sum()


def inner_bounds(data: MarketData, target: Basket, grid: GridSpec,
                 tolerance: float = DEFAULT_TOL) -> BoundPair:
    """Range of target prices attained by lattice measures matching every quote."""
    return InnerProgram(data, grid).bounds(target, tolerance=tolerance)
