"""Moment relaxation for straddle price bounds.

The payoff semigroup is generated by

    e_0 = |w_0'x - K_0| (target),  e_1..e_n = x_1..x_n,  e_{n+j} = |w_j'x - K_j| (quotes),

and a measure on the support box is represented by its moments
y_alpha = E[e^alpha] for all monomials of degree <= 2N. Necessary
conditions on y are PSD moment and localizing matrices; prices of the
generators pin the degree-one entries. Minimizing and maximizing y_{e_0}
bounds the target price from outside.

Generators are rescaled internally by their supremum over the box, so every
scaled generator lives in [0, 1]; this keeps the SDP data O(1) without
changing the feasible set.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .market import MarketData
from .pricing import straddle_price_from_call
from .solver import (DEFAULT_TOL, LMI, SemidefiniteProgram, SolveResult, Status,
                     solve_sdp)


# -- monomial bookkeeping ----------------------------------------------------------

class MomentBasis:
    """Monomials of degree <= ``degree`` in graded lexicographic order.

    Monomials are exponent tuples; the constant monomial comes first.
    """

    def __init__(self, generator_count: int, degree: int):
        if generator_count < 1 or degree < 0:
            raise ValueError("need at least one generator and a nonnegative degree")
        self.generator_count = generator_count
        self.degree = degree
        exps = []
        for d in range(degree + 1):
            for combo in itertools.combinations_with_replacement(range(generator_count), d):
                e = [0] * generator_count
                for g in combo:
                    e[g] += 1
                exps.append(tuple(e))
        self.exponents = exps
        self._index = {e: i for i, e in enumerate(exps)}

    def __len__(self) -> int:
        return len(self.exponents)

    def index(self, exponent) -> int:
        return self._index[tuple(exponent)]

    def __contains__(self, exponent) -> bool:
        return tuple(exponent) in self._index

    def size(self, degree: int) -> int:
        """Number of monomials of degree <= ``degree``."""
        return math.comb(self.generator_count + degree, degree)

    def unit(self, g: int) -> tuple:
        e = [0] * self.generator_count
        e[g] = 1
        return tuple(e)


def enumerate_monomials(generator_count: int, degree: int) -> MomentBasis:
    return MomentBasis(generator_count, degree)


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _shift(poly: dict, m) -> dict:
    """poly * monomial m."""
    return {_add(e, m): c for e, c in poly.items()}


def _combine(a: dict, b: dict, sign: float) -> dict:
    """a + sign * b."""
    out = dict(a)
    for e, c in b.items():
        out[e] = out.get(e, 0.0) + sign * c
    return out


def _degree(poly: dict) -> int:
    return max((sum(e) for e in poly), default=0)


def localizing_matrix(y, basis: MomentBasis, g: dict, order: int) -> np.ndarray:
    """M_order(g y)_{ij} = sum_alpha g_alpha y[beta_i + beta_j + alpha].

    ``g`` maps exponent tuples to coefficients.
    """
    if 2 * order + _degree(g) > basis.degree:
        raise ValueError("localizing matrix needs moments beyond the basis degree")
    y = np.asarray(y, dtype=float)
    s = basis.size(order)
    M = np.zeros((s, s))
    for i in range(s):
        for j in range(i, s):
            bij = _add(basis.exponents[i], basis.exponents[j])
            v = sum(c * y[basis.index(_add(bij, a))] for a, c in g.items())
            M[i, j] = M[j, i] = v
    return M


def moment_matrix(y, basis: MomentBasis, order: int) -> np.ndarray:
    return localizing_matrix(y, basis, {(0,) * basis.generator_count: 1.0}, order)


def _lmi_coefficients(basis: MomentBasis, g: dict, order: int) -> np.ndarray:
    """Coefficient tensor F with M_order(g y) = sum_t y_t F[t]."""
    s = basis.size(order)
    F = np.zeros((len(basis), s, s))
    for i in range(s):
        for j in range(i, s):
            bij = _add(basis.exponents[i], basis.exponents[j])
            for a, c in g.items():
                t = basis.index(_add(bij, a))
                F[t, i, j] += c
                if i != j:
                    F[t, j, i] += c
    return F


# -- generators ------------------------------------------------------------------

@dataclass
class Generators:
    """Payoff generators and their suprema over the box [0, B]^n."""

    n: int
    box: float
    straddles: list  # [(weights, strike)], target first

    @property
    def count(self) -> int:
        return len(self.straddles) + self.n

    def generator_index(self, k: int) -> int:
        """Position of straddle k (0 = target) in the generator list."""
        return 0 if k == 0 else self.n + k

    def straddle_items(self):
        """(generator index, weights, strike) for every straddle generator."""
        for k, (w, K) in enumerate(self.straddles):
            yield self.generator_index(k), np.asarray(w, dtype=float), float(K)

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.empty(self.count)
        for g, w, K in self.straddle_items():
            out[g] = abs(w @ x - K)
        out[1:self.n + 1] = x
        return out

    def suprema(self) -> np.ndarray:
        """Sup of each generator over the box; convex payoffs peak at a corner."""
        corners = np.array(list(itertools.product((0.0, self.box), repeat=self.n)))
        vals = np.array([self.evaluate(c) for c in corners])
        sup = vals.max(axis=0)
        return np.where(sup > 0, sup, 1.0)


def moment_vector(atoms, probabilities, gens: Generators, basis: MomentBasis,
                  scale: Optional[np.ndarray] = None) -> np.ndarray:
    """Moments E[e^alpha] of a discrete measure (of scaled generators if ``scale``)."""
    E = np.array([gens.evaluate(a) for a in atoms])
    if scale is not None:
        E = E / scale
    expo = np.array(basis.exponents)
    vals = np.prod(E[:, None, :] ** expo[None, :, :], axis=2)
    return np.asarray(probabilities, dtype=float) @ vals


# -- the relaxation ----------------------------------------------------------------

@dataclass
class MomentBoundResult:
    lower: float
    upper: float
    lower_result: SolveResult
    upper_result: SolveResult
    degree: int
    last_lower: float = np.nan  # last iterate when the solver did not converge
    last_upper: float = np.nan
    notes: list = field(default_factory=list)

    @property
    def status(self) -> str:
        for side, r in (("lower", self.lower_result), ("upper", self.upper_result)):
            if not r.optimal:
                return f"{side}:{r.status}"
        return "Optimal"

    @property
    def optimal(self) -> bool:
        return self.lower_result.optimal and self.upper_result.optimal


class MomentRelaxation:
    """Degree-N relaxation for one target straddle; solve with :meth:`bounds`.

    ``localize`` selects the generators with localizing constraints: "all"
    (every generator) or "assets" (x_1..x_n only). ``relations`` adds the
    identities e_k^2 = (w_k'x - K_k)^2 and the dominance e_k >= |w_k'x - K_k|
    for every straddle generator; without them the semigroup is free.
    """

    def __init__(self, data: MarketData, target_weights, target_strike: float,
                 degree: int = 1, box: float = 10.0, beta: Optional[float] = None,
                 localize: str = "all", relations: bool = True):
        if degree < 1:
            raise ValueError("degree must be at least 1")
        if localize not in ("all", "assets"):
            raise ValueError("localize must be 'all' or 'assets'")
        if data.forwards.size != data.n:
            raise ValueError("moment bounds need the asset forwards")
        n = data.n
        self.n, self.N, self.notes = n, degree, []
        straddles, prices = [(tuple(target_weights), float(target_strike))], []
        for inst in data.quotes:
            fwd = float(inst.w @ data.forwards)
            p = inst.price
            if inst.kind == "call":
                p = straddle_price_from_call(p, fwd, inst.strike)
            straddles.append((inst.weights, inst.strike))
            prices.append(p)
        self.gens = Generators(n, float(box), straddles)
        G = self.gens.count
        self.basis = MomentBasis(G, 2 * degree)
        self.scale = self.gens.suprema()
        sup_sum = float(self.scale.sum())
        self.beta = sup_sum if beta is None else float(beta)
        if self.beta < sup_sum * (1 - 1e-12):
            self.notes.append(f"beta {self.beta} is below the sum of generator suprema "
                              f"{sup_sum}; the bound may exclude valid measures")
        zero = (0,) * G
        B = self.basis

        # equalities E y = f on the moment vector (scaled generators)
        rows, rhs = [], []

        def pin(poly: dict, value: float):
            r = np.zeros(len(B))
            for e, c in poly.items():
                r[B.index(e)] += c
            rows.append(r)
            rhs.append(value)

        pin({zero: 1.0}, 1.0)
        for i in range(n):
            pin({B.unit(1 + i): 1.0}, data.forwards[i] / self.scale[1 + i])
        for k, p in enumerate(prices, start=1):
            g = self.gens.generator_index(k)
            pin({B.unit(g): 1.0}, p / self.scale[g])

        # Known kernel vectors of the moment matrix: polynomials p with
        # E[p m] = 0 imposed for every m in reach. Restricting each LMI to
        # their orthogonal complement restores strict feasibility.
        moment_kernel = []

        def monomials(max_deg):
            return [m for m in B.exponents if sum(m) <= max_deg]

        # a quote identical to the target is the same generator
        for k, s in enumerate(straddles[1:], start=1):
            if s == straddles[0]:
                g = self.gens.generator_index(k)
                same = {B.unit(0): self.scale[0], B.unit(g): -self.scale[g]}
                for m in monomials(2 * degree - 1):
                    pin(_shift(same, m), 0.0)
                moment_kernel += [_shift(same, m) for m in monomials(degree - 1)]

        # localizing polynomials (scaled generators) with their kernel polynomials
        locs = []
        gen_ids = range(G) if localize == "all" else range(1, n + 1)
        for g in gen_ids:
            locs.append(({B.unit(g): 1.0}, []))
        beta_poly = {zero: 1.0}
        for g in range(G):
            beta_poly[B.unit(g)] = -self.scale[g] / self.beta
        locs.append((beta_poly, []))

        if relations:
            for g, w, K in self.gens.straddle_items():
                lin = self._linear(w, K, g)
                minus = _combine({B.unit(g): 1.0}, lin, -1.0)  # e - q
                plus = _combine({B.unit(g): 1.0}, lin, 1.0)  # e + q
                order = degree - 1
                locs.append((minus, [_shift(plus, m) for m in monomials(order - 1)]))
                locs.append((plus, [_shift(minus, m) for m in monomials(order - 1)]))
                sq = {_add(B.unit(g), B.unit(g)): 1.0}
                for (e1, c1), (e2, c2) in itertools.product(lin.items(), repeat=2):
                    e = _add(e1, e2)
                    sq[e] = sq.get(e, 0.0) - c1 * c2
                for m in monomials(2 * degree - 2):
                    pin(_shift(sq, m), 0.0)
                moment_kernel += [_shift(sq, m) for m in monomials(degree - 2)]

        lmis = [self._lmi({zero: 1.0}, degree, moment_kernel)]
        for poly, kernel in locs:
            order = degree - math.ceil(_degree(poly) / 2)
            lmis.append(self._lmi(poly, order, kernel))
        self.lmis = lmis
        self.E = np.array(rows)
        self.f = np.array(rhs)
        self.target_index = B.index(B.unit(0))
        self.prices = prices

    def _lmi(self, poly: dict, order: int, kernel: list) -> LMI:
        F = _lmi_coefficients(self.basis, poly, order)
        if kernel:
            V = np.zeros((F.shape[1], len(kernel)))
            for col, kp in enumerate(kernel):
                for e, c in kp.items():
                    V[self.basis.index(e), col] += c
            U = scipy.linalg.null_space(V.T)
            F = U.T @ F @ U
        return LMI(np.zeros(F.shape[1:]), F)

    def _linear(self, w, K, g: int) -> dict:
        """(w'x - K) / sup_g as a polynomial in the scaled asset generators."""
        B = self.basis
        s = self.scale[g]
        lin = {(0,) * B.generator_count: -K / s}
        for i in range(self.n):
            if w[i]:
                lin[B.unit(1 + i)] = w[i] * self.scale[1 + i] / s
        return lin

    def program(self, sense: str) -> SemidefiniteProgram:
        c = np.zeros(len(self.basis))
        c[self.target_index] = self.scale[0]
        return SemidefiniteProgram(lmis=self.lmis, scalar_objective=c,
                                   scalar_equalities=(self.E, self.f), sense=sense)

    def bounds(self, tolerance: float = DEFAULT_TOL) -> MomentBoundResult:
        lo = solve_sdp(self.program("minimize"), tolerance)
        hi = solve_sdp(self.program("maximize"), tolerance)
        res = MomentBoundResult(lo.objective if lo.optimal else np.nan,
                                hi.objective if hi.optimal else np.nan,
                                lo, hi, self.N, notes=list(self.notes))
        if not lo.optimal:
            res.last_lower = lo.objective
            res.notes.append("lower: " + lo.diagnostics())
        if not hi.optimal:
            res.last_upper = hi.objective
            res.notes.append("upper: " + hi.diagnostics())
        return res

    def scaled_moments(self, atoms, probabilities) -> np.ndarray:
        """Moment vector of a measure in this relaxation's scaled coordinates."""
        return moment_vector(atoms, probabilities, self.gens, self.basis, self.scale)


def moment_bound(data: MarketData, target_weights, target_strike: float, degree: int = 1,
                 box: float = 10.0, beta: Optional[float] = None, localize: str = "all",
                 relations: bool = True, tolerance: float = DEFAULT_TOL) -> MomentBoundResult:
    """Bounds on E|w_0'x - K_0| over measures on [0, box]^n matching the quotes."""
    relax = MomentRelaxation(data, target_weights, target_strike, degree, box, beta,
                             localize, relations)
    return relax.bounds(tolerance)
