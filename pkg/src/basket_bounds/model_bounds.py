"""Price bounds attainable by a multivariate lognormal model.

Every quoted basket call pins one linear functional of the covariance
matrix, Tr(Omega_i X) = V_i / T, through its implied variance. The target's
variance Tr(Omega_0 X) T is then minimized and maximized over all PSD
matrices X matching those functionals, and mapped back to prices through
the (monotone) Black formula.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .market import MarketData
from .pricing import (Basket, PriceOutOfRange, bs_call, call_price_from_straddle,
                      effective_weights, implied_variance)
from .solver import DEFAULT_TOL, SemidefiniteProgram, SolveResult, Status, solve_sdp


@dataclass(frozen=True)
class VarianceConstraint:
    omega: np.ndarray
    variance: float  # total variance V_T
    index: int  # position of the quote in data.instruments


@dataclass
class ModelBoundsResult:
    variance_lower: float
    variance_upper: float
    price_lower: float
    price_upper: float
    witness_lower: Optional[np.ndarray]
    witness_upper: Optional[np.ndarray]
    status_lower: Status
    status_upper: Status
    lower_result: Optional[SolveResult] = None
    upper_result: Optional[SolveResult] = None

    @property
    def status(self) -> str:
        """Row status: Optimal, or the first non-optimal status (Unbounded max is fine)."""
        for s, side in ((self.status_lower, "lower"), (self.status_upper, "upper")):
            if s is Status.UNBOUNDED and side == "upper":
                continue
            if s is not Status.OPTIMAL:
                return f"{side}:{s}"
        return "Optimal"


def build_variance_constraints(data: MarketData) -> list:
    """One constraint per quoted basket call or straddle (straddles via parity)."""
    if data.forwards.size != data.n:
        raise ValueError("model bounds need the asset forwards")
    out = []
    for k, inst in enumerate(data.instruments):
        if inst.kind == "forward":
            continue
        w = inst.w
        if np.any(w < 0) or not np.any(w):
            raise ValueError(f"instruments[{k}]: model bounds need nonnegative, nonzero weights")
        fwd = float(w @ data.forwards)
        call = inst.price
        if inst.kind == "straddle":
            call = call_price_from_straddle(inst.price, fwd, inst.strike)
        try:
            v = implied_variance(call, fwd, inst.strike)
        except PriceOutOfRange as exc:
            raise PriceOutOfRange(f"instruments[{k}] ({inst.kind}, strike "
                                  f"{inst.strike}): {exc}") from exc
        except ValueError as exc:
            raise PriceOutOfRange(f"instruments[{k}]: {exc}") from exc
        out.append(VarianceConstraint(effective_weights(w, data.forwards).omega, v, k))
    return out


def variance_program(constraints, omega0, maturity: float, sense: str) -> SemidefiniteProgram:
    n = omega0.shape[0]
    eqs = [(c.omega, c.variance / maturity) for c in constraints]
    return SemidefiniteProgram(dim=n, objective=omega0, equalities=eqs, sense=sense)


def constraint_residual(constraints, X, maturity: float) -> float:
    """Largest |Tr(Omega_i X) - V_i / T| over the constraints."""
    if not constraints:
        return 0.0
    return max(abs(float(np.sum(c.omega * X)) - c.variance / maturity) for c in constraints)


def model_variance_bounds(data: MarketData, weights, tolerance: float = DEFAULT_TOL,
                          constraints=None):
    """Solve the min and max programs for the target weights.

    Returns (lower SolveResult, upper SolveResult); the objective values are
    Tr(Omega_0 X), i.e. variance per unit maturity.
    """
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or not np.any(w):
        raise ValueError("target needs nonnegative, nonzero weights")
    if constraints is None:
        constraints = build_variance_constraints(data)
    omega0 = effective_weights(w, data.forwards).omega
    lo = solve_sdp(variance_program(constraints, omega0, data.maturity, "minimize"), tolerance)
    hi = solve_sdp(variance_program(constraints, omega0, data.maturity, "maximize"), tolerance)
    return lo, hi


def prices_from_variance(lo: SolveResult, hi: SolveResult, forward: float, strike: float,
                         maturity: float) -> ModelBoundsResult:
    v_lo = max(lo.objective, 0.0) * maturity if lo.optimal else np.nan
    if hi.optimal:
        v_hi = max(hi.objective, 0.0) * maturity
    elif hi.status is Status.UNBOUNDED:
        v_hi = np.inf
    else:
        v_hi = np.nan
    p_lo = bs_call(forward, strike, v_lo) if np.isfinite(v_lo) else np.nan
    if np.isfinite(v_hi):
        p_hi = bs_call(forward, strike, v_hi)
    else:
        # the Black price tends to the forward as the variance grows
        p_hi = forward if hi.status is Status.UNBOUNDED else np.nan
    return ModelBoundsResult(
        v_lo, v_hi, p_lo, p_hi,
        lo.primal if lo.optimal else None, hi.primal if hi.optimal else None,
        lo.status, hi.status, lo, hi)


def model_price_bounds(data: MarketData, target: Basket,
                       tolerance: float = DEFAULT_TOL) -> ModelBoundsResult:
    """Lowest and highest target price over lognormal models matching the quotes."""
    lo, hi = model_variance_bounds(data, target.w, tolerance)
    forward = float(target.w @ data.forwards)
    return prices_from_variance(lo, hi, forward, target.strike, data.maturity)
