"""Black-Scholes basket-call approximation and implied-variance inversion.

Everything is quoted in the forward market: zero rates, prices in units of
the payoff currency at maturity. A basket sum_i w_i S_i is approximated by a
single lognormal with forward w'F and total variance

    V_T = Tr(Omega X) T,   Omega = w_hat w_hat',   w_hat_i = w_i F_i / w'F,

where X is the asset covariance matrix (X_ij = sigma_i' sigma_j).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SQRT2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
MAX_DOUBLINGS = 64
PRICE_TOL = 1e-10


class PriceOutOfRange(ValueError):
    """A quote outside the open interval ((F - K)^+, F) has no implied variance."""


def normal_cdf(x: float) -> float:
    """Standard normal CDF; erfc keeps full relative accuracy in the left tail."""
    return 0.5 * math.erfc(-x / SQRT2)


def normal_pdf(x: float) -> float:
    return INV_SQRT_2PI * math.exp(-0.5 * x * x)


def bs_call(forward: float, strike: float, variance: float) -> float:
    """Undiscounted Black call price with total variance ``variance``."""
    if forward <= 0:
        raise ValueError("forward must be positive")
    if strike < 0 or variance < 0:
        raise ValueError("strike and variance must be nonnegative")
    if strike == 0:
        return float(forward)
    if variance == 0:
        return max(forward - strike, 0.0)
    sd = math.sqrt(variance)
    d1 = math.log(forward / strike) / sd + 0.5 * sd
    d2 = d1 - sd
    price = forward * normal_cdf(d1) - strike * normal_cdf(d2)
    return min(max(price, max(forward - strike, 0.0)), float(forward))


def bs_vega_variance(forward: float, strike: float, variance: float) -> float:
    """dC/dV, the sensitivity to total variance."""
    if variance <= 0 or strike <= 0:
        return 0.0
    sd = math.sqrt(variance)
    d1 = math.log(forward / strike) / sd + 0.5 * sd
    return forward * normal_pdf(d1) / (2.0 * sd)


def implied_variance(price: float, forward: float, strike: float) -> float:
    """Total variance V with bs_call(forward, strike, V) = price.

    Bisection on a bracket whose upper end is doubled until it prices above
    the target, followed by a few Newton steps to polish.
    """
    if forward <= 0 or strike <= 0:
        raise ValueError("forward and strike must be positive")
    lower_bound = max(forward - strike, 0.0)
    if not (lower_bound < price < forward):
        raise PriceOutOfRange(
            f"price {price!r} outside the no-arbitrage interval "
            f"({lower_bound!r}, {forward!r})")

    lo, hi = 0.0, 1.0
    for _ in range(MAX_DOUBLINGS):
        if bs_call(forward, strike, hi) >= price:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise PriceOutOfRange(f"price {price!r} too close to the forward {forward!r}")

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if bs_call(forward, strike, mid) < price:
            lo = mid
        else:
            hi = mid
    v = 0.5 * (lo + hi)

    for _ in range(3):
        vega = bs_vega_variance(forward, strike, v)
        if vega <= 0:
            break
        step = (bs_call(forward, strike, v) - price) / vega
        cand = v - step
        if not lo <= cand <= hi:
            break
        v = cand
    return v


@dataclass(frozen=True)
class Basket:
    """European basket call on sum_i weights_i S_i, struck at ``strike``."""

    weights: tuple
    strike: float
    maturity: float = 1.0

    def __post_init__(self):
        w = tuple(float(v) for v in np.ravel(self.weights))
        object.__setattr__(self, "weights", w)
        if not any(w):
            raise ValueError("basket needs at least one nonzero weight")
        if self.strike < 0:
            raise ValueError("strike must be nonnegative")
        if not self.maturity > 0:
            raise ValueError("maturity must be positive")

    @property
    def w(self) -> np.ndarray:
        return np.array(self.weights)


@dataclass(frozen=True)
class CovarianceModel:
    """Forward levels F and covariance matrix X of a multivariate lognormal model."""

    forwards: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        F = np.asarray(self.forwards, dtype=float).reshape(-1)
        X = np.asarray(self.covariance, dtype=float)
        if X.shape != (F.size, F.size):
            raise ValueError("covariance must be n x n for n forwards")
        if np.any(F <= 0):
            raise ValueError("forwards must be strictly positive")
        if not np.allclose(X, X.T, atol=1e-14, rtol=0):
            raise ValueError("covariance must be symmetric")
        if F.size and np.linalg.eigvalsh(X)[0] < -1e-12:
            raise ValueError("covariance must be positive semidefinite")
        object.__setattr__(self, "forwards", F)
        object.__setattr__(self, "covariance", 0.5 * (X + X.T))

    @property
    def n(self) -> int:
        return self.forwards.size


@dataclass(frozen=True)
class EffectiveWeights:
    w_hat: np.ndarray
    omega: np.ndarray


def effective_weights(w, F) -> EffectiveWeights:
    w = np.asarray(w, dtype=float)
    F = np.asarray(F, dtype=float)
    if w.shape != F.shape:
        raise ValueError("weights and forwards differ in length")
    total = float(w @ F)
    if total == 0:
        raise ValueError("basket forward w'F is zero")
    w_hat = w * F / total
    return EffectiveWeights(w_hat, np.outer(w_hat, w_hat))


def _check_positive(basket: Basket):
    if any(v < 0 for v in basket.weights):
        raise ValueError("the lognormal approximation needs nonnegative weights")


def basket_forward(basket: Basket, model: CovarianceModel) -> float:
    return float(basket.w @ model.forwards)


def basket_variance(basket: Basket, model: CovarianceModel) -> float:
    """Total variance Tr(Omega X) T of the approximating lognormal."""
    _check_positive(basket)
    ew = effective_weights(basket.w, model.forwards)
    return max(float(ew.w_hat @ model.covariance @ ew.w_hat) * basket.maturity, 0.0)


def basket_call_price(basket: Basket, model: CovarianceModel) -> float:
    return bs_call(basket_forward(basket, model), basket.strike,
                   basket_variance(basket, model))


def straddle_price_from_call(call: float, basket_forward: float, strike: float) -> float:
    """|S - K| = 2 (S - K)^+ - (S - K), priced term by term."""
    return 2.0 * call - (basket_forward - strike)


def call_price_from_straddle(straddle: float, basket_forward: float, strike: float) -> float:
    return 0.5 * (straddle + basket_forward - strike)
