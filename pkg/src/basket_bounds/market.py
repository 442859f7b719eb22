"""Market data, ground-truth pricing models and file I/O.

Two data-generating models are provided: finite discrete measures (priced
exactly, in rational arithmetic) and the multivariate lognormal model
(priced with the basket approximation, checked by Monte Carlo).
"""

from __future__ import annotations

import csv
import json
import logging
import math
import warnings
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Sequence

import jsonschema
import numpy as np

from .pricing import Basket, CovarianceModel, basket_call_price

log = logging.getLogger(__name__)

KINDS = ("call", "straddle", "forward")
MC_BATCH = 200_000

MARKET_SCHEMA = {
    "type": "object",
    "required": ["n", "maturity", "forwards", "instruments"],
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "maturity": {"type": "number", "exclusiveMinimum": 0},
        "forwards": {"type": "array", "items": {"type": "number"}},
        "instruments": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["weights", "strike", "kind", "price"],
                "properties": {
                    "weights": {"type": "array", "items": {"type": "number"}},
                    "strike": {"type": "number"},
                    "kind": {"enum": list(KINDS)},
                    "price": {"type": "number", "minimum": 0},
                },
            },
        },
    },
}

RESULT_COLUMNS = ("strike", "outer_lower", "inner_lower", "model_lower",
                  "model_upper", "inner_upper", "outer_upper")


def _exact(v) -> Fraction:
    """Rational value of a decimal literal: 0.1 becomes 1/10, not the binary float."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, Decimal)):
        return Fraction(v)
    return Fraction(Decimal(repr(float(v))))


def payoff(kind: str, weights, strike, x):
    """Payoff of one instrument at the point x (works for floats and Fractions)."""
    s = sum(w * xi for w, xi in zip(weights, x))
    if kind == "call":
        return max(s - strike, 0)
    if kind == "straddle":
        return abs(s - strike)
    if kind == "forward":
        return s
    raise ValueError(f"unknown instrument kind {kind!r}")


@dataclass(frozen=True)
class Instrument:
    weights: tuple
    strike: float
    kind: str
    price: float

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "strike", float(self.strike))
        object.__setattr__(self, "price", float(self.price))
        if self.kind not in KINDS:
            raise ValueError(f"unknown instrument kind {self.kind!r}")
        if self.price < 0:
            raise ValueError("prices must be nonnegative")
        if self.kind == "forward":
            w = np.array(self.weights)
            if self.strike != 0 or np.count_nonzero(w) != 1 or w.max() != 1.0:
                raise ValueError("forward instruments need strike 0 and a unit weight vector")

    @property
    def w(self) -> np.ndarray:
        return np.array(self.weights)

    @property
    def asset(self) -> int:
        """Index of the underlying asset (forwards only)."""
        return int(np.argmax(self.weights))


@dataclass
class MarketData:
    n: int
    maturity: float
    forwards: np.ndarray
    instruments: list = field(default_factory=list)

    def __post_init__(self):
        self.forwards = np.asarray(self.forwards, dtype=float).reshape(-1)
        self.instruments = list(self.instruments)
        if self.forwards.size not in (0, self.n):
            raise ValueError("forwards must list one value per asset")
        for k, inst in enumerate(self.instruments):
            if len(inst.weights) != self.n:
                raise ValueError(f"instruments[{k}] has {len(inst.weights)} weights, "
                                 f"expected {self.n}")

    @property
    def quotes(self) -> list:
        """Option quotes (everything except forward contracts)."""
        return [i for i in self.instruments if i.kind != "forward"]

    @property
    def forward_instruments(self) -> list:
        return [i for i in self.instruments if i.kind == "forward"]

    def with_quotes(self, quotes: Sequence[Instrument]) -> "MarketData":
        """Same forwards, different option quotes."""
        return MarketData(self.n, self.maturity, self.forwards,
                          self.forward_instruments + list(quotes))

    def arbitrage_warnings(self) -> list:
        """Quotes outside the trivial call/straddle bounds implied by the forwards."""
        out = []
        if self.forwards.size != self.n:
            return out
        for k, inst in enumerate(self.instruments):
            if inst.kind == "forward":
                if abs(inst.price - self.forwards[inst.asset]) > 1e-12 * max(1.0, inst.price):
                    out.append(f"instruments[{k}]: forward price differs from forwards list")
                continue
            if np.any(inst.w < 0):
                continue
            f = float(inst.w @ self.forwards)
            if inst.kind == "call":
                lo, hi = max(f - inst.strike, 0.0), f
            else:
                lo, hi = abs(f - inst.strike), f + inst.strike
            tol = 1e-12 * max(1.0, hi)
            if not lo - tol <= inst.price <= hi + tol:
                out.append(f"instruments[{k}]: {inst.kind} price {inst.price} outside "
                           f"[{lo}, {hi}]")
        return out


# -- discrete measures ---------------------------------------------------------

class DiscreteMeasure:
    """Finitely many atoms in R^n_+ with probabilities, kept as exact rationals."""

    def __init__(self, atoms, probabilities):
        self.exact_atoms = [tuple(_exact(v) for v in a) for a in atoms]
        self.exact_probabilities = [_exact(p) for p in probabilities]
        if len(self.exact_atoms) != len(self.exact_probabilities):
            raise ValueError("need one probability per atom")
        if not self.exact_atoms:
            raise ValueError("a measure needs at least one atom")
        n = len(self.exact_atoms[0])
        if any(len(a) != n for a in self.exact_atoms):
            raise ValueError("atoms must share a dimension")
        if any(p < 0 for p in self.exact_probabilities):
            raise ValueError("probabilities must be nonnegative")
        if abs(float(sum(self.exact_probabilities)) - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to one")
        if any(v < 0 for a in self.exact_atoms for v in a):
            raise ValueError("atoms must be componentwise nonnegative")
        self.n = n

    @property
    def atoms(self) -> np.ndarray:
        return np.array([[float(v) for v in a] for a in self.exact_atoms])

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([float(p) for p in self.exact_probabilities])

    def expectation_exact(self, kind, weights, strike) -> Fraction:
        if len(weights) != self.n:
            raise ValueError(f"weights have length {len(weights)}, measure has {self.n} assets")
        w = [_exact(v) for v in weights]
        k = _exact(strike)
        return sum((p * payoff(kind, w, k, a)
                    for a, p in zip(self.exact_atoms, self.exact_probabilities)), Fraction(0))

    def forwards(self) -> np.ndarray:
        eye = np.eye(self.n)
        return np.array([discrete_price(self, eye[i], 0.0, "forward") for i in range(self.n)])


def discrete_price(measure: DiscreteMeasure, weights, strike, kind: str = "call") -> float:
    """Exact expectation of the payoff under the measure, rounded once to float."""
    return float(measure.expectation_exact(kind, list(weights), strike))


def _forward_instruments(forwards) -> list:
    n = len(forwards)
    eye = np.eye(n)
    return [Instrument(eye[i], 0.0, "forward", f) for i, f in enumerate(forwards)]


def generate_discrete_dataset(measure: DiscreteMeasure, specs: Iterable,
                              maturity: float = 1.0) -> MarketData:
    """Forwards plus one quote per spec ``(weights, strike[, kind])``."""
    fwd = measure.forwards()
    instruments = _forward_instruments(fwd)
    for spec in specs:
        weights, strike, *rest = spec
        kind = rest[0] if rest else "call"
        instruments.append(Instrument(weights, strike, kind,
                                      discrete_price(measure, weights, strike, kind)))
    return MarketData(measure.n, maturity, fwd, instruments)


# -- lognormal model -----------------------------------------------------------

def generate_lognormal_dataset(model: CovarianceModel, maturity: float, baskets,
                               strikes=None) -> MarketData:
    """Forwards plus basket-call quotes under the lognormal approximation.

    ``strikes=None`` quotes every basket at the money (K = w'F).
    """
    baskets = [np.asarray(w, dtype=float) for w in baskets]
    if strikes is None:
        strikes = [float(w @ model.forwards) for w in baskets]
    instruments = _forward_instruments(model.forwards)
    for w, k in zip(baskets, strikes):
        if np.any(w < 0):
            raise ValueError("lognormal datasets need nonnegative weights")
        price = basket_call_price(Basket(w, k, maturity), model)
        instruments.append(Instrument(w, k, "call", price))
    return MarketData(model.n, maturity, model.forwards, instruments)


def _factor(covariance: np.ndarray, maturity: float) -> np.ndarray:
    """A matrix L with L L' = X T, clipping tiny negative eigenvalues."""
    w, q = np.linalg.eigh(covariance * maturity)
    if w.size and w[0] < -1e-8 * max(1.0, maturity):
        raise ValueError("covariance is not positive semidefinite")
    return q * np.sqrt(np.clip(w, 0.0, None))


def monte_carlo_basket_price(model: CovarianceModel, maturity: float, weights, strike: float,
                             samples: int = 1_000_000, seed: int = 0):
    """Plain Monte Carlo price of (w'S_T - K)^+ under exact lognormal dynamics.

    Returns (estimate, standard error). Batches draw from child seeds of
    ``seed`` so results do not depend on the batch size of the caller.
    """
    if samples < 1000:
        raise ValueError("use at least 1000 samples")
    w = np.asarray(weights, dtype=float)
    L = _factor(model.covariance, maturity)
    drift = -0.5 * np.einsum("ij,ij->i", L, L)
    F = model.forwards
    if not np.any(L):
        return max(float(w @ F) - strike, 0.0), 0.0
    nbatch = math.ceil(samples / MC_BATCH)
    children = np.random.SeedSequence(seed).spawn(nbatch)
    total = total_sq = 0.0
    left = samples
    for child in children:
        size = min(MC_BATCH, left)
        left -= size
        z = np.random.default_rng(child).standard_normal((size, model.n))
        S = F * np.exp(z @ L.T + drift)
        pay = np.maximum(S @ w - strike, 0.0)
        total += pay.sum()
        total_sq += pay @ pay
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    return float(mean), float(math.sqrt(var / samples))


# -- files ---------------------------------------------------------------------

class MarketDataError(ValueError):
    pass


def market_data_to_dict(data: MarketData) -> dict:
    return {
        "n": data.n,
        "maturity": data.maturity,
        "forwards": [float(f) for f in data.forwards],
        "instruments": [{"weights": list(i.weights), "strike": i.strike,
                         "kind": i.kind, "price": i.price} for i in data.instruments],
    }


def market_data_from_dict(raw: dict) -> MarketData:
    errors = sorted(jsonschema.Draft7Validator(MARKET_SCHEMA).iter_errors(raw),
                    key=lambda e: list(e.absolute_path))
    if errors:
        msgs = ["/".join(str(p) for p in e.absolute_path) + ": " + e.message for e in errors]
        raise MarketDataError("invalid market data:\n  " + "\n  ".join(msgs))
    try:
        instruments = [Instrument(tuple(i["weights"]), i["strike"], i["kind"], i["price"])
                       for i in raw["instruments"]]
        data = MarketData(raw["n"], raw["maturity"], raw["forwards"], instruments)
    except ValueError as exc:
        raise MarketDataError(str(exc)) from exc
    for msg in data.arbitrage_warnings():
        warnings.warn(msg, stacklevel=2)
    return data


def load_market_data(path) -> MarketData:
    with open(path) as fh:
        return market_data_from_dict(json.load(fh))


def save_market_data(path, data: MarketData) -> None:
    with open(path, "w") as fh:
        json.dump(market_data_to_dict(data), fh, indent=2)
        fh.write("\n")


def _cell(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def write_results(fh, rows: Sequence[dict], columns: Sequence[str] = RESULT_COLUMNS) -> None:
    """Write result rows as CSV to an open text stream; missing columns stay empty."""
    columns = list(columns)
    if any("status" in r for r in rows) and "status" not in columns:
        columns.append("status")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_cell(r.get(c)) for c in columns])


def save_results(path, rows: Sequence[dict], columns: Sequence[str] = RESULT_COLUMNS) -> None:
    with open(path, "w", newline="") as fh:
        write_results(fh, rows, columns)
