"""Reference datasets for the four numerical experiments."""

from __future__ import annotations

import numpy as np

from .market import DiscreteMeasure, MarketData, generate_discrete_dataset, generate_lognormal_dataset
from .pricing import CovarianceModel

# Two assets on the unit box, six atoms.
DISCRETE_ATOMS = ["0,0", "0,.8", ".8,.3", ".6,.6", ".1,.4", "1,1"]
DISCRETE_PROBS = [".2", ".2", ".2", ".1", ".1", ".2"]

# Quoted calls (w1, w2, K) on the six-atom model, in quoting order.
DISCRETE_CALLS = [
    ((0.2, 1.0), 0.1),
    ((0.5, 0.8), 0.8),
    ((0.5, 0.3), 0.4),
    ((1.0, 0.3), 0.5),
    ((1.0, 0.5), 0.5),
    ((1.0, 0.4), 1.0),
    ((1.0, 0.6), 1.2),
]
INDEX_WEIGHTS_2 = (1.0, 1.0)

# Five-asset lognormal example.
LOGNORMAL_FORWARDS = np.array([0.03, 0.03, 0.05, 0.07, 0.07])
LOGNORMAL_COVARIANCE = np.full((5, 5), 0.04) + 0.02 * np.eye(5)
LOGNORMAL_BASKETS = np.array([
    [0.33, 0.33, 0.33, 0.00, 0.00],
    [0.00, 0.00, 0.33, 0.33, 0.33],
    [0.40, 0.20, 0.20, 0.20, 0.00],
])
INDEX_WEIGHTS_5 = np.full(5, 0.2)
LOGNORMAL_MATURITY = 1.0

# Two assets, five atoms, straddle quotes.
STRADDLE_ATOMS = ["0,0", "0,3", "3,0", "1,2", "5,4"]
STRADDLE_PROBS = [".2", ".2", ".2", ".3", ".1"]
STRADDLE_QUOTES = [
    ((1.0, 0.0), 0.9),
    ((1.0, 0.0), 1.0),
    ((0.0, 1.0), 1.9),
    ((0.0, 1.0), 2.0),
    ((0.0, 1.0), 2.1),
]
STRADDLE_BOX = 10.0


def _measure(atoms, probs) -> DiscreteMeasure:
    from decimal import Decimal
    return DiscreteMeasure([[Decimal(v) for v in a.split(",")] for a in atoms],
                           [Decimal(p) for p in probs])


def discrete_measure() -> DiscreteMeasure:
    return _measure(DISCRETE_ATOMS, DISCRETE_PROBS)


def straddle_measure() -> DiscreteMeasure:
    return _measure(STRADDLE_ATOMS, STRADDLE_PROBS)


def discrete_dataset(k: int | None = None) -> MarketData:
    """Forwards plus the first ``k`` quoted calls (all seven by default)."""
    calls = DISCRETE_CALLS if k is None else DISCRETE_CALLS[:k]
    return generate_discrete_dataset(discrete_measure(), calls)


def lognormal_model() -> CovarianceModel:
    return CovarianceModel(LOGNORMAL_FORWARDS, LOGNORMAL_COVARIANCE)


def lognormal_dataset() -> MarketData:
    """At-the-money single-asset calls followed by the three basket calls."""
    baskets = list(np.eye(5)) + list(LOGNORMAL_BASKETS)
    return generate_lognormal_dataset(lognormal_model(), LOGNORMAL_MATURITY, baskets)


def straddle_dataset() -> MarketData:
    specs = [(w, k, "straddle") for w, k in STRADDLE_QUOTES]
    return generate_discrete_dataset(straddle_measure(), specs)
