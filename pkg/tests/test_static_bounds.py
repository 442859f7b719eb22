from fractions import Fraction

import numpy as np
import pytest

from basket_bounds import datasets
from basket_bounds.market import (DiscreteMeasure, Instrument, MarketData, discrete_price,
                                  generate_discrete_dataset)
from basket_bounds.pricing import Basket
from basket_bounds.solver import farkas_violation
from basket_bounds.static_bounds import (GridSpec, InnerProgram, StaticDataError, _OuterProgram,
                                         check_static_arbitrage, inner_bounds, outer_bounds,
                                         price_points)

INDEX = datasets.INDEX_WEIGHTS_2
TOL = 1e-6


@pytest.fixture(scope="module")
def data():
    return datasets.discrete_dataset()


@pytest.fixture(scope="module")
def inner20(data):
    return InnerProgram(data, GridSpec(20))


def butterfly_data(mid_price):
    """One asset with forward 0.5 and calls struck at 0.4, 0.5, 0.6."""
    quotes = [Instrument((1.0,), 0.4, "call", 0.15),
              Instrument((1.0,), 0.5, "call", mid_price),
              Instrument((1.0,), 0.6, "call", 0.05)]
    return MarketData(1, 1.0, [0.5], [Instrument((1.0,), 0.0, "forward", 0.5)] + quotes)


class TestOuter:
    def test_target_equals_quote(self, data):
        for q in data.quotes:
            b = outer_bounds(data, Basket(q.weights, q.strike))
            assert b.lower == pytest.approx(q.price, abs=TOL)
            assert b.upper == pytest.approx(q.price, abs=TOL)

    @pytest.mark.parametrize("K", [0.0, 0.3, 0.95, 1.5, 2.0])
    def test_forwards_only(self, K):
        data = MarketData(2, 1.0, [0.43, 0.52], [])
        b = outer_bounds(data, Basket(INDEX, K))
        assert b.lower == pytest.approx(max(0.95 - K, 0.0), abs=TOL)
        assert b.upper == pytest.approx(0.95, abs=TOL)

    def test_contains_oracle(self, data):
        b = outer_bounds(data, Basket(INDEX, 1.0))
        assert b.optimal
        assert b.lower - TOL <= 0.24 <= b.upper + TOL

    def test_homogeneity(self, data):
        c = 3.7
        scaled = MarketData(2, 1.0, c * data.forwards,
                            [Instrument(i.weights, c * i.strike, i.kind, c * i.price)
                             for i in data.instruments])
        for K in (0.4, 1.0, 1.6):
            b1 = outer_bounds(data, Basket(INDEX, K))
            b2 = outer_bounds(scaled, Basket(INDEX, c * K))
            assert b2.lower == pytest.approx(c * b1.lower, abs=c * TOL)
            assert b2.upper == pytest.approx(c * b1.upper, abs=c * TOL)

    def test_tightens_with_instruments(self):
        prev = (-np.inf, np.inf)
        for k in range(0, 8):
            b = outer_bounds(datasets.discrete_dataset(k), Basket(INDEX, 1.0))
            assert b.lower >= prev[0] - TOL and b.upper <= prev[1] + TOL
            prev = (b.lower, b.upper)

    def test_conflicting_duplicates(self):
        quotes = [Instrument((1.0, 1.0), 1.0, "call", 0.24),
                  Instrument((1.0, 1.0), 1.0, "call", 0.25)]
        with pytest.raises(StaticDataError):
            price_points(MarketData(2, 1.0, [0.43, 0.52], quotes))

    def test_equal_duplicates_merge(self, data):
        doubled = data.with_quotes(data.quotes + data.quotes[:2])
        assert len(price_points(doubled)) == len(price_points(data))


class TestArbitrageCheck:
    def test_generated_data_consistent(self, data):
        check = check_static_arbitrage(data)
        assert check.consistent and str(check) == "Consistent"

    def test_straddle_data_consistent(self):
        assert check_static_arbitrage(datasets.straddle_dataset()).consistent

    def test_quote_above_forward(self, data):
        bad = data.with_quotes([Instrument((1.0, 0.0), 0.2, "call", 0.5)])
        check = check_static_arbitrage(bad)
        assert not check.consistent
        assert str(check).startswith("Arbitrage")

    def test_butterfly(self):
        assert check_static_arbitrage(butterfly_data(0.10)).consistent
        check = check_static_arbitrage(butterfly_data(0.12))
        assert not check.consistent
        assert check.certificate.violation >= 1e-8
        lp = _OuterProgram(check.points).program("minimize")
        assert farkas_violation(lp, check.certificate.vector) >= 1e-8
        assert len(check.portfolio()) == len(check.points)

    def test_worthless_call_by_parity(self):
        # 0.21 - (0.69 - 0.9) rounds to a call price of -5.6e-17
        data = MarketData(1, 1.0, [1.38], [Instrument((1.0,), 0.0, "forward", 1.38),
                                          Instrument((0.5,), 0.9, "straddle", 0.21)])
        assert check_static_arbitrage(data).consistent

    def test_negative_price_point(self):
        # a straddle below K - F converts to a negative call price
        data = MarketData(1, 1.0, [0.5], [Instrument((1.0,), 1.0, "straddle", 0.2)])
        check = check_static_arbitrage(data)
        assert not check.consistent and "negative price" in str(check)


class TestInner:
    def test_contains_oracle(self, data):
        b = inner_bounds(data, Basket(INDEX, 1.0), GridSpec(10))
        assert b.optimal
        assert b.lower - TOL <= 0.24 <= b.upper + TOL

    def test_forward_only_zero_strike(self):
        data = MarketData(1, 1.0, [0.3], [Instrument((1.0,), 0.0, "forward", 0.3)])
        b = inner_bounds(data, Basket((1.0,), 0.0), GridSpec(10))
        assert b.lower == pytest.approx(0.3, abs=TOL)
        assert b.upper == pytest.approx(0.3, abs=TOL)

    def test_witness_reprices_quotes(self, data, inner20):
        b = inner20.bounds(Basket(INDEX, 0.8))
        atoms, probs = b.witness_upper
        assert probs.sum() == pytest.approx(1.0)
        for q in data.quotes:
            assert probs @ np.maximum(atoms @ q.w - q.strike, 0) == pytest.approx(q.price,
                                                                                   abs=1e-6)

    def test_off_grid_data_infeasible(self):
        # mean 0.35 with no mass above 0.35 needs the atom at 0.35 itself
        m = DiscreteMeasure([("0.35",)], [1])
        data = generate_discrete_dataset(m, [((1.0,), 0.35)])
        b = inner_bounds(data, Basket((1.0,), 0.1), GridSpec(10))
        assert not b.optimal and "refine" in b.note

    def test_grid_refinement_widens(self, data):
        target = Basket(INDEX, 1.0)
        prev = (np.inf, -np.inf)
        for bins in (10, 20, 40):
            b = inner_bounds(data, target, GridSpec(bins))
            assert b.lower <= prev[0] + TOL and b.upper >= prev[1] - TOL
            prev = (b.lower, b.upper)

    def test_atom_cap(self):
        with pytest.raises(ValueError, match="cap"):
            GridSpec(50, cap=100).atoms_exact(2)

    def test_exact_kink(self):
        # payoff (x1 + x2 - 1)^+ at the lattice point (0.3, 0.7) is exactly zero
        data = datasets.discrete_dataset(0)
        prog = InnerProgram(data, GridSpec(10))
        pay = prog.payoffs("call", INDEX, 1.0)
        point = (Fraction(3, 10), Fraction(7, 10))
        k = prog.atoms_exact.index(point)
        assert pay[k] == 0.0


@pytest.mark.parametrize("K", [0.0, 0.25, 0.6, 0.95, 1.3, 1.7, 2.0])
def test_nesting(data, inner20, K):
    target = Basket(INDEX, K)
    out = outer_bounds(data, target)
    inn = inner20.bounds(target)
    truth = discrete_price(datasets.discrete_measure(), INDEX, K)
    assert out.lower <= inn.lower + TOL
    assert inn.lower <= truth + TOL and truth <= inn.upper + TOL
    assert inn.upper <= out.upper + TOL


@pytest.mark.parametrize("K", [0.2, 0.35, 0.5, 0.8])
def test_univariate_exactness(K):
    m = DiscreteMeasure([("0.1",), ("0.3",), ("0.6",), ("0.9",)], ["0.25", "0.25", "0.3", "0.2"])
    data = generate_discrete_dataset(m, [((1.0,), k) for k in (0.2, 0.35, 0.5, 0.8)])
    target = Basket((1.0,), K)
    out = outer_bounds(data, target)
    inn = inner_bounds(data, target, GridSpec(20))
    assert out.lower == pytest.approx(inn.lower, abs=TOL)
    assert out.upper == pytest.approx(inn.upper, abs=TOL)
