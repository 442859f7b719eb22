import numpy as np
import pytest

from basket_bounds import datasets
from basket_bounds.market import Instrument, MarketData, generate_lognormal_dataset
from basket_bounds.model_bounds import (build_variance_constraints, constraint_residual,
                                        model_price_bounds, model_variance_bounds,
                                        variance_program)
from basket_bounds.pricing import (Basket, CovarianceModel, PriceOutOfRange, basket_call_price,
                                   bs_call, effective_weights, straddle_price_from_call)
from basket_bounds.solver import Status, matrix_farkas_violation

F5 = datasets.LOGNORMAL_FORWARDS
X5 = datasets.LOGNORMAL_COVARIANCE
W_INDEX = datasets.INDEX_WEIGHTS_5


@pytest.fixture(scope="module")
def index_data():
    return datasets.lognormal_dataset()


@pytest.fixture(scope="module")
def index_bounds(index_data):
    atm = float(W_INDEX @ F5)
    return model_price_bounds(index_data, Basket(tuple(W_INDEX), atm))


class TestConstraints:
    def test_inversion_roundtrip(self):
        data = MarketData(1, 1.0, [1.0], [Instrument((1.0,), 1.1, "call", bs_call(1.0, 1.1, 0.07))])
        (c,) = build_variance_constraints(data)
        assert c.variance == pytest.approx(0.07, abs=1e-10)
        np.testing.assert_array_equal(c.omega, [[1.0]])

    def test_quote_at_intrinsic(self):
        data = MarketData(2, 1.0, [1.0, 1.0], [Instrument((1.0, 0.0), 0.5, "call", 0.5)])
        with pytest.raises(PriceOutOfRange, match=r"instruments\[0\]"):
            build_variance_constraints(data)

    def test_generated_variances(self, index_data):
        for c in build_variance_constraints(index_data):
            w = index_data.instruments[c.index].w
            w_hat = effective_weights(w, F5).w_hat
            assert c.variance == pytest.approx(w_hat @ X5 @ w_hat, abs=1e-8)

    def test_straddles_by_parity(self):
        F, K, V = 1.0, 0.9, 0.05
        straddle = straddle_price_from_call(bs_call(F, K, V), F, K)
        data = MarketData(1, 1.0, [F], [Instrument((1.0,), K, "straddle", straddle)])
        assert build_variance_constraints(data)[0].variance == pytest.approx(V, abs=1e-9)

    def test_negative_weights_rejected(self):
        data = MarketData(2, 1.0, [1.0, 1.0], [Instrument((1.0, -0.5), 0.1, "call", 0.45)])
        with pytest.raises(ValueError):
            build_variance_constraints(data)


class TestBounds:
    def test_target_equals_quote(self, index_data):
        q = index_data.quotes[6]
        r = model_price_bounds(index_data, Basket(q.weights, q.strike))
        v = build_variance_constraints(index_data)[6].variance
        assert r.variance_lower == pytest.approx(v, abs=1e-7)
        assert r.variance_upper == pytest.approx(v, abs=1e-7)

    def test_no_quotes(self):
        data = MarketData(2, 1.0, [1.0, 2.0], [])
        target = Basket((1.0, 1.0), 2.5)
        r = model_price_bounds(data, target)
        assert r.variance_lower == pytest.approx(0.0, abs=1e-7)
        assert r.status_upper is Status.UNBOUNDED
        assert r.price_lower == pytest.approx(0.5, abs=1e-6)
        assert r.price_upper == 3.0
        assert r.status == "Optimal"

    def test_generating_covariance_is_feasible(self, index_data, index_bounds):
        cons = build_variance_constraints(index_data)
        assert constraint_residual(cons, X5, 1.0) <= 1e-6
        w_hat = effective_weights(W_INDEX, F5).w_hat
        v = w_hat @ X5 @ w_hat
        assert index_bounds.variance_lower - 1e-6 <= v <= index_bounds.variance_upper + 1e-6

    def test_witnesses(self, index_data, index_bounds):
        cons = build_variance_constraints(index_data)
        for X in (index_bounds.witness_lower, index_bounds.witness_upper):
            assert constraint_residual(cons, X, 1.0) <= 1e-6
            assert np.linalg.eigvalsh(X)[0] >= -1e-8

    def test_price_sandwich(self, index_data):
        model = CovarianceModel(F5, X5)
        atm = float(W_INDEX @ F5)
        for K in np.linspace(0.5 * atm, 1.5 * atm, 7):
            target = Basket(tuple(W_INDEX), K)
            r = model_price_bounds(index_data, target)
            truth = basket_call_price(target, model)
            assert r.price_lower - 1e-6 <= truth <= r.price_upper + 1e-6
            assert r.price_lower <= r.price_upper

    def test_monotone_tightening(self, index_data):
        quotes = index_data.quotes
        prev = (-np.inf, np.inf)
        for k in range(len(quotes) + 1):
            lo, hi = model_variance_bounds(index_data.with_quotes(quotes[:k]), W_INDEX)
            cur = (lo.objective, hi.objective if hi.optimal else np.inf)
            assert cur[0] >= prev[0] - 1e-7 and cur[1] <= prev[1] + 1e-7
            prev = cur

    def test_inconsistent_quotes_are_infeasible(self):
        # with both asset variances at 0.04 the equal-weight basket variance is at most 0.04
        F = np.array([1.0, 1.0])
        quotes = [Instrument((1.0, 0.0), 1.0, "call", bs_call(1.0, 1.0, 0.04)),
                  Instrument((0.0, 1.0), 1.0, "call", bs_call(1.0, 1.0, 0.04)),
                  Instrument((1.0, 1.0), 2.0, "call", bs_call(2.0, 2.0, 0.09))]
        data = MarketData(2, 1.0, F, quotes)
        r = model_price_bounds(data, Basket((1.0, 0.0), 1.0))
        assert r.status_lower is Status.INFEASIBLE
        prog = variance_program(build_variance_constraints(data),
                                np.diag([1.0, 0.0]), 1.0, "minimize")
        assert matrix_farkas_violation(prog, r.lower_result.certificate.vector) > 0

    def test_maturity_scaling(self):
        # doubling T doubles total variances; Tr(Omega X) is unchanged
        model = CovarianceModel(F5, X5)
        baskets = list(np.eye(5)) + list(datasets.LOGNORMAL_BASKETS)
        d1 = generate_lognormal_dataset(model, 1.0, baskets)
        d2 = generate_lognormal_dataset(model, 2.0, baskets)
        l1, h1 = model_variance_bounds(d1, W_INDEX)
        l2, h2 = model_variance_bounds(d2, W_INDEX)
        assert l1.objective == pytest.approx(l2.objective, abs=1e-7)
        assert h1.objective == pytest.approx(h2.objective, abs=1e-7)
