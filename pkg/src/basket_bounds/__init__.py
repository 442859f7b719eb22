"""Static and model-based arbitrage bounds on basket options."""

from .market import (DiscreteMeasure, Instrument, MarketData, discrete_price,
                     generate_discrete_dataset, generate_lognormal_dataset,
                     load_market_data, monte_carlo_basket_price, save_market_data,
                     save_results)
from .model_bounds import build_variance_constraints, model_price_bounds
from .moments import (enumerate_monomials, localizing_matrix, moment_bound,
                      moment_matrix)
from .pricing import (Basket, CovarianceModel, PriceOutOfRange, basket_call_price,
                      basket_variance, bs_call, effective_weights, implied_variance,
                      normal_cdf, straddle_price_from_call)
from .static_bounds import (GridSpec, check_static_arbitrage, inner_bounds,
                            outer_bounds)

__version__ = "0.1.0"
