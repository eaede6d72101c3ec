#pragma once

#include "mumarket/types.hpp"
#include "mumarket/utility.hpp"

namespace mumarket {

// Optimal one-round trade for a trader holding x against a maker holding y:
// the trade maximizes the trader's utility subject to the maker's binding
// utility preservation. z = 0 is always feasible, so the gain is never
// meaningfully negative.
struct BestResponse {
    TradeDelta z;
    double trader_utility_gain;
    double kkt_residual;
};

// Solver selection, mostly for cross-validation in tests. Auto picks the
// exponential closed form, the nested-root path for other separable pairs
// (with a linear coordinate step when both marginals share a power shape),
// or projected descent for risk-measure pairs.
enum class ResponseMethod { Auto, ClosedForm, NestedRoot, NestedRootNewton, Descent };

BestResponse best_response(const UtilitySpec& V, const UtilitySpec& U, const WealthVector& x,
                           const WealthVector& y, double W0, double root_eps = 1e-12,
                           ResponseMethod method = ResponseMethod::Auto);

// V(x + z) - V(x); throws std::domain_error when either point is outside dom(V).
double utility_gain(const UtilitySpec& V, const WealthVector& x, const TradeDelta& z);

// Componentwise relative stationarity residual of grad V against the best
// positive multiple of grad U; shared by the solver and the diagnostics.
double stationarity_residual(const std::vector<double>& grad_v, const std::vector<double>& grad_u);

} // namespace mumarket
