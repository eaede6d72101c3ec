#pragma once

#include <vector>

#include "mumarket/types.hpp"
#include "mumarket/utility.hpp"

namespace mumarket {

// One priced order: the charge and the market maker's post-trade position.
// The utility-preservation constraint binds at the solution:
// U(post_y) = U(W0 * e) within root tolerance.
struct Quote {
    double delta_w;
    WealthVector post_y;
};

// Lowest charge dw such that U(y + dw*e - dq) >= U(W0*e) with the post-trade
// position inside dom(U). g(dw) is strictly increasing, so this is a
// bracketed monotone root.
Quote price_order(const UtilitySpec& U, const WealthVector& y, double W0,
                  const std::vector<double>& dq, double root_eps = 1e-12);

// Normalized utility gradient at y: the market's implied outcome probabilities.
SimplexVector instantaneous_price(const UtilitySpec& U, const WealthVector& y);

// Cost-function view of the same mechanism: C_U(q) = min { W : U(W*e - q) >= U(W0*e) }.
double cost_function_value(const UtilitySpec& U, double W0, const std::vector<double>& q,
                           double root_eps = 1e-12);

// Scoring rule induced by the utility-preserving maker:
// S(p) = -argmin { p'y : U(y) >= U(W0*e) }, for interior p and a strictly
// concave separable family. Solved by coordinate inversion of the gradient
// plus a one-dimensional root on the binding constraint.
std::vector<double> induced_scoring_rule(const UtilitySpec& U, double W0, const SimplexVector& p,
                                         double root_eps = 1e-12);

} // namespace mumarket
