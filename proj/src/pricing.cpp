#include "mumarket/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mumarket/numeric.hpp"
#include "mumarket/root_find.hpp"

namespace mumarket {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double e : v) m = std::max(m, std::abs(e));
    return m;
}

// Pricing roots run to bracket collapse: the charge must be resolved far
// below the finite-difference scale even where the utility surface is tiny
// or flat, and the collapse bound keeps every solve under ~60 iterations.
double utility_tol(double root_eps, double target) {
    return root_eps * std::abs(target) * 1e-4;
}

} // namespace

Quote price_order(const UtilitySpec& U, const WealthVector& y, double W0,
                  const std::vector<double>& dq, double root_eps) {
    if (dq.size() != y.size()) throw std::invalid_argument("price_order: order has wrong dimension");
    if (!U.domain_contains(y)) throw std::domain_error("price_order: state outside utility domain");
    const double target = U.value_at_uniform(W0);

    auto post = [&](double w) { return y.plus(dq, -1.0).plus_scalar(w); };
    auto g = [&](double w) { return U.value(post(w)) - target; };

    // The post-trade position must stay above the coordinate floor; the
    // domain-exit charge solves in closed form per coordinate.
    double floor = U.coordinate_floor();
    double hard_lo = -kInf;
    if (floor != -kInf) {
        for (std::size_t i = 0; i < dq.size(); ++i) {
            hard_lo = std::max(hard_lo, floor + dq[i] - y[i]);
        }
    }
    double span = max_abs(dq) + 1.0;
    double lo = -span, hi = span;
    if (hard_lo != -kInf) {
        double gap = 1e-9 * (1.0 + std::abs(hard_lo));
        lo = std::max(lo, hard_lo + gap);
        if (hi <= lo) hi = lo + span;
        // For families whose utility stays finite at the domain boundary the
        // preservation constraint may hold on the whole feasible range; the
        // minimal charge then sits on the open domain edge and cannot bind.
        if (g(hard_lo + gap) > 0.0) {
            throw NumericalError("order price: preservation constraint cannot bind before the "
                                 "domain edge at charge " + std::to_string(hard_lo));
        }
    }
    double w = solve_monotone_root(g, lo, hi, utility_tol(root_eps, target), "order price", hard_lo);
    return Quote{w, post(w)};
}

SimplexVector instantaneous_price(const UtilitySpec& U, const WealthVector& y) {
    return SimplexVector(normalized(U.gradient(y)));
}

double cost_function_value(const UtilitySpec& U, double W0, const std::vector<double>& q,
                           double root_eps) {
    if (q.size() != U.securities()) {
        throw std::invalid_argument("cost function: position has wrong dimension");
    }
    const double target = U.value_at_uniform(W0);
    auto g = [&](double W) {
        return U.value(WealthVector(std::vector<double>(q.size(), W)).plus(q, -1.0)) - target;
    };
    double floor = U.coordinate_floor();
    double hard_lo = -kInf;
    if (floor != -kInf) {
        hard_lo = floor + *std::max_element(q.begin(), q.end());
    }
    double span = max_abs(q) + 1.0;
    double lo = W0 - span, hi = W0 + span;
    if (hard_lo != -kInf) {
        double gap = 1e-9 * (1.0 + std::abs(hard_lo));
        lo = std::max(lo, hard_lo + gap);
        if (hi <= lo) hi = lo + span;
    }
    return solve_monotone_root(g, lo, hi, utility_tol(root_eps, target), "cost function", hard_lo);
}

std::vector<double> induced_scoring_rule(const UtilitySpec& U, double W0, const SimplexVector& p,
                                         double root_eps) {
    if (!U.separable()) {
        throw std::invalid_argument("induced scoring rule needs a strictly concave separable family");
    }
    if (p.size() != U.securities()) {
        throw std::invalid_argument("induced scoring rule: report has wrong dimension");
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(p[i] > 0.0)) throw std::domain_error("induced scoring rule needs an interior report");
    }
    const double target = U.value_at_uniform(W0);

    // Stationarity p = nu * grad U(y) inverts coordinatewise; nu is pinned by
    // the binding constraint, and U(y(nu)) is increasing in nu.
    auto position = [&](double t) {
        double nu = std::exp(t);
        std::vector<double> y(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) y[i] = U.inverse_marginal(i, p[i] / nu);
        return WealthVector(std::move(y));
    };
    auto g = [&](double t) { return U.value(position(t)) - target; };
    double t = solve_monotone_root(g, -1.0, 1.0, utility_tol(root_eps, target), "scoring rule multiplier");
    WealthVector y = position(t);
    std::vector<double> s(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) s[i] = -y[i];
    return s;
}

} // namespace mumarket
