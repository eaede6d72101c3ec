#pragma once

#include <vector>

#include "mumarket/rng.hpp"
#include "mumarket/root_find.hpp"
#include "mumarket/types.hpp"
#include "mumarket/utility.hpp"

namespace mumarket::test {

inline SimplexVector random_belief(SplitMix64& rng, std::size_t n) {
    std::vector<double> p(n);
    double total = 0.0;
    for (double& e : p) {
        e = 0.1 + rng.uniform();
        total += e;
    }
    for (double& e : p) e /= total;
    return SimplexVector(p);
}

// Uniform wealth level with the same utility as y: U(w * e) = U(y).
inline double uniform_equivalent(const UtilitySpec& u, const WealthVector& y) {
    double floor = u.coordinate_floor();
    double hard_lo = std::isfinite(floor) ? floor : -std::numeric_limits<double>::infinity();
    double target = u.value(y);
    auto g = [&](double w) { return u.value_at_uniform(w) - target; };
    double lo = std::isfinite(floor) ? floor + 1e-6 : -1.0;
    return solve_monotone_root(g, lo, lo + 2.0, 1e-13, "uniform equivalent", hard_lo);
}

// Initial maker wealth that keeps the state y reachable: U(y) >= U(W0 e).
inline double reachable_W0(const UtilitySpec& u, const WealthVector& y, SplitMix64& rng,
                           double max_slack = 0.5) {
    double w_eq = uniform_equivalent(u, y);
    double floor = u.coordinate_floor();
    double w0 = w_eq - rng.uniform(0.0, max_slack);
    if (std::isfinite(floor) && w0 <= floor) w0 = 0.5 * (w_eq + floor);
    return w0;
}

} // namespace mumarket::test
