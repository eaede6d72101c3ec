#pragma once

#include <cstddef>
#include <variant>

#include "mumarket/types.hpp"

namespace mumarket {

struct RelativeEntropyPenalty {
    SimplexVector belief;
    double beta;
};

struct PowerPenalty {
    SimplexVector belief;
    double gamma;
    double h;
};

struct LogPenalty {
    SimplexVector belief;
    double h;
};

// Penalty function alpha(q) from the dual representation of a convex risk
// measure, rho(x) = sup_q { -q'x - alpha(q) }.
//
// Relative entropy is the family whose marginals f_i are strictly increasing
// with f_i(0+) = -inf and f_i(1) finite; that shape is what makes -rho a
// usable market agent, and it is asserted numerically at construction.
// The power and log families have decreasing marginals (diverging to +inf
// at 0); they are accepted as inputs to closed-form aggregation only.
class PenaltySpec {
public:
    enum class Family { RelativeEntropy, Power, Log };

    static PenaltySpec relative_entropy(SimplexVector belief, double beta);
    static PenaltySpec power(SimplexVector belief, double gamma, double h);
    static PenaltySpec log(SimplexVector belief, double h);

    Family family() const;
    std::size_t securities() const;
    const SimplexVector& belief() const;

    // Usable as a simulation agent: marginals strictly increasing, f(0+) = -inf.
    bool increasing_marginals() const { return family() == Family::RelativeEntropy; }

    // alpha(q); relative entropy treats q_i = 0 as the limit contribution 0.
    double value(const SimplexVector& q) const;
    // f_i(q_i) = d alpha / d q_i. Throws std::range_error at q_i <= 0.
    double marginal(std::size_t i, double q_i) const;
    // f_i^{-1}(m). Throws std::range_error for m outside the marginal range.
    double marginal_inverse(std::size_t i, double m) const;
    // f_i'(q_i), for curvature classification of stationary points.
    double marginal_derivative(std::size_t i, double q_i) const;

    const RelativeEntropyPenalty* as_relative_entropy() const;
    const PowerPenalty* as_power() const;
    const LogPenalty* as_log() const;

private:
    using Variant = std::variant<RelativeEntropyPenalty, PowerPenalty, LogPenalty>;
    explicit PenaltySpec(Variant v) : spec_(std::move(v)) {}
    Variant spec_;
};

} // namespace mumarket
