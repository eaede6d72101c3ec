#include "mumarket/penalty.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mumarket {

namespace {

// Saturate the relative-entropy inverse marginal instead of overflowing;
// bracket expansion probes exponents far beyond the root region.
constexpr double kMaxExp = 700.0;

void check_marginal_shape(const RelativeEntropyPenalty& p) {
    // Strictly increasing marginal per coordinate, finite at 1, diverging
    // to -inf at 0: checked on a grid spanning twelve decades.
    static const double grid[] = {1e-12, 1e-9, 1e-6, 1e-3, 0.01, 0.1, 0.25, 0.5, 0.75, 1.0};
    for (std::size_t i = 0; i < p.belief.size(); ++i) {
        double prev = -std::numeric_limits<double>::infinity();
        for (double q : grid) {
            double f = (std::log(q / p.belief[i]) + 1.0) / p.beta;
            if (!(f > prev)) {
                throw std::invalid_argument("relative entropy penalty: marginal not strictly increasing");
            }
            prev = f;
        }
        if (!std::isfinite(prev)) {
            throw std::invalid_argument("relative entropy penalty: marginal not finite at q = 1");
        }
        double near_zero = (std::log(1e-300 / p.belief[i]) + 1.0) / p.beta;
        if (!(near_zero < -100.0)) {
            throw std::invalid_argument("relative entropy penalty: marginal does not diverge at 0");
        }
    }
}

} // namespace

PenaltySpec PenaltySpec::relative_entropy(SimplexVector belief, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("relative entropy penalty needs beta > 0");
    RelativeEntropyPenalty p{std::move(belief), beta};
    check_marginal_shape(p);
    return PenaltySpec(Variant(std::move(p)));
}

PenaltySpec PenaltySpec::power(SimplexVector belief, double gamma, double h) {
    if (!(gamma < 1.0) || gamma == 0.0) {
        throw std::invalid_argument("power penalty needs gamma < 1 and gamma != 0");
    }
    if (!(h >= 0.0)) throw std::invalid_argument("power penalty needs h >= 0");
    return PenaltySpec(Variant(PowerPenalty{std::move(belief), gamma, h}));
}

PenaltySpec PenaltySpec::log(SimplexVector belief, double h) {
    if (!(h >= 0.0)) throw std::invalid_argument("log penalty needs h >= 0");
    return PenaltySpec(Variant(LogPenalty{std::move(belief), h}));
}

PenaltySpec::Family PenaltySpec::family() const {
    if (std::holds_alternative<RelativeEntropyPenalty>(spec_)) return Family::RelativeEntropy;
    if (std::holds_alternative<PowerPenalty>(spec_)) return Family::Power;
    return Family::Log;
}

std::size_t PenaltySpec::securities() const { return belief().size(); }

const SimplexVector& PenaltySpec::belief() const {
    return std::visit([](const auto& p) -> const SimplexVector& { return p.belief; }, spec_);
}

double PenaltySpec::value(const SimplexVector& q) const {
    if (q.size() != securities()) throw std::invalid_argument("penalty value: dimension mismatch");
    if (const auto* p = as_relative_entropy()) {
        double s = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            if (q[i] > 0.0) s += q[i] * std::log(q[i] / p->belief[i]);
        }
        return s / p->beta;
    }
    if (const auto* p = as_power()) {
        double s = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            if (q[i] <= 0.0) throw std::range_error("power penalty value needs interior q");
            s += q[i] * std::pow(q[i] / p->belief[i], p->gamma - 1.0);
        }
        return s * p->h / p->gamma;
    }
    const auto* p = as_log();
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] <= 0.0) throw std::range_error("log penalty value needs interior q");
        s += p->belief[i] * std::log(q[i]);
    }
    return s * p->h;
}

double PenaltySpec::marginal(std::size_t i, double q_i) const {
    if (!(q_i > 0.0)) throw std::range_error("penalty marginal undefined at q_i <= 0");
    if (const auto* p = as_relative_entropy()) {
        return (std::log(q_i / p->belief[i]) + 1.0) / p->beta;
    }
    if (const auto* p = as_power()) {
        return p->h * std::pow(q_i / p->belief[i], p->gamma - 1.0);
    }
    const auto* p = as_log();
    return p->h * p->belief[i] / q_i;
}

double PenaltySpec::marginal_inverse(std::size_t i, double m) const {
    if (const auto* p = as_relative_entropy()) {
        double expo = p->beta * m - 1.0;
        return p->belief[i] * std::exp(std::min(expo, kMaxExp));
    }
    if (const auto* p = as_power()) {
        if (!(m > 0.0)) throw std::range_error("power penalty marginal range is (0, inf)");
        if (p->h == 0.0) throw std::range_error("power penalty with h = 0 has constant marginal");
        return p->belief[i] * std::pow(m / p->h, 1.0 / (p->gamma - 1.0));
    }
    const auto* p = as_log();
    if (!(m > 0.0)) throw std::range_error("log penalty marginal range is (0, inf)");
    if (p->h == 0.0) throw std::range_error("log penalty with h = 0 has constant marginal");
    return p->h * p->belief[i] / m;
}

double PenaltySpec::marginal_derivative(std::size_t i, double q_i) const {
    if (!(q_i > 0.0)) throw std::range_error("penalty marginal derivative undefined at q_i <= 0");
    if (const auto* p = as_relative_entropy()) {
        return 1.0 / (p->beta * q_i);
    }
    if (const auto* p = as_power()) {
        return p->h * (p->gamma - 1.0) * std::pow(q_i / p->belief[i], p->gamma - 2.0) / p->belief[i];
    }
    const auto* p = as_log();
    return -p->h * p->belief[i] / (q_i * q_i);
}

const RelativeEntropyPenalty* PenaltySpec::as_relative_entropy() const {
    return std::get_if<RelativeEntropyPenalty>(&spec_);
}
const PowerPenalty* PenaltySpec::as_power() const { return std::get_if<PowerPenalty>(&spec_); }
const LogPenalty* PenaltySpec::as_log() const { return std::get_if<LogPenalty>(&spec_); }

} // namespace mumarket
