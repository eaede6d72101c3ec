#include "mumarket/utility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "mumarket/numeric.hpp"
#include "mumarket/root_find.hpp"

namespace mumarket {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

UtilitySpec UtilitySpec::exponential(SimplexVector belief, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("exponential utility needs beta > 0");
    return UtilitySpec(Variant(ExponentialUtility{std::move(belief), beta}));
}

UtilitySpec UtilitySpec::hara(SimplexVector belief, double a, double b, double gamma) {
    if (!(a > 0.0)) throw std::invalid_argument("hara utility needs a > 0");
    if (!(b >= 0.0)) throw std::invalid_argument("hara utility needs b >= 0");
    if (!(gamma < 1.0) || gamma == 0.0) {
        throw std::invalid_argument("hara utility needs gamma < 1, gamma != 0");
    }
    return UtilitySpec(Variant(HaraUtility{std::move(belief), a, b, gamma}));
}

UtilitySpec UtilitySpec::crra(SimplexVector belief, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("crra utility needs gamma in (0,1)");
    return UtilitySpec(Variant(CrraUtility{std::move(belief), gamma}));
}

UtilitySpec UtilitySpec::risk_measure(PenaltySpec penalty) {
    if (!penalty.increasing_marginals()) {
        throw std::invalid_argument(
            "risk-measure utility requires a penalty with strictly increasing marginals "
            "(relative entropy); power/log penalties are aggregation-formula inputs only");
    }
    return UtilitySpec(Variant(RiskMeasureUtility{std::move(penalty)}));
}

UtilitySpec UtilitySpec::composite_entropic_log(SimplexVector belief, double beta, double eta,
                                                double B) {
    if (!(beta > 0.0)) throw std::invalid_argument("composite utility needs beta > 0");
    if (!(eta >= 0.0)) throw std::invalid_argument("composite utility needs eta >= 0");
    return UtilitySpec(Variant(CompositeEntropicLogUtility{std::move(belief), beta, eta, B}));
}

UtilitySpec::Family UtilitySpec::family() const {
    switch (spec_.index()) {
        case 0: return Family::Exponential;
        case 1: return Family::Hara;
        case 2: return Family::Crra;
        case 3: return Family::RiskMeasure;
        default: return Family::CompositeEntropicLog;
    }
}

std::size_t UtilitySpec::securities() const { return belief().size(); }

const SimplexVector& UtilitySpec::belief() const {
    if (const auto* rm = as_risk_measure()) return rm->penalty.belief();
    return std::visit(
        [](const auto& u) -> const SimplexVector& {
            if constexpr (requires { u.belief; }) {
                return u.belief;
            } else {
                throw std::logic_error("unreachable");
            }
        },
        spec_);
}

bool UtilitySpec::separable() const {
    Family f = family();
    return f == Family::Exponential || f == Family::Hara || f == Family::Crra;
}

double UtilitySpec::coordinate_floor() const {
    if (const auto* h = as_hara()) return -h->b * (1.0 - h->gamma) / h->a;
    if (as_crra()) return 0.0;
    if (const auto* c = as_composite()) return c->eta > 0.0 ? -c->B : -kInf;
    return -kInf;
}

bool UtilitySpec::domain_contains(const WealthVector& w) const {
    if (w.size() != securities()) return false;
    double floor = coordinate_floor();
    if (floor == -kInf) return true;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!(w[i] > floor)) return false;
    }
    return true;
}

double UtilitySpec::value(const WealthVector& w) const {
    if (w.size() != securities()) throw std::invalid_argument("utility value: dimension mismatch");
    if (!domain_contains(w)) throw std::domain_error("wealth vector outside utility domain");
    if (const auto* u = as_exponential()) {
        double s = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) s += u->belief[i] * std::exp(-u->beta * w[i]);
        return -s / u->beta;
    }
    if (const auto* u = as_hara()) {
        double s = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            s += u->belief[i] * std::pow(u->a * w[i] / (1.0 - u->gamma) + u->b, u->gamma);
        }
        return s * (1.0 - u->gamma) / u->gamma;
    }
    if (const auto* u = as_crra()) {
        double s = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) s += u->belief[i] * std::pow(w[i], u->gamma);
        return s;
    }
    if (as_risk_measure()) {
        return -risk_dual(w).rho;
    }
    const auto* u = as_composite();
    std::vector<double> logs(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) logs[i] = std::log(u->belief[i]) - u->beta * w[i];
    double v = -logsumexp(logs) / u->beta;
    if (u->eta > 0.0) {
        double s = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) s += u->belief[i] * std::log(w[i] + u->B);
        v += u->eta * s;
    }
    return v;
}

double UtilitySpec::value_at_uniform(double c) const {
    return value(WealthVector::constant(securities(), c));
}

double UtilitySpec::value_delta(const WealthVector& w, const std::vector<double>& dz) const {
    if (dz.size() != w.size()) throw std::invalid_argument("value_delta: dimension mismatch");
    WealthVector shifted = w.plus(dz);
    if (!domain_contains(w) || !domain_contains(shifted)) {
        throw std::domain_error("wealth vector outside utility domain");
    }
    if (const auto* u = as_exponential()) {
        double d = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            d -= u->belief[i] * std::exp(-u->beta * w[i]) * std::expm1(-u->beta * dz[i]) / u->beta;
        }
        return d;
    }
    if (const auto* u = as_hara()) {
        double s = u->a / (1.0 - u->gamma);
        double d = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            double base = s * w[i] + u->b;
            d += u->belief[i] * std::pow(base, u->gamma) *
                 std::expm1(u->gamma * std::log1p(s * dz[i] / base));
        }
        return d * (1.0 - u->gamma) / u->gamma;
    }
    if (const auto* u = as_crra()) {
        double d = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            d += u->belief[i] * std::pow(w[i], u->gamma) *
                 std::expm1(u->gamma * std::log1p(dz[i] / w[i]));
        }
        return d;
    }
    return value(shifted) - value(w);
}

std::vector<double> UtilitySpec::gradient(const WealthVector& w) const {
    if (w.size() != securities()) throw std::invalid_argument("utility gradient: dimension mismatch");
    if (!domain_contains(w)) throw std::domain_error("wealth vector outside utility domain");
    std::vector<double> g(w.size());
    if (separable()) {
        for (std::size_t i = 0; i < w.size(); ++i) g[i] = marginal(i, w[i]);
        return g;
    }
    if (as_risk_measure()) {
        return risk_dual(w).q;
    }
    const auto* u = as_composite();
    std::vector<double> logs(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) logs[i] = std::log(u->belief[i]) - u->beta * w[i];
    g = softmax_from_logs(logs);
    if (u->eta > 0.0) {
        for (std::size_t i = 0; i < w.size(); ++i) g[i] += u->eta * u->belief[i] / (w[i] + u->B);
    }
    return g;
}

double UtilitySpec::marginal(std::size_t i, double w_i) const {
    if (const auto* u = as_exponential()) return u->belief[i] * std::exp(-u->beta * w_i);
    if (const auto* u = as_hara()) {
        return u->belief[i] * u->a * std::pow(u->a * w_i / (1.0 - u->gamma) + u->b, u->gamma - 1.0);
    }
    if (const auto* u = as_crra()) {
        return u->belief[i] * u->gamma * std::pow(w_i, u->gamma - 1.0);
    }
    throw std::invalid_argument("per-coordinate marginal needs a separable utility family");
}

double UtilitySpec::log_marginal(std::size_t i, double w_i) const {
    if (const auto* u = as_exponential()) return std::log(u->belief[i]) - u->beta * w_i;
    if (const auto* u = as_hara()) {
        return std::log(u->belief[i] * u->a) +
               (u->gamma - 1.0) * std::log(u->a * w_i / (1.0 - u->gamma) + u->b);
    }
    if (const auto* u = as_crra()) {
        return std::log(u->belief[i] * u->gamma) + (u->gamma - 1.0) * std::log(w_i);
    }
    throw std::invalid_argument("per-coordinate marginal needs a separable utility family");
}

double UtilitySpec::dlog_marginal(std::size_t i, double w_i) const {
    (void)i;
    if (const auto* u = as_exponential()) return -u->beta;
    if (const auto* u = as_hara()) {
        double s = u->a / (1.0 - u->gamma);
        return (u->gamma - 1.0) * s / (s * w_i + u->b);
    }
    if (const auto* u = as_crra()) return (u->gamma - 1.0) / w_i;
    throw std::invalid_argument("per-coordinate marginal needs a separable utility family");
}

double UtilitySpec::inverse_marginal(std::size_t i, double m) const {
    if (!(m > 0.0)) throw std::range_error("marginal utility range is (0, inf)");
    if (const auto* u = as_exponential()) {
        return -std::log(m / u->belief[i]) / u->beta;
    }
    if (const auto* u = as_hara()) {
        double base = std::pow(m / (u->belief[i] * u->a), 1.0 / (u->gamma - 1.0));
        return (base - u->b) * (1.0 - u->gamma) / u->a;
    }
    if (const auto* u = as_crra()) {
        return std::pow(m / (u->belief[i] * u->gamma), 1.0 / (u->gamma - 1.0));
    }
    throw std::invalid_argument("inverse marginal needs a separable utility family");
}

std::optional<UtilitySpec::PowerMarginal> UtilitySpec::power_marginal() const {
    if (const auto* u = as_hara()) {
        PowerMarginal pm;
        pm.s = u->a / (1.0 - u->gamma);
        pm.c = u->b;
        pm.gamma = u->gamma;
        pm.K.resize(u->belief.size());
        for (std::size_t i = 0; i < pm.K.size(); ++i) pm.K[i] = u->belief[i] * u->a;
        return pm;
    }
    if (const auto* u = as_crra()) {
        PowerMarginal pm;
        pm.s = 1.0;
        pm.c = 0.0;
        pm.gamma = u->gamma;
        pm.K.resize(u->belief.size());
        for (std::size_t i = 0; i < pm.K.size(); ++i) pm.K[i] = u->belief[i] * u->gamma;
        return pm;
    }
    return std::nullopt;
}

UtilitySpec::DualSolution UtilitySpec::risk_dual(const WealthVector& w) const {
    const auto* rm = as_risk_measure();
    if (!rm) throw std::invalid_argument("risk_dual needs a risk-measure utility");
    const PenaltySpec& pen = rm->penalty;
    const std::size_t n = w.size();

    // The optimizing probability satisfies q_i = f_i^{-1}(lambda - w_i) with
    // sum_i q_i = 1; the sum is strictly increasing in lambda, so the root is
    // bracketed by construction.
    constexpr double eps = 1e-14;
    double lo = kInf, hi = -kInf;
    for (std::size_t i = 0; i < n; ++i) {
        lo = std::min(lo, w[i] + pen.marginal(i, eps));
        hi = std::max(hi, w[i] + pen.marginal(i, 1.0));
    }
    auto residual = [&](double lambda) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += pen.marginal_inverse(i, lambda - w[i]);
        return s - 1.0;
    };
    Bracket br{lo, hi, residual(lo), residual(hi)};
    double lambda = brent_root(residual, br, 1e-12, "risk-measure dual multiplier");

    DualSolution out;
    out.lambda = lambda;
    out.q.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.q[i] = pen.marginal_inverse(i, lambda - w[i]);
    out.q = normalized(out.q);
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += out.q[i] * w[i];
    out.rho = -dot - pen.value(SimplexVector(out.q));
    return out;
}

const PenaltySpec* UtilitySpec::penalty() const {
    const auto* rm = as_risk_measure();
    return rm ? &rm->penalty : nullptr;
}

const ExponentialUtility* UtilitySpec::as_exponential() const {
    return std::get_if<ExponentialUtility>(&spec_);
}
const HaraUtility* UtilitySpec::as_hara() const { return std::get_if<HaraUtility>(&spec_); }
const CrraUtility* UtilitySpec::as_crra() const { return std::get_if<CrraUtility>(&spec_); }
const RiskMeasureUtility* UtilitySpec::as_risk_measure() const {
    return std::get_if<RiskMeasureUtility>(&spec_);
}
const CompositeEntropicLogUtility* UtilitySpec::as_composite() const {
    return std::get_if<CompositeEntropicLogUtility>(&spec_);
}

} // namespace mumarket
