#include "mumarket/types.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mumarket {

namespace {

void require_finite(const std::vector<double>& v, const char* what) {
    for (double e : v) {
        if (!std::isfinite(e)) {
            throw std::invalid_argument(std::string(what) + " has a non-finite entry");
        }
    }
}

} // namespace

SimplexVector::SimplexVector(std::vector<double> entries) : entries_(std::move(entries)) {
    if (entries_.size() < 2) {
        throw std::invalid_argument("simplex vector needs at least two outcomes");
    }
    double sum = 0.0;
    for (double e : entries_) {
        if (!(e >= 0.0) || !std::isfinite(e)) {
            throw std::invalid_argument("simplex vector entries must be finite and >= 0");
        }
        sum += e;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("simplex vector entries sum to " + std::to_string(sum) +
                                    ", more than 1e-9 away from 1");
    }
    if (sum != 1.0) {
        for (double& e : entries_) e /= sum;
    }
}

SimplexVector SimplexVector::uniform(std::size_t n) {
    return SimplexVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

WealthVector::WealthVector(std::vector<double> entries) : entries_(std::move(entries)) {
    require_finite(entries_, "wealth vector");
}

WealthVector WealthVector::constant(std::size_t n, double c) {
    return WealthVector(std::vector<double>(n, c));
}

WealthVector WealthVector::plus(const std::vector<double>& d, double scale) const {
    std::vector<double> out(entries_);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += scale * d[i];
    return WealthVector(std::move(out));
}

WealthVector WealthVector::plus_scalar(double c) const {
    std::vector<double> out(entries_);
    for (double& e : out) e += c;
    return WealthVector(std::move(out));
}

TradeDelta::TradeDelta(std::vector<double> z) : z_(std::move(z)) {
    require_finite(z_, "trade delta");
}

TradeDelta TradeDelta::zero(std::size_t n) { return TradeDelta(std::vector<double>(n, 0.0)); }

double TradeDelta::max_abs() const {
    double m = 0.0;
    for (double e : z_) m = std::max(m, std::abs(e));
    return m;
}

MarketState MarketState::initial(double W0, std::vector<double> w0, std::size_t securities) {
    if (!(W0 > 0.0)) throw std::invalid_argument("market maker initial wealth must be positive");
    for (double w : w0) {
        if (!(w > 0.0)) throw std::invalid_argument("trader initial wealth must be positive");
    }
    MarketState s;
    s.t = 0;
    s.W0 = W0;
    s.w0 = w0;
    s.y = WealthVector::constant(securities, W0);
    s.x.reserve(w0.size());
    // w_all accumulates in the same order total_wealth_residual sums, so a
    // fresh state reports an exactly zero residual.
    double all = W0;
    for (double w : w0) {
        s.x.push_back(WealthVector::constant(securities, w));
        all += w;
    }
    s.w_all = all;
    return s;
}

double total_wealth_residual(const MarketState& state) {
    double worst = 0.0;
    for (std::size_t i = 0; i < state.securities(); ++i) {
        double sum = state.y[i];
        for (const auto& xj : state.x) sum += xj[i];
        worst = std::max(worst, std::abs(sum - state.w_all));
    }
    return worst;
}

MarketState apply_trade(const MarketState& state, std::size_t trader, const TradeDelta& z) {
    if (trader >= state.traders()) throw std::invalid_argument("trader index out of range");
    if (z.size() != state.securities()) throw std::invalid_argument("trade delta has wrong dimension");
    if (total_wealth_residual(state) > 1e-9) {
        throw std::logic_error("market state violates wealth conservation before trade");
    }
    MarketState next = state;
    next.t = state.t + 1;
    for (std::size_t i = 0; i < z.size(); ++i) {
        next.x[trader][i] += z[i];
        next.y[i] -= z[i];
    }
    return next;
}

} // namespace mumarket
