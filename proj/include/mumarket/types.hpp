#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mumarket {

// A probability vector on the I-outcome simplex. Construction renormalizes
// inputs whose sum is within 1e-9 of one (config files carry limited
// precision) and rejects anything farther off, negative entries, or I < 2.
class SimplexVector {
public:
    explicit SimplexVector(std::vector<double> entries);
    static SimplexVector uniform(std::size_t n);

    std::size_t size() const { return entries_.size(); }
    double operator[](std::size_t i) const { return entries_[i]; }
    const std::vector<double>& entries() const { return entries_; }

private:
    std::vector<double> entries_;
};

// Per-outcome net wealth position (cash plus security payoff per state).
class WealthVector {
public:
    WealthVector() = default;
    explicit WealthVector(std::vector<double> entries);
    static WealthVector constant(std::size_t n, double c);

    std::size_t size() const { return entries_.size(); }
    double operator[](std::size_t i) const { return entries_[i]; }
    double& operator[](std::size_t i) { return entries_[i]; }
    const std::vector<double>& entries() const { return entries_; }

    // w + scale * d
    WealthVector plus(const std::vector<double>& d, double scale = 1.0) const;
    // w + c * e
    WealthVector plus_scalar(double c) const;

private:
    std::vector<double> entries_;
};

// Variation of the market maker's wealth vector in one trade,
// z = dq - dw * e in net-wealth coordinates.
class TradeDelta {
public:
    explicit TradeDelta(std::vector<double> z);
    static TradeDelta zero(std::size_t n);

    std::size_t size() const { return z_.size(); }
    double operator[](std::size_t i) const { return z_[i]; }
    const std::vector<double>& entries() const { return z_; }
    double max_abs() const;

private:
    std::vector<double> z_;
};

// Market maker plus all traders' net wealth positions at round t. The total
// net wealth is conserved: y + sum_j x_j = w_all * e, up to rounding.
struct MarketState {
    std::int64_t t = 0;
    WealthVector y;
    std::vector<WealthVector> x;
    double w_all = 0.0;
    double W0 = 0.0;
    std::vector<double> w0;

    static MarketState initial(double W0, std::vector<double> w0, std::size_t securities);
    std::size_t securities() const { return y.size(); }
    std::size_t traders() const { return x.size(); }
};

// Max-norm of y + sum_j x_j - w_all * e; used as a runtime assertion.
double total_wealth_residual(const MarketState& state);

// New state with x[trader] += z, y -= z, t += 1. Throws std::logic_error if
// the incoming state already violates conservation beyond 1e-9.
MarketState apply_trade(const MarketState& state, std::size_t trader, const TradeDelta& z);

} // namespace mumarket
