#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mumarket/types.hpp"
#include "mumarket/utility.hpp"

namespace mumarket {

// One market: the maker's utility and initial wealth plus each trader's
// utility and initial wealth. Beliefs live inside the utility specs.
struct Market {
    UtilitySpec maker;
    double W0;
    std::vector<UtilitySpec> traders;
    std::vector<double> w0;

    std::size_t securities() const { return maker.securities(); }
    std::size_t trader_count() const { return traders.size(); }
    void validate() const;
};

// Who trades when. Both kinds visit every trader infinitely often in the
// infinite-horizon limit.
struct TradingSequence {
    enum class Kind { RoundRobin, Random };
    Kind kind = Kind::RoundRobin;
    std::vector<std::size_t> order; // 0-based permutation (RoundRobin)
    std::uint64_t seed = 0;         // Random
    std::size_t max_rounds = 100000;

    static TradingSequence round_robin(std::vector<std::size_t> order,
                                       std::size_t max_rounds = 100000);
    static TradingSequence random(std::uint64_t seed, std::size_t max_rounds = 100000);
};

struct Snapshot {
    std::int64_t t;
    std::size_t trader; // 0-based
    std::vector<double> z;
    SimplexVector price;
    std::vector<double> trader_utilities;
    double market_utility;
};

struct Trajectory {
    std::vector<Snapshot> snapshots;
    MarketState final_state;
    SimplexVector final_price;
    bool converged = false;
    std::size_t rounds_used = 0;
};

struct RunOptions {
    TradingSequence sequence;
    double trade_eps = 1e-10;
    double root_eps = 1e-12;
    bool record_snapshots = true;
};

// Iterate best responses along the trading sequence until a full sweep of
// vacuous trades (max |z| <= trade_eps), or until max_rounds sweeps.
// Non-convergence is reported, not thrown; solver failures carry (t, trader).
Trajectory run(const Market& market, const RunOptions& options);

// Post-run Pareto diagnostics: each trader's stationarity residual against
// the maker's final gradient, and the recovered frontier weights (inverse
// multipliers, scaled to sum to the trader count).
struct ConvergenceReport {
    std::vector<double> omega;
    std::vector<double> trader_kkt;
    double max_kkt_residual = 0.0;
};
ConvergenceReport convergence_report(const Market& market, const Trajectory& traj);

// CSV: header t,trader,z_1..z_I,p_1..p_I,V_1..V_J,U; one row per trade;
// shortest round-trip float formatting, so identical runs serialize
// byte-identically.
std::string trajectory_csv(const Market& market, const Trajectory& traj);

} // namespace mumarket
