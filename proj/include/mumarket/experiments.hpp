#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mumarket/rng.hpp"
#include "mumarket/trading.hpp"

namespace mumarket {

// Random HARA market: fixed maker, traders split evenly into belief groups,
// each trader's belief a convex mix of its group baseline and uniform noise
// normalized onto the simplex, wealth drawn uniformly.
struct RandomMarketSpec {
    std::size_t securities = 3;
    std::size_t traders = 10;
    double alpha = 0.3; // weight on the group baseline belief
    std::vector<SimplexVector> baseline_beliefs;
    double wealth_low = 3.0;
    double wealth_high = 10.0;
    double gamma_maker = 0.3;
    double gamma_trader_low = 0.3;
    double gamma_trader_high = 0.3;
    double W0 = 10.0;
    SimplexVector theta = SimplexVector({0.3, 0.3, 0.4});
    double a = 1.0;
    double b = 0.0;

    static RandomMarketSpec standard();
};

Market make_random_market(const RandomMarketSpec& spec, SplitMix64& rng);

// One randomized run: simulate to convergence under a random sequence, then
// score the heuristic frontier weights and the approximate price formulas
// against the simulated limit.
struct HaraRunResult {
    bool converged = false;
    double kld_dagger = 0.0;   // D(p_sim, price from the heuristic-weight frontier solve)
    double delta_x_value = 0.0;
    double kld_hara = 0.0;     // D(p_sim, risk-adjusted endowment power mean)
    double kld_baseline = 0.0; // D(p_sim, wealth-weighted arithmetic mean)
};
HaraRunResult hara_quality_run(const RandomMarketSpec& spec, std::uint64_t seed,
                               std::size_t max_rounds = 100000);

struct BatchSummary {
    std::size_t runs = 0;
    std::size_t converged = 0;
    double mean_kld_dagger = 0.0;
    double mean_delta_x = 0.0;
    double var_delta_x = 0.0;
    double mean_kld_hara = 0.0;
    double mean_kld_baseline = 0.0;
    double seconds = 0.0;
};
BatchSummary run_hara_batch(const RandomMarketSpec& spec, std::size_t runs, std::uint64_t base_seed);

// Runs jobs 0..jobs-1 on up to MUMARKET_THREADS workers (default: hardware
// concurrency); results must be written to per-index slots so the merge
// order is deterministic.
void parallel_for(std::size_t jobs, const std::function<void(std::size_t)>& fn);

// Two-trader three-security reference example: sweeps the candidate maker
// beliefs (the published description pins only two of three entries), picks
// the best fit against the row-1 reference prices, then reproduces every
// row under both alternating sequences.
struct Table2Report {
    std::vector<double> best_theta;
    double best_error = 0.0; // max abs price deviation on row 1
    bool sign_pattern_ok = false;
    // Supplementary diagnostic: row 1 also reproduces almost exactly under a
    // larger maker endowment with the uniform belief, although no single
    // parameter reading fits every published row.
    double alt_W0 = 5.0;
    double alt_error = 0.0;
    std::string csv;
};
Table2Report reproduce_table2(std::size_t max_rounds = 100000);

// Heuristic-weight verification batches over the random-market generator.
struct Table3Report {
    std::string csv;
    std::vector<BatchSummary> rows;
};
Table3Report reproduce_table3(std::size_t runs, std::uint64_t seed, bool full);

// KL divergence of the two approximate price formulas across gamma.
struct Fig2Report {
    std::string csv;
    std::vector<double> gammas;
    std::vector<double> kld_hara;
    std::vector<double> kld_baseline;
};
Fig2Report reproduce_fig2(std::size_t runs, std::uint64_t seed);

// Weight grid for the frontier sweep: deterministic interpolation for two
// traders, seeded Dirichlet samples otherwise.
std::string frontier_csv(const Market& market, std::size_t points, std::uint64_t seed);

} // namespace mumarket
