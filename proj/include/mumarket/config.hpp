#pragma once

#include <string>

#include "mumarket/penalty.hpp"
#include "mumarket/trading.hpp"
#include "mumarket/utility.hpp"

namespace mumarket {

// Experiment configuration: a market, a trading sequence, tolerances and an
// output sink, with a canonical JSON encoding (the only config format).
struct MarketConfig {
    Market market;
    TradingSequence sequence;
    double trade_eps = 1e-10;
    double root_eps = 1e-12;
    std::string output_path; // empty: stdout summary only
    enum class Format { Csv, Json } format = Format::Csv;

    RunOptions run_options() const;
};

// Throw ConfigError naming the offending field on any malformed input.
MarketConfig parse_market_config(const std::string& json_text);
MarketConfig load_market_config(const std::string& path);
std::string serialize_market_config(const MarketConfig& config);

UtilitySpec parse_utility(const std::string& json_text);
std::string serialize_utility(const UtilitySpec& spec);
PenaltySpec parse_penalty(const std::string& json_text);
std::string serialize_penalty(const PenaltySpec& spec);

// JSON mirror of the trajectory CSV schema.
std::string trajectory_json(const Market& market, const Trajectory& traj);

} // namespace mumarket
