#include "mumarket/trading.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include "mumarket/best_response.hpp"
#include "mumarket/errors.hpp"
#include "mumarket/pricing.hpp"
#include "mumarket/rng.hpp"

namespace mumarket {

void Market::validate() const {
    if (traders.size() != w0.size()) throw std::invalid_argument("market: traders/wealths size mismatch");
    if (traders.empty()) throw std::invalid_argument("market: needs at least one trader");
    if (!(W0 > 0.0)) throw std::invalid_argument("market: maker wealth must be positive");
    const std::size_t n = securities();
    for (const auto& v : traders) {
        if (v.securities() != n) throw std::invalid_argument("market: inconsistent security count");
    }
    for (double w : w0) {
        if (!(w > 0.0)) throw std::invalid_argument("market: trader wealth must be positive");
    }
    if (!maker.domain_contains(WealthVector::constant(n, W0))) {
        throw std::invalid_argument("market: maker initial position outside domain");
    }
    for (std::size_t j = 0; j < traders.size(); ++j) {
        if (!traders[j].domain_contains(WealthVector::constant(n, w0[j]))) {
            throw std::invalid_argument("market: trader initial position outside domain");
        }
    }
}

TradingSequence TradingSequence::round_robin(std::vector<std::size_t> order, std::size_t max_rounds) {
    TradingSequence s;
    s.kind = Kind::RoundRobin;
    s.order = std::move(order);
    s.max_rounds = max_rounds;
    std::vector<std::size_t> sorted = s.order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t j = 0; j < sorted.size(); ++j) {
        if (sorted[j] != j) throw std::invalid_argument("round-robin order must be a permutation");
    }
    if (s.order.empty()) throw std::invalid_argument("round-robin order must be non-empty");
    if (!(max_rounds > 0)) throw std::invalid_argument("max_rounds must be positive");
    return s;
}

TradingSequence TradingSequence::random(std::uint64_t seed, std::size_t max_rounds) {
    TradingSequence s;
    s.kind = Kind::Random;
    s.seed = seed;
    s.max_rounds = max_rounds;
    if (!(max_rounds > 0)) throw std::invalid_argument("max_rounds must be positive");
    return s;
}

namespace {

Snapshot make_snapshot(const Market& market, const MarketState& state, std::size_t trader,
                       const TradeDelta& z) {
    Snapshot s{state.t, trader, z.entries(), instantaneous_price(market.maker, state.y), {}, 0.0};
    s.trader_utilities.reserve(market.trader_count());
    for (std::size_t k = 0; k < market.trader_count(); ++k) {
        s.trader_utilities.push_back(market.traders[k].value(state.x[k]));
    }
    s.market_utility = market.maker.value(state.y);
    return s;
}

BestResponse trade_or_rethrow(const Market& market, const MarketState& state, std::size_t j,
                              double root_eps) {
    try {
        return best_response(market.traders[j], market.maker, state.x[j], state.y, market.W0,
                             root_eps);
    } catch (const NumericalError& e) {
        throw NumericalError("t=" + std::to_string(state.t) + " trader=" + std::to_string(j + 1) +
                             ": " + e.what());
    }
}

} // namespace

Trajectory run(const Market& market, const RunOptions& options) {
    market.validate();
    const std::size_t J = market.trader_count();
    MarketState state = MarketState::initial(market.W0, market.w0, market.securities());

    Trajectory traj{{}, state, instantaneous_price(market.maker, state.y), false, 0};

    auto do_trade = [&](std::size_t j) {
        BestResponse br = trade_or_rethrow(market, state, j, options.root_eps);
        state = apply_trade(state, j, br.z);
        if (options.record_snapshots) {
            traj.snapshots.push_back(make_snapshot(market, state, j, br.z));
        }
        return br.z.max_abs();
    };

    if (options.sequence.kind == TradingSequence::Kind::RoundRobin) {
        if (options.sequence.order.size() != J) {
            throw std::invalid_argument("round-robin order must cover every trader exactly once");
        }
        for (std::size_t sweep = 0; sweep < options.sequence.max_rounds; ++sweep) {
            bool all_vacuous = true;
            for (std::size_t j : options.sequence.order) {
                if (do_trade(j) > options.trade_eps) all_vacuous = false;
            }
            traj.rounds_used = sweep + 1;
            if (all_vacuous) {
                traj.converged = true;
                break;
            }
        }
    } else {
        SplitMix64 rng(options.sequence.seed);
        // Converged once the last 20*J consecutive draws were all vacuous and
        // covered every trader at least once.
        const std::size_t window = 20 * J;
        std::size_t streak = 0;
        std::set<std::size_t> covered;
        const std::size_t max_draws = options.sequence.max_rounds * J;
        for (std::size_t draw = 0; draw < max_draws; ++draw) {
            std::size_t j = rng.below(J);
            if (do_trade(j) <= options.trade_eps) {
                ++streak;
                covered.insert(j);
            } else {
                streak = 0;
                covered.clear();
            }
            traj.rounds_used = draw / J + 1;
            if (streak >= window && covered.size() == J) {
                traj.converged = true;
                break;
            }
        }
    }

    traj.final_state = state;
    traj.final_price = instantaneous_price(market.maker, state.y);
    return traj;
}

ConvergenceReport convergence_report(const Market& market, const Trajectory& traj) {
    if (!traj.converged) throw std::logic_error("convergence report requires a converged trajectory");
    const MarketState& state = traj.final_state;
    std::vector<double> gu = market.maker.gradient(state.y);
    double uu = 0.0;
    for (double g : gu) uu += g * g;

    ConvergenceReport report;
    report.omega.resize(market.trader_count());
    report.trader_kkt.resize(market.trader_count());
    for (std::size_t j = 0; j < market.trader_count(); ++j) {
        std::vector<double> gv = market.traders[j].gradient(state.x[j]);
        double vu = 0.0;
        for (std::size_t i = 0; i < gv.size(); ++i) vu += gv[i] * gu[i];
        double zeta = vu / uu;
        report.omega[j] = 1.0 / zeta;
        report.trader_kkt[j] = stationarity_residual(gv, gu);
        report.max_kkt_residual = std::max(report.max_kkt_residual, report.trader_kkt[j]);
    }
    double sum = 0.0;
    for (double w : report.omega) sum += w;
    for (double& w : report.omega) w *= static_cast<double>(market.trader_count()) / sum;
    return report;
}

namespace {

void append_double(std::string& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

} // namespace

std::string trajectory_csv(const Market& market, const Trajectory& traj) {
    const std::size_t I = market.securities();
    const std::size_t J = market.trader_count();
    std::string out = "t,trader";
    for (std::size_t i = 1; i <= I; ++i) out += ",z_" + std::to_string(i);
    for (std::size_t i = 1; i <= I; ++i) out += ",p_" + std::to_string(i);
    for (std::size_t j = 1; j <= J; ++j) out += ",V_" + std::to_string(j);
    out += ",U\n";
    for (const Snapshot& s : traj.snapshots) {
        out += std::to_string(s.t);
        out += ',';
        out += std::to_string(s.trader + 1);
        for (double z : s.z) {
            out += ',';
            append_double(out, z);
        }
        for (std::size_t i = 0; i < I; ++i) {
            out += ',';
            append_double(out, s.price[i]);
        }
        for (double v : s.trader_utilities) {
            out += ',';
            append_double(out, v);
        }
        out += ',';
        append_double(out, s.market_utility);
        out += '\n';
    }
    return out;
}

} // namespace mumarket
