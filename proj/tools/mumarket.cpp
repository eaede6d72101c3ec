#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mumarket/config.hpp"
#include "mumarket/equilibrium.hpp"
#include "mumarket/errors.hpp"
#include "mumarket/experiments.hpp"
#include "mumarket/pricing.hpp"
#include "mumarket/trading.hpp"
#include "mumarket/verification.hpp"

namespace {

using namespace mumarket;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ' ';
        out += fmt(v[i]);
    }
    return out;
}

std::vector<double> parse_order(const std::string& text, std::size_t expected) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("order entry '" + item + "' is not a number");
        }
    }
    if (out.size() != expected) {
        throw ConfigError("order needs exactly " + std::to_string(expected) + " entries");
    }
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write to '" + path + "'");
    out << content;
}

int cmd_simulate(const std::string& config_path, const std::string& out_override,
                 const std::string& format_override, std::uint64_t seed, bool seed_set,
                 std::size_t max_rounds, double eps) {
    MarketConfig config = load_market_config(config_path);
    if (seed_set) {
        if (config.sequence.kind != TradingSequence::Kind::Random) {
            config.sequence = TradingSequence::random(seed, config.sequence.max_rounds);
        } else {
            config.sequence.seed = seed;
        }
    }
    if (max_rounds > 0) config.sequence.max_rounds = max_rounds;
    if (eps > 0.0) config.trade_eps = eps;
    if (!out_override.empty()) config.output_path = out_override;
    if (!format_override.empty()) {
        config.format = format_override == "json" ? MarketConfig::Format::Json
                                                  : MarketConfig::Format::Csv;
    }

    Trajectory traj = run(config.market, config.run_options());
    if (!config.output_path.empty()) {
        write_file(config.output_path, config.format == MarketConfig::Format::Csv
                                           ? trajectory_csv(config.market, traj)
                                           : trajectory_json(config.market, traj));
    }
    std::cout << "converged: " << (traj.converged ? "true" : "false") << "\n";
    std::cout << "rounds_used: " << traj.rounds_used << "\n";
    std::cout << "final_price: " << join(traj.final_price.entries()) << "\n";
    if (traj.converged) {
        ConvergenceReport rep = convergence_report(config.market, traj);
        std::cout << "max_kkt_residual: " << fmt(rep.max_kkt_residual) << "\n";
        return 0;
    }
    std::cout << "max_kkt_residual: n/a\n";
    return 2;
}

int cmd_price(const std::string& config_path, const std::string& order_text) {
    MarketConfig config = load_market_config(config_path);
    const Market& market = config.market;
    std::vector<double> dq = parse_order(order_text, market.securities());
    WealthVector y = WealthVector::constant(market.securities(), market.W0);
    Quote quote = price_order(market.maker, y, market.W0, dq, config.root_eps);
    std::cout << "delta_w: " << fmt(quote.delta_w) << "\n";
    std::cout << "post_price: " << join(instantaneous_price(market.maker, quote.post_y).entries())
              << "\n";
    return 0;
}

int cmd_frontier(const std::string& config_path, std::size_t points, std::uint64_t seed,
                 const std::string& out_path) {
    MarketConfig config = load_market_config(config_path);
    std::string csv = frontier_csv(config.market, points, seed);
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        write_file(out_path, csv);
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

int cmd_formulas(const std::string& kind, const std::string& config_path, double gamma_flag,
                 const std::string& h_text) {
    MarketConfig config = load_market_config(config_path);
    const Market& market = config.market;
    if (kind == "exp-limit") {
        const auto* maker = market.maker.as_exponential();
        if (!maker) throw ConfigError("exp-limit needs an all-exponential market");
        std::vector<SimplexVector> beliefs;
        std::vector<double> alphas;
        for (const auto& t : market.traders) {
            const auto* v = t.as_exponential();
            if (!v) throw ConfigError("exp-limit needs an all-exponential market");
            beliefs.push_back(v->belief);
            alphas.push_back(v->beta);
        }
        std::cout << "price: "
                  << join(exp_limiting_price(maker->belief, maker->beta, beliefs, alphas).entries())
                  << "\n";
        return 0;
    }
    if (kind == "hara-approx" || kind == "omega-dagger") {
        const auto* maker = market.maker.as_hara();
        if (!maker) throw ConfigError(kind + " needs an all-hara market");
        std::vector<SimplexVector> beliefs;
        std::vector<double> omega(market.trader_count()), w_hat(market.trader_count());
        for (std::size_t j = 0; j < market.trader_count(); ++j) {
            const auto* v = market.traders[j].as_hara();
            if (!v) throw ConfigError(kind + " needs an all-hara market");
            beliefs.push_back(v->belief);
            omega[j] = omega_dagger({v->a}, {v->b}, {market.w0[j]}, v->gamma)[0];
            w_hat[j] = market.w0[j] + (1.0 - maker->gamma) * v->b / v->a;
        }
        if (kind == "omega-dagger") {
            std::cout << "omega_dagger: " << join(omega) << "\n";
            return 0;
        }
        double w_hat0 = market.W0 + (1.0 - maker->gamma) * maker->b / maker->a;
        std::cout << "price: "
                  << join(hara_approx_price(maker->belief, beliefs, w_hat0, w_hat, maker->gamma)
                              .entries())
                  << "\n";
        return 0;
    }
    if (kind == "aggregate") {
        std::vector<PenaltySpec> penalties;
        if (!market.maker.penalty()) throw ConfigError("aggregate needs a risk-measure market");
        penalties.push_back(*market.maker.penalty());
        for (const auto& t : market.traders) {
            if (!t.penalty()) throw ConfigError("aggregate needs a risk-measure market");
            penalties.push_back(*t.penalty());
        }
        SimplexVector price = aggregate_penalty_price(penalties, config.root_eps);
        std::cout << "price: " << join(price.entries()) << "\n";
        std::cout << "stationary: "
                  << (classify_penalty_stationary(penalties, price) == StationaryKind::Minimum
                          ? "minimum"
                          : "maximum")
                  << "\n";
        return 0;
    }
    if (kind == "power-mean") {
        if (h_text.empty()) throw ConfigError("power-mean needs --weights (maker first)");
        std::vector<double> h = parse_order(h_text, market.trader_count() + 1);
        std::vector<SimplexVector> beliefs;
        for (const auto& t : market.traders) beliefs.push_back(t.belief());
        std::cout << "price: "
                  << join(power_mean_price(market.maker.belief(), beliefs, h, gamma_flag).entries())
                  << "\n";
        return 0;
    }
    throw ConfigError("unknown formulas kind '" + kind +
                      "' (expected exp-limit, hara-approx, omega-dagger, aggregate, power-mean)");
}

int cmd_reproduce(const std::string& what, const std::string& out_dir, std::size_t runs,
                  std::uint64_t seed, bool full) {
    std::string prefix = out_dir.empty() ? "" : out_dir + "/";
    if (what == "table2") {
        Table2Report rep = reproduce_table2();
        write_file(prefix + "table2.csv", rep.csv);
        std::cout << "best maker belief: " << join(rep.best_theta) << "\n";
        std::cout << "row-1 max abs price error: " << fmt(rep.best_error) << "\n";
        std::cout << "utility asymmetry sign reproduced: "
                  << (rep.sign_pattern_ok ? "true" : "false") << "\n";
        std::cout << "wrote " << prefix << "table2.csv\n";
        return 0;
    }
    if (what == "table3") {
        Table3Report rep = reproduce_table3(runs, seed, full);
        write_file(prefix + "table3.csv", rep.csv);
        std::cout << rep.csv;
        std::cout << "wrote " << prefix << "table3.csv\n";
        return 0;
    }
    if (what == "fig2") {
        Fig2Report rep = reproduce_fig2(runs, seed);
        write_file(prefix + "fig2.csv", rep.csv);
        std::cout << rep.csv;
        std::cout << "wrote " << prefix << "fig2.csv\n";
        return 0;
    }
    throw ConfigError("unknown reproduce target '" + what + "' (expected table2, table3, fig2)");
}

int cmd_verify(double eps, std::uint64_t seed, std::size_t runs) {
    VerifyOptions options;
    if (eps > 0.0) options.trade_eps = eps;
    options.seed = seed;
    options.batch_runs = runs;
    VerifyReport report = run_verification(options);
    for (const auto& check : report.checks) {
        std::cout << (check.pass ? "[PASS] " : (check.binding ? "[FAIL] " : "[FLAG] "))
                  << check.name << "\n        " << check.detail << "\n";
    }
    bool ok = report.all_binding_pass();
    std::cout << (ok ? "verification passed" : "verification FAILED") << "\n";
    return ok ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mumarket: utility-preserving prediction-market laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_path, format, order_text, formulas_kind, reproduce_what, h_text;
    std::uint64_t seed = 0;
    std::size_t max_rounds = 0, points = 33, runs = 100;
    double eps = 0.0, gamma_flag = 0.0;
    bool full = false;

    auto* simulate = app.add_subcommand("simulate", "run a trading process to convergence");
    simulate->add_option("--config", config_path, "market config (JSON)")->required();
    simulate->add_option("--out", out_path, "trajectory output path");
    simulate->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    auto* seed_opt = simulate->add_option("--seed", seed, "random-sequence seed override");
    simulate->add_option("--max-rounds", max_rounds, "sweep budget override");
    simulate->add_option("--eps", eps, "convergence trade epsilon override");

    auto* price = app.add_subcommand("price", "price one order from the initial state");
    price->add_option("--config", config_path, "market config (JSON)")->required();
    price->add_option("--order", order_text, "comma-separated security quantities")->required();

    auto* frontier = app.add_subcommand("frontier", "sweep the utility frontier");
    frontier->add_option("--config", config_path, "market config (JSON)")->required();
    frontier->add_option("--points", points, "number of weight vectors");
    frontier->add_option("--seed", seed, "weight sampling seed");
    frontier->add_option("--out", out_path, "CSV output path (default stdout)");

    auto* formulas = app.add_subcommand("formulas", "closed-form and approximate prices");
    formulas->add_option("kind", formulas_kind,
                         "exp-limit | hara-approx | omega-dagger | aggregate | power-mean")
        ->required();
    formulas->add_option("--config", config_path, "market config (JSON)")->required();
    formulas->add_option("--gamma", gamma_flag, "power-mean exponent parameter");
    formulas->add_option("--weights", h_text, "power-mean weights, maker first");

    auto* reproduce = app.add_subcommand("reproduce", "reference experiment reproduction");
    reproduce->add_option("what", reproduce_what, "table2 | table3 | fig2")->required();
    reproduce->add_option("--out", out_path, "output directory (default .)");
    reproduce->add_option("--runs", runs, "simulations per batch");
    reproduce->add_option("--seed", seed, "base seed");
    reproduce->add_flag("--full", full, "include the large-population rows");

    auto* verify = app.add_subcommand("verify", "run the full verification suite");
    verify->add_option("--eps", eps, "convergence trade epsilon override");
    verify->add_option("--seed", seed, "suite seed")->default_val(0x5eed0001ULL);
    verify->add_option("--runs", runs, "batch size for the weighting-quality checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            return cmd_simulate(config_path, out_path, format, seed, seed_opt->count() > 0,
                                max_rounds, eps);
        }
        if (price->parsed()) return cmd_price(config_path, order_text);
        if (frontier->parsed()) return cmd_frontier(config_path, points, seed, out_path);
        if (formulas->parsed()) return cmd_formulas(formulas_kind, config_path, gamma_flag, h_text);
        if (reproduce->parsed()) return cmd_reproduce(reproduce_what, out_path, runs, seed, full);
        if (verify->parsed()) return cmd_verify(eps, seed, runs);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
