#include "mumarket/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mumarket/errors.hpp"

namespace mumarket {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

double get_number(const json& j, const std::string& where, const char* key) {
    if (!j.contains(key)) fail(where, std::string("missing field '") + key + "'");
    if (!j[key].is_number()) fail(where + "." + key, "expected a number");
    return j[key].get<double>();
}

double get_number_or(const json& j, const std::string& where, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) fail(where + "." + key, "expected a number");
    return j[key].get<double>();
}

std::string get_string(const json& j, const std::string& where, const char* key) {
    if (!j.contains(key)) fail(where, std::string("missing field '") + key + "'");
    if (!j[key].is_string()) fail(where + "." + key, "expected a string");
    return j[key].get<std::string>();
}

SimplexVector get_belief(const json& j, const std::string& where) {
    if (!j.contains("belief")) fail(where, "missing field 'belief'");
    const json& b = j["belief"];
    if (!b.is_array() || b.size() < 2) fail(where + ".belief", "expected an array of >= 2 numbers");
    std::vector<double> entries;
    entries.reserve(b.size());
    for (const auto& e : b) {
        if (!e.is_number()) fail(where + ".belief", "expected numeric entries");
        entries.push_back(e.get<double>());
    }
    try {
        return SimplexVector(std::move(entries));
    } catch (const std::exception& e) {
        fail(where + ".belief", e.what());
    }
}

PenaltySpec parse_penalty_json(const json& j, const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object");
    std::string family = get_string(j, where, "family");
    try {
        if (family == "relative_entropy") {
            return PenaltySpec::relative_entropy(get_belief(j, where), get_number(j, where, "beta"));
        }
        if (family == "power") {
            return PenaltySpec::power(get_belief(j, where), get_number(j, where, "gamma"),
                                      get_number(j, where, "h"));
        }
        if (family == "log") {
            return PenaltySpec::log(get_belief(j, where), get_number(j, where, "h"));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        fail(where, e.what());
    }
    fail(where + ".family", "unknown penalty family '" + family + "'");
}

UtilitySpec parse_utility_json(const json& j, const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object");
    std::string family = get_string(j, where, "family");
    try {
        if (family == "exponential") {
            return UtilitySpec::exponential(get_belief(j, where), get_number(j, where, "beta"));
        }
        if (family == "hara") {
            return UtilitySpec::hara(get_belief(j, where), get_number(j, where, "a"),
                                     get_number(j, where, "b"), get_number(j, where, "gamma"));
        }
        if (family == "crra") {
            return UtilitySpec::crra(get_belief(j, where), get_number(j, where, "gamma"));
        }
        if (family == "risk_measure") {
            if (!j.contains("penalty")) fail(where, "missing field 'penalty'");
            return UtilitySpec::risk_measure(parse_penalty_json(j["penalty"], where + ".penalty"));
        }
        if (family == "composite_entropic_log") {
            return UtilitySpec::composite_entropic_log(
                get_belief(j, where), get_number(j, where, "beta"), get_number(j, where, "eta"),
                get_number(j, where, "B"));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        fail(where, e.what());
    }
    fail(where + ".family", "unknown utility family '" + family + "'");
}

json penalty_to_json(const PenaltySpec& p) {
    json j;
    j["belief"] = p.belief().entries();
    if (const auto* re = p.as_relative_entropy()) {
        j["family"] = "relative_entropy";
        j["beta"] = re->beta;
    } else if (const auto* pw = p.as_power()) {
        j["family"] = "power";
        j["gamma"] = pw->gamma;
        j["h"] = pw->h;
    } else {
        j["family"] = "log";
        j["h"] = p.as_log()->h;
    }
    return j;
}

json utility_to_json(const UtilitySpec& u) {
    json j;
    switch (u.family()) {
        case UtilitySpec::Family::Exponential:
            j["family"] = "exponential";
            j["belief"] = u.belief().entries();
            j["beta"] = u.as_exponential()->beta;
            break;
        case UtilitySpec::Family::Hara:
            j["family"] = "hara";
            j["belief"] = u.belief().entries();
            j["a"] = u.as_hara()->a;
            j["b"] = u.as_hara()->b;
            j["gamma"] = u.as_hara()->gamma;
            break;
        case UtilitySpec::Family::Crra:
            j["family"] = "crra";
            j["belief"] = u.belief().entries();
            j["gamma"] = u.as_crra()->gamma;
            break;
        case UtilitySpec::Family::RiskMeasure:
            j["family"] = "risk_measure";
            j["penalty"] = penalty_to_json(*u.penalty());
            break;
        case UtilitySpec::Family::CompositeEntropicLog:
            j["family"] = "composite_entropic_log";
            j["belief"] = u.belief().entries();
            j["beta"] = u.as_composite()->beta;
            j["eta"] = u.as_composite()->eta;
            j["B"] = u.as_composite()->B;
            break;
    }
    return j;
}

TradingSequence parse_sequence_json(const json& j, std::size_t traders, const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object");
    std::string kind = get_string(j, where, "kind");
    std::size_t max_rounds = 100000;
    if (j.contains("max_rounds")) {
        if (!j["max_rounds"].is_number_unsigned() || j["max_rounds"].get<std::uint64_t>() == 0) {
            fail(where + ".max_rounds", "expected a positive integer");
        }
        max_rounds = j["max_rounds"].get<std::size_t>();
    }
    try {
        if (kind == "round_robin") {
            std::vector<std::size_t> order;
            if (j.contains("order")) {
                if (!j["order"].is_array()) fail(where + ".order", "expected an array");
                for (const auto& e : j["order"]) {
                    if (!e.is_number_unsigned() || e.get<std::uint64_t>() == 0) {
                        fail(where + ".order", "expected 1-based trader indices");
                    }
                    order.push_back(e.get<std::size_t>() - 1);
                }
            } else {
                for (std::size_t jdx = 0; jdx < traders; ++jdx) order.push_back(jdx);
            }
            return TradingSequence::round_robin(std::move(order), max_rounds);
        }
        if (kind == "random") {
            std::uint64_t seed = 0;
            if (j.contains("seed")) {
                if (!j["seed"].is_number_unsigned()) fail(where + ".seed", "expected an unsigned integer");
                seed = j["seed"].get<std::uint64_t>();
            }
            return TradingSequence::random(seed, max_rounds);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        fail(where, e.what());
    }
    fail(where + ".kind", "unknown sequence kind '" + kind + "'");
}

json sequence_to_json(const TradingSequence& s) {
    json j;
    if (s.kind == TradingSequence::Kind::RoundRobin) {
        j["kind"] = "round_robin";
        std::vector<std::size_t> order;
        for (std::size_t e : s.order) order.push_back(e + 1);
        j["order"] = order;
    } else {
        j["kind"] = "random";
        j["seed"] = s.seed;
    }
    j["max_rounds"] = s.max_rounds;
    return j;
}

} // namespace

RunOptions MarketConfig::run_options() const {
    RunOptions opts;
    opts.sequence = sequence;
    opts.trade_eps = trade_eps;
    opts.root_eps = root_eps;
    return opts;
}

MarketConfig parse_market_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    if (!j.contains("securities") || !j["securities"].is_number_unsigned()) {
        fail("config.securities", "expected a positive integer");
    }
    std::size_t securities = j["securities"].get<std::size_t>();
    if (securities < 2) fail("config.securities", "needs at least two outcomes");

    if (!j.contains("market_maker") || !j["market_maker"].is_object()) {
        fail("config.market_maker", "expected an object");
    }
    const json& mm = j["market_maker"];
    if (!mm.contains("utility")) fail("config.market_maker", "missing field 'utility'");
    UtilitySpec maker = parse_utility_json(mm["utility"], "config.market_maker.utility");
    double W0 = get_number(mm, "config.market_maker", "W0");

    if (!j.contains("traders") || !j["traders"].is_array() || j["traders"].empty()) {
        fail("config.traders", "expected a non-empty array");
    }
    std::vector<UtilitySpec> traders;
    std::vector<double> w0;
    std::size_t idx = 0;
    for (const auto& t : j["traders"]) {
        std::string where = "config.traders[" + std::to_string(idx) + "]";
        if (!t.is_object()) fail(where, "expected an object");
        if (!t.contains("utility")) fail(where, "missing field 'utility'");
        traders.push_back(parse_utility_json(t["utility"], where + ".utility"));
        w0.push_back(get_number(t, where, "w0"));
        ++idx;
    }

    MarketConfig config{Market{std::move(maker), W0, std::move(traders), std::move(w0)},
                        TradingSequence{},
                        1e-10,
                        1e-12,
                        "",
                        MarketConfig::Format::Csv};
    if (config.market.securities() != securities) {
        fail("config.securities", "does not match the market maker's belief dimension");
    }
    for (const auto& v : config.market.traders) {
        if (v.securities() != securities) {
            fail("config.traders", "a trader's belief dimension does not match 'securities'");
        }
    }
    try {
        config.market.validate();
    } catch (const std::exception& e) {
        fail("config", e.what());
    }

    if (j.contains("sequence")) {
        config.sequence = parse_sequence_json(j["sequence"], config.market.trader_count(),
                                              "config.sequence");
    } else {
        std::vector<std::size_t> order;
        for (std::size_t k = 0; k < config.market.trader_count(); ++k) order.push_back(k);
        config.sequence = TradingSequence::round_robin(std::move(order));
    }
    if (config.sequence.kind == TradingSequence::Kind::RoundRobin &&
        config.sequence.order.size() != config.market.trader_count()) {
        fail("config.sequence.order", "must be a permutation of 1..J");
    }

    if (j.contains("tolerances")) {
        const json& tol = j["tolerances"];
        if (!tol.is_object()) fail("config.tolerances", "expected an object");
        config.trade_eps = get_number_or(tol, "config.tolerances", "trade_eps", 1e-10);
        config.root_eps = get_number_or(tol, "config.tolerances", "root_eps", 1e-12);
        if (!(config.trade_eps > 0.0)) fail("config.tolerances.trade_eps", "must be positive");
        if (!(config.root_eps > 0.0)) fail("config.tolerances.root_eps", "must be positive");
    }
    if (j.contains("output")) {
        const json& out = j["output"];
        if (!out.is_object()) fail("config.output", "expected an object");
        if (out.contains("path")) config.output_path = get_string(out, "config.output", "path");
        if (out.contains("format")) {
            std::string fmt = get_string(out, "config.output", "format");
            if (fmt == "csv") {
                config.format = MarketConfig::Format::Csv;
            } else if (fmt == "json") {
                config.format = MarketConfig::Format::Json;
            } else {
                fail("config.output.format", "expected 'csv' or 'json'");
            }
        }
    }
    return config;
}

MarketConfig load_market_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_market_config(buf.str());
}

std::string serialize_market_config(const MarketConfig& config) {
    json j;
    j["securities"] = config.market.securities();
    j["market_maker"] = {{"utility", utility_to_json(config.market.maker)},
                         {"W0", config.market.W0}};
    json traders = json::array();
    for (std::size_t k = 0; k < config.market.trader_count(); ++k) {
        traders.push_back(
            {{"utility", utility_to_json(config.market.traders[k])}, {"w0", config.market.w0[k]}});
    }
    j["traders"] = std::move(traders);
    j["sequence"] = sequence_to_json(config.sequence);
    j["tolerances"] = {{"trade_eps", config.trade_eps}, {"root_eps", config.root_eps}};
    json out;
    out["path"] = config.output_path;
    out["format"] = config.format == MarketConfig::Format::Csv ? "csv" : "json";
    j["output"] = std::move(out);
    return j.dump(2);
}

UtilitySpec parse_utility(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("utility is not valid JSON: ") + e.what());
    }
    return parse_utility_json(j, "utility");
}

std::string serialize_utility(const UtilitySpec& spec) { return utility_to_json(spec).dump(2); }

PenaltySpec parse_penalty(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("penalty is not valid JSON: ") + e.what());
    }
    return parse_penalty_json(j, "penalty");
}

std::string serialize_penalty(const PenaltySpec& spec) { return penalty_to_json(spec).dump(2); }

std::string trajectory_json(const Market& market, const Trajectory& traj) {
    json rows = json::array();
    for (const Snapshot& s : traj.snapshots) {
        json row;
        row["t"] = s.t;
        row["trader"] = s.trader + 1;
        row["z"] = s.z;
        row["p"] = s.price.entries();
        row["V"] = s.trader_utilities;
        row["U"] = s.market_utility;
        rows.push_back(std::move(row));
    }
    json j;
    j["trades"] = std::move(rows);
    j["converged"] = traj.converged;
    j["rounds_used"] = traj.rounds_used;
    j["final_price"] = traj.final_price.entries();
    json final_x = json::array();
    for (const auto& xj : traj.final_state.x) final_x.push_back(xj.entries());
    j["final_x"] = std::move(final_x);
    j["final_y"] = traj.final_state.y.entries();
    (void)market;
    return j.dump(2);
}

} // namespace mumarket
