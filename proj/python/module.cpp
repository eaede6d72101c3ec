#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mumarket/config.hpp"
#include "mumarket/equilibrium.hpp"
#include "mumarket/pricing.hpp"
#include "mumarket/trading.hpp"
#include "mumarket/best_response.hpp"

namespace py = pybind11;
using namespace mumarket;

namespace {

std::vector<SimplexVector> to_beliefs(const std::vector<std::vector<double>>& raw) {
    std::vector<SimplexVector> out;
    out.reserve(raw.size());
    for (const auto& b : raw) out.emplace_back(b);
    return out;
}

py::dict simulate_config(const std::string& config_json) {
    MarketConfig config = parse_market_config(config_json);
    Trajectory traj = run(config.market, config.run_options());
    py::dict out;
    out["converged"] = traj.converged;
    out["rounds_used"] = traj.rounds_used;
    out["final_price"] = traj.final_price.entries();
    std::vector<std::vector<double>> final_x;
    for (const auto& xj : traj.final_state.x) final_x.push_back(xj.entries());
    out["final_x"] = final_x;
    out["final_y"] = traj.final_state.y.entries();
    if (traj.converged) {
        ConvergenceReport rep = convergence_report(config.market, traj);
        out["max_kkt_residual"] = rep.max_kkt_residual;
        out["omega"] = rep.omega;
    }
    return out;
}

py::dict price_order_py(const std::string& utility_json, const std::vector<double>& y, double W0,
                        const std::vector<double>& dq) {
    UtilitySpec u = parse_utility(utility_json);
    Quote q = price_order(u, WealthVector(y), W0, dq);
    py::dict out;
    out["delta_w"] = q.delta_w;
    out["post_y"] = q.post_y.entries();
    out["post_price"] = instantaneous_price(u, q.post_y).entries();
    return out;
}

py::dict best_response_py(const std::string& trader_json, const std::string& maker_json,
                          const std::vector<double>& x, const std::vector<double>& y, double W0) {
    BestResponse br = best_response(parse_utility(trader_json), parse_utility(maker_json),
                                    WealthVector(x), WealthVector(y), W0);
    py::dict out;
    out["z"] = br.z.entries();
    out["utility_gain"] = br.trader_utility_gain;
    out["kkt_residual"] = br.kkt_residual;
    return out;
}

py::dict solve_pareto_py(const std::string& config_json, const std::vector<double>& omega) {
    MarketConfig config = parse_market_config(config_json);
    ParetoSolution sol = solve_pareto(omega, config.market.maker, config.market.W0,
                                      config.market.traders, config.market.w0, config.root_eps);
    py::dict out;
    out["price"] = sol.price.entries();
    std::vector<std::vector<double>> x;
    for (const auto& xj : sol.x_star) x.push_back(xj.entries());
    out["x"] = x;
    out["y"] = sol.y_star.entries();
    out["kkt_residual"] = sol.kkt_residual;
    return out;
}

} // namespace

PYBIND11_MODULE(_mumarket, m) {
    m.doc() = "utility-preserving prediction market laboratory";

    m.def("simulate", &simulate_config, py::arg("config_json"),
          "run a trading process from a JSON config and return the limit");
    m.def("price_order", &price_order_py, py::arg("utility_json"), py::arg("y"), py::arg("W0"),
          py::arg("dq"), "utility-preserving charge for one order");
    m.def(
        "instantaneous_price",
        [](const std::string& utility_json, const std::vector<double>& y) {
            UtilitySpec u = parse_utility(utility_json);
            return instantaneous_price(u, WealthVector(y)).entries();
        },
        py::arg("utility_json"), py::arg("y"));
    m.def(
        "utility_value",
        [](const std::string& utility_json, const std::vector<double>& w) {
            return parse_utility(utility_json).value(WealthVector(w));
        },
        py::arg("utility_json"), py::arg("w"));
    m.def(
        "utility_gradient",
        [](const std::string& utility_json, const std::vector<double>& w) {
            return parse_utility(utility_json).gradient(WealthVector(w));
        },
        py::arg("utility_json"), py::arg("w"));
    m.def("best_response", &best_response_py, py::arg("trader_json"), py::arg("maker_json"),
          py::arg("x"), py::arg("y"), py::arg("W0"));
    m.def("solve_pareto", &solve_pareto_py, py::arg("config_json"), py::arg("omega"));
    m.def(
        "exp_limiting_price",
        [](const std::vector<double>& theta, double beta,
           const std::vector<std::vector<double>>& beliefs, const std::vector<double>& alphas) {
            return exp_limiting_price(SimplexVector(theta), beta, to_beliefs(beliefs), alphas)
                .entries();
        },
        py::arg("theta"), py::arg("beta"), py::arg("beliefs"), py::arg("alphas"));
    m.def(
        "exp_price_update",
        [](const std::vector<double>& p, const std::vector<double>& x,
           const std::vector<double>& pi, double alpha, double beta) {
            return exp_price_update(SimplexVector(p), WealthVector(x), SimplexVector(pi), alpha,
                                    beta)
                .entries();
        },
        py::arg("p"), py::arg("x"), py::arg("pi"), py::arg("alpha"), py::arg("beta"));
    m.def(
        "power_mean_price",
        [](const std::vector<double>& theta, const std::vector<std::vector<double>>& beliefs,
           const std::vector<double>& h, double gamma) {
            return power_mean_price(SimplexVector(theta), to_beliefs(beliefs), h, gamma).entries();
        },
        py::arg("theta"), py::arg("beliefs"), py::arg("h"), py::arg("gamma"));
    m.def(
        "hara_approx_price",
        [](const std::vector<double>& theta, const std::vector<std::vector<double>>& beliefs,
           double w_hat0, const std::vector<double>& w_hat, double gamma) {
            return hara_approx_price(SimplexVector(theta), to_beliefs(beliefs), w_hat0, w_hat,
                                     gamma)
                .entries();
        },
        py::arg("theta"), py::arg("beliefs"), py::arg("w_hat0"), py::arg("w_hat"),
        py::arg("gamma"));
    m.def("omega_dagger", &omega_dagger, py::arg("a"), py::arg("b"), py::arg("w0"),
          py::arg("gamma"));
    m.def(
        "aggregate_penalty_price",
        [](const std::vector<std::string>& penalties_json) {
            std::vector<PenaltySpec> penalties;
            for (const auto& text : penalties_json) penalties.push_back(parse_penalty(text));
            return aggregate_penalty_price(penalties).entries();
        },
        py::arg("penalties_json"));
    m.def(
        "kld",
        [](const std::vector<double>& p, const std::vector<double>& q) {
            return kld(SimplexVector(p), SimplexVector(q));
        },
        py::arg("p"), py::arg("q"));
}
