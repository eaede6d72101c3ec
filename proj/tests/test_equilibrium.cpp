#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "mumarket/equilibrium.hpp"
#include "mumarket/rng.hpp"
#include "mumarket/trading.hpp"
#include "mumarket/verification.hpp"

using namespace mumarket;

TEST_CASE("symmetric market solves to the no-trade point") {
    SimplexVector belief({0.3, 0.45, 0.25});
    UtilitySpec maker = UtilitySpec::crra(belief, 0.5);
    std::vector<UtilitySpec> traders = {UtilitySpec::crra(belief, 0.5),
                                        UtilitySpec::crra(belief, 0.5)};
    ParetoSolution sol = solve_pareto({1.0, 1.0}, maker, 2.0, traders, {3.0, 3.0});
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(sol.y_star[i] == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(sol.x_star[0][i] == doctest::Approx(3.0).epsilon(1e-9));
        CHECK(sol.x_star[1][i] == doctest::Approx(3.0).epsilon(1e-9));
        CHECK(sol.price[i] == doctest::Approx(belief[i]).epsilon(1e-9));
    }
    CHECK(sol.kkt_residual <= 1e-8);
}

TEST_CASE("exponential frontier with inverse risk-aversion weights hits the closed form") {
    SimplexVector theta({0.3, 0.3, 0.4});
    std::vector<SimplexVector> beliefs = {SimplexVector({0.7, 0.1, 0.2}),
                                          SimplexVector({0.2, 0.6, 0.2})};
    std::vector<double> alphas = {0.8, 1.6};
    double beta = 1.2;
    UtilitySpec maker = UtilitySpec::exponential(theta, beta);
    std::vector<UtilitySpec> traders = {UtilitySpec::exponential(beliefs[0], alphas[0]),
                                        UtilitySpec::exponential(beliefs[1], alphas[1])};
    std::vector<double> omega = {1.0 / alphas[0], 1.0 / alphas[1]};
    ParetoSolution sol = solve_pareto(omega, maker, 3.0, traders, {4.0, 2.0});
    SimplexVector expected = exp_limiting_price(theta, beta, beliefs, alphas);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(sol.price[i] == doctest::Approx(expected[i]).epsilon(1e-9));
    }
}

TEST_CASE("frontier solve is invariant to weight rescaling and non-dominated") {
    SimplexVector theta({0.25, 0.5, 0.25});
    UtilitySpec maker = UtilitySpec::hara(theta, 1.0, 0.8, 0.5);
    std::vector<UtilitySpec> traders = {
        UtilitySpec::hara(SimplexVector({0.2, 0.2, 0.6}), 1.0, 0.0, 0.5),
        UtilitySpec::hara(SimplexVector({0.6, 0.1, 0.3}), 1.0, 0.0, 0.5)};
    std::vector<double> w0 = {10.0, 10.0};

    ParetoSolution a = solve_pareto({0.4, 0.6}, maker, 1.0, traders, w0);
    ParetoSolution b = solve_pareto({4.0, 6.0}, maker, 1.0, traders, w0);
    for (std::size_t j = 0; j < 2; ++j) {
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(a.x_star[j][i] == doctest::Approx(b.x_star[j][i]).epsilon(1e-9));
        }
    }

    // sweep the frontier; no point may dominate another
    std::vector<std::pair<double, double>> utilities;
    for (int k = 1; k <= 9; ++k) {
        double lam = k / 10.0;
        ParetoSolution sol = solve_pareto({lam, 1.0 - lam}, maker, 1.0, traders, w0);
        utilities.emplace_back(traders[0].value(sol.x_star[0]), traders[1].value(sol.x_star[1]));
        CHECK(sol.kkt_residual <= 1e-8);
    }
    for (std::size_t a_idx = 0; a_idx < utilities.size(); ++a_idx) {
        for (std::size_t b_idx = 0; b_idx < utilities.size(); ++b_idx) {
            if (a_idx == b_idx) continue;
            bool dominates = utilities[a_idx].first >= utilities[b_idx].first + 1e-9 &&
                             utilities[a_idx].second >= utilities[b_idx].second + 1e-9;
            CHECK_FALSE(dominates);
        }
    }
}

TEST_CASE("solve_pareto rejects unsupported families and bad weights") {
    UtilitySpec rm = UtilitySpec::risk_measure(
        PenaltySpec::relative_entropy(SimplexVector({0.5, 0.5}), 1.0));
    UtilitySpec exp_u = UtilitySpec::exponential(SimplexVector({0.5, 0.5}), 1.0);
    CHECK_THROWS_AS(solve_pareto({1.0}, rm, 1.0, {exp_u}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(solve_pareto({0.0}, exp_u, 1.0, {exp_u}, {1.0}), std::invalid_argument);
}

TEST_CASE("risk-measure equilibrium: single agreeing trader keeps the maker belief") {
    SimplexVector theta({0.3, 0.45, 0.25});
    std::vector<PenaltySpec> penalties = {PenaltySpec::relative_entropy(theta, 1.0),
                                          PenaltySpec::relative_entropy(theta, 0.7)};
    ParetoSolution sol = risk_measure_equilibrium(penalties, 2.0, {3.0});
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(sol.price[i] == doctest::Approx(theta[i]).epsilon(1e-9));
    }
    CHECK(sol.kkt_residual <= 1e-8);
}

TEST_CASE("risk-measure equilibrium price survives the brute-force oracle") {
    std::vector<PenaltySpec> penalties = {
        PenaltySpec::relative_entropy(SimplexVector({0.3, 0.4, 0.3}), 1.0),
        PenaltySpec::relative_entropy(SimplexVector({0.6, 0.2, 0.2}), 0.8),
        PenaltySpec::relative_entropy(SimplexVector({0.1, 0.4, 0.5}), 2.0)};
    SimplexVector agg = aggregate_penalty_price(penalties);
    auto total = [&](const std::vector<double>& q) {
        SimplexVector sq(q);
        double s = 0.0;
        for (const auto& pen : penalties) s += pen.value(sq);
        return s;
    };
    SimplexVector brute(optimize_on_simplex(total, 3, /*maximize=*/false));
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::abs(agg[i] - brute[i]) <= 1e-8);
    }
    CHECK(classify_penalty_stationary(penalties, agg) == StationaryKind::Minimum);

    ParetoSolution eq = risk_measure_equilibrium(penalties, 5.0, {5.0, 5.0});
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::abs(eq.price[i] - agg[i]) <= 1e-7);
    }
    // conservation and binding of the recovered allocation
    double w_all = 15.0;
    for (std::size_t i = 0; i < 3; ++i) {
        double total_i = eq.y_star[i] + eq.x_star[0][i] + eq.x_star[1][i];
        CHECK(total_i == doctest::Approx(w_all).epsilon(1e-9));
    }
}

TEST_CASE("aggregate price closed forms") {
    // log penalties aggregate to the weighted arithmetic mean
    std::vector<PenaltySpec> logs = {PenaltySpec::log(SimplexVector({0.5, 0.5}), 1.0),
                                     PenaltySpec::log(SimplexVector({0.8, 0.2}), 1.0)};
    SimplexVector mean = aggregate_penalty_price(logs);
    CHECK(mean[0] == doctest::Approx(0.65).epsilon(1e-12));
    CHECK(mean[1] == doctest::Approx(0.35).epsilon(1e-12));
    CHECK(classify_penalty_stationary(logs, mean) == StationaryKind::Maximum);

    // power penalties at gamma near zero approach the same arithmetic mean
    for (double gamma : {1e-6, -1e-6}) {
        std::vector<PenaltySpec> powers = {
            PenaltySpec::power(SimplexVector({0.5, 0.5}), gamma, 1.0),
            PenaltySpec::power(SimplexVector({0.8, 0.2}), gamma, 1.0)};
        SimplexVector p = aggregate_penalty_price(powers);
        CHECK(p[0] == doctest::Approx(0.65).epsilon(1e-5));
    }

    // mixed families are rejected
    std::vector<PenaltySpec> mixed = {PenaltySpec::log(SimplexVector({0.5, 0.5}), 1.0),
                                      PenaltySpec::relative_entropy(SimplexVector({0.5, 0.5}), 1.0)};
    CHECK_THROWS_AS(aggregate_penalty_price(mixed), std::invalid_argument);
}

TEST_CASE("one-step exponential price update") {
    SimplexVector p({0.5, 0.5});
    SimplexVector pi({0.8, 0.2});

    // an almost infinitely risk-averse trader moves nothing
    SimplexVector frozen = exp_price_update(p, WealthVector({1.5, 1.5}), pi, 1e12, 1.0);
    CHECK(std::abs(frozen[0] - p[0]) <= 1e-9);

    // fixed point: belief equal to price at uniform wealth
    SimplexVector fixed = exp_price_update(p, WealthVector::constant(2, 3.0), p, 1.0, 1.0);
    CHECK(fixed[0] == doctest::Approx(p[0]).epsilon(1e-12));

    // hand-worked update from uniform positions
    SimplexVector updated = exp_price_update(p, WealthVector::constant(2, 1.0), pi, 1.0, 1.0);
    CHECK(updated[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("limiting price formula iterates the one-step update to its fixed point") {
    SimplexVector theta({0.3, 0.3, 0.4});
    std::vector<SimplexVector> beliefs = {SimplexVector({0.7, 0.1, 0.2}),
                                          SimplexVector({0.2, 0.6, 0.2})};
    std::vector<double> alphas = {0.8, 1.6};
    SimplexVector limit = exp_limiting_price(theta, 1.2, beliefs, alphas);
    // all beliefs equal theta collapses to theta
    SimplexVector same = exp_limiting_price(theta, 1.2, {theta, theta}, alphas);
    for (std::size_t i = 0; i < 3; ++i) CHECK(same[i] == doctest::Approx(theta[i]).epsilon(1e-12));
    // single trader with alpha = beta mixes with equal weights
    SimplexVector pair = exp_limiting_price(SimplexVector({0.5, 0.5}), 1.0,
                                            {SimplexVector({0.8, 0.2})}, {1.0});
    CHECK(pair[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(limit[0] > 0.0);
}

TEST_CASE("power mean price properties") {
    SimplexVector theta({0.5, 0.5});
    std::vector<SimplexVector> beliefs = {SimplexVector({0.8, 0.2})};

    SimplexVector arithmetic = power_mean_price(theta, beliefs, {1.0, 1.0}, 0.0);
    CHECK(arithmetic[0] == doctest::Approx(0.65).epsilon(1e-12));

    SimplexVector only_trader = power_mean_price(theta, beliefs, {0.0, 1.0}, -0.5);
    CHECK(only_trader[0] == doctest::Approx(0.8).epsilon(1e-12));

    CHECK_THROWS_AS(power_mean_price(theta, beliefs, {0.0, 0.0}, 0.5), std::invalid_argument);
}

TEST_CASE("omega dagger weights") {
    std::vector<double> w = omega_dagger({1.0, 1.0}, {0.0, 0.0}, {3.0, 7.0}, 0.0);
    CHECK(w[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(w[1] == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(omega_dagger({1.0}, {0.0}, {4.0}, 0.5)[0] ==
          doctest::Approx(std::sqrt(8.0)).epsilon(1e-12));
}

TEST_CASE("hara approximate price: gamma 0 baseline and deep-gamma geometric limit") {
    SimplexVector theta({0.5, 0.5});
    std::vector<SimplexVector> beliefs = {SimplexVector({0.8, 0.2})};
    SimplexVector baseline = hara_approx_price(theta, beliefs, 1.0, {1.0}, 0.0);
    CHECK(baseline[0] == doctest::Approx(0.65).epsilon(1e-12));

    SimplexVector deep = hara_approx_price(theta, beliefs, 1.0, {1.0}, -50.0);
    CHECK(std::abs(deep[0] - 2.0 / 3.0) <= 1e-3);
    CHECK(deep[0] + deep[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("crra limiting price: fit weights reproduce a simulated limit") {
    SimplexVector theta({0.3, 0.35, 0.35});
    std::vector<UtilitySpec> traders = {UtilitySpec::crra(SimplexVector({0.5, 0.2, 0.3}), 0.5),
                                        UtilitySpec::crra(SimplexVector({0.2, 0.45, 0.35}), 0.5)};
    Market market{UtilitySpec::crra(theta, 0.5), 5.0, traders, {4.0, 6.0}};
    RunOptions opts;
    opts.sequence = TradingSequence::round_robin({0, 1});
    Trajectory traj = run(market, opts);
    REQUIRE(traj.converged);

    std::vector<SimplexVector> beliefs = {traders[0].belief(), traders[1].belief()};
    std::vector<double> weights = fit_power_mean_weights(theta, beliefs, 0.5, traj.final_price);
    SimplexVector reproduced =
        crra_limiting_price(theta, beliefs, weights[0], {weights[1], weights[2]}, 0.5);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::abs(reproduced[i] - traj.final_price[i]) <= 1e-6);
    }

    // uniform beliefs: the common belief is the price, any weights
    SimplexVector common =
        crra_limiting_price(theta, {theta, theta}, 0.3, {1.1, 0.6}, 0.5);
    for (std::size_t i = 0; i < 3; ++i) CHECK(common[i] == doctest::Approx(theta[i]).epsilon(1e-12));
}

TEST_CASE("divergence metrics") {
    SimplexVector p({0.5, 0.5});
    CHECK(kld(p, p) == 0.0);
    CHECK(kld(p, SimplexVector({0.25, 0.75})) == doctest::Approx(0.143841).epsilon(1e-5));
    CHECK_THROWS_AS(kld(p, SimplexVector({0.0, 1.0})), std::domain_error);

    std::vector<WealthVector> xs = {WealthVector({1.0, 2.0}), WealthVector({3.0, 1.0})};
    std::vector<WealthVector> doubled = {WealthVector({2.0, 4.0}), WealthVector({6.0, 2.0})};
    CHECK(delta_x(xs, xs) == 0.0);
    CHECK(delta_x(xs, doubled) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("limiting price is a fixed point of the one-step update at the limit state") {
    std::vector<UtilitySpec> traders;
    traders.push_back(UtilitySpec::exponential(SimplexVector({0.7, 0.1, 0.2}), 0.8));
    traders.push_back(UtilitySpec::exponential(SimplexVector({0.2, 0.6, 0.2}), 1.6));
    Market market{UtilitySpec::exponential(SimplexVector({0.3, 0.3, 0.4}), 1.2), 3.0,
                  traders, {4.0, 2.0}};
    RunOptions opts;
    opts.sequence = TradingSequence::round_robin({0, 1});
    Trajectory traj = run(market, opts);
    REQUIRE(traj.converged);
    for (std::size_t j = 0; j < 2; ++j) {
        const auto* v = market.traders[j].as_exponential();
        SimplexVector updated = exp_price_update(traj.final_price, traj.final_state.x[j],
                                                 v->belief, v->beta, 1.2);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(std::abs(updated[i] - traj.final_price[i]) <= 1e-8);
        }
    }
}
