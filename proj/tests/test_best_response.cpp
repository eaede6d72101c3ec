#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "mumarket/best_response.hpp"
#include "mumarket/pricing.hpp"
#include "mumarket/rng.hpp"
#include "mumarket/root_find.hpp"

#include "helpers.hpp"

using namespace mumarket;
using mumarket::test::random_belief;
using mumarket::test::reachable_W0;

namespace {

// Project a perturbed trade back onto the maker's binding surface along e.
std::vector<double> project_to_binding(const UtilitySpec& U, const WealthVector& y, double W0,
                                       std::vector<double> z) {
    double target = U.value_at_uniform(W0);
    auto g = [&](double c) {
        std::vector<double> shifted = z;
        for (double& e : shifted) e += c;
        WealthVector post = y.plus(shifted, -1.0);
        if (!U.domain_contains(post)) return 1e300; // breach means maker utility collapsed
        return target - U.value(post);
    };
    double c = solve_monotone_root(g, -1.0, 1.0, 1e-13, "binding projection");
    for (double& e : z) e += c;
    return z;
}

} // namespace

TEST_CASE("no disagreement means no trade") {
    SimplexVector belief({0.3, 0.45, 0.25});
    UtilitySpec maker = UtilitySpec::exponential(belief, 1.0);
    UtilitySpec trader = UtilitySpec::exponential(belief, 1.0);
    WealthVector x = WealthVector::constant(3, 1.0);
    WealthVector y = WealthVector::constant(3, 1.0);
    BestResponse br = best_response(trader, maker, x, y, 1.0);
    CHECK(br.z.max_abs() == 0.0);
    CHECK(br.trader_utility_gain == 0.0);
    CHECK(br.kkt_residual <= 1e-12);
}

TEST_CASE("exponential one-step trade reproduces the update formula") {
    UtilitySpec maker = UtilitySpec::exponential(SimplexVector({0.5, 0.5}), 1.0);
    UtilitySpec trader = UtilitySpec::exponential(SimplexVector({0.8, 0.2}), 1.0);
    WealthVector x = WealthVector::constant(2, 1.0);
    WealthVector y = WealthVector::constant(2, 1.0);
    BestResponse br = best_response(trader, maker, x, y, 1.0);
    SimplexVector p = instantaneous_price(maker, y.plus(br.z.entries(), -1.0));
    CHECK(p[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("closed form and nested-root branches agree on exponential pairs") {
    SplitMix64 rng(19);
    for (int k = 0; k < 100; ++k) {
        std::size_t I = 2 + rng.below(3);
        UtilitySpec maker = UtilitySpec::exponential(random_belief(rng, I), rng.uniform(0.3, 3.0));
        UtilitySpec trader = UtilitySpec::exponential(random_belief(rng, I), rng.uniform(0.3, 3.0));
        std::vector<double> xe(I), ye(I);
        for (std::size_t i = 0; i < I; ++i) {
            xe[i] = rng.uniform(-1.0, 2.0);
            ye[i] = rng.uniform(-1.0, 2.0);
        }
        WealthVector x(xe), y(ye);
        double W0 = reachable_W0(maker, y, rng);
        BestResponse closed = best_response(trader, maker, x, y, W0, 1e-12,
                                            ResponseMethod::ClosedForm);
        BestResponse nested = best_response(trader, maker, x, y, W0, 1e-12,
                                            ResponseMethod::NestedRootNewton);
        for (std::size_t i = 0; i < I; ++i) {
            CHECK(closed.z[i] == doctest::Approx(nested.z[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("linear same-gamma coordinate step agrees with newton coordinates") {
    SplitMix64 rng(29);
    for (int k = 0; k < 60; ++k) {
        double gamma = rng.uniform(-1.0, 0.8);
        if (std::abs(gamma) < 0.05) gamma = 0.5;
        UtilitySpec maker = UtilitySpec::hara(random_belief(rng, 3), rng.uniform(0.5, 2.0),
                                              rng.uniform(0.0, 1.0), gamma);
        UtilitySpec trader = UtilitySpec::hara(random_belief(rng, 3), rng.uniform(0.5, 2.0),
                                               rng.uniform(0.0, 1.0), gamma);
        double floor = std::max(maker.coordinate_floor(), trader.coordinate_floor());
        double base = std::isfinite(floor) ? floor + 0.5 : 0.5;
        std::vector<double> xe(3), ye(3);
        for (std::size_t i = 0; i < 3; ++i) {
            xe[i] = base + rng.uniform(0.2, 2.0);
            ye[i] = base + rng.uniform(0.2, 2.0);
        }
        WealthVector x(xe), y(ye);
        double W0 = reachable_W0(maker, y, rng);
        if (!maker.domain_contains(WealthVector::constant(3, W0))) continue;
        BestResponse fast = best_response(trader, maker, x, y, W0, 1e-12,
                                          ResponseMethod::NestedRoot);
        BestResponse slow = best_response(trader, maker, x, y, W0, 1e-12,
                                          ResponseMethod::NestedRootNewton);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(fast.z[i] == doctest::Approx(slow.z[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("returned trades are stationary, binding and sampled-optimal") {
    SplitMix64 rng(37);
    // exponential vs exponential, hara vs hara, exponential trader vs hara maker
    for (int setup = 0; setup < 3; ++setup) {
        UtilitySpec maker = setup == 0
                                ? UtilitySpec::exponential(SimplexVector({0.2, 0.5, 0.3}), 1.1)
                                : UtilitySpec::hara(SimplexVector({0.2, 0.5, 0.3}), 1.0, 0.8, 0.4);
        UtilitySpec trader = setup == 2
                                 ? UtilitySpec::exponential(SimplexVector({0.5, 0.3, 0.2}), 0.9)
                                 : (setup == 0 ? UtilitySpec::exponential(
                                                     SimplexVector({0.5, 0.3, 0.2}), 0.9)
                                               : UtilitySpec::hara(SimplexVector({0.5, 0.3, 0.2}),
                                                                   1.0, 0.0, 0.4));
        double W0 = 1.0;
        std::vector<double> xe(3), ye(3);
        for (std::size_t i = 0; i < 3; ++i) {
            xe[i] = rng.uniform(1.0, 3.0);
            ye[i] = rng.uniform(1.0, 3.0);
        }
        WealthVector x(xe), y(ye);
        BestResponse br = best_response(trader, maker, x, y, W0);
        CHECK(br.kkt_residual <= 1e-8);
        CHECK(br.trader_utility_gain >= -1e-12);
        WealthVector post_y = y.plus(br.z.entries(), -1.0);
        CHECK(maker.value(post_y) == doctest::Approx(maker.value_at_uniform(W0)).epsilon(1e-10));

        double best = trader.value(x.plus(br.z.entries()));
        int checked = 0;
        for (int k = 0; k < 1000; ++k) {
            std::vector<double> cand = br.z.entries();
            for (double& e : cand) e += rng.uniform(-0.25, 0.25);
            cand = project_to_binding(maker, y, W0, cand);
            WealthVector post_x = x.plus(cand);
            if (!trader.domain_contains(post_x) ||
                !maker.domain_contains(y.plus(cand, -1.0))) {
                continue;
            }
            ++checked;
            CHECK(trader.value(post_x) <= best + 1e-9);
        }
        CHECK(checked > 800);
    }
}

TEST_CASE("risk-measure pair equalizes the dual optimizers") {
    UtilitySpec maker = UtilitySpec::risk_measure(
        PenaltySpec::relative_entropy(SimplexVector({0.3, 0.4, 0.3}), 1.0));
    UtilitySpec trader = UtilitySpec::risk_measure(
        PenaltySpec::relative_entropy(SimplexVector({0.6, 0.2, 0.2}), 0.8));
    WealthVector x = WealthVector::constant(3, 5.0);
    WealthVector y = WealthVector::constant(3, 5.0);
    BestResponse br = best_response(trader, maker, x, y, 5.0);
    std::vector<double> qv = trader.gradient(x.plus(br.z.entries()));
    std::vector<double> qu = maker.gradient(y.plus(br.z.entries(), -1.0));
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::abs(qv[i] - qu[i]) <= 1e-7);
    }
    CHECK(maker.value(y.plus(br.z.entries(), -1.0)) ==
          doctest::Approx(maker.value_at_uniform(5.0)).epsilon(1e-10));
    CHECK(br.trader_utility_gain > 0.0);
}

TEST_CASE("utility gain bookkeeping") {
    UtilitySpec trader = UtilitySpec::exponential(SimplexVector({0.6, 0.4}), 1.0);
    WealthVector x = WealthVector::constant(2, 1.0);
    CHECK(utility_gain(trader, x, TradeDelta::zero(2)) == 0.0);

    UtilitySpec maker = UtilitySpec::exponential(SimplexVector({0.4, 0.6}), 1.0);
    BestResponse br = best_response(trader, maker, x, WealthVector::constant(2, 1.0), 1.0);
    CHECK(br.trader_utility_gain == doctest::Approx(utility_gain(trader, x, br.z)).epsilon(1e-12));
    CHECK(br.trader_utility_gain > 0.0);

    UtilitySpec crra = UtilitySpec::crra(SimplexVector({0.5, 0.5}), 0.5);
    CHECK_THROWS_AS(utility_gain(crra, WealthVector({0.5, 0.5}), TradeDelta({-1.0, 0.0})),
                    std::domain_error);
}

TEST_CASE("unsupported pairings are rejected") {
    UtilitySpec rm = UtilitySpec::risk_measure(
        PenaltySpec::relative_entropy(SimplexVector({0.5, 0.5}), 1.0));
    UtilitySpec exp_u = UtilitySpec::exponential(SimplexVector({0.5, 0.5}), 1.0);
    UtilitySpec composite = UtilitySpec::composite_entropic_log(SimplexVector({0.5, 0.5}), 1.0, 0.5, 5.0);
    WealthVector w = WealthVector::constant(2, 1.0);
    CHECK_THROWS_AS(best_response(rm, exp_u, w, w, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(best_response(composite, exp_u, w, w, 1.0), std::invalid_argument);
}
