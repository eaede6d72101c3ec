#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "mumarket/rng.hpp"
#include "mumarket/utility.hpp"

using namespace mumarket;

namespace {

// Families under test, freshly built per call.
UtilitySpec make_family(int family, const SimplexVector& belief) {
    switch (family) {
        case 0: return UtilitySpec::exponential(belief, 1.3);
        case 1: return UtilitySpec::hara(belief, 1.2, 0.8, 0.5);
        case 2: return UtilitySpec::crra(belief, 0.4);
        case 3: return UtilitySpec::risk_measure(PenaltySpec::relative_entropy(belief, 0.9));
        default: return UtilitySpec::composite_entropic_log(belief, 1.1, 0.6, 5.0);
    }
}

WealthVector random_point(const UtilitySpec& u, SplitMix64& rng) {
    double floor = u.coordinate_floor();
    double lo = std::isfinite(floor) ? floor + 0.2 : -3.0;
    std::vector<double> w(u.securities());
    for (double& e : w) e = rng.uniform(lo, lo + 5.0);
    return WealthVector(std::move(w));
}

} // namespace

TEST_CASE("utility values match hand-computed examples") {
    UtilitySpec exp_u = UtilitySpec::exponential(SimplexVector({0.5, 0.5}), 1.0);
    CHECK(exp_u.value(WealthVector({0.0, 0.0})) == doctest::Approx(-1.0).epsilon(1e-14));

    UtilitySpec crra = UtilitySpec::crra(SimplexVector({0.5, 0.5}), 0.5);
    CHECK(crra.value(WealthVector({4.0, 9.0})) == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("risk-measure value matches the entropic closed form") {
    UtilitySpec u = UtilitySpec::risk_measure(
        PenaltySpec::relative_entropy(SimplexVector({0.5, 0.5}), 1.0));
    double expected = -std::log(0.5 * std::exp(-1.0) + 0.5 * std::exp(-2.0));
    CHECK(expected == doctest::Approx(1.3799).epsilon(1e-4));
    CHECK(u.value(WealthVector({1.0, 2.0})) == doctest::Approx(expected).epsilon(1e-10));

    // Everywhere sampled, both routes agree: dual-solve vs closed form.
    SplitMix64 rng(11);
    for (int k = 0; k < 100; ++k) {
        double beta = rng.uniform(0.3, 3.0);
        SimplexVector pi({0.3, 0.45, 0.25});
        UtilitySpec v = UtilitySpec::risk_measure(PenaltySpec::relative_entropy(pi, beta));
        std::vector<double> w(3);
        for (double& e : w) e = rng.uniform(-3.0, 3.0);
        double closed = 0.0;
        for (std::size_t i = 0; i < 3; ++i) closed += pi[i] * std::exp(-beta * w[i]);
        closed = -std::log(closed) / beta;
        CHECK(v.value(WealthVector(w)) == doctest::Approx(closed).epsilon(1e-8));
    }
}

TEST_CASE("gradients match finite differences on every family") {
    SplitMix64 rng(23);
    for (int family = 0; family < 5; ++family) {
        for (int k = 0; k < 100; ++k) {
            SimplexVector belief({0.25, 0.45, 0.30});
            UtilitySpec u = make_family(family, belief);
            WealthVector w = random_point(u, rng);
            std::vector<double> g = u.gradient(w);
            for (std::size_t i = 0; i < w.size(); ++i) {
                CHECK(g[i] > 0.0);
                double h = 1e-5 * (1.0 + std::abs(w[i]));
                std::vector<double> up = w.entries(), dn = w.entries();
                up[i] += h;
                dn[i] -= h;
                double fd = (u.value(WealthVector(up)) - u.value(WealthVector(dn))) / (2.0 * h);
                CHECK(g[i] == doctest::Approx(fd).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("gradient at uniform wealth is proportional to the belief") {
    SimplexVector belief({0.1, 0.6, 0.3});
    for (int family : {0, 1, 2}) {
        UtilitySpec u = make_family(family, belief);
        std::vector<double> g = u.gradient(WealthVector::constant(3, 2.0));
        double total = g[0] + g[1] + g[2];
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(g[i] / total == doctest::Approx(belief[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("risk-measure gradient is a probability vector and cash-invariant") {
    UtilitySpec u = UtilitySpec::risk_measure(
        PenaltySpec::relative_entropy(SimplexVector({0.4, 0.35, 0.25}), 1.4));
    SplitMix64 rng(31);
    for (int k = 0; k < 50; ++k) {
        WealthVector w = random_point(u, rng);
        std::vector<double> g = u.gradient(w);
        CHECK(g[0] + g[1] + g[2] == doctest::Approx(1.0).epsilon(1e-10));
        double c = rng.uniform(-5.0, 5.0);
        CHECK(u.value(w.plus_scalar(c)) == doctest::Approx(u.value(w) + c).epsilon(1e-9));
    }
}

TEST_CASE("inverse marginals invert the marginals") {
    UtilitySpec exp_u = UtilitySpec::exponential(SimplexVector({0.5, 0.5}), 1.0);
    CHECK(exp_u.inverse_marginal(0, 0.5 * std::exp(-2.0)) == doctest::Approx(2.0).epsilon(1e-12));

    UtilitySpec crra = UtilitySpec::crra(SimplexVector({0.5, 0.5}), 0.5);
    CHECK(crra.inverse_marginal(0, 0.125) == doctest::Approx(4.0).epsilon(1e-12));

    SplitMix64 rng(43);
    for (int family = 0; family < 3; ++family) {
        for (int k = 0; k < 100; ++k) {
            SimplexVector belief({0.35, 0.4, 0.25});
            UtilitySpec u = make_family(family, belief);
            WealthVector w = random_point(u, rng);
            for (std::size_t i = 0; i < 3; ++i) {
                double m = u.marginal(i, w[i]);
                CHECK(u.inverse_marginal(i, m) == doctest::Approx(w[i]).epsilon(1e-10));
            }
        }
    }
    CHECK_THROWS_AS(exp_u.inverse_marginal(0, -1.0), std::range_error);
    UtilitySpec rm = UtilitySpec::risk_measure(
        PenaltySpec::relative_entropy(SimplexVector({0.5, 0.5}), 1.0));
    CHECK_THROWS_AS(rm.inverse_marginal(0, 1.0), std::invalid_argument);
}

TEST_CASE("penalty values, marginals and inverses") {
    SimplexVector pi({0.5, 0.5});
    PenaltySpec re = PenaltySpec::relative_entropy(pi, 2.0);
    CHECK(re.value(pi) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(re.marginal(0, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
    // q_i = 0 contributes its limit 0 to the value; the marginal diverges.
    CHECK(re.value(SimplexVector({0.0, 1.0})) == doctest::Approx(std::log(2.0) / 2.0));
    CHECK_THROWS_AS(re.marginal(0, 0.0), std::range_error);

    SplitMix64 rng(53);
    PenaltySpec power = PenaltySpec::power(SimplexVector({0.3, 0.7}), -0.5, 1.2);
    PenaltySpec logp = PenaltySpec::log(SimplexVector({0.3, 0.7}), 0.8);
    for (int k = 0; k < 100; ++k) {
        double q = rng.uniform(1e-3, 1.0);
        for (const PenaltySpec* pen : {&re, &power, &logp}) {
            for (std::size_t i = 0; i < 2; ++i) {
                double m = pen->marginal(i, q);
                CHECK(pen->marginal_inverse(i, m) == doctest::Approx(q).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("only increasing-marginal penalties can be simulation agents") {
    SimplexVector pi({0.5, 0.5});
    CHECK(PenaltySpec::relative_entropy(pi, 1.0).increasing_marginals());
    CHECK_FALSE(PenaltySpec::power(pi, 0.5, 1.0).increasing_marginals());
    CHECK_FALSE(PenaltySpec::log(pi, 1.0).increasing_marginals());
    CHECK_THROWS_AS(UtilitySpec::risk_measure(PenaltySpec::power(pi, 0.5, 1.0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(UtilitySpec::risk_measure(PenaltySpec::log(pi, 1.0)), std::invalid_argument);
}

TEST_CASE("domain membership per family") {
    UtilitySpec hara = UtilitySpec::hara(SimplexVector({0.4, 0.3, 0.3}), 1.0, 0.8, 0.5);
    CHECK_FALSE(hara.domain_contains(WealthVector({-1.5, 0.0, 0.0})));
    CHECK(hara.domain_contains(WealthVector({0.0, 0.0, 0.0})));

    UtilitySpec exp_u = UtilitySpec::exponential(SimplexVector({0.5, 0.5}), 1.0);
    CHECK(exp_u.domain_contains(WealthVector({-1e6, 1e6})));

    UtilitySpec crra = UtilitySpec::crra(SimplexVector({0.5, 0.5}), 0.5);
    CHECK_FALSE(crra.domain_contains(WealthVector({0.0, 1.0})));
    CHECK(crra.domain_contains(WealthVector({0.5, 1.0})));
    CHECK_THROWS_AS(crra.value(WealthVector({0.0, 1.0})), std::domain_error);
}

TEST_CASE("concavity, monotonicity and recession along e") {
    SplitMix64 rng(61);
    for (int family = 0; family < 5; ++family) {
        UtilitySpec u = make_family(family, SimplexVector({0.3, 0.4, 0.3}));
        for (int k = 0; k < 200; ++k) {
            WealthVector w1 = random_point(u, rng);
            WealthVector w2 = random_point(u, rng);
            double t = rng.uniform(0.05, 0.95);
            std::vector<double> mix(3);
            for (std::size_t i = 0; i < 3; ++i) mix[i] = t * w1[i] + (1.0 - t) * w2[i];
            double lhs = u.value(WealthVector(mix));
            double rhs = t * u.value(w1) + (1.0 - t) * u.value(w2);
            CHECK(lhs >= rhs - 1e-9);

            std::size_t i = rng.below(3);
            std::vector<double> up = w1.entries();
            up[i] += rng.uniform(0.1, 1.0);
            CHECK(u.value(WealthVector(up)) > u.value(w1));

            double c1 = rng.uniform(0.1, 2.0);
            double v0 = u.value(w1);
            double v1 = u.value(w1.plus_scalar(c1));
            double v2 = u.value(w1.plus_scalar(c1 + 1.0));
            CHECK(std::isfinite(v2));
            CHECK(v1 > v0);
            CHECK(v2 > v1);
        }
    }
}

TEST_CASE("value_delta matches the plain difference away from cancellation") {
    SplitMix64 rng(71);
    for (int family = 0; family < 5; ++family) {
        UtilitySpec u = make_family(family, SimplexVector({0.3, 0.4, 0.3}));
        for (int k = 0; k < 50; ++k) {
            WealthVector w = random_point(u, rng);
            std::vector<double> dz(3);
            double floor = u.coordinate_floor();
            for (std::size_t i = 0; i < 3; ++i) {
                double lo = std::isfinite(floor) ? 0.5 * (floor - w[i]) : -0.5;
                dz[i] = rng.uniform(lo, 0.5);
            }
            double direct = u.value(w.plus(dz)) - u.value(w);
            CHECK(u.value_delta(w, dz) == doctest::Approx(direct).epsilon(1e-9));
        }
    }
}
