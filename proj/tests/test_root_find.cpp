#include <doctest.h>

#include <cmath>

#include "mumarket/root_find.hpp"

using namespace mumarket;

TEST_CASE("brent finds simple roots") {
    auto f = [](double x) { return x * x * x - 2.0; };
    double r = solve_monotone_root(f, 0.0, 4.0, 1e-14, "cbrt");
    CHECK(r == doctest::Approx(std::cbrt(2.0)).epsilon(1e-12));
}

TEST_CASE("bracket expansion reaches distant roots") {
    auto f = [](double x) { return x - 1234.5; };
    double r = solve_monotone_root(f, -1.0, 1.0, 1e-12, "far root");
    CHECK(r == doctest::Approx(1234.5));
}

TEST_CASE("expansion respects hard domain bounds") {
    // Root close to a singular lower bound at x = 1.
    auto f = [](double x) { return std::log(x - 1.0) + 3.0; };
    double r = solve_monotone_root(f, 1.5, 2.0, 1e-13, "log root", 1.0);
    CHECK(r == doctest::Approx(1.0 + std::exp(-3.0)).epsilon(1e-10));
}

TEST_CASE("missing sign change reports a diagnostic") {
    auto f = [](double x) { return 1.0 + x * x; };
    CHECK_THROWS_AS(solve_monotone_root(f, -1.0, 1.0, 1e-12, "no root", -10.0, 10.0),
                    NumericalError);
}

TEST_CASE("newton refinement stays inside its bracket") {
    auto fdf = [](double x) { return std::pair<double, double>(std::exp(x) - 5.0, std::exp(x)); };
    Bracket br{0.0, 10.0, std::exp(0.0) - 5.0, std::exp(10.0) - 5.0};
    double r = newton_root(fdf, br, 1e-14, "exp root");
    CHECK(r == doctest::Approx(std::log(5.0)).epsilon(1e-12));
}
