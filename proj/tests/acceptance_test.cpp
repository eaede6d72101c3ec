#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "mumarket/verification.hpp"

using namespace mumarket;

// The full verification suite: every gate criterion must pass at its stated
// tolerance; the best-effort reference reproduction is reported either way.
TEST_CASE("verification suite") {
    VerifyOptions options;
    VerifyReport report = run_verification(options);
    for (const auto& check : report.checks) {
        std::printf("%s %s\n        %s\n",
                    check.pass ? "[PASS]" : (check.binding ? "[FAIL]" : "[FLAG]"),
                    check.name.c_str(), check.detail.c_str());
        if (check.binding) {
            INFO(check.name, ": ", check.detail);
            CHECK(check.pass);
        }
    }
    CHECK(report.all_binding_pass());
}
