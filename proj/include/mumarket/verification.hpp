#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mumarket/types.hpp"

namespace mumarket {

// One verification check: binding checks gate the suite's exit status,
// non-binding ones only report.
struct CheckResult {
    std::string name;
    bool pass = false;
    bool binding = true;
    std::string detail;
};

struct VerifyOptions {
    double trade_eps = 1e-10;
    std::uint64_t seed = 0x5eed0001ULL;
    std::size_t batch_runs = 100;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    bool all_binding_pass() const;
};

// Runs the full verification suite (closed-form limits, one-step updates,
// sequence invariance, Pareto/KKT replication, aggregation identities,
// conservation, finite-difference pricing, mechanism equivalence, reference
// reproduction, weighting quality). Deterministic for a fixed seed.
VerifyReport run_verification(const VerifyOptions& options);

// Independent simplex optimizer used as the aggregation oracle: gradient
// steps on softmax-parameterized coordinates with numeric derivatives.
std::vector<double> optimize_on_simplex(const std::function<double(const std::vector<double>&)>& f,
                                        std::size_t dims, bool maximize, int iterations = 6000);

} // namespace mumarket
