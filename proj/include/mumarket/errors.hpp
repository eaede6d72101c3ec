#pragma once

#include <stdexcept>
#include <string>

namespace mumarket {

// Root-bracket failures, non-convergence and similar solver trouble.
// Carries a human-readable diagnostic assembled at the throw site.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed experiment configuration; message names the offending field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace mumarket
