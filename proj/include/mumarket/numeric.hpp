#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace mumarket {

inline double logsumexp(const std::vector<double>& logs) {
    double m = *std::max_element(logs.begin(), logs.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double v : logs) s += std::exp(v - m);
    return m + std::log(s);
}

// exp(logs) normalized to sum one, computed stably.
inline std::vector<double> softmax_from_logs(const std::vector<double>& logs) {
    double m = *std::max_element(logs.begin(), logs.end());
    std::vector<double> out(logs.size());
    double s = 0.0;
    for (std::size_t i = 0; i < logs.size(); ++i) {
        out[i] = std::exp(logs[i] - m);
        s += out[i];
    }
    for (double& v : out) v /= s;
    return out;
}

inline std::vector<double> normalized(std::vector<double> v) {
    double s = 0.0;
    for (double e : v) s += e;
    if (!(s > 0.0) || !std::isfinite(s)) {
        throw std::invalid_argument("cannot normalize: entries do not sum to a positive number");
    }
    for (double& e : v) e /= s;
    return v;
}

} // namespace mumarket
