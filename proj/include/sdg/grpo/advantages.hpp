#pragma once

#include <cmath>
#include <vector>

#include "sdg/core/errors.hpp"

namespace sdg {

// Group-relative advantages: (r_i - mean) / population std. A group with no
// reward spread carries no ranking signal, so it maps to all zeros rather
// than a division by zero. Equal inputs are detected by value, not via
// sigma: the mean of n equal doubles can round away from them, and that
// rounding noise must not be normalized into fake ranking signal.
inline std::vector<double> compute_advantages(const std::vector<double>& rewards) {
    const std::size_t n = rewards.size();
    if (n < 2) throw GroupTooSmall("advantage normalization needs a group of at least 2");
    bool all_equal = true;
    for (double r : rewards) all_equal = all_equal && (r == rewards[0]);
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    var /= static_cast<double>(n);
    const double sigma = std::sqrt(var);
    std::vector<double> out(n, 0.0);
    if (all_equal || sigma == 0.0) return out;
    for (std::size_t i = 0; i < n; ++i) out[i] = (rewards[i] - mean) / sigma;
    return out;
}

}  // namespace sdg
