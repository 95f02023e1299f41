#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace testing_support {

// Biased (divisor n) sample autocovariance of an already centered sequence.
inline double sample_acov(std::span<const double> x, std::size_t lag) {
    double s = 0.0;
    for (std::size_t t = 0; t + lag < x.size(); ++t) s += x[t] * x[t + lag];
    return s / static_cast<double>(x.size());
}

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double sd_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace testing_support
