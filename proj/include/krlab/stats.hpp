#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace krlab::stats {

// Linear-interpolation quantile (numpy default convention) on a copy.
inline double quantile(std::vector<double> x, double p) {
    if (x.empty()) throw std::invalid_argument("quantile of empty sample");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("quantile level outside [0,1]");
    std::sort(x.begin(), x.end());
    double h = (static_cast<double>(x.size()) - 1.0) * p;
    std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= x.size()) return x.back();
    double frac = h - static_cast<double>(lo);
    return x[lo] + (x[lo + 1] - x[lo]) * frac;
}

inline double median(const std::vector<double>& x) { return quantile(x, 0.5); }

inline double mean(const std::vector<double>& x) {
    if (x.empty()) throw std::invalid_argument("mean of empty sample");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

}  // namespace krlab::stats
