#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace dirbn::testing {

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
    std::size_t n = 0;
};

template <typename T> Moments moments(const std::vector<T>& xs) {
    Moments m;
    m.n = xs.size();
    for (auto x : xs) m.mean += static_cast<double>(x);
    m.mean /= static_cast<double>(m.n);
    for (auto x : xs) m.variance += (static_cast<double>(x) - m.mean) * (static_cast<double>(x) - m.mean);
    m.variance /= static_cast<double>(m.n - 1);
    return m;
}

/// Three standard errors of a mean of n draws with the given variance.
inline double three_se(double variance, std::size_t n) { return 3.0 * std::sqrt(variance / static_cast<double>(n)); }

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const auto n = static_cast<double>(a.size()), m = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    return d;
}

/// Asymptotic two-sample KS critical value at level 0.01.
inline double ks_critical_001(std::size_t n, std::size_t m) {
    const auto nd = static_cast<double>(n), md = static_cast<double>(m);
    return 1.628 * std::sqrt((nd + md) / (nd * md));
}

} // namespace dirbn::testing
