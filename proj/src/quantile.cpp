#include "hdrest/quantile.hpp"

#include <algorithm>
#include <cmath>

#include "hdrest/errors.hpp"

namespace hdrest {

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw InvalidArgument("quantile of an empty sample");
    q = std::clamp(q, 0.0, 1.0);
    const double h = static_cast<double>(sorted.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double quantile(std::span<const double> values, double q) {
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    return quantile_sorted(v, q);
}

}  // namespace hdrest
