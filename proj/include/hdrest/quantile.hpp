#pragma once

#include <span>
#include <vector>

namespace hdrest {

/// Empirical quantile with linear interpolation between order statistics
/// (Hyndman-Fan type 7): h = (n-1)q, Q = x_(floor h) + (h - floor h)(x_(floor h + 1) - x_(floor h)).
/// `sorted` must be ascending and nonempty; q is clamped to [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

/// Same convention on unsorted input (copies and sorts).
double quantile(std::span<const double> values, double q);

}  // namespace hdrest
