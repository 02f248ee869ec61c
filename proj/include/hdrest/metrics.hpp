#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include "hdrest/hdr.hpp"
#include "hdrest/point.hpp"

namespace hdrest::metrics {

inline constexpr double kBoundarySpacing = 0.01;

/// Membership predicate plus a sample of the region's boundary.
/// The predicate must be safe to call from several threads at once.
struct RegionHandle {
    std::function<bool(Point)> contains;
    PointSet boundary;

    static RegionHandle from(const hdr::Region& region, double spacing = kBoundarySpacing);
};

/// Hausdorff distance between two finite point sets.
double hausdorff(std::span<const Point> a, std::span<const Point> c);

struct MeasureEstimate {
    double value = 0;  // area(box) * disagreement fraction
    double se = 0;     // area(box) * sqrt(p (1 - p) / m)
    std::size_t m = 0;
    std::size_t disagreements = 0;
};

inline constexpr BBox kBenchmarkBox{-3, -3, 3, 3};
inline constexpr std::size_t kBenchmarkDraws = 200000;

/// Monte Carlo area of the symmetric difference of A and C inside `box`.
/// Draws come in fixed-size chunks, each with its own stream, so the result
/// depends only on the seed. Requires m >= 1e4.
MeasureEstimate distance_in_measure(const RegionHandle& a, const RegionHandle& c, const BBox& box = kBenchmarkBox,
                                    std::size_t m = kBenchmarkDraws, std::uint64_t seed = 1);

}  // namespace hdrest::metrics
