#include "hdrest/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hdrest/errors.hpp"
#include "hdrest/kdtree.hpp"
#include "hdrest/parallel.hpp"
#include "hdrest/rng.hpp"

namespace hdrest::metrics {

RegionHandle RegionHandle::from(const hdr::Region& region, double spacing) {
    RegionHandle h;
    h.contains = [region](Point q) { return region.contains(q); };
    if (!region.empty()) h.boundary = region.boundary_sample(spacing);
    return h;
}

namespace {

double directed(std::span<const Point> from, const KdTree& to) {
    std::vector<double> d(from.size());
    parallel_for(from.size(), [&](std::size_t i) { d[i] = to.nearest(from[i]).distance; });
    return d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());
}

}  // namespace

double hausdorff(std::span<const Point> a, std::span<const Point> c) {
    if (a.empty() || c.empty()) throw InvalidArgument("hausdorff: both sets must be nonempty");
    const KdTree ta(a), tc(c);
    return std::max(directed(a, tc), directed(c, ta));
}

MeasureEstimate distance_in_measure(const RegionHandle& a, const RegionHandle& c, const BBox& box, std::size_t m,
                                    std::uint64_t seed) {
    if (!a.contains || !c.contains) throw InvalidArgument("distance_in_measure: missing membership predicate");
    if (box.empty() || !(box.area() > 0)) throw InvalidArgument("distance_in_measure: degenerate box");
    if (m < 10000) throw InvalidArgument("distance_in_measure: need at least 1e4 draws");

    constexpr std::size_t kChunk = 4096;
    const std::size_t chunks = (m + kChunk - 1) / kChunk;
    std::vector<std::size_t> hits(chunks, 0);
    parallel_for(chunks, [&](std::size_t k) {
        Rng rng(derive_seed(seed, {k}));
        std::uniform_real_distribution<double> ux(box.xmin, box.xmax), uy(box.ymin, box.ymax);
        const std::size_t count = std::min(kChunk, m - k * kChunk);
        std::size_t h = 0;
        for (std::size_t i = 0; i < count; ++i) {
            const double x = ux(rng);
            const Point q{x, uy(rng)};
            h += a.contains(q) != c.contains(q);
        }
        hits[k] = h;
    });

    MeasureEstimate out;
    out.m = m;
    for (auto h : hits) out.disagreements += h;
    const double p = static_cast<double>(out.disagreements) / static_cast<double>(m);
    out.value = box.area() * p;
    out.se = box.area() * std::sqrt(p * (1 - p) / static_cast<double>(m));
    return out;
}

}  // namespace hdrest::metrics
