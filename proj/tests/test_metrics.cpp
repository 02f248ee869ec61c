#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "hdrest/contour.hpp"
#include "hdrest/errors.hpp"
#include "hdrest/metrics.hpp"

using namespace hdrest;
using namespace hdrest::metrics;

namespace {

PointSet cloud(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    PointSet p(n);
    for (auto& q : p) q = {z(rng), 2 * z(rng)};
    return p;
}

double brute_hausdorff(const PointSet& a, const PointSet& c) {
    auto dir = [](const PointSet& x, const PointSet& y) {
        double worst = 0;
        for (auto& p : x) {
            double best = INFINITY;
            for (auto& q : y) best = std::min(best, dist(p, q));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(dir(a, c), dir(c, a));
}

RegionHandle square(double x0, double y0) {
    return {[=](Point q) { return q.x >= x0 && q.x <= x0 + 1 && q.y >= y0 && q.y <= y0 + 1; },
            {{x0, y0}, {x0 + 1, y0}, {x0 + 1, y0 + 1}, {x0, y0 + 1}}};
}

bool in_polygon(const PointSet& poly, Point q) {
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Point a = poly[i], b = poly[j];
        if ((a.y > q.y) != (b.y > q.y) && q.x < a.x + (q.y - a.y) * (b.x - a.x) / (b.y - a.y)) in = !in;
    }
    return in;
}

}  // namespace

TEST_CASE("hausdorff") {
    const auto a = cloud(300, 1);
    CHECK(hausdorff(a, a) == 0.0);
    CHECK(hausdorff(PointSet{{0, 0}}, PointSet{{3, 4}}) == 5.0);
    CHECK_THROWS_AS(hausdorff(PointSet{}, a), InvalidArgument);

    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto x = cloud(300, 10 + 2 * s), y = cloud(300, 11 + 2 * s);
        const double h = hausdorff(x, y);
        CHECK(std::fabs(h - brute_hausdorff(x, y)) <= 1e-12);
        CHECK(h == hausdorff(y, x));
    }
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto x = cloud(50, 500 + s), y = cloud(80, 600 + s), z = cloud(30, 700 + s);
        CHECK(hausdorff(x, z) <= hausdorff(x, y) + hausdorff(y, z) + 1e-12);
    }
}

TEST_CASE("distance in measure on disjoint squares") {
    const auto a = square(0, 0), c = square(2, 2);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto d = distance_in_measure(a, c, kBenchmarkBox, 200000, s);
        const double p = d.value / 36;
        CHECK(d.se == doctest::Approx(36 * std::sqrt(p * (1 - p) / 200000)));
        CHECK(std::fabs(d.value - 2.0) <= 3 * d.se);
    }
    const auto self = distance_in_measure(a, a);
    CHECK(self.value == 0.0);
    CHECK(self.se == 0.0);

    const auto d1 = distance_in_measure(a, c, kBenchmarkBox, 50000, 7);
    CHECK(d1.value == distance_in_measure(a, c, kBenchmarkBox, 50000, 7).value);
    CHECK(d1.value == distance_in_measure(c, a, kBenchmarkBox, 50000, 7).value);
    CHECK(d1.value >= 0);

    // more draws, smaller error
    double e1 = 0, e2 = 0;
    for (std::uint64_t s = 0; s < 60; ++s) {
        e1 += std::fabs(distance_in_measure(a, c, kBenchmarkBox, 10000, 100 + s).value - 2.0);
        e2 += std::fabs(distance_in_measure(a, c, kBenchmarkBox, 20000, 100 + s).value - 2.0);
    }
    CHECK(e2 < e1);

    CHECK_THROWS_AS(distance_in_measure(a, c, kBenchmarkBox, 9999), InvalidArgument);
    CHECK_THROWS_AS(distance_in_measure(RegionHandle{}, c), InvalidArgument);
}

TEST_CASE("disk against its boundary polygon") {
    RegionHandle disk{[](Point q) { return norm(q) <= 1; }, {}};
    PointSet poly;
    const auto k = static_cast<std::size_t>(std::ceil(2 * std::numbers::pi / 0.01));
    for (std::size_t i = 0; i < k; ++i) {
        const double t = 2 * std::numbers::pi * i / k;
        poly.push_back({std::cos(t), std::sin(t)});
    }
    disk.boundary = poly;
    RegionHandle rebuilt{[poly](Point q) { return in_polygon(poly, q); }, poly};
    CHECK(distance_in_measure(disk, rebuilt).value < 0.01);
    CHECK(hausdorff(disk.boundary, rebuilt.boundary) == 0.0);
}

TEST_CASE("handles from HDR regions") {
    std::vector<double> v;
    const density::GridSpec g{-2, 2, -2, 2, 101, 101};
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) v.push_back(-norm({g.x(i), g.y(j)}));
    auto cs = std::make_shared<const contour::ContourSet>(contour::marching_squares(g, v, -1.0));
    const auto h = RegionHandle::from(hdr::Region(cs));
    CHECK(h.contains({0, 0}));
    CHECK_FALSE(h.contains({1.2, 0}));
    REQUIRE(!h.boundary.empty());
    for (auto& p : h.boundary) CHECK(std::fabs(norm(p) - 1) < 2e-3);
    for (std::size_t i = 1; i < h.boundary.size(); ++i)
        if (dist(h.boundary[i], h.boundary[i - 1]) < 0.05) CHECK(dist(h.boundary[i], h.boundary[i - 1]) <= 0.01 + 1e-12);

    const auto empty = RegionHandle::from(hdr::Region{});
    CHECK(empty.boundary.empty());
    CHECK_FALSE(empty.contains({0, 0}));
}
