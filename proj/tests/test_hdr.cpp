#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "hdrest/errors.hpp"
#include "hdrest/hdr.hpp"

using namespace hdrest;
using namespace hdrest::hdr;

namespace {

PointSet normal_sample(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    PointSet p(n);
    for (auto& q : p) q = {z(rng), z(rng)};
    return p;
}

PointSet two_blobs(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    PointSet p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = {(i % 2 ? 2.0 : -2.0) + 0.5 * z(rng), 0.5 * z(rng)};
    return p;
}

void check_contract(const PointSet& pts, const HybridConfig& cfg, const HdrEstimate& e) {
    REQUIRE(!e.trace.empty());
    for (std::size_t k = 0; k < e.trace.size(); ++k) {
        const auto& it = e.trace[k];
        CHECK(it.k == k);
        CHECK(it.tau_bar == doctest::Approx(cfg.tau - k * cfg.step).epsilon(1e-12));
        CHECK(it.f_minus <= it.f_plus);
        CHECK(it.n_plus + it.n_minus <= pts.size());
    }
    CHECK(e.tau_bar > 0);
    CHECK(e.tau_bar <= cfg.tau);
    if (e.converged()) CHECK(e.coverage >= 1 - cfg.tau);
    // split soundness for the final iteration
    const auto fx = density::Kde(pts, e.bandwidth).at_sample();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (e.split[i] == Split::Plus) CHECK(fx[i] >= e.f_plus);
        if (e.split[i] == Split::Minus) CHECK(fx[i] < e.f_minus);
        if (e.split[i] == Split::Doubtful) CHECK((fx[i] < e.f_plus && fx[i] >= e.f_minus));
    }
    CHECK(e.d_n == doctest::Approx(std::max(e.f_plus - e.f_tau, e.f_tau - e.f_minus)));
}

}  // namespace

TEST_CASE("Hyndman threshold") {
    CHECK(hyndman_threshold(std::vector<double>{1, 2, 3, 4}, 0.5) == 2.5);
    CHECK(hyndman_threshold(std::vector<double>(7, 0.3), 0.17) == 0.3);
    CHECK_THROWS_AS(hyndman_threshold(std::vector<double>{}, 0.5), InvalidArgument);
    CHECK_THROWS_AS(hyndman_threshold(std::vector<double>{1}, 1.0), InvalidArgument);

    // the threshold of the true density carries probability 1 - tau
    auto f = [](Point p) { return std::exp(-0.5 * dot(p, p)) / (2 * std::numbers::pi); };
    auto x = normal_sample(100000, 1);
    std::vector<double> v;
    for (auto& p : x) v.push_back(f(p));
    const double t = hyndman_threshold(v, 0.5);
    auto y = normal_sample(100000, 2);
    double above = 0;
    for (auto& p : y) above += f(p) >= t;
    CHECK(std::fabs(above / y.size() - 0.5) < 0.01);
}

TEST_CASE("coverage") {
    auto pts = normal_sample(200, 3);
    Region conv(std::make_shared<const geometry::RConvexHull>(pts, geometry::kInfinity));
    CHECK(coverage(conv, pts) == 1.0);
    Region far(std::make_shared<const geometry::RConvexHull>(PointSet{{100, 100}, {101, 100}, {100, 101}},
                                                             geometry::kInfinity));
    CHECK(coverage(far, pts) == 0.0);
    CHECK(coverage(Region{}, pts) == 0.0);

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0, 1);
    PointSet line;
    for (int i = 0; i < 100; ++i) line.push_back({double(i), u(rng)});
    Region left(std::make_shared<const geometry::RConvexHull>(PointSet{{-0.5, -1}, {36.5, -1}, {36.5, 2}, {-0.5, 2}},
                                                              geometry::kInfinity));
    CHECK(coverage(left, line) == doctest::Approx(0.37).epsilon(1e-15));
}

TEST_CASE("plug-in HDR") {
    auto pts = normal_sample(2000, 5);
    auto e = plugin_hdr(pts, 0.5, density::Selector::Plugin);
    CHECK(e.method == "plugin");
    CHECK(e.component_count() == 1);
    CHECK(e.region.contains({0, 0}));
    CHECK(e.region.contour() != nullptr);
    // the true region is the disk of radius sqrt(2 ln 2)
    const double r = std::sqrt(2 * std::log(2.0));
    for (auto& p : e.region.boundary_sample(0.05)) CHECK(std::fabs(norm(p) - r) < 0.25);
    CHECK(e.coverage == doctest::Approx(0.5).epsilon(0.02));

    auto wide = plugin_hdr(pts, 0.01, density::Selector::NormalScale);
    CHECK(wide.coverage >= 0.99);

    PluginOptions tiny;
    tiny.grid = density::GridSpec{50, 51, 50, 51, 8, 8};
    CHECK_THROWS_AS(plugin_hdr(pts, 0.5, density::Selector::NormalScale, tiny), EmptyRegion);
    CHECK_THROWS_AS(plugin_hdr(normal_sample(10, 1), 0.5, density::Selector::NormalScale), InvalidArgument);
}

TEST_CASE("r0 fixtures") {
    const PointSet square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    auto r = estimate_r0(square, PointSet{{0.5, 0.5}}, 1e-5);
    CHECK_FALSE(r.convex_fallback);
    CHECK(std::fabs(r.r0 - std::sqrt(0.5)) < 1e-3);
    CHECK(r.r0 <= std::sqrt(0.5) + 1e-9);

    auto empty = estimate_r0(square, PointSet{});
    CHECK(empty.convex_fallback);
    CHECK(std::isinf(empty.r0));

    auto far = estimate_r0(square, PointSet{{100, 100}, {-50, 3}});
    CHECK(far.convex_fallback);
    CHECK_THROWS_AS(estimate_r0(PointSet{}, square), InvalidArgument);
}

TEST_CASE("r0 beyond the diameter") {
    // the minus point sits 1e-3 inside the bottom edge: only a very flat arc excludes it
    const PointSet square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    const PointSet xm{{0.5, 1e-3}};
    auto r = estimate_r0(square, xm, 1e-3);
    REQUIRE_FALSE(r.convex_fallback);
    const double exact = (0.25 + 1e-6) / 2e-3;  // circle through both corners and the point
    CHECK(r.r0 > std::sqrt(2.0));
    CHECK(r.r0 <= exact);
    CHECK(r.r0 > exact - 1e-3 * 4);
    CHECK_FALSE(geometry::RConvexHull(square, r.r0).contains(xm[0]));
    CHECK(geometry::RConvexHull(square, exact * 1.01).contains(xm[0]));
}

TEST_CASE("r0 separates by construction") {
    for (std::uint64_t s = 0; s < 6; ++s) {
        std::mt19937_64 rng(100 + s);
        std::uniform_real_distribution<double> u(-1, 1);
        PointSet xp, xm;
        for (int i = 0; i < 60; ++i) {
            Point p{u(rng), u(rng)};
            // an annulus-ish split: the plus set surrounds a minus core
            (norm(p) > 0.45 ? xp : xm).push_back(p);
        }
        const double tol = 1e-4;
        auto r = estimate_r0(xp, xm, tol);
        REQUIRE_FALSE(r.convex_fallback);
        geometry::RConvexHull below(xp, r.r0 - tol), above(xp, r.r0 + tol);
        bool any_above = false;
        for (auto& q : xm) {
            CHECK_FALSE(below.contains(q));
            any_above |= above.contains(q);
        }
        CHECK(any_above);
    }
}

TEST_CASE("hybrid contract") {
    auto pts = two_blobs(400, 6);
    HybridConfig cfg;
    cfg.tau = 0.8;
    cfg.B = 50;
    cfg.p = 0.1;
    cfg.seed = 9;
    auto e = hybrid_hdr(pts, cfg);
    CHECK(e.method == "hybrid");
    CHECK(e.converged());
    check_contract(pts, cfg, e);
    CHECK(e.component_count() == 2);
    CHECK(e.coverage == doctest::Approx(coverage(e.region, pts)));
    if (e.trace.size() == 1) CHECK(e.tau_bar == cfg.tau);

    // identical inputs give identical output
    auto again = hybrid_hdr(pts, cfg);
    CHECK(again.tau_bar == e.tau_bar);
    CHECK(again.f_plus == e.f_plus);
    CHECK(again.r0 == e.r0);
    CHECK(again.coverage == e.coverage);
    CHECK(again.split == e.split);

    cfg.tau = 0.5;
    cfg.refit_bootstrap = false;
    auto f = hybrid_hdr(pts, cfg);
    check_contract(pts, cfg, f);
}

TEST_CASE("hybrid first-iteration success and limits") {
    // on a flat lattice the plus points are spread through the interior, so
    // their hull already holds enough of the sample at tau_bar = tau
    PointSet grid;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> jitter(-0.005, 0.005);
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) grid.push_back({i / 19.0 + jitter(rng), j / 19.0 + jitter(rng)});
    HybridConfig cfg;
    cfg.tau = 0.5;
    cfg.B = 40;
    cfg.p = 0.2;
    BootstrapCalibrator cal(grid, {0.03 * 0.03, 0, 0.03 * 0.03}, 3);
    auto e = hybrid_hdr(grid, cfg, cal);
    check_contract(grid, cfg, e);
    CHECK(e.converged());
    CHECK(e.trace.size() == 1);
    CHECK(e.tau_bar == cfg.tau);
    CHECK(e.coverage > e.trace[0].n_plus / 400.0);

    auto pts = normal_sample(300, 7);

    // a vanishing radius leaves only the plus points, too few for tau = 0.2
    cfg.tau = 0.2;
    cfg.nu = 1e-6;
    cfg.max_iterations = 1;
    auto stuck = hybrid_hdr(pts, cfg);
    CHECK(stuck.status == Status::NotConverged);
    CHECK(stuck.trace.size() == 1);
    CHECK_FALSE(stuck.region.empty());
    CHECK(stuck.coverage < 0.8);

    cfg = HybridConfig{};
    cfg.B = 40;
    cfg.p = 0.9;
    auto crossed = hybrid_hdr(pts, cfg);
    CHECK(crossed.status == Status::ThresholdsCrossed);
    CHECK(crossed.trace.back().f_minus > crossed.trace.back().f_plus);
}

TEST_CASE("bootstrap calibrator reuses draws") {
    auto pts = two_blobs(200, 8);
    const auto h = density::bandwidth_normal_scale(pts);
    BootstrapCalibrator a(pts, h, 11), b(pts, h, 11);
    std::vector<double> p1, m1, p2, m2;
    const double thr = a.sorted_density()[100];
    a.proportions(0, 10, thr, p1, m1);
    a.proportions(0, 25, thr, p2, m2);
    b.proportions(0, 25, thr, p1, m1);
    CHECK(p1 == p2);
    for (std::size_t i = 0; i < 25; ++i) CHECK(p1[i] + m1[i] == doctest::Approx(1.0));
    a.proportions(1, 10, thr, p2, m2);
    CHECK_FALSE(std::equal(p2.begin(), p2.end(), p1.begin()));
}

TEST_CASE("hybrid config validation") {
    HybridConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.iteration_limit() == 21);
    auto bad = [](auto f) {
        HybridConfig x;
        f(x);
        CHECK_THROWS_AS(x.validate(), InvalidArgument);
    };
    bad([](HybridConfig& x) { x.tau = 1.0; });
    bad([](HybridConfig& x) { x.B = 1; });
    bad([](HybridConfig& x) { x.p = 0.0; });
    bad([](HybridConfig& x) { x.step = 0.6; });
    bad([](HybridConfig& x) { x.nu = 1.5; });
    bad([](HybridConfig& x) { x.nu = 0.0; });
}
