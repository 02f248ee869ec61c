#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "hdrest/contour.hpp"
#include "hdrest/errors.hpp"

using namespace hdrest;
using hdrest::density::GridSpec;

namespace {

template <class F>
std::vector<double> sample_field(const GridSpec& g, F f) {
    std::vector<double> v(g.nx * g.ny);
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) v[j * g.nx + i] = f(Point{g.x(i), g.y(j)});
    return v;
}

double radial(Point p) { return std::exp(-0.5 * (p.x * p.x + p.y * p.y)); }

}  // namespace

TEST_CASE("radial field gives a circle") {
    GridSpec g{-3, 3, -3, 3, 201, 201};
    const auto v = sample_field(g, radial);
    const double r = 1.2, level = std::exp(-0.5 * r * r);
    auto cs = contour::marching_squares(g, v, level);
    REQUIRE(cs.loops().size() == 1);
    CHECK(cs.component_count() == 1);
    CHECK(cs.loop_areas()[0] > 0);  // outer loop is counter-clockwise
    CHECK(cs.area() == doctest::Approx(std::numbers::pi * r * r).epsilon(2e-3));
    for (const auto& p : cs.loops()[0]) CHECK(std::fabs(norm(p) - r) < 2e-3);
    CHECK(cs.contains({0, 0}));
    CHECK_FALSE(cs.contains({2, 0}));
    CHECK_FALSE(cs.contains({50, 50}));
}

TEST_CASE("annulus gives an outer loop and a hole") {
    GridSpec g{-3, 3, -3, 3, 241, 241};
    const auto v = sample_field(g, [](Point p) { return std::exp(-8 * std::pow(norm(p) - 1.5, 2)); });
    auto cs = contour::marching_squares(g, v, 0.5);
    REQUIRE(cs.loops().size() == 2);
    auto a = cs.loop_areas();
    CHECK(((a[0] > 0) != (a[1] > 0)));
    CHECK(cs.component_count() == 1);
    const double half = std::sqrt(std::log(2.0) / 8.0);
    const double expected = std::numbers::pi * (std::pow(1.5 + half, 2) - std::pow(1.5 - half, 2));
    CHECK(cs.area() == doctest::Approx(expected).epsilon(5e-3));
    CHECK_FALSE(cs.contains({0, 0}));
    CHECK(cs.contains({1.5, 0}));
    CHECK(cs.contains({0, -1.5}));
}

TEST_CASE("separate bumps are separate components") {
    GridSpec g{-4, 4, -3, 3, 160, 120};
    auto bump = [](Point p, Point c) { return std::exp(-2 * dist2(p, c)); };
    const auto v = sample_field(g, [&](Point p) { return bump(p, {-2, 0}) + bump(p, {2, 0}) + bump(p, {0, 2}); });
    auto cs = contour::marching_squares(g, v, 0.5);
    CHECK(cs.component_count() == 3);
    CHECK(cs.contains({-2, 0}));
    CHECK(cs.contains({0, 2}));
    CHECK_FALSE(cs.contains({0, 0}));

    // a region touching the grid edge still closes
    auto edge = contour::marching_squares(g, sample_field(g, [](Point p) { return p.x; }), 1.0);
    CHECK(edge.component_count() == 1);
    CHECK(edge.area() == doctest::Approx(3.0 * 6.0).epsilon(1e-9));
    CHECK(edge.contains({3.5, 0}));
    CHECK_FALSE(edge.contains({0.5, 0}));
}

TEST_CASE("saddle cells and membership agree with the field") {
    GridSpec g{0, 1, 0, 1, 2, 2};
    // diagonal in-nodes with a high centre join, with a low centre split
    auto joined = contour::marching_squares(g, std::vector<double>{1, 0.4, 0.4, 1}, 0.5);
    auto split = contour::marching_squares(g, std::vector<double>{1, 0, 0, 1}, 0.6);
    CHECK(joined.component_count() == 1);
    CHECK(split.component_count() == 2);

    GridSpec f{-2, 2, -2, 2, 161, 161};
    auto field = [](Point p) { return std::sin(2 * p.x) * std::cos(1.5 * p.y) + 0.3 * p.x; };
    auto cs = contour::marching_squares(f, sample_field(f, field), 0.2);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.95, 1.95);
    int checked = 0;
    for (int k = 0; k < 4000; ++k) {
        Point q{u(rng), u(rng)};
        const double d = field(q) - 0.2;
        if (std::fabs(d) < 0.02) continue;  // interpolation error band
        CHECK(cs.contains(q) == (d > 0));
        ++checked;
    }
    CHECK(checked > 3000);
}

TEST_CASE("contour boundary sampling") {
    GridSpec g{-3, 3, -3, 3, 101, 101};
    auto cs = contour::marching_squares(g, sample_field(g, radial), 0.5);
    auto s = cs.boundary_sample(0.01);
    CHECK(s.size() > static_cast<std::size_t>(2 * std::numbers::pi * 1.17 / 0.01));
    for (std::size_t i = 0; i + 1 < s.size(); ++i) CHECK(dist(s[i], s[i + 1]) <= 0.01 + 1e-12);
    CHECK(dist(s.back(), s.front()) <= 0.01 + 1e-12);
    CHECK_THROWS_AS(cs.boundary_sample(0), InvalidArgument);

    auto empty = contour::marching_squares(g, sample_field(g, radial), 2.0);
    CHECK(empty.empty());
    CHECK(empty.component_count() == 0);
    CHECK_FALSE(empty.contains({0, 0}));
    CHECK_THROWS_AS(contour::marching_squares(g, std::vector<double>(10), 0.5), InvalidArgument);
}
