#include "hdrest/contour.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hdrest/errors.hpp"

namespace hdrest::contour {
namespace {

double signed_area(const std::vector<Point>& ring) {
    double a = 0.0;
    for (std::size_t i = 0, n = ring.size(); i < n; ++i) a += cross(ring[i], ring[(i + 1) % n]);
    return 0.5 * a;
}

}  // namespace

std::vector<double> ContourSet::loop_areas() const {
    std::vector<double> out;
    out.reserve(loops_.size());
    for (const auto& l : loops_) out.push_back(signed_area(l));
    return out;
}

std::size_t ContourSet::component_count() const {
    std::size_t c = 0;
    for (const auto& l : loops_) c += signed_area(l) > 0.0;
    return c;
}

double ContourSet::area() const {
    double a = 0.0;
    for (const auto& l : loops_) a += signed_area(l);
    return a;
}

bool ContourSet::contains(Point q) const {
    if (bands_ == 0) return false;
    const double f = std::floor((q.y - y0_) / dy_);
    if (!(f >= 0.0) || f >= static_cast<double>(bands_)) return false;
    const auto b = static_cast<std::size_t>(f);
    bool inside = false;
    for (std::size_t k = band_start_[b]; k < band_start_[b + 1]; ++k) {
        const auto& [p, r] = segments_[k];
        if ((p.y > q.y) != (r.y > q.y)) {
            const double x = p.x + (q.y - p.y) * (r.x - p.x) / (r.y - p.y);
            if (x > q.x) inside = !inside;
        }
    }
    return inside;
}

PointSet ContourSet::boundary_sample(double spacing) const {
    if (!(spacing > 0.0)) throw InvalidArgument("boundary_sample: spacing must be positive");
    PointSet out;
    for (const auto& l : loops_)
        for (std::size_t i = 0; i < l.size(); ++i) {
            const Point a = l[i], b = l[(i + 1) % l.size()];
            const auto k = static_cast<std::size_t>(std::max(1.0, std::ceil(dist(a, b) / spacing)));
            for (std::size_t j = 0; j < k; ++j) out.push_back(a + (double(j) / double(k)) * (b - a));
        }
    return out;
}

ContourSet ContourSet::from_loops(std::vector<std::vector<Point>> loops, double level) {
    ContourSet cs;
    cs.level_ = level;
    double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
    std::size_t edges = 0;
    for (auto& l : loops) {
        while (l.size() > 1 && l.back() == l.front()) l.pop_back();
        if (l.size() < 3) throw InvalidArgument("ContourSet::from_loops: loop with fewer than 3 vertices");
        for (const Point& p : l) {
            if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw InvalidArgument("ContourSet::from_loops: non-finite vertex");
            ymin = std::min(ymin, p.y);
            ymax = std::max(ymax, p.y);
        }
        edges += l.size();
    }
    cs.loops_ = std::move(loops);
    if (cs.loops_.empty()) return cs;
    cs.bands_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(edges))));
    cs.y0_ = ymin;
    cs.dy_ = std::max(ymax - ymin, 1e-12) / static_cast<double>(cs.bands_) * (1.0 + 1e-9);
    cs.build_index();
    return cs;
}

void ContourSet::build_index() {
    std::vector<std::vector<std::pair<Point, Point>>> byband(bands_);
    for (const auto& l : loops_)
        for (std::size_t i = 0; i < l.size(); ++i) {
            const Point a = l[i], b = l[(i + 1) % l.size()];
            // register in every band the segment's y-range touches
            const auto last = static_cast<std::ptrdiff_t>(bands_) - 1;
            auto lo = static_cast<std::ptrdiff_t>(std::floor((std::min(a.y, b.y) - y0_) / dy_));
            auto hi = static_cast<std::ptrdiff_t>(std::floor((std::max(a.y, b.y) - y0_) / dy_));
            lo = std::clamp<std::ptrdiff_t>(lo, 0, last);
            hi = std::clamp<std::ptrdiff_t>(hi, 0, last);
            for (auto band = lo; band <= hi; ++band) byband[static_cast<std::size_t>(band)].emplace_back(a, b);
        }
    band_start_.assign(bands_ + 1, 0);
    segments_.clear();
    for (std::size_t b = 0; b < bands_; ++b) {
        band_start_[b] = segments_.size();
        segments_.insert(segments_.end(), byband[b].begin(), byband[b].end());
    }
    band_start_[bands_] = segments_.size();
}

ContourSet marching_squares(const density::GridSpec& grid, std::span<const double> values, double level) {
    grid.validate();
    if (values.size() != grid.nx * grid.ny) throw InvalidArgument("marching_squares: value count does not match grid");
    if (!std::isfinite(level)) throw InvalidArgument("marching_squares: level must be finite");

    // pad with one ring of nodes below the level
    const std::size_t NX = grid.nx + 2, NY = grid.ny + 2;
    const double lowest = std::min(level, *std::min_element(values.begin(), values.end()));
    const double pad = lowest - std::max(1.0, std::fabs(lowest));
    const double dx = grid.dx(), dy = grid.dy();
    auto val = [&](std::size_t I, std::size_t J) {
        if (I == 0 || J == 0 || I == NX - 1 || J == NY - 1) return pad;
        return values[(J - 1) * grid.nx + (I - 1)];
    };
    auto pos = [&](std::size_t I, std::size_t J) {
        return Point{grid.xmin + (static_cast<double>(I) - 1.0) * dx, grid.ymin + (static_cast<double>(J) - 1.0) * dy};
    };
    auto inside = [&](std::size_t I, std::size_t J) { return val(I, J) >= level; };
    auto padded = [&](std::size_t I, std::size_t J) { return I == 0 || J == 0 || I == NX - 1 || J == NY - 1; };

    // edge ids: horizontal (I,J)-(I+1,J) -> 2(J NX + I), vertical (I,J)-(I,J+1) -> 2(J NX + I) + 1
    auto edge_point = [&](std::size_t id) {
        const std::size_t node = id / 2;
        const std::size_t I = node % NX, J = node / NX;
        const std::size_t I2 = (id % 2 == 0) ? I + 1 : I;
        const std::size_t J2 = (id % 2 == 0) ? J : J + 1;
        // regions are clipped to the grid: a crossing towards a padding node
        // sits on the grid node itself
        if (padded(I, J)) return pos(I2, J2);
        if (padded(I2, J2)) return pos(I, J);
        const double va = val(I, J), vb = val(I2, J2);
        const double t = (level - va) / (vb - va);
        const Point a = pos(I, J), b = pos(I2, J2);
        return a + t * (b - a);
    };

    constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> succ(2 * NX * NY, kUnset);

    for (std::size_t J = 0; J + 1 < NY; ++J)
        for (std::size_t I = 0; I + 1 < NX; ++I) {
            const bool in[4] = {inside(I, J), inside(I + 1, J), inside(I + 1, J + 1), inside(I, J + 1)};
            const int n_in = in[0] + in[1] + in[2] + in[3];
            if (n_in == 0 || n_in == 4) continue;
            const std::size_t edges[4] = {2 * (J * NX + I), 2 * (J * NX + I + 1) + 1, 2 * ((J + 1) * NX + I),
                                          2 * (J * NX + I) + 1};
            int exits[2], entries[2], ne = 0, nn = 0;
            for (int k = 0; k < 4; ++k) {
                const bool a = in[k], b = in[(k + 1) % 4];
                if (a && !b) exits[ne++] = k;
                if (!a && b) entries[nn++] = k;
            }
            auto link = [&](int from, int to) {
                succ[edges[from]] = edges[to];
            };
            if (ne == 1) {
                link(exits[0], entries[0]);
            } else {
                const double centre = 0.25 * (val(I, J) + val(I + 1, J) + val(I + 1, J + 1) + val(I, J + 1));
                const int shift = centre >= level ? 1 : 3;
                for (int e : exits) link(e, (e + shift) % 4);
            }
        }

    ContourSet cs;
    cs.level_ = level;
    std::vector<char> seen(succ.size(), 0);
    for (std::size_t start = 0; start < succ.size(); ++start) {
        if (succ[start] == kUnset || seen[start]) continue;
        std::vector<Point> ring;
        std::size_t e = start;
        while (!seen[e]) {
            seen[e] = 1;
            const Point p = edge_point(e);
            if (ring.empty() || !(p == ring.back())) ring.push_back(p);
            e = succ[e];
            if (e == kUnset) throw Error("marching_squares: open contour");
        }
        while (ring.size() > 1 && ring.back() == ring.front()) ring.pop_back();
        if (ring.size() >= 3) cs.loops_.push_back(std::move(ring));
    }

    cs.y0_ = grid.ymin - dy;
    cs.dy_ = dy;
    cs.bands_ = NY - 1;
    cs.build_index();
    return cs;
}

}  // namespace hdrest::contour
