#include "hdrest/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "hdrest/errors.hpp"

namespace hdrest::io {

namespace {

constexpr double kPi = 3.14159265358979323846;

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    const auto e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    try {
        std::size_t used = 0;
        out = std::stod(s, &used);
        return used == s.size() && std::isfinite(out);
    } catch (...) {
        return false;
    }
}

double ring_area(const Ring& r) {
    double a = 0;
    for (std::size_t i = 0; i < r.size(); ++i) a += cross(r[i], r[(i + 1) % r.size()]);
    return 0.5 * a;
}

bool ring_contains(const Ring& r, Point q) {
    bool inside = false;
    for (std::size_t i = 0, j = r.size() - 1; i < r.size(); j = i++)
        if ((r[i].y > q.y) != (r[j].y > q.y) &&
            q.x < r[j].x + (q.y - r[j].y) * (r[i].x - r[j].x) / (r[i].y - r[j].y))
            inside = !inside;
    return inside;
}

/// Attaches each hole to the smallest outer ring containing it.
std::vector<Polygon> group_rings(std::vector<Ring> outers, std::vector<Ring> holes) {
    std::vector<Polygon> out;
    for (auto& o : outers) out.push_back({std::move(o)});
    for (auto& h : holes) {
        std::size_t best = out.size();
        double best_area = 0;
        for (std::size_t k = 0; k < out.size(); ++k) {
            const double a = std::fabs(ring_area(out[k][0]));
            if (ring_contains(out[k][0], h[0]) && (best == out.size() || a < best_area)) best = k, best_area = a;
        }
        if (best < out.size()) out[best].push_back(std::move(h));
    }
    return out;
}

json piece_to_json(const geometry::BoundaryPiece& piece) {
    if (const auto* a = std::get_if<geometry::Arc>(&piece))
        return {{"type", "arc"},         {"cx", a->center.x},          {"cy", a->center.y},
                {"r", a->radius},        {"theta_start", a->theta_start}, {"theta_end", a->theta_end},
                {"orientation", a->clockwise ? "cw" : "ccw"}};
    const auto& s = std::get<geometry::Segment>(piece);
    return {{"type", "segment"}, {"x1", s.a.x}, {"y1", s.a.y}, {"x2", s.b.x}, {"y2", s.b.y}};
}

Ring ring_from_json(const json& coords) {
    Ring r;
    for (const auto& c : coords) {
        if (!c.is_array() || c.size() < 2) throw FormatError("GeoJSON: position must hold two numbers");
        r.push_back({c[0].get<double>(), c[1].get<double>()});
    }
    while (r.size() > 1 && r.back() == r.front()) r.pop_back();
    return r;
}

void add_geojson_polygon(const json& rings, std::vector<Ring>& loops) {
    bool first = true;
    for (const auto& coords : rings) {
        Ring r = ring_from_json(coords);
        if (r.size() < 3) throw FormatError("GeoJSON: ring with fewer than 3 distinct vertices");
        const bool ccw = ring_area(r) > 0;
        if (first != ccw) std::reverse(r.begin(), r.end());
        loops.push_back(std::move(r));
        first = false;
    }
}

void add_geojson_geometry(const json& g, std::vector<Ring>& loops) {
    const std::string type = g.at("type").get<std::string>();
    if (type == "Polygon") {
        add_geojson_polygon(g.at("coordinates"), loops);
    } else if (type == "MultiPolygon") {
        for (const auto& p : g.at("coordinates")) add_geojson_polygon(p, loops);
    } else if (type == "GeometryCollection") {
        for (const auto& c : g.at("geometries")) add_geojson_geometry(c, loops);
    } else {
        throw FormatError("GeoJSON: unsupported geometry type " + type);
    }
}

template <typename T>
void put(std::ostream& out, T v) {
    static_assert(std::endian::native == std::endian::little, "binary field format assumes a little-endian host");
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
    T v;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw FormatError("field binary: truncated input");
    return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// points

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false, was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = was_quoted = true;
        } else if (c == ',') {
            out.push_back(was_quoted ? cur : trim(cur));
            cur.clear();
            was_quoted = false;
        } else {
            cur += c;
        }
    }
    if (quoted) throw FormatError("CSV: unterminated quoted field");
    out.push_back(was_quoted ? cur : trim(cur));
    return out;
}

PointSet read_points_csv(std::istream& in) {
    PointSet pts;
    std::string line;
    std::size_t row = 0, cx = 0, cy = 1;
    bool header_done = false;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto f = split_csv_line(line);
        double x = 0, y = 0;
        if (!header_done) {
            header_done = true;
            if (f.size() < 2) throw FormatError("points CSV: need at least two columns");
            if (!parse_double(f[0], x) || !parse_double(f[1], y)) {
                for (std::size_t k = 0; k < f.size(); ++k) {
                    std::string name = f[k];
                    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
                    if (name == "x") cx = k;
                    if (name == "y") cy = k;
                }
                continue;
            }
        }
        if (f.size() <= std::max(cx, cy) || !parse_double(f[cx], x) || !parse_double(f[cy], y))
            throw FormatError("points CSV row " + std::to_string(row) + ": expected two finite numbers");
        pts.push_back({x, y});
    }
    return pts;
}

PointSet read_points_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path);
    return read_points_csv(in);
}

void write_points_csv(std::ostream& out, std::span<const Point> points) {
    out << "x,y\n";
    out.precision(17);
    for (const Point& p : points) out << p.x << "," << p.y << "\n";
}

// ---------------------------------------------------------------------------
// hull

json hull_to_json(const geometry::RConvexHull& hull) {
    const auto& sites = hull.sites();
    json jsites = json::array();
    for (const Point& p : sites) jsites.push_back({p.x, p.y});

    const std::size_t count = hull.component_count();
    json comps = json::array();
    for (std::size_t c = 0; c < count; ++c) comps.push_back({{"id", c}, {"sites", json::array()}, {"loops", json::array()}});
    const auto& labels = hull.site_labels();
    for (std::size_t s = 0; s < labels.size(); ++s)
        if (labels[s] < count) comps[labels[s]]["sites"].push_back(s);
    for (const auto& loop : hull.loops()) {
        json pieces = json::array();
        for (const auto& piece : loop.pieces) pieces.push_back(piece_to_json(piece));
        const std::size_t label = loop.sites.empty() || loop.sites[0] >= labels.size() ? 0 : labels[loop.sites[0]];
        if (label < count) comps[label]["loops"].push_back({{"hole", loop.is_hole}, {"pieces", pieces}});
    }
    return {{"type", "r_convex_hull"},
            {"radius", num(hull.radius())},
            {"convex", hull.is_convex()},
            {"component_count", count},
            {"sites", jsites},
            {"components", comps}};
}

std::shared_ptr<const geometry::RConvexHull> hull_from_json(const json& j) {
    try {
        PointSet sites;
        for (const auto& p : j.at("sites")) sites.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        const double r = j.at("radius").is_null() ? geometry::kInfinity : j.at("radius").get<double>();
        return std::make_shared<const geometry::RConvexHull>(sites, r);
    } catch (const json::exception& e) {
        throw FormatError(std::string("hull document: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// density field

json field_to_json(const density::DensityField& f) {
    const auto& g = f.grid;
    return {{"grid", {{"xmin", g.xmin}, {"xmax", g.xmax}, {"ymin", g.ymin}, {"ymax", g.ymax}, {"nx", g.nx}, {"ny", g.ny}}},
            {"bandwidth", {{"h11", f.bandwidth.h11}, {"h12", f.bandwidth.h12}, {"h22", f.bandwidth.h22}}},
            {"order", "row-major: values[j * nx + i] at (xmin + i * dx, ymin + j * dy)"},
            {"values", f.values}};
}

density::DensityField field_from_json(const json& j) {
    density::DensityField f;
    try {
        const auto& g = j.at("grid");
        f.grid = {g.at("xmin").get<double>(), g.at("xmax").get<double>(), g.at("ymin").get<double>(),
                  g.at("ymax").get<double>(), g.at("nx").get<std::size_t>(), g.at("ny").get<std::size_t>()};
        if (j.contains("bandwidth")) {
            const auto& h = j.at("bandwidth");
            f.bandwidth = {h.at("h11").get<double>(), h.at("h12").get<double>(), h.at("h22").get<double>()};
        }
        f.values = j.at("values").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("density field: ") + e.what());
    }
    f.grid.validate();
    if (f.values.size() != f.grid.nx * f.grid.ny) throw FormatError("density field: value count does not match grid");
    return f;
}

void write_field_binary(std::ostream& out, const density::DensityField& f) {
    out.write("HDRF", 4);
    put<std::uint32_t>(out, 1);
    for (double v : {f.grid.xmin, f.grid.xmax, f.grid.ymin, f.grid.ymax}) put(out, v);
    put<std::uint64_t>(out, f.grid.nx);
    put<std::uint64_t>(out, f.grid.ny);
    for (double v : {f.bandwidth.h11, f.bandwidth.h12, f.bandwidth.h22}) put(out, v);
    out.write(reinterpret_cast<const char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(double)));
}

density::DensityField read_field_binary(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "HDRF", 4) != 0) throw FormatError("field binary: bad magic");
    if (get<std::uint32_t>(in) != 1) throw FormatError("field binary: unsupported version");
    density::DensityField f;
    f.grid.xmin = get<double>(in);
    f.grid.xmax = get<double>(in);
    f.grid.ymin = get<double>(in);
    f.grid.ymax = get<double>(in);
    f.grid.nx = get<std::uint64_t>(in);
    f.grid.ny = get<std::uint64_t>(in);
    f.bandwidth.h11 = get<double>(in);
    f.bandwidth.h12 = get<double>(in);
    f.bandwidth.h22 = get<double>(in);
    f.grid.validate();
    if (f.grid.nx > (1u << 16) || f.grid.ny > (1u << 16)) throw FormatError("field binary: implausible grid size");
    f.values.resize(f.grid.nx * f.grid.ny);
    if (!in.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(double))))
        throw FormatError("field binary: truncated values");
    return f;
}

// ---------------------------------------------------------------------------
// regions and estimates

json region_to_json(const hdr::Region& region) {
    if (const auto* h = region.hull()) {
        json j = hull_to_json(*h);
        j["type"] = "hull";
        return j;
    }
    if (const auto* c = region.contour()) {
        json loops = json::array();
        for (const auto& l : c->loops()) {
            json ring = json::array();
            for (const Point& p : l) ring.push_back({p.x, p.y});
            loops.push_back(ring);
        }
        return {{"type", "contour"}, {"level", c->level()}, {"component_count", c->component_count()}, {"loops", loops}};
    }
    return {{"type", "empty"}};
}

hdr::Region region_from_json(const json& j) {
    if (!j.is_object() || !j.contains("type")) {
        if (j.is_object() && j.contains("region")) return region_from_json(j.at("region"));
        throw FormatError("region document: missing type");
    }
    try {
        const std::string type = j.at("type").get<std::string>();
        if (type == "hull" || type == "r_convex_hull") return hdr::Region(hull_from_json(j));
        if (type == "contour") {
            std::vector<Ring> loops;
            for (const auto& l : j.at("loops")) loops.push_back(ring_from_json(l));
            return hdr::Region(std::make_shared<const contour::ContourSet>(
                contour::ContourSet::from_loops(std::move(loops), j.value("level", 0.0))));
        }
        if (type == "empty") return {};
        if (type == "estimate") return region_from_json(j.at("region"));
        std::vector<Ring> loops;
        if (type == "FeatureCollection") {
            for (const auto& f : j.at("features"))
                if (!f.at("geometry").is_null()) add_geojson_geometry(f.at("geometry"), loops);
        } else if (type == "Feature") {
            add_geojson_geometry(j.at("geometry"), loops);
        } else {
            add_geojson_geometry(j, loops);
        }
        if (loops.empty()) return {};
        return hdr::Region(std::make_shared<const contour::ContourSet>(contour::ContourSet::from_loops(std::move(loops))));
    } catch (const json::exception& e) {
        throw FormatError(std::string("region document: ") + e.what());
    }
}

hdr::Region read_region_file(const std::string& path) { return region_from_json(read_json_file(path)); }

json estimate_to_json(const hdr::HdrEstimate& e) {
    json trace = json::array();
    for (const auto& t : e.trace)
        trace.push_back({{"k", t.k},
                         {"tau_bar", num(t.tau_bar)},
                         {"f_tau_bar", num(t.f_tau_bar)},
                         {"tau_minus", num(t.tau_minus)},
                         {"tau_plus", num(t.tau_plus)},
                         {"f_minus", num(t.f_minus)},
                         {"f_plus", num(t.f_plus)},
                         {"n_plus", t.n_plus},
                         {"n_minus", t.n_minus},
                         {"r0", num(t.r0)},
                         {"convex_fallback", t.convex_fallback},
                         {"radius", num(t.radius)},
                         {"coverage", num(t.coverage)},
                         {"d_n", num(t.d_n)}});
    return {{"type", "estimate"},
            {"method", e.method},
            {"status", std::string(hdr::status_name(e.status))},
            {"n", e.n},
            {"tau", num(e.tau)},
            {"tau_bar", num(e.tau_bar)},
            {"thresholds",
             {{"f_tau", num(e.f_tau)}, {"f_tau_bar", num(e.f_tau_bar)}, {"f_plus", num(e.f_plus)}, {"f_minus", num(e.f_minus)}}},
            {"coverage", e.coverage},
            {"r0", num(e.r0)},
            {"radius", num(e.radius)},
            {"convex_fallback", e.convex_fallback},
            {"d_n", num(e.d_n)},
            {"bandwidth", {{"h11", e.bandwidth.h11}, {"h12", e.bandwidth.h12}, {"h22", e.bandwidth.h22}}},
            {"components", e.region.empty() ? 0 : e.component_count()},
            {"trace", trace},
            {"region", region_to_json(e.region)}};
}

// ---------------------------------------------------------------------------
// polygons

std::vector<Point> flatten_arc(const geometry::Arc& arc, double tolerance) {
    if (!(tolerance > 0)) throw InvalidArgument("flatten_arc: tolerance must be positive");
    const double step = tolerance >= arc.radius ? kPi / 2 : std::min(kPi / 2, 2.0 * std::acos(1.0 - tolerance / arc.radius));
    const auto k = static_cast<std::size_t>(std::max(1.0, std::ceil(arc.sweep() / step)));
    std::vector<Point> out;
    out.reserve(k + 1);
    for (std::size_t i = 0; i <= k; ++i) out.push_back(arc.at(static_cast<double>(i) / static_cast<double>(k)));
    return out;
}

std::vector<Polygon> region_polygons(const hdr::Region& region, double arc_tolerance) {
    std::vector<Ring> outers, holes;
    if (const auto* h = region.hull()) {
        for (const auto& loop : h->loops()) {
            Ring ring;
            for (const auto& piece : loop.pieces) {
                std::vector<Point> pts;
                if (const auto* a = std::get_if<geometry::Arc>(&piece))
                    pts = flatten_arc(*a, arc_tolerance);
                else
                    pts = {std::get<geometry::Segment>(piece).a, std::get<geometry::Segment>(piece).b};
                pts.pop_back();  // next piece starts here
                for (const Point& p : pts)
                    if (h->contains(p) && (ring.empty() || !(ring.back() == p))) ring.push_back(p);
            }
            while (ring.size() > 1 && ring.back() == ring.front()) ring.pop_back();
            if (ring.size() < 3) continue;
            (loop.is_hole ? holes : outers).push_back(std::move(ring));
        }
    } else if (const auto* c = region.contour()) {
        for (const auto& l : c->loops()) (ring_area(l) > 0 ? outers : holes).push_back(l);
    }
    return group_rings(std::move(outers), std::move(holes));
}

// ---------------------------------------------------------------------------
// files

void write_json_file(const std::string& path, const json& j) {
    // write then rename so readers never see a partial document
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw InvalidArgument("cannot write " + path);
        out << j.dump(2) << "\n";
        if (!out) throw Error("write failed: " + path);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error("rename failed: " + path);
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
}

}  // namespace hdrest::io
