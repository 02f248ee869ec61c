#include "hdrest/appcli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "hdrest/errors.hpp"
#include "hdrest/io.hpp"
#include "hdrest/parallel.hpp"
#include "hdrest/rng.hpp"

namespace hdrest::app {

using nlohmann::json;
namespace chr = std::chrono;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string num(double v, const char* fmt = "%.6g") {
    if (!std::isfinite(v)) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    try {
        std::size_t used = 0;
        out = std::stod(s, &used);
        return used == s.size() && std::isfinite(out);
    } catch (...) {
        return false;
    }
}

bool parse_count(const std::string& s, std::int64_t& out) {
    double v = 0;
    if (!parse_number(s, v) || v != std::floor(v) || std::fabs(v) > 1e15) return false;
    out = static_cast<std::int64_t>(v);
    return true;
}

std::string method_name(Method m) { return m == Method::Hybrid ? "hybrid" : "plugin"; }

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw InvalidArgument("cannot write " + path.string());
        out << text;
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

Date parse_date(const std::string& text) {
    int y = 0;
    unsigned m = 0, d = 0;
    char s1 = 0, s2 = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%d%c%u%c%u%c", &y, &s1, &m, &s2, &d, &tail) != 5 || s1 != s2 ||
        (s1 != '-' && s1 != '/'))
        throw FormatError("bad date '" + text + "' (expected YYYY-MM-DD)");
    const chr::year_month_day ymd{chr::year{y}, chr::month{m}, chr::day{d}};
    if (!ymd.ok()) throw FormatError("bad date '" + text + "'");
    return Date(ymd);
}

std::string format_date(Date d) {
    const chr::year_month_day ymd(d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()));
    return buf;
}

// ---------------------------------------------------------------------------
// ingestion

json IngestResult::metadata() const {
    json errs = json::array();
    for (const auto& e : errors) errs.push_back({{"row", e.row}, {"message", e.message}});
    json weeks_j = json::array();
    for (const auto& w : weeks)
        weeks_j.push_back({{"week", w.week},
                           {"first", format_date(w.first)},
                           {"last", format_date(w.last)},
                           {"cases", w.cases},
                           {"records", w.records},
                           {"points", w.points.size()},
                           {"unreliable", w.unreliable}});
    return {{"rows", rows},
            {"accepted", accepted},
            {"start", format_date(start)},
            {"jitter_sigma_degrees", options.jitter_sigma},
            {"seed", options.seed},
            {"n_min", options.n_min},
            {"cumulative", options.schema.cumulative},
            {"equirectangular", options.equirectangular},
            {"x_scale", x_scale},
            {"weeks", weeks_j},
            {"errors", errs}};
}

IngestResult ingest_csv(std::istream& in, const IngestOptions& opt) {
    if (!(opt.jitter_sigma >= 0)) throw InvalidArgument("jitter sigma must be non-negative");
    IngestResult out;
    out.options = opt;

    std::string line;
    std::size_t row = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            header = io::split_csv_line(line);
        } catch (const FormatError& e) {
            throw MalformedHeader(std::string("case CSV header: ") + e.what());
        }
        break;
    }
    if (header.empty()) throw MalformedHeader("case CSV: missing header");
    auto column = [&](const std::string& name) -> std::ptrdiff_t {
        for (std::size_t k = 0; k < header.size(); ++k)
            if (header[k] == name) return static_cast<std::ptrdiff_t>(k);
        throw MalformedHeader("case CSV header: no column named '" + name + "'");
    };
    const auto c_lon = column(opt.schema.lon), c_lat = column(opt.schema.lat), c_date = column(opt.schema.date);
    const std::ptrdiff_t c_count = opt.schema.count.empty() ? -1 : column(opt.schema.count);

    std::vector<CaseRecord> recs;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++out.rows;
        auto fail = [&](const std::string& why) { out.errors.push_back({row, why}); };
        std::vector<std::string> f;
        try {
            f = io::split_csv_line(line);
        } catch (const FormatError& e) {
            fail(e.what());
            continue;
        }
        if (f.size() != header.size()) {
            fail("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(f.size()));
            continue;
        }
        CaseRecord r;
        r.row = row;
        if (!parse_number(f[c_lon], r.lon) || r.lon < -180 || r.lon > 180) {
            fail("longitude '" + f[c_lon] + "' outside [-180, 180]");
            continue;
        }
        if (!parse_number(f[c_lat], r.lat) || r.lat < -90 || r.lat > 90) {
            fail("latitude '" + f[c_lat] + "' outside [-90, 90]");
            continue;
        }
        try {
            r.date = parse_date(f[c_date]);
        } catch (const FormatError& e) {
            fail(e.what());
            continue;
        }
        r.count = 1;
        if (c_count >= 0 && !parse_count(f[c_count], r.count)) {
            fail("count '" + f[c_count] + "' is not an integer");
            continue;
        }
        if (r.count < (opt.schema.cumulative ? 0 : 1)) {
            fail("count " + std::to_string(r.count) + (opt.schema.cumulative ? " is negative" : " is below 1"));
            continue;
        }
        recs.push_back(r);
    }

    if (opt.schema.cumulative) {
        // first differences per location, in date order
        std::map<std::pair<double, double>, std::vector<std::size_t>> series;
        for (std::size_t k = 0; k < recs.size(); ++k) series[{recs[k].lon, recs[k].lat}].push_back(k);
        std::vector<char> drop(recs.size(), 0);
        for (auto& [loc, idx] : series) {
            std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return recs[a].date < recs[b].date; });
            std::int64_t prev = 0;
            for (std::size_t k = 0; k < idx.size(); ++k) {
                auto& r = recs[idx[k]];
                if (k > 0 && r.date == recs[idx[k - 1]].date) {
                    out.errors.push_back({r.row, "duplicate cumulative entry for this location and date"});
                    drop[idx[k]] = 1;
                    continue;
                }
                if (r.count < prev) {
                    out.errors.push_back({r.row, "cumulative count decreased from " + std::to_string(prev) + " to " +
                                                     std::to_string(r.count)});
                    drop[idx[k]] = 1;
                    continue;
                }
                const std::int64_t total = r.count;
                r.count = total - prev;
                prev = total;
            }
        }
        std::vector<CaseRecord> kept;
        for (std::size_t k = 0; k < recs.size(); ++k)
            if (!drop[k]) kept.push_back(recs[k]);
        recs = std::move(kept);
    }

    if (recs.empty()) {
        std::sort(out.errors.begin(), out.errors.end(), [](const RowError& a, const RowError& b) { return a.row < b.row; });
        out.start = opt.start.value_or(Date{});
        return out;
    }
    Date start = recs.front().date;
    for (const auto& r : recs) start = std::min(start, r.date);
    if (opt.start) start = *opt.start;
    out.start = start;

    if (opt.equirectangular) {
        double lat = 0;
        for (const auto& r : recs) lat += r.lat;
        out.x_scale = std::cos(lat / static_cast<double>(recs.size()) * kPi / 180.0);
    }

    std::vector<CaseRecord> dated;
    std::size_t last_week = 0;
    for (const auto& r : recs) {
        if (r.date < start) {
            out.errors.push_back({r.row, "date " + format_date(r.date) + " precedes the start date"});
            continue;
        }
        last_week = std::max<std::size_t>(last_week, static_cast<std::size_t>((r.date - start).count() / 7));
        dated.push_back(r);
    }
    out.accepted = dated.size();
    std::sort(out.errors.begin(), out.errors.end(), [](const RowError& a, const RowError& b) { return a.row < b.row; });

    out.weeks.resize(last_week + 1);
    for (std::size_t w = 0; w <= last_week; ++w) {
        out.weeks[w].week = w;
        out.weeks[w].first = start + chr::days(7 * static_cast<int>(w));
        out.weeks[w].last = out.weeks[w].first + chr::days(6);
    }
    std::sort(dated.begin(), dated.end(), [](const CaseRecord& a, const CaseRecord& b) { return a.row < b.row; });
    for (const auto& r : dated) {
        auto& wk = out.weeks[static_cast<std::size_t>((r.date - start).count() / 7)];
        ++wk.records;
        wk.cases += static_cast<std::uint64_t>(r.count);
        Rng rng(derive_seed(opt.seed, {r.row}));
        std::normal_distribution<double> z(0.0, 1.0);
        for (std::int64_t c = 0; c < r.count; ++c) {
            const double dx = opt.jitter_sigma > 0 ? opt.jitter_sigma * z(rng) : 0.0;
            const double dy = opt.jitter_sigma > 0 ? opt.jitter_sigma * z(rng) : 0.0;
            wk.points.push_back({(r.lon + dx) * out.x_scale, r.lat + dy});
        }
    }
    for (auto& wk : out.weeks) wk.unreliable = wk.points.size() < opt.n_min;
    return out;
}

IngestResult ingest_csv_file(const std::string& path, const IngestOptions& opt) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path);
    return ingest_csv(in, opt);
}

Method parse_method(const std::string& s) {
    if (s == "hybrid") return Method::Hybrid;
    if (s == "plugin") return Method::Plugin;
    if (s == "both") return Method::Both;
    throw InvalidArgument("method must be hybrid, plugin or both");
}

// ---------------------------------------------------------------------------
// GeoJSON

json emit_geojson(const hdr::HdrEstimate& e, double arc_tolerance, std::optional<std::size_t> week, double x_scale) {
    const auto polys = io::region_polygons(e.region, arc_tolerance);
    auto ring_json = [&](const io::Ring& r) {
        json a = json::array();
        for (const Point& p : r) a.push_back({p.x / x_scale, p.y});
        a.push_back({r.front().x / x_scale, r.front().y});
        return a;
    };
    auto poly_json = [&](const io::Polygon& p) {
        json a = json::array();
        for (const auto& r : p) a.push_back(ring_json(r));
        return a;
    };
    json geometry = nullptr;
    if (polys.size() == 1) {
        geometry = {{"type", "Polygon"}, {"coordinates", poly_json(polys[0])}};
    } else if (polys.size() > 1) {
        json coords = json::array();
        for (const auto& p : polys) coords.push_back(poly_json(p));
        geometry = {{"type", "MultiPolygon"}, {"coordinates", coords}};
    }
    json props = {{"tau", jnum(e.tau)},
                  {"tau_bar", jnum(e.tau_bar)},
                  {"coverage", e.coverage},
                  {"components", e.region.empty() ? 0 : e.component_count()},
                  {"week", week ? json(*week) : json(nullptr)},
                  {"method", e.method},
                  {"status", std::string(hdr::status_name(e.status))}};
    if (std::isfinite(e.radius)) props["radius"] = e.radius;
    return {{"type", "FeatureCollection"},
            {"features", json::array({{{"type", "Feature"}, {"properties", props}, {"geometry", geometry}}})}};
}

// ---------------------------------------------------------------------------
// pipeline

std::string PipelineResult::component_table() const {
    std::vector<std::string> cols;
    std::map<std::size_t, std::map<std::string, std::string>> cells;
    std::map<std::size_t, const SummaryRow*> week_info;
    for (const auto& r : rows) {
        const std::string col = r.method + "_tau" + num(r.tau);
        if (std::find(cols.begin(), cols.end(), col) == cols.end()) cols.push_back(col);
        cells[r.week][col] = r.status == "skipped" || r.status == "failed" ? "" : std::to_string(r.components);
        week_info[r.week] = &r;
    }
    std::ostringstream os;
    os << "week,first,last,n";
    for (const auto& c : cols) os << "," << c;
    os << "\n";
    for (const auto& [w, m] : cells) {
        const auto* info = week_info[w];
        os << w << "," << format_date(info->first) << "," << format_date(info->last) << "," << info->n;
        for (const auto& c : cols) os << "," << (m.count(c) ? m.at(c) : "");
        os << "\n";
    }
    return os.str();
}

std::string PipelineResult::summary_csv() const {
    std::ostringstream os;
    os << "week,first,last,n,method,tau,status,components,coverage,tau_bar,r0,seconds,note\n";
    for (const auto& r : rows) {
        std::string note = r.note;
        std::replace(note.begin(), note.end(), '"', '\'');
        os << r.week << "," << format_date(r.first) << "," << format_date(r.last) << "," << r.n << "," << r.method << ","
           << num(r.tau) << "," << r.status << "," << r.components << "," << num(r.coverage) << "," << num(r.tau_bar)
           << "," << num(r.r0) << "," << num(r.seconds, "%.3f") << ",\"" << note << "\"\n";
    }
    return os.str();
}

PipelineResult run_pipeline(const IngestResult& data, const PipelineConfig& cfg) {
    if (cfg.taus.empty()) throw InvalidArgument("pipeline: no tau values");
    for (double t : cfg.taus)
        if (!(t > 0 && t < 1)) throw InvalidArgument("pipeline: tau must lie in (0, 1)");
    if (!(cfg.arc_tolerance > 0)) throw InvalidArgument("pipeline: arc tolerance must be positive");
    std::vector<Method> methods;
    if (cfg.method != Method::Plugin) methods.push_back(Method::Hybrid);
    if (cfg.method != Method::Hybrid) methods.push_back(Method::Plugin);
    auto hybrid_cfg = [&](double tau) {
        hdr::HybridConfig h;
        h.tau = tau;
        h.B = cfg.B;
        h.p = cfg.p;
        h.step = cfg.step;
        h.nu = cfg.nu;
        h.seed = cfg.seed;
        h.selector = cfg.selector;
        h.refit_bootstrap = cfg.refit_bootstrap;
        return h;
    };
    if (cfg.method != Method::Plugin)
        for (double t : cfg.taus) hybrid_cfg(t).validate();

    namespace fs = std::filesystem;
    const bool write = !cfg.output_dir.empty();
    if (write) fs::create_directories(cfg.output_dir);

    struct WeekOut {
        std::vector<SummaryRow> rows;
        std::vector<std::string> files;
    };
    std::vector<WeekOut> per_week(data.weeks.size());

    parallel_for(data.weeks.size(), [&](std::size_t w) {
        const auto& wk = data.weeks[w];
        auto& out = per_week[w];
        auto base = [&](Method m, double tau) {
            SummaryRow r;
            r.week = wk.week;
            r.first = wk.first;
            r.last = wk.last;
            r.n = wk.points.size();
            r.tau = tau;
            r.method = method_name(m);
            return r;
        };
        if (wk.unreliable) {
            for (Method m : methods)
                for (double tau : cfg.taus) {
                    auto r = base(m, tau);
                    r.status = "skipped";
                    r.note = "n = " + std::to_string(wk.points.size()) + " below n_min = " + std::to_string(data.options.n_min);
                    out.rows.push_back(r);
                }
            return;
        }

        std::optional<density::BandwidthMatrix> h;
        std::string h_error;
        try {
            h = density::select_bandwidth(wk.points, cfg.selector);
        } catch (const std::exception& ex) {
            h_error = ex.what();
        }
        std::optional<hdr::PluginFit> fit;
        std::optional<hdr::BootstrapCalibrator> cal;

        for (Method m : methods)
            for (double tau : cfg.taus) {
                auto r = base(m, tau);
                const auto t0 = chr::steady_clock::now();
                try {
                    if (!h) throw Error("bandwidth selection failed: " + h_error);
                    hdr::HdrEstimate est;
                    if (m == Method::Plugin) {
                        if (!fit) fit = hdr::plugin_fit(wk.points, *h);
                        est = hdr::plugin_hdr(wk.points, tau, *fit);
                    } else {
                        if (!cal) cal.emplace(wk.points, *h, derive_seed(cfg.seed, {wk.week}), cfg.refit_bootstrap);
                        est = hdr::hybrid_hdr(wk.points, hybrid_cfg(tau), *cal);
                    }
                    r.seconds = chr::duration<double>(chr::steady_clock::now() - t0).count();
                    r.status = std::string(hdr::status_name(est.status));
                    r.components = est.region.empty() ? 0 : est.component_count();
                    r.coverage = est.coverage;
                    r.tau_bar = est.tau_bar;
                    r.r0 = est.r0;
                    if (write) {
                        char stem[96];
                        std::snprintf(stem, sizeof stem, "week%02zu_%s_tau%s", wk.week, r.method.c_str(), num(tau).c_str());
                        auto doc = io::estimate_to_json(est);
                        doc["week"] = wk.week;
                        doc["first"] = format_date(wk.first);
                        doc["last"] = format_date(wk.last);
                        doc["x_scale"] = data.x_scale;
                        io::write_json_file((fs::path(cfg.output_dir) / (std::string(stem) + ".json")).string(), doc);
                        io::write_json_file((fs::path(cfg.output_dir) / (std::string(stem) + ".geojson")).string(),
                                            emit_geojson(est, cfg.arc_tolerance, wk.week, data.x_scale));
                        out.files.push_back(std::string(stem) + ".json");
                        out.files.push_back(std::string(stem) + ".geojson");
                    }
                } catch (const std::exception& ex) {
                    r.seconds = chr::duration<double>(chr::steady_clock::now() - t0).count();
                    r.status = "failed";
                    r.note = ex.what();
                }
                out.rows.push_back(r);
            }
    });

    PipelineResult res;
    for (auto& w : per_week) {
        for (auto& r : w.rows) {
            if (r.method == "hybrid" && r.status != "failed" && r.status != "skipped" && r.status != hdr::status_name(hdr::Status::Converged))
                res.not_converged = true;
            res.rows.push_back(std::move(r));
        }
        for (auto& f : w.files) res.files.push_back(std::move(f));
    }

    if (write) {
        const fs::path dir(cfg.output_dir);
        write_text_atomic(dir / "summary.csv", res.summary_csv());
        write_text_atomic(dir / "components.csv", res.component_table());
        res.files.push_back("summary.csv");
        res.files.push_back("components.csv");
        json conf = {{"method", cfg.method == Method::Both ? "both" : method_name(cfg.method)},
                     {"taus", cfg.taus},
                     {"B", cfg.B},
                     {"p", cfg.p},
                     {"step", cfg.step},
                     {"nu", cfg.nu},
                     {"refit_bootstrap", cfg.refit_bootstrap},
                     {"selector", std::string(density::selector_name(cfg.selector))},
                     {"seed", cfg.seed},
                     {"arc_tolerance", cfg.arc_tolerance}};
        res.files.push_back("manifest.json");
        io::write_json_file((dir / "manifest.json").string(), {{"config", conf},
                                                               {"ingest", data.metadata()},
                                                               {"not_converged", res.not_converged},
                                                               {"files", res.files}});
    }
    return res;
}

// ---------------------------------------------------------------------------
// synthetic fixture

void write_two_city_csv(std::ostream& out, std::size_t cases_per_week, std::size_t weeks, std::uint64_t seed,
                        double spread, Point center) {
    Rng rng(seed);
    std::normal_distribution<double> z(0.0, spread);
    std::uniform_int_distribution<int> day(0, 6), count(1, 3), city(0, 1);
    const Date start = parse_date("2020-03-02");
    out << "date,longitude,latitude,count\n";
    out.precision(10);
    for (std::size_t w = 0; w < weeks; ++w) {
        std::size_t left = cases_per_week;
        while (left > 0) {
            const auto c = std::min<std::size_t>(left, static_cast<std::size_t>(count(rng)));
            left -= c;
            const double dx = city(rng) ? 1.0 : -1.0;
            const Date d = start + chr::days(7 * static_cast<int>(w) + day(rng));
            out << format_date(d) << "," << center.x + dx + z(rng) << "," << center.y + z(rng) << "," << c << "\n";
        }
    }
}

}  // namespace hdrest::app
