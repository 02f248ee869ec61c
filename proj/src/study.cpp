#include "hdrest/study.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "hdrest/errors.hpp"
#include "hdrest/hdr.hpp"
#include "hdrest/metrics.hpp"
#include "hdrest/mixture.hpp"
#include "hdrest/parallel.hpp"
#include "hdrest/rng.hpp"

namespace hdrest::simbench {

using nlohmann::json;

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string fixed(double v, int digits) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

bool same(double a, double b) { return std::fabs(a - b) <= 1e-12; }

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

}  // namespace

// ---------------------------------------------------------------------------
// config

void StudyConfig::validate() const {
    auto fail = [](const std::string& m) { throw InvalidArgument("study config: " + m); };
    if (models.empty() || taus.empty() || ns.empty()) fail("models, taus and ns must be nonempty");
    for (int m : models)
        if (m < 1 || m > 9) fail("model ids must be 1..9");
    for (double t : taus)
        if (!(t > 0 && t < 1)) fail("taus must lie in (0, 1)");
    for (auto n : ns)
        if (n < 20) fail("sample sizes must be at least 20");
    for (auto b : Bs)
        if (b < 2) fail("B must be at least 2");
    for (double p : ps)
        if (!(p > 0 && p < 1)) fail("p values must lie in (0, 1)");
    if (ps.empty() != Bs.empty()) fail("hybrid runs need both B and p values");
    if (ps.empty() && !plugin) fail("no estimator selected");
    if (!(step > 0)) fail("step must be positive");
    for (double t : taus)
        if (!ps.empty() && step > t) fail("step must not exceed tau");
    if (!(nu > 0 && nu <= 1)) fail("nu must lie in (0, 1]");
    if (R < 1) fail("R must be at least 1");
    if (!(spacing > 0)) fail("spacing must be positive");
    if (measure_draws < 10000) fail("measure_draws must be at least 1e4");
    if (truth_draws < 1000) fail("truth_draws must be at least 1e3");
}

json StudyConfig::to_json() const {
    return json{{"models", models},
                {"taus", taus},
                {"ns", ns},
                {"B", Bs},
                {"p", ps},
                {"step", step},
                {"nu", nu},
                {"R", R},
                {"seed", seed},
                {"output_dir", output_dir},
                {"plugin", plugin},
                {"refit_bootstrap", refit_bootstrap},
                {"reference_p", reference_p},
                {"spacing", spacing},
                {"measure_draws", measure_draws},
                {"truth_draws", truth_draws}};
}

StudyConfig StudyConfig::from_json(const json& j) {
    if (!j.is_object()) throw FormatError("study config: expected a JSON object");
    static const std::set<std::string> known{"models", "taus", "ns", "B", "p", "step", "nu", "R",
                                             "seed", "output_dir", "plugin", "refit_bootstrap",
                                             "reference_p", "spacing", "measure_draws", "truth_draws"};
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) throw FormatError("study config: unknown key '" + k + "'");
    StudyConfig c;
    try {
        auto get = [&](const char* key, auto& out) {
            if (j.contains(key)) j.at(key).get_to(out);
        };
        get("models", c.models);
        get("taus", c.taus);
        get("ns", c.ns);
        get("B", c.Bs);
        get("p", c.ps);
        get("step", c.step);
        get("nu", c.nu);
        get("R", c.R);
        get("seed", c.seed);
        get("output_dir", c.output_dir);
        get("plugin", c.plugin);
        get("refit_bootstrap", c.refit_bootstrap);
        get("reference_p", c.reference_p);
        get("spacing", c.spacing);
        get("measure_draws", c.measure_draws);
        get("truth_draws", c.truth_draws);
    } catch (const json::exception& e) {
        throw FormatError(std::string("study config: ") + e.what());
    }
    return c;
}

StudyConfig StudyConfig::parse(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        try {
            return from_json(json::parse(text));
        } catch (const json::parse_error& e) {
            throw FormatError(std::string("study config: ") + e.what());
        }
    }
    // key = value lines; lists are comma separated
    json j = json::object();
    std::istringstream in(text);
    std::string line;
    std::size_t row = 0;
    static const std::set<std::string> lists{"models", "taus", "ns", "B", "p"};
    while (std::getline(in, line)) {
        ++row;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("study config line " + std::to_string(row) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        auto scalar = [&](const std::string& v) -> json {
            if (v == "true" || v == "false") return v == "true";
            try {
                std::size_t used = 0;
                const double d = std::stod(v, &used);
                if (used == v.size()) {
                    if (v.find_first_of(".eE") == std::string::npos) return std::stoll(v);
                    return d;
                }
            } catch (...) {
            }
            return v;
        };
        if (lists.count(key)) {
            json arr = json::array();
            std::istringstream parts(value);
            std::string item;
            while (std::getline(parts, item, ','))
                if (!trim(item).empty()) arr.push_back(scalar(trim(item)));
            j[key] = arr;
        } else {
            j[key] = scalar(value);
        }
    }
    return from_json(j);
}

StudyConfig StudyConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("study config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

// ---------------------------------------------------------------------------
// runner

namespace {

struct Job {
    int model;
    std::size_t n;
    std::size_t r;
};

void record_errors(ReplicateError& e, const hdr::HdrEstimate& est, const metrics::RegionHandle& truth,
                   const StudyConfig& cfg, std::uint64_t mc_seed) {
    e.status = std::string(hdr::status_name(est.status));
    e.iterations = est.trace.size();
    e.components = est.component_count();
    e.tau_bar = est.tau_bar;
    e.coverage = est.coverage;
    const auto handle = metrics::RegionHandle::from(est.region, cfg.spacing);
    if (handle.boundary.empty()) throw EmptyRegion("estimate has no boundary");
    e.hausdorff = metrics::hausdorff(handle.boundary, truth.boundary);
    const auto m = metrics::distance_in_measure(handle, truth, metrics::kBenchmarkBox, cfg.measure_draws, mc_seed);
    e.measure = m.value;
    e.measure_se = m.se;
}

std::vector<ReplicateError> run_job(const StudyConfig& cfg, const Job& job,
                                    const std::map<std::pair<int, std::size_t>, metrics::RegionHandle>& truth) {
    std::vector<ReplicateError> out;
    const auto& model = simbench::model(job.model);
    const std::uint64_t key = static_cast<std::uint64_t>(job.model);
    const auto sample = mixture_sample(model, job.n, derive_seed(cfg.seed, {key, job.n, job.r, 0}));
    const std::uint64_t mc_seed = derive_seed(cfg.seed, {key, job.n, job.r, 2});

    auto base = [&](double tau, std::size_t B, const std::string& method) {
        ReplicateError e;
        e.model = job.model;
        e.tau = tau;
        e.n = job.n;
        e.B = B;
        e.method = method;
        e.replicate = job.r;
        return e;
    };
    auto failed = [](ReplicateError& e, const std::string& why) {
        e.status = "failed";
        e.cause = why;
    };

    // bandwidths; a failure here fails every cell of the replicate that needs it
    std::optional<density::BandwidthMatrix> h1, h2;
    std::string h1_error, h2_error;
    try {
        h1 = density::bandwidth_plugin(sample);
    } catch (const std::exception& ex) {
        h1_error = ex.what();
    }
    if (cfg.plugin) {
        try {
            h2 = density::bandwidth_lscv(sample);
        } catch (const std::exception& ex) {
            h2_error = ex.what();
        }
    }

    std::optional<hdr::PluginFit> fit1, fit2;
    auto make_fit = [&](const std::optional<density::BandwidthMatrix>& h, std::optional<hdr::PluginFit>& fit,
                        std::string& err) {
        if (!h) return;
        try {
            fit = hdr::plugin_fit(sample, *h);
        } catch (const std::exception& ex) {
            err = ex.what();
        }
    };
    if (cfg.plugin) {
        make_fit(h1, fit1, h1_error);
        make_fit(h2, fit2, h2_error);
    }
    std::optional<hdr::BootstrapCalibrator> cal;
    if (h1 && !cfg.ps.empty())
        cal.emplace(sample, *h1, derive_seed(cfg.seed, {key, job.n, job.r, 1}), cfg.refit_bootstrap);

    for (double tau : cfg.taus) {
        const auto& t = truth.at({job.model, static_cast<std::size_t>(std::llround(tau * 1e9))});
        if (cfg.plugin) {
            for (int which = 1; which <= 2; ++which) {
                auto e = base(tau, 0, which == 1 ? "H1" : "H2");
                const auto& fit = which == 1 ? fit1 : fit2;
                try {
                    if (!fit) throw Error(which == 1 ? h1_error : h2_error);
                    record_errors(e, hdr::plugin_hdr(sample, tau, *fit), t, cfg, mc_seed);
                } catch (const std::exception& ex) {
                    failed(e, ex.what());
                }
                out.push_back(std::move(e));
            }
        }
        for (std::size_t B : cfg.Bs) {
            for (std::size_t k = 0; k < cfg.ps.size(); ++k) {
                auto e = base(tau, B, "p" + std::to_string(k + 1));
                try {
                    if (!cal) throw Error(h1_error);
                    hdr::HybridConfig hc;
                    hc.tau = tau;
                    hc.B = B;
                    hc.p = cfg.ps[k];
                    hc.step = cfg.step;
                    hc.nu = cfg.nu;
                    record_errors(e, hdr::hybrid_hdr(sample, hc, *cal), t, cfg, mc_seed);
                } catch (const std::exception& ex) {
                    failed(e, ex.what());
                }
                out.push_back(std::move(e));
            }
        }
    }
    return out;
}

double mean_of(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? kMissing : s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    if (v.size() < 2) return v.empty() ? kMissing : 0.0;
    const double m = mean_of(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

ErrorReport run_study(const StudyConfig& cfg, const Progress& progress) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();

    // true regions, one per (model, tau); all taus of a model share the draws
    std::map<std::pair<int, std::size_t>, metrics::RegionHandle> truth;
    for (int m : cfg.models)
        for (double tau : cfg.taus) {
            const auto t = true_hdr(model(m), tau, oracle_grid(), cfg.truth_draws,
                                    derive_seed(cfg.seed, {0x7472, static_cast<std::uint64_t>(m)}), cfg.spacing);
            truth[{m, static_cast<std::size_t>(std::llround(tau * 1e9))}] = {
                [c = t.contour](Point q) { return c->contains(q); }, t.boundary};
        }

    std::vector<Job> jobs;
    for (int m : cfg.models)
        for (auto n : cfg.ns)
            for (std::size_t r = 0; r < cfg.R; ++r) jobs.push_back({m, n, r});

    std::vector<std::vector<ReplicateError>> results(jobs.size());
    std::atomic<std::size_t> done{0};
    std::mutex mu;
    parallel_for(jobs.size(), [&](std::size_t i) {
        results[i] = run_job(cfg, jobs[i], truth);
        const std::size_t d = ++done;
        if (progress) {
            std::lock_guard lock(mu);
            progress(d, jobs.size());
        }
    });

    ErrorReport report;
    report.config = cfg;
    for (auto& r : results)
        for (auto& e : r) report.raw.push_back(std::move(e));
    summarize(report);
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::string ErrorReport::reference_label() const {
    for (std::size_t k = 0; k < config.ps.size(); ++k)
        if (same(config.ps[k], config.reference_p)) return "p" + std::to_string(k + 1);
    return "";
}

const CellSummary* ErrorReport::find(int model, double tau, std::size_t n, std::size_t B,
                                     const std::string& method) const {
    for (const auto& c : cells)
        if (c.model == model && same(c.tau, tau) && c.n == n && c.B == B && c.method == method) return &c;
    return nullptr;
}

void summarize(ErrorReport& report) {
    report.cells.clear();
    report.quotients.clear();
    std::map<std::tuple<int, std::size_t, std::size_t, std::size_t, std::string>, std::vector<const ReplicateError*>>
        groups;
    std::vector<std::tuple<int, std::size_t, std::size_t, std::size_t, std::string>> order;
    for (const auto& e : report.raw) {
        const auto key = std::make_tuple(e.model, static_cast<std::size_t>(std::llround(e.tau * 1e9)), e.n, e.B,
                                         e.method);
        auto [it, fresh] = groups.try_emplace(key);
        if (fresh) order.push_back(key);
        it->second.push_back(&e);
    }
    for (const auto& key : order) {
        const auto& members = groups[key];
        CellSummary c;
        c.model = members.front()->model;
        c.tau = members.front()->tau;
        c.n = members.front()->n;
        c.B = members.front()->B;
        c.method = members.front()->method;
        std::vector<double> h, m;
        std::set<std::string> causes;
        for (const auto* e : members) {
            if (e->failed()) {
                ++c.failed;
                causes.insert(e->cause);
                continue;
            }
            ++c.ok;
            if (e->status != "converged") ++c.not_converged;
            h.push_back(e->hausdorff);
            m.push_back(e->measure);
        }
        c.causes.assign(causes.begin(), causes.end());
        c.mean_hausdorff = mean_of(h);
        c.sd_hausdorff = sd_of(h);
        c.mean_measure = mean_of(m);
        c.sd_measure = sd_of(m);
        c.sd_degenerate = h.size() < 2;
        report.cells.push_back(std::move(c));
    }

    // quotients of the reference hybrid row
    const auto& cfg = report.config;
    const std::string ref = report.reference_label();
    auto value = [&](const CellSummary* c, bool hd) {
        if (!c) return kMissing;
        return hd ? c->mean_hausdorff : c->mean_measure;
    };
    for (int hd = 1; hd >= 0; --hd) {
        const std::string metric = hd ? "hausdorff" : "measure";
        for (int m : cfg.models) {
            auto ratio = [&](const std::string& name, double tau, std::size_t n, std::size_t B, const CellSummary* a,
                             const CellSummary* b) {
                if (!a || !b) return;
                report.quotients.push_back({metric, name, m, tau, n, B, value(a, hd) / value(b, hd)});
            };
            if (!ref.empty()) {
                ratio("q1", 0.5, 500, 100, report.find(m, 0.5, 500, 100, ref), report.find(m, 0.5, 1000, 100, ref));
                ratio("q2", 0.8, 500, 250, report.find(m, 0.8, 500, 250, ref), report.find(m, 0.8, 1000, 250, ref));
                ratio("q3", 0.5, 500, 100, report.find(m, 0.5, 500, 100, ref), report.find(m, 0.5, 500, 250, ref));
                for (double tau : cfg.taus)
                    for (auto n : cfg.ns)
                        for (auto B : cfg.Bs)
                            for (const char* pm : {"H1", "H2"})
                                ratio(ref + "/" + pm, tau, n, B, report.find(m, tau, n, B, ref),
                                      report.find(m, tau, n, 0, pm));
            }
        }
    }
}

// ---------------------------------------------------------------------------
// output

std::string mixture_header(const std::vector<int>& models) {
    std::ostringstream os;
    os << "# mixture models: weight, mean (x, y), sd (x, y), correlation\n";
    for (int id : models) {
        const auto& m = model(id);
        os << "# (" << m.id << ") " << m.name << "\n";
        for (const auto& c : m.components) {
            const double sx = std::sqrt(c.cov.h11), sy = std::sqrt(c.cov.h22);
            os << "#     " << fixed(c.weight, 4) << "  (" << fixed(c.mean.x, 4) << ", " << fixed(c.mean.y, 4)
               << ")  (" << fixed(sx, 4) << ", " << fixed(sy, 4) << ")  " << fixed(c.cov.h12 / (sx * sy), 4) << "\n";
        }
    }
    return os.str();
}

namespace {

std::vector<std::string> row_labels(const ErrorReport& r) {
    std::vector<std::string> rows;
    for (std::size_t k = 0; k < r.config.ps.size(); ++k) rows.push_back("p" + std::to_string(k + 1));
    if (r.config.plugin) rows.insert(rows.end(), {"H1", "H2"});
    return rows;
}

std::string table_name(double tau, std::size_t n, std::size_t B, const std::string& metric) {
    return "table_tau" + num(tau) + "_n" + std::to_string(n) + (B ? "_B" + std::to_string(B) : "") + "_" + metric +
           ".csv";
}

}  // namespace

std::vector<std::string> write_report(const ErrorReport& report, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<std::string> files;
    const auto& cfg = report.config;
    const std::string ref = report.reference_label();
    const auto rows = row_labels(report);
    // plug-in only studies still get one table per (tau, n)
    const std::vector<std::size_t> Bs = cfg.Bs.empty() ? std::vector<std::size_t>{0} : cfg.Bs;

    std::ostringstream text;
    text << "# HDR estimation study\n" << mixture_header(cfg.models);
    text << "# R = " << cfg.R << ", seed = " << cfg.seed << ", step = " << num(cfg.step) << ", nu = " << num(cfg.nu)
         << (cfg.R == 1 ? "  [R = 1: standard deviations are reported as 0]" : "") << "\n";

    for (const char* metric : {"hausdorff", "measure"}) {
        const bool hd = std::string(metric) == "hausdorff";
        for (double tau : cfg.taus)
            for (auto n : cfg.ns)
                for (auto B : Bs) {
                    const std::string name = table_name(tau, n, B, metric);
                    std::ofstream f(fs::path(dir) / name);
                    f << "row";
                    for (int m : cfg.models) f << ",M" << m << "_mean,M" << m << "_sd";
                    f << "\n";
                    text << "\n" << metric << " errors, tau = " << num(tau) << ", n = " << n;
                    if (B) text << ", B = " << B;
                    text << "\n" << std::string(10, ' ');
                    for (int m : cfg.models) {
                        char buf[32];
                        std::snprintf(buf, sizeof buf, "%16s", ("(" + std::to_string(m) + ")").c_str());
                        text << buf;
                    }
                    text << "\n";
                    auto emit = [&](const std::string& label, auto cell_of, bool ratio) {
                        f << label;
                        char buf[48];
                        std::snprintf(buf, sizeof buf, "%-10s", label.c_str());
                        text << buf;
                        for (int m : cfg.models) {
                            double mean = kMissing, sd = kMissing;
                            std::string mark;
                            cell_of(m, mean, sd, mark);
                            f << "," << num(mean) << "," << (ratio ? "" : num(sd));
                            std::string cell = ratio ? fixed(mean, 2) : fixed(mean, 3) + " (" + fixed(sd, 3) + ")";
                            std::snprintf(buf, sizeof buf, "%16s", (cell + mark).c_str());
                            text << buf;
                        }
                        f << "\n";
                        text << "\n";
                    };
                    for (const auto& row : rows) {
                        const std::size_t b = (row == "H1" || row == "H2") ? 0 : B;
                        emit(row,
                             [&](int m, double& mean, double& sd, std::string& mark) {
                                 if (const auto* c = report.find(m, tau, n, b, row)) {
                                     mean = hd ? c->mean_hausdorff : c->mean_measure;
                                     sd = hd ? c->sd_hausdorff : c->sd_measure;
                                     if (c->failed) mark = "*";
                                 }
                             },
                             false);
                    }
                    if (!ref.empty() && cfg.plugin && B)
                        for (const char* pm : {"H1", "H2"}) {
                            const std::string q = ref + "/" + pm;
                            emit(q,
                                 [&](int m, double& mean, double&, std::string&) {
                                     for (const auto& r : report.quotients)
                                         if (r.metric == metric && r.name == q && r.model == m && same(r.tau, tau) &&
                                             r.n == n && r.B == B)
                                             mean = r.value;
                                 },
                                 true);
                        }
                    files.push_back(name);
                }
    }

    {
        std::ofstream f(fs::path(dir) / "quotients.csv");
        f << "metric,quotient,model,tau,n,B,value\n";
        text << "\nquotients\n";
        for (const auto& q : report.quotients) {
            f << q.metric << "," << q.name << "," << q.model << "," << num(q.tau) << "," << q.n << "," << q.B << ","
              << num(q.value) << "\n";
            if (q.name.size() == 2)
                text << q.metric << " " << q.name << " model " << q.model << ": " << fixed(q.value, 2) << "\n";
        }
        files.push_back("quotients.csv");
    }
    {
        std::ofstream f(fs::path(dir) / "raw_errors.csv");
        f << "model,tau,n,B,method,replicate,hausdorff,measure,measure_se,status,iterations,components,tau_bar,"
             "coverage,cause\n";
        for (const auto& e : report.raw) {
            std::string cause = e.cause;
            std::replace(cause.begin(), cause.end(), '"', '\'');
            f << e.model << "," << num(e.tau) << "," << e.n << "," << e.B << "," << e.method << "," << e.replicate
              << "," << num(e.hausdorff) << "," << num(e.measure) << "," << num(e.measure_se) << "," << e.status << ","
              << e.iterations << "," << e.components << "," << num(e.tau_bar) << "," << num(e.coverage) << ",\""
              << cause << "\"\n";
        }
        files.push_back("raw_errors.csv");
    }

    std::size_t failures = 0;
    json failed_cells = json::array();
    for (const auto& c : report.cells) {
        failures += c.failed;
        if (c.failed)
            failed_cells.push_back({{"model", c.model},
                                    {"tau", c.tau},
                                    {"n", c.n},
                                    {"B", c.B},
                                    {"method", c.method},
                                    {"failed", c.failed},
                                    {"causes", c.causes}});
    }
    if (failures) text << "\n* cells with failed replicates: see manifest.json\n";
    {
        std::ofstream f(fs::path(dir) / "report.txt");
        f << text.str();
        files.push_back("report.txt");
    }

    json models = json::array();
    for (int id : cfg.models) {
        const auto& m = model(id);
        json comps = json::array();
        for (const auto& c : m.components)
            comps.push_back({{"weight", c.weight},
                             {"mean", {c.mean.x, c.mean.y}},
                             {"cov", {{c.cov.h11, c.cov.h12}, {c.cov.h12, c.cov.h22}}}});
        models.push_back({{"id", m.id}, {"name", m.name}, {"components", comps}});
    }
    json manifest{{"config", cfg.to_json()},
                  {"models", models},
                  {"reference_row", ref},
                  {"replicate_records", report.raw.size()},
                  {"cells", report.cells.size()},
                  {"failed_replicates", failures},
                  {"failed_cells", failed_cells},
                  {"sd_degenerate", cfg.R == 1},
                  {"seconds", report.seconds},
                  {"files", files}};
    files.push_back("manifest.json");
    manifest["files"] = files;
    std::ofstream(fs::path(dir) / "manifest.json") << manifest.dump(2) << "\n";
    return files;
}

}  // namespace hdrest::simbench
