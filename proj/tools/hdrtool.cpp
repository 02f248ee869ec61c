// hdrtool: command-line front end.
//
//   hdrtool estimate  -i sample.csv -o estimate.json [--geojson out.geojson]
//   hdrtool pipeline  -i cases.csv -o outdir
//   hdrtool bench     --seed N [--config study.json] [-o outdir]
//   hdrtool metrics   a.json b.geojson
//   hdrtool sample    --model 7 --n 1000 --seed 1 -o sample.csv
//
// Exit codes: 0 success, 2 invalid input or arguments, 3 an estimator did not
// converge (outputs are still written), 1 anything else.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "hdrest/appcli.hpp"
#include "hdrest/errors.hpp"
#include "hdrest/hdr.hpp"
#include "hdrest/io.hpp"
#include "hdrest/metrics.hpp"
#include "hdrest/mixture.hpp"
#include "hdrest/parallel.hpp"
#include "hdrest/study.hpp"

using namespace hdrest;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kInvalid = 2;
constexpr int kNotConverged = 3;

struct EstimateArgs {
    std::string input, output, geojson, field;
    std::string method = "hybrid";
    std::string selector = "plugin";
    hdr::HybridConfig hybrid;
    bool no_refit = false;
    double arc_tolerance = 1e-3;
    std::size_t grid = 256;
};

struct PipelineArgs {
    std::string input, output;
    std::string method = "both";
    std::string selector = "plugin";
    std::string start;
    app::IngestOptions ingest;
    app::PipelineConfig cfg;
    bool no_refit = false;
};

struct BenchArgs {
    std::string config, output;
    std::optional<std::uint64_t> seed;
    std::vector<int> models;
    std::vector<double> taus, ps;
    std::vector<std::size_t> ns, Bs;
    std::optional<std::size_t> R, truth_draws, measure_draws;
    bool no_plugin = false, no_refit = false, quiet = false;
};

struct MetricsArgs {
    std::string a, b, output;
    std::vector<double> box{-3, -3, 3, 3};
    std::size_t draws = metrics::kBenchmarkDraws;
    std::uint64_t seed = 1;
    double spacing = metrics::kBoundarySpacing;
};

struct SampleArgs {
    int model = 0;
    bool two_city = false;
    std::size_t n = 500, weeks = 2;
    std::uint64_t seed = 1;
    std::string output;
};

void add_hybrid_flags(CLI::App* sub, hdr::HybridConfig& h, std::string& selector, bool& no_refit) {
    sub->add_option("--tau", h.tau, "Probability outside the HDR")->capture_default_str();
    sub->add_option("--B", h.B, "Bootstrap resamples per iteration")->capture_default_str();
    sub->add_option("--p", h.p, "Quantile level for the bootstrap thresholds")->capture_default_str();
    sub->add_option("--step", h.step, "Decrease of tau_bar per iteration")->capture_default_str();
    sub->add_option("--nu", h.nu, "Hull radius as a multiple of r0")->capture_default_str();
    sub->add_option("--max-iterations", h.max_iterations, "0: ceil(tau / step) + 1")->capture_default_str();
    sub->add_option("--r0-tolerance", h.r0_tolerance, "Bisection width relative to the diameter")->capture_default_str();
    sub->add_option("--selector", selector, "Bandwidth selector: plugin, lscv or normal-scale")->capture_default_str();
    sub->add_flag("--no-refit", no_refit, "Evaluate bootstrap samples with the original density");
}

void write_json(const std::string& path, const json& j) {
    if (path == "-")
        std::cout << j.dump(2) << "\n";
    else
        io::write_json_file(path, j);
}

int run_estimate(const EstimateArgs& a) {
    const auto pts = io::read_points_csv_file(a.input);
    if (pts.size() < 3) throw InvalidArgument("need at least 3 points, got " + std::to_string(pts.size()));
    const auto selector = density::parse_selector(a.selector);
    hdr::HdrEstimate est;
    density::BandwidthMatrix h = density::select_bandwidth(pts, selector);
    if (a.method == "hybrid") {
        auto cfg = a.hybrid;
        cfg.selector = selector;
        cfg.refit_bootstrap = !a.no_refit;
        cfg.validate();
        hdr::BootstrapCalibrator cal(pts, h, cfg.seed, cfg.refit_bootstrap);
        est = hdr::hybrid_hdr(pts, cfg, cal);
    } else if (a.method == "plugin") {
        hdr::PluginOptions opt;
        opt.nx = opt.ny = a.grid;
        if (!(a.hybrid.tau > 0 && a.hybrid.tau < 1)) throw InvalidArgument("tau must lie in (0, 1)");
        est = hdr::plugin_hdr(pts, a.hybrid.tau, h, opt);
    } else {
        throw InvalidArgument("method must be hybrid or plugin");
    }

    write_json(a.output, io::estimate_to_json(est));
    if (!a.geojson.empty()) io::write_json_file(a.geojson, app::emit_geojson(est, a.arc_tolerance));
    if (!a.field.empty()) {
        hdr::PluginOptions opt;
        opt.nx = opt.ny = a.grid;
        const auto fit = hdr::plugin_fit(pts, h, opt);
        if (a.field.size() > 4 && a.field.substr(a.field.size() - 4) == ".bin") {
            std::ofstream out(a.field, std::ios::binary);
            io::write_field_binary(out, fit.field);
        } else {
            io::write_json_file(a.field, io::field_to_json(fit.field));
        }
    }
    std::cerr << est.method << ": status " << hdr::status_name(est.status) << ", components "
              << (est.region.empty() ? 0 : est.component_count()) << ", coverage " << est.coverage << ", tau_bar "
              << est.tau_bar << "\n";
    return est.converged() ? kOk : kNotConverged;
}

int run_pipeline(PipelineArgs a) {
    if (!a.start.empty()) a.ingest.start = app::parse_date(a.start);
    a.cfg.method = app::parse_method(a.method);
    a.cfg.selector = density::parse_selector(a.selector);
    a.cfg.refit_bootstrap = !a.no_refit;
    a.cfg.output_dir = a.output;
    a.cfg.seed = a.ingest.seed;
    const auto data = app::ingest_csv_file(a.input, a.ingest);
    for (const auto& e : data.errors) std::cerr << "row " << e.row << ": " << e.message << "\n";
    for (const auto& w : data.weeks)
        std::cerr << "week " << w.week << " " << app::format_date(w.first) << ".." << app::format_date(w.last) << ": "
                  << w.points.size() << " points" << (w.unreliable ? " (below n_min, skipped)" : "") << "\n";
    const auto res = app::run_pipeline(data, a.cfg);
    for (const auto& r : res.rows)
        if (r.status == "failed") std::cerr << "week " << r.week << " " << r.method << " tau " << r.tau << ": " << r.note << "\n";
    std::cout << res.component_table();
    return res.not_converged ? kNotConverged : kOk;
}

int run_bench(const BenchArgs& a) {
    simbench::StudyConfig cfg = a.config.empty() ? simbench::StudyConfig{} : simbench::StudyConfig::load(a.config);
    cfg.seed = *a.seed;
    if (!a.output.empty()) cfg.output_dir = a.output;
    if (!a.models.empty()) cfg.models = a.models;
    if (!a.taus.empty()) cfg.taus = a.taus;
    if (!a.ns.empty()) cfg.ns = a.ns;
    if (!a.Bs.empty()) cfg.Bs = a.Bs;
    if (!a.ps.empty()) cfg.ps = a.ps;
    if (a.R) cfg.R = *a.R;
    if (a.truth_draws) cfg.truth_draws = *a.truth_draws;
    if (a.measure_draws) cfg.measure_draws = *a.measure_draws;
    if (a.no_plugin) cfg.plugin = false;
    if (a.no_refit) cfg.refit_bootstrap = false;
    cfg.validate();

    std::cerr << simbench::mixture_header(cfg.models);
    const auto report = simbench::run_study(cfg, [&](std::size_t done, std::size_t total) {
        if (!a.quiet) std::cerr << "\rreplicate jobs " << done << "/" << total << std::flush;
    });
    if (!a.quiet) std::cerr << "\n";
    const auto files = simbench::write_report(report, cfg.output_dir);
    std::ifstream txt(cfg.output_dir + "/report.txt");
    std::cout << txt.rdbuf();
    std::size_t failed = 0, not_converged = 0;
    for (const auto& c : report.cells) {
        failed += c.failed;
        not_converged += c.not_converged;
    }
    std::cerr << files.size() << " files in " << cfg.output_dir << "; " << failed << " failed and " << not_converged
              << " non-converged estimates; " << report.seconds << " s\n";
    return not_converged ? kNotConverged : kOk;
}

int run_metrics(const MetricsArgs& a) {
    if (a.box.size() != 4) throw InvalidArgument("--box needs xmin,ymin,xmax,ymax");
    const auto ra = io::read_region_file(a.a), rb = io::read_region_file(a.b);
    if (ra.empty() || rb.empty()) throw InvalidArgument("both regions must be nonempty");
    const auto ha = metrics::RegionHandle::from(ra, a.spacing), hb = metrics::RegionHandle::from(rb, a.spacing);
    const BBox box{a.box[0], a.box[1], a.box[2], a.box[3]};
    const auto m = metrics::distance_in_measure(ha, hb, box, a.draws, a.seed);
    const json out{{"hausdorff", metrics::hausdorff(ha.boundary, hb.boundary)},
                   {"distance_in_measure", m.value},
                   {"distance_in_measure_se", m.se},
                   {"draws", m.m},
                   {"box", a.box},
                   {"spacing", a.spacing},
                   {"components", {ra.component_count(), rb.component_count()}}};
    write_json(a.output.empty() ? "-" : a.output, out);
    return kOk;
}

int run_sample(const SampleArgs& a) {
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!a.output.empty() && a.output != "-") {
        file.open(a.output);
        if (!file) throw InvalidArgument("cannot write " + a.output);
        out = &file;
    }
    if (a.two_city) {
        app::write_two_city_csv(*out, a.n, a.weeks, a.seed);
    } else {
        const auto pts = simbench::mixture_sample(simbench::model(a.model), a.n, a.seed);
        io::write_points_csv(*out, pts);
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Highest density region estimation: plug-in and r-convex hybrid estimators"};
    app.require_subcommand(1);
    std::size_t threads = 0;
    app.add_option("--threads", threads, "Worker threads (default: HDREST_THREADS or all cores)");

    EstimateArgs est;
    auto* s_est = app.add_subcommand("estimate", "Estimate the HDR of one point sample (CSV with x,y)");
    s_est->add_option("-i,--input", est.input, "Sample CSV")->required()->check(CLI::ExistingFile);
    s_est->add_option("-o,--output", est.output, "Estimate JSON ('-' for stdout)")->default_val("-");
    s_est->add_option("--geojson", est.geojson, "Also write the region as GeoJSON");
    s_est->add_option("--field", est.field, "Also write the density grid (.json or .bin)");
    s_est->add_option("--method", est.method, "hybrid or plugin")->capture_default_str();
    s_est->add_option("--seed", est.hybrid.seed, "Bootstrap seed")->capture_default_str();
    s_est->add_option("--arc-tolerance", est.arc_tolerance, "Max sagitta of flattened arcs")->capture_default_str();
    s_est->add_option("--grid", est.grid, "Plug-in grid nodes per side")->capture_default_str();
    add_hybrid_flags(s_est, est.hybrid, est.selector, est.no_refit);

    PipelineArgs pipe;
    pipe.cfg.taus = {0.9, 0.8, 0.5};
    auto* s_pipe = app.add_subcommand("pipeline", "Weekly HDRs from geolocated case counts");
    s_pipe->add_option("-i,--input", pipe.input, "Case CSV")->required()->check(CLI::ExistingFile);
    s_pipe->add_option("-o,--output", pipe.output, "Output directory")->required();
    s_pipe->add_option("--method", pipe.method, "hybrid, plugin or both")->capture_default_str();
    s_pipe->add_option("--tau", pipe.cfg.taus, "Tau values")->delimiter(',')->capture_default_str();
    s_pipe->add_option("--B", pipe.cfg.B, "Bootstrap resamples")->capture_default_str();
    s_pipe->add_option("--p", pipe.cfg.p, "Bootstrap quantile level")->capture_default_str();
    s_pipe->add_option("--step", pipe.cfg.step, "tau_bar step")->capture_default_str();
    s_pipe->add_option("--nu", pipe.cfg.nu, "Hull radius factor")->capture_default_str();
    s_pipe->add_option("--selector", pipe.selector, "Bandwidth selector")->capture_default_str();
    s_pipe->add_flag("--no-refit", pipe.no_refit, "Evaluate bootstrap samples with the original density");
    s_pipe->add_option("--seed", pipe.ingest.seed, "Seed for jitter and bootstrap")->capture_default_str();
    s_pipe->add_option("--jitter", pipe.ingest.jitter_sigma, "Jitter sigma in degrees")->capture_default_str();
    s_pipe->add_option("--start", pipe.start, "First day of week 0 (default: earliest record)");
    s_pipe->add_option("--n-min", pipe.ingest.n_min, "Skip weeks with fewer points")->capture_default_str();
    s_pipe->add_flag("--cumulative", pipe.ingest.schema.cumulative, "Counts are running totals per location");
    s_pipe->add_flag("--equirectangular", pipe.ingest.equirectangular, "Scale longitude by cos(mean latitude)");
    s_pipe->add_option("--lon-col", pipe.ingest.schema.lon)->capture_default_str();
    s_pipe->add_option("--lat-col", pipe.ingest.schema.lat)->capture_default_str();
    s_pipe->add_option("--date-col", pipe.ingest.schema.date)->capture_default_str();
    s_pipe->add_option("--count-col", pipe.ingest.schema.count, "Empty: one case per row")->capture_default_str();
    s_pipe->add_option("--arc-tolerance", pipe.cfg.arc_tolerance, "Max sagitta in degrees")->capture_default_str();

    BenchArgs bench;
    auto* s_bench = app.add_subcommand("bench", "Run a simulation study on the mixture models");
    s_bench->add_option("--seed", bench.seed, "Root seed")->required();
    s_bench->add_option("--config", bench.config, "Study config (JSON or key = value)")->check(CLI::ExistingFile);
    s_bench->add_option("-o,--output", bench.output, "Output directory (overrides the config)");
    s_bench->add_option("--models", bench.models, "Model ids 1..9")->delimiter(',');
    s_bench->add_option("--taus", bench.taus)->delimiter(',');
    s_bench->add_option("--ns", bench.ns)->delimiter(',');
    s_bench->add_option("--B", bench.Bs)->delimiter(',');
    s_bench->add_option("--p", bench.ps)->delimiter(',');
    s_bench->add_option("--R", bench.R, "Replicates per cell");
    s_bench->add_option("--truth-draws", bench.truth_draws);
    s_bench->add_option("--measure-draws", bench.measure_draws);
    s_bench->add_flag("--no-plugin", bench.no_plugin, "Skip the plug-in estimators");
    s_bench->add_flag("--no-refit", bench.no_refit);
    s_bench->add_flag("-q,--quiet", bench.quiet);

    MetricsArgs met;
    auto* s_met = app.add_subcommand("metrics", "Compare two region files (estimate JSON, hull JSON or GeoJSON)");
    s_met->add_option("a", met.a)->required()->check(CLI::ExistingFile);
    s_met->add_option("b", met.b)->required()->check(CLI::ExistingFile);
    s_met->add_option("-o,--output", met.output, "JSON result (default stdout)");
    s_met->add_option("--box", met.box, "Monte Carlo box xmin,ymin,xmax,ymax")->delimiter(',')->capture_default_str();
    s_met->add_option("--draws", met.draws)->capture_default_str();
    s_met->add_option("--seed", met.seed)->capture_default_str();
    s_met->add_option("--spacing", met.spacing, "Boundary sample spacing")->capture_default_str();

    SampleArgs smp;
    auto* s_smp = app.add_subcommand("sample", "Write a sample from a benchmark model or a two-city case file");
    auto* o_model = s_smp->add_option("--model", smp.model, "Model id 1..9");
    auto* o_city = s_smp->add_flag("--two-city", smp.two_city, "Case CSV with two clusters");
    o_model->excludes(o_city);
    s_smp->add_option("--n", smp.n, "Points, or cases per week with --two-city")->capture_default_str();
    s_smp->add_option("--weeks", smp.weeks)->capture_default_str();
    s_smp->add_option("--seed", smp.seed)->capture_default_str();
    s_smp->add_option("-o,--output", smp.output);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInvalid;
    }
    if (threads) set_worker_count(threads);

    try {
        if (*s_est) return run_estimate(est);
        if (*s_pipe) return run_pipeline(pipe);
        if (*s_bench) return run_bench(bench);
        if (*s_met) return run_metrics(met);
        if (*s_smp) {
            if (!smp.two_city && smp.model == 0) throw InvalidArgument("sample needs --model or --two-city");
            return run_sample(smp);
        }
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kFailure;
}
