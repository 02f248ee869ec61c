#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hdrest/density.hpp"
#include "hdrest/hdr.hpp"
#include "hdrest/point.hpp"

namespace hdrest::app {

using Date = std::chrono::sys_days;

/// YYYY-MM-DD (also YYYY/MM/DD). Throws FormatError.
Date parse_date(const std::string& text);
std::string format_date(Date d);

/// Column names of the case CSV. An empty count column means one case per row.
struct SchemaMapping {
    std::string lon = "longitude";
    std::string lat = "latitude";
    std::string date = "date";
    std::string count = "count";
    /// Counts are running totals per location; new cases are first differences.
    bool cumulative = false;
};

struct CaseRecord {
    double lon = 0, lat = 0;
    Date date{};
    std::int64_t count = 0;  // new cases after differencing
    std::size_t row = 0;     // 1-based line number in the file
};

struct RowError {
    std::size_t row;
    std::string message;
};

struct IngestOptions {
    SchemaMapping schema;
    double jitter_sigma = 0.01;  // degrees, isotropic Gaussian
    std::uint64_t seed = 1;
    std::optional<Date> start;   // default: earliest valid record
    std::size_t n_min = 50;      // weeks below this are flagged unreliable
    /// Multiply longitudes by cos(mean latitude) before estimation.
    bool equirectangular = false;
};

struct WeeklyBatch {
    std::size_t week = 0;
    Date first{}, last{};  // inclusive
    PointSet points;
    std::uint64_t cases = 0;  // sum of new-case counts in the week
    std::size_t records = 0;
    bool unreliable = false;
};

struct IngestResult {
    std::vector<WeeklyBatch> weeks;
    std::vector<RowError> errors;
    std::size_t rows = 0, accepted = 0;
    Date start{};
    double x_scale = 1.0;  // longitude factor applied to points (1 unless equirectangular)
    IngestOptions options;

    nlohmann::json metadata() const;
};

/// Validates records, differences cumulative series per location, expands
/// each record count-fold with jitter, and groups points into consecutive
/// 7-day weeks from the start date. Bad rows are collected with their line
/// numbers; a bad header throws MalformedHeader. Jitter for record k uses its
/// own stream, so results depend only on the seed.
IngestResult ingest_csv(std::istream& in, const IngestOptions& opt);
IngestResult ingest_csv_file(const std::string& path, const IngestOptions& opt);

enum class Method { Hybrid, Plugin, Both };
Method parse_method(const std::string& s);

struct PipelineConfig {
    Method method = Method::Both;
    std::vector<double> taus{0.9, 0.8, 0.5};
    std::size_t B = 250;
    double p = 0.25;
    double step = 0.025;
    double nu = 1.0;
    bool refit_bootstrap = true;
    density::Selector selector = density::Selector::Plugin;
    std::uint64_t seed = 1;
    double arc_tolerance = 1e-3;  // degrees
    std::string output_dir;       // empty: nothing written
};

struct SummaryRow {
    std::size_t week = 0;
    Date first{}, last{};
    std::size_t n = 0;
    double tau = 0;
    std::string method;
    std::string status;  // estimator status, "skipped" or "failed"
    std::size_t components = 0;
    double coverage = hdr::kNaN;
    double tau_bar = hdr::kNaN;
    double r0 = hdr::kNaN;
    double seconds = 0;
    std::string note;
};

struct PipelineResult {
    std::vector<SummaryRow> rows;
    std::vector<std::string> files;
    bool not_converged = false;

    /// Component counts, one row per week, one column per (method, tau).
    std::string component_table() const;
    std::string summary_csv() const;
};

/// Runs every week (in parallel) and every tau and method on it. Unreliable
/// weeks are skipped with a reason; estimator failures are recorded. With an
/// output directory each estimate is written as JSON and GeoJSON, plus
/// summary.csv, components.csv and manifest.json.
PipelineResult run_pipeline(const IngestResult& data, const PipelineConfig& cfg);

/// FeatureCollection with one feature for the region: Polygon for a single
/// polygon, MultiPolygon otherwise. Arc chords have sagitta <= tolerance.
/// x_scale undoes the equirectangular factor on output.
nlohmann::json emit_geojson(const hdr::HdrEstimate& estimate, double arc_tolerance, std::optional<std::size_t> week = {},
                            double x_scale = 1.0);

/// Case CSV with two Gaussian clusters ("cities") at (lon0 -+ 1, lat0), one
/// row per case-day with count 1..3, spread over `weeks` weeks.
void write_two_city_csv(std::ostream& out, std::size_t cases_per_week, std::size_t weeks, std::uint64_t seed,
                        double spread = 0.15, Point center = {-3.7, 40.4});

}  // namespace hdrest::app
