#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

namespace hdrest::simbench {

struct StudyConfig {
    std::vector<int> models{1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<double> taus{0.8};
    std::vector<std::size_t> ns{500};
    std::vector<std::size_t> Bs{250};
    std::vector<double> ps{0.05, 0.10, 0.15, 0.20, 0.25, 0.30};
    double step = 0.025;
    double nu = 1.0;
    std::size_t R = 50;
    std::uint64_t seed = 20200501;
    std::string output_dir = "study";
    bool plugin = true;          // also run the H1 and H2 plug-in estimators
    bool refit_bootstrap = true;
    double reference_p = 0.15;   // hybrid row used in quotients and ratio rows
    double spacing = 0.01;       // boundary sample spacing
    std::size_t measure_draws = 200000;
    std::size_t truth_draws = 1000000;

    void validate() const;  // throws InvalidArgument
    nlohmann::json to_json() const;
    static StudyConfig from_json(const nlohmann::json& j);
    /// JSON object, or plain "key = value" lines with comma-separated lists.
    static StudyConfig parse(const std::string& text);
    static StudyConfig load(const std::string& path);
};

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// One estimate on one replicate. Plug-in rows carry B = 0.
struct ReplicateError {
    int model = 0;
    double tau = 0;
    std::size_t n = 0, B = 0;
    std::string method;  // "p1".."pK", "H1", "H2"
    std::size_t replicate = 0;
    double hausdorff = kMissing;
    double measure = kMissing;
    double measure_se = kMissing;
    std::string status;  // estimator status, or "failed"
    std::string cause;   // failure message
    std::size_t iterations = 0;
    std::size_t components = 0;
    double tau_bar = kMissing;
    double coverage = kMissing;

    bool failed() const { return status == "failed"; }
};

struct CellSummary {
    int model = 0;
    double tau = 0;
    std::size_t n = 0, B = 0;
    std::string method;
    std::size_t ok = 0, failed = 0, not_converged = 0;
    double mean_hausdorff = kMissing, sd_hausdorff = kMissing;
    double mean_measure = kMissing, sd_measure = kMissing;
    bool sd_degenerate = false;  // fewer than two successful replicates; SD reported as 0
    std::vector<std::string> causes;
};

struct QuotientRow {
    std::string metric;  // "hausdorff" or "measure"
    std::string name;    // q1, q2, q3, or "<ref>/H1" style at a given (tau, n, B)
    int model = 0;
    double tau = 0;
    std::size_t n = 0, B = 0;
    double value = kMissing;
};

struct ErrorReport {
    StudyConfig config;
    std::vector<ReplicateError> raw;
    std::vector<CellSummary> cells;
    std::vector<QuotientRow> quotients;
    double seconds = 0;

    const CellSummary* find(int model, double tau, std::size_t n, std::size_t B, const std::string& method) const;
    /// Label of the hybrid row for reference_p ("p3" for the default p list).
    std::string reference_label() const;
};

using Progress = std::function<void(std::size_t done, std::size_t total)>;

/// Runs every (model, n, replicate) job. Within a job all estimators share
/// the sample, and all hybrid cells share one bootstrap calibrator, so B and
/// p comparisons are paired. Failures are recorded per cell.
ErrorReport run_study(const StudyConfig& cfg, const Progress& progress = {});

/// Summaries and quotient rows from raw errors (run_study calls this).
void summarize(ErrorReport& report);

/// Human-readable model parameters, one line per component.
std::string mixture_header(const std::vector<int>& models);

/// Writes table_*.csv, quotients.csv, raw_errors.csv, report.txt and
/// manifest.json into `dir` (created if needed). Returns the file names.
std::vector<std::string> write_report(const ErrorReport& report, const std::string& dir);

}  // namespace hdrest::simbench
