#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hdrest/contour.hpp"
#include "hdrest/density.hpp"
#include "hdrest/geometry.hpp"

namespace hdrest::hdr {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class Status {
    Converged,
    NotConverged,       // iteration limit reached or tau_bar exhausted
    EmptyPlusSet,       // no sample point above the upper threshold
    ThresholdsCrossed,  // f_minus > f_plus (only possible for p > 1/2)
};
std::string_view status_name(Status s);

/// An estimated HDR, backed either by an r-convex hull or by contour polygons.
/// A default-constructed region is empty.
class Region {
public:
    Region() = default;
    explicit Region(std::shared_ptr<const geometry::RConvexHull> hull) : hull_(std::move(hull)) {}
    explicit Region(std::shared_ptr<const contour::ContourSet> contour) : contour_(std::move(contour)) {}

    bool empty() const;
    const geometry::RConvexHull* hull() const { return hull_.get(); }
    const contour::ContourSet* contour() const { return contour_.get(); }

    bool contains(Point q) const;
    std::size_t component_count() const;
    PointSet boundary_sample(double spacing) const;

private:
    std::shared_ptr<const geometry::RConvexHull> hull_;
    std::shared_ptr<const contour::ContourSet> contour_;
};

/// Fraction of `points` inside `region`.
double coverage(const Region& region, std::span<const Point> points);

/// tau-quantile of the density values at the sample (linear interpolation).
double hyndman_threshold(std::span<const double> density_values, double tau);

struct HybridConfig {
    double tau = 0.5;
    std::size_t B = 250;
    double p = 0.25;
    double step = 0.025;
    double nu = 1.0;  // hull radius is nu * r0
    std::uint64_t seed = 1;
    density::Selector selector = density::Selector::Plugin;
    std::size_t max_iterations = 0;  // 0: ceil(tau / step) + 1
    /// Evaluate each bootstrap sample with a density refitted on that sample
    /// (same bandwidth). When false the original f_n is used instead.
    bool refit_bootstrap = true;
    double r0_tolerance = 1e-4;  // bisection width, relative to the diameter

    void validate() const;  // throws InvalidArgument
    std::size_t iteration_limit() const;
};

struct IterationTrace {
    std::size_t k;
    double tau_bar;
    double f_tau_bar;  // (f_n)_tau_bar
    double tau_minus, tau_plus;
    double f_minus, f_plus;
    std::size_t n_plus, n_minus;
    double r0 = kNaN;
    bool convex_fallback = false;
    double radius = kNaN;
    double coverage = kNaN;
    double d_n = kNaN;
};

/// Per-point class from the last hybrid iteration.
enum class Split : std::uint8_t { Doubtful = 0, Plus = 1, Minus = 2 };

struct HdrEstimate {
    std::string method;  // "hybrid" or "plugin"
    double tau = kNaN;
    double tau_bar = kNaN;
    Status status = Status::Converged;
    double f_tau = kNaN;      // Hyndman threshold at tau
    double f_tau_bar = kNaN;  // Hyndman threshold at tau_bar
    double f_plus = kNaN, f_minus = kNaN;
    double coverage = 0.0;
    double r0 = kNaN;
    double radius = kNaN;
    bool convex_fallback = false;
    double d_n = kNaN;  // max(f_plus - f_tau, f_tau - f_minus), diagnostic only
    density::BandwidthMatrix bandwidth{};
    Region region;
    std::vector<IterationTrace> trace;
    std::vector<Split> split;  // hybrid only, per input point
    std::size_t n = 0;

    bool converged() const { return status == Status::Converged; }
    std::size_t component_count() const { return region.component_count(); }
};

struct PluginOptions {
    std::optional<density::GridSpec> grid;  // default: bounding box padded by pad_sigmas * max sigma
    std::size_t nx = 256, ny = 256;
    double pad_sigmas = 3.0;
};

/// {f_n >= (f_n)_tau} traced on a grid. Throws EmptyRegion when the threshold
/// exceeds every grid value.
HdrEstimate plugin_hdr(std::span<const Point> points, double tau, density::Selector selector,
                       const PluginOptions& opt = {});
HdrEstimate plugin_hdr(std::span<const Point> points, double tau, const density::BandwidthMatrix& h,
                       const PluginOptions& opt = {});

/// Density at the sample and on the grid for one bandwidth, reusable across tau.
struct PluginFit {
    density::BandwidthMatrix bandwidth;
    std::vector<double> at_sample;
    density::DensityField field;
};
PluginFit plugin_fit(std::span<const Point> points, const density::BandwidthMatrix& h, const PluginOptions& opt = {});
HdrEstimate plugin_hdr(std::span<const Point> points, double tau, const PluginFit& fit);

struct R0Result {
    double r0;              // +infinity on convex fallback
    bool convex_fallback;
    std::size_t evaluations;  // hull constructions during bisection
};

/// Largest gamma such that C_gamma(x_plus) contains no point of x_minus, by
/// bisection between half the smallest nearest-neighbour distance in x_plus
/// and the diameter of both sets. Returns the lower end of the final bracket.
/// tol <= 0 selects 1e-4 times the diameter.
R0Result estimate_r0(std::span<const Point> x_plus, std::span<const Point> x_minus, double tol = 0.0);

/// Bootstrap side of the hybrid algorithm for one sample and bandwidth.
/// Bootstrap sample i of iteration k is drawn from the stream
/// derive_seed(seed, {k, i}); its sorted density values are cached, so runs
/// that differ only in p, B or tau reuse the same draws. Not thread-safe;
/// replicates are computed in parallel internally.
class BootstrapCalibrator {
public:
    BootstrapCalibrator(std::span<const Point> points, const density::BandwidthMatrix& h, std::uint64_t seed,
                        bool refit = true);

    const density::BandwidthMatrix& bandwidth() const { return h_; }
    std::uint64_t seed() const { return seed_; }
    bool refit() const { return refit_; }
    /// f_n at every sample point, input order.
    const std::vector<double>& sample_density() const { return fx_; }
    const std::vector<double>& sorted_density() const { return fx_sorted_; }

    /// Proportions of bootstrap points with density >= threshold (plus) and
    /// < threshold (minus), one entry per replicate 0..B-1 of iteration k.
    void proportions(std::size_t k, std::size_t B, double threshold, std::vector<double>& plus,
                     std::vector<double>& minus);

private:
    void ensure(std::size_t k, std::size_t B);

    PointSet points_;
    density::BandwidthMatrix h_;
    std::uint64_t seed_;
    bool refit_;
    std::vector<double> fx_, fx_sorted_;
    std::vector<std::vector<std::vector<double>>> cache_;  // [k][i] sorted values
};

/// The hybrid estimator. The overload taking a calibrator ignores
/// cfg.selector, cfg.seed and cfg.refit_bootstrap in favour of the
/// calibrator's own settings.
HdrEstimate hybrid_hdr(std::span<const Point> points, const HybridConfig& cfg);
HdrEstimate hybrid_hdr(std::span<const Point> points, const HybridConfig& cfg, BootstrapCalibrator& calibrator);

}  // namespace hdrest::hdr
