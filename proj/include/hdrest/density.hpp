#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "hdrest/point.hpp"

namespace hdrest::density {

/// Symmetric 2x2 bandwidth in the covariance convention: the kernel is the
/// N(0, H) density, so H carries squared length units.
struct BandwidthMatrix {
    double h11 = 1.0, h12 = 0.0, h22 = 1.0;

    double det() const { return h11 * h22 - h12 * h12; }
    bool is_spd() const { return h11 > 0.0 && det() > 0.0; }
    BandwidthMatrix scaled(double c) const { return {c * h11, c * h12, c * h22}; }
    double trace() const { return h11 + h22; }
    /// Largest kernel standard deviation (square root of the top eigenvalue).
    double max_sigma() const;
};

/// Lower Cholesky factor L with H = L L^T.
struct Cholesky {
    double l11, l21, l22;
    explicit Cholesky(const BandwidthMatrix& h);
    Point apply(Point z) const { return {l11 * z.x, l21 * z.x + l22 * z.y}; }
    Point solve(Point x) const {
        const double u = x.x / l11;
        return {u, (x.y - l21 * u) / l22};
    }
};

/// Regular lattice with nx x ny nodes spanning [xmin, xmax] x [ymin, ymax]
/// inclusive.
struct GridSpec {
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    std::size_t nx = 256, ny = 256;

    double dx() const { return (xmax - xmin) / static_cast<double>(nx - 1); }
    double dy() const { return (ymax - ymin) / static_cast<double>(ny - 1); }
    double x(std::size_t i) const { return xmin + dx() * static_cast<double>(i); }
    double y(std::size_t j) const { return ymin + dy() * static_cast<double>(j); }
    void validate() const;

    /// Bounding box of `points` padded by `pad` on every side.
    static GridSpec around(std::span<const Point> points, double pad, std::size_t nx = 256,
                           std::size_t ny = 256);
};

/// Density values on a grid. Node (i, j) sits at (grid.x(i), grid.y(j)) and is
/// stored at values[j * nx + i] (row-major, rows run along x).
struct DensityField {
    GridSpec grid;
    std::vector<double> values;
    BandwidthMatrix bandwidth;

    double at(std::size_t i, std::size_t j) const { return values[j * grid.nx + i]; }
    double max_value() const;
    /// Trapezoidal integral over the grid rectangle.
    double integral() const;
};

/// Sample mean and covariance (divisor n - 1).
struct Moments {
    Point mean;
    BandwidthMatrix cov;
};
Moments sample_moments(std::span<const Point> points);

/// Normal-reference rule H = n^(-1/3) S.
BandwidthMatrix bandwidth_normal_scale(std::span<const Point> points);

/// Unconstrained plug-in selector: AMISE over full matrices for the sphered
/// sample with two-stage pilot estimates of the curvature functionals, mapped
/// back with the symmetric square root of S.
BandwidthMatrix bandwidth_plugin(std::span<const Point> points);

struct LscvGrid {
    double log2_lo = -4.0;  // search c in [2^lo, 2^hi] for H = c * H_ns
    double log2_hi = 1.0;
    std::size_t count = 41;
};

struct LscvResult {
    BandwidthMatrix bandwidth;
    double scale = 1.0;        // selected c
    double criterion = 0.0;    // LSCV at the selection
    double criterion_ns = 0.0; // LSCV at the normal-scale matrix (c = 1)
    bool flat = false;         // criterion varied by < 1e-12: normal-scale returned
    std::vector<double> scales, values;
};

/// Least-squares cross-validation over scalar multiples of the normal-scale matrix.
LscvResult bandwidth_lscv_search(std::span<const Point> points, const LscvGrid& grid = {});
BandwidthMatrix bandwidth_lscv(std::span<const Point> points, const LscvGrid& grid = {});

/// LSCV(H) = int f_n^2 - 2/n sum_i f_{n,-i}(X_i) for a single matrix.
double lscv_criterion(std::span<const Point> points, const BandwidthMatrix& h);

enum class Selector { NormalScale, Plugin, Lscv };
Selector parse_selector(std::string_view name);
std::string_view selector_name(Selector s);
BandwidthMatrix select_bandwidth(std::span<const Point> points, Selector s);

/// Gaussian-kernel estimate f_n(q) = (1/n) sum_i phi_H(q - X_i) at each query.
std::vector<double> kde_eval(std::span<const Point> points, const BandwidthMatrix& h,
                             std::span<const Point> queries);

/// Evaluator that whitens the sample once and reuses it across query batches.
class Kde {
public:
    Kde(std::span<const Point> points, const BandwidthMatrix& h);
    double operator()(Point q) const;
    void eval(std::span<const Point> queries, std::span<double> out) const;
    std::vector<double> eval(std::span<const Point> queries) const;
    /// f_n at each sample point (the sample is its own query set).
    std::vector<double> at_sample() const;
    std::size_t size() const { return xs_.size(); }
    const BandwidthMatrix& bandwidth() const { return h_; }

private:
    BandwidthMatrix h_;
    Cholesky chol_;
    double norm_;  // 1 / (n 2 pi sqrt(det H))
    std::vector<double> xs_, ys_;
};

DensityField kde_grid(std::span<const Point> points, const BandwidthMatrix& h, const GridSpec& grid);

/// m draws X_I + L Z with I uniform on the sample, Z ~ N(0, I), H = L L^T.
PointSet smoothed_bootstrap(std::span<const Point> points, const BandwidthMatrix& h, std::size_t m,
                            std::uint64_t seed);

namespace kernel {
/// sum_i exp(-0.5 * ((xs[i] - qx)^2 + (ys[i] - qy)^2))
double gaussian_sum(const double* xs, const double* ys, std::size_t n, double qx, double qy);
/// sum_i exp(-scale * d2[i])
double exp_sum(const double* d2, std::size_t n, double scale);
/// True when the kernels were compiled with the vector math path.
bool vectorized();
}  // namespace kernel

}  // namespace hdrest::density
