#include "hdrest/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "hdrest/errors.hpp"
#include "hdrest/parallel.hpp"
#include "hdrest/quantile.hpp"
#include "hdrest/rng.hpp"

namespace hdrest::simbench {

Covariance cov_from(double sx, double sy, double rho) { return {sx * sx, rho * sx * sy, sy * sy}; }

void MixtureModel::validate() const {
    if (components.empty()) throw InvalidArgument("mixture: no components");
    double total = 0.0;
    for (const auto& c : components) {
        if (!(c.weight > 0.0)) throw InvalidArgument("mixture: weights must be positive");
        if (!c.cov.is_spd()) throw InvalidArgument("mixture: covariance is not positive definite");
        total += c.weight;
    }
    if (std::fabs(total - 1.0) > 1e-12) throw InvalidArgument("mixture: weights must sum to 1");
}

// Parameters follow the bivariate normal-mixture test suite of Wand and Jones
// (1993), written as (weight, mean, sigma_x, sigma_y, rho).
const std::vector<MixtureModel>& catalogue() {
    static const std::vector<MixtureModel> models = [] {
        const double s3 = 2.0 / std::sqrt(3.0);
        std::vector<MixtureModel> m{
            {1, "Uncorrelated Normal", {{1.0, {0, 0}, cov_from(0.5, 1.0, 0.0)}}},
            {2, "Correlated Normal", {{1.0, {0, 0}, cov_from(1.0, 1.0, 0.7)}}},
            {3,
             "Skewed",
             {{0.2, {0, 0}, cov_from(1.0, 1.0, 0.0)},
              {0.2, {0.5, 0.5}, cov_from(2.0 / 3, 2.0 / 3, 0.0)},
              {0.6, {13.0 / 12, 13.0 / 12}, cov_from(5.0 / 9, 5.0 / 9, 0.0)}}},
            {4,
             "Kurtotic",
             {{2.0 / 3, {0, 0}, cov_from(1.0, 2.0, 0.5)}, {1.0 / 3, {0, 0}, cov_from(2.0 / 3, 2.0 / 3, -0.75)}}},
            {5,
             "Bimodal I",
             {{0.5, {-1, 0}, cov_from(2.0 / 3, 2.0 / 3, 0.0)}, {0.5, {1, 0}, cov_from(2.0 / 3, 2.0 / 3, 0.0)}}},
            {6,
             "Bimodal III",
             {{0.5, {-1, 1}, cov_from(2.0 / 3, 2.0 / 3, 0.6)}, {0.5, {1, -1}, cov_from(2.0 / 3, 2.0 / 3, 0.6)}}},
            {7,
             "Trimodal I",
             {{0.45, {-1.2, 1.2}, cov_from(0.6, 0.6, 0.3)},
              {0.45, {1.2, -1.2}, cov_from(0.6, 0.6, -0.6)},
              {0.10, {0, 0}, cov_from(0.25, 0.25, 0.2)}}},
            {8,
             "Trimodal II",
             {{3.0 / 7, {-1, 0}, cov_from(0.6, 0.7, 0.6)},
              {3.0 / 7, {1, s3}, cov_from(0.6, 0.7, 0.0)},
              {1.0 / 7, {1, -s3}, cov_from(0.6, 0.7, 0.0)}}},
            {9,
             "Trimodal III",
             {{1.0 / 3, {-1, 0}, cov_from(0.6, 0.7, 0.6)},
              {1.0 / 3, {1, s3}, cov_from(0.6, 0.7, 0.0)},
              {1.0 / 3, {1, -s3}, cov_from(0.6, 0.7, 0.0)}}},
        };
        for (const auto& x : m) x.validate();
        return m;
    }();
    return models;
}

const MixtureModel& model(int id) {
    if (id < 1 || id > 9) throw InvalidArgument("mixture model id must be 1..9");
    return catalogue()[static_cast<std::size_t>(id - 1)];
}

MixtureModel standard_normal() { return {0, "Standard Normal", {{1.0, {0, 0}, {1, 0, 1}}}}; }

namespace {

struct Prepared {
    double coef;  // weight / (2 pi sqrt det)
    Point mean;
    double i11, i12, i22;  // inverse covariance
};

std::vector<Prepared> prepare(const MixtureModel& m) {
    std::vector<Prepared> out;
    for (const auto& c : m.components) {
        const double det = c.cov.det();
        out.push_back({c.weight / (2.0 * std::numbers::pi * std::sqrt(det)), c.mean, c.cov.h22 / det,
                       -c.cov.h12 / det, c.cov.h11 / det});
    }
    return out;
}

double eval(const std::vector<Prepared>& pc, Point x) {
    double s = 0.0;
    for (const auto& c : pc) {
        const double dx = x.x - c.mean.x, dy = x.y - c.mean.y;
        s += c.coef * std::exp(-0.5 * (c.i11 * dx * dx + 2.0 * c.i12 * dx * dy + c.i22 * dy * dy));
    }
    return s;
}

}  // namespace

double mixture_density(const MixtureModel& m, Point x) { return eval(prepare(m), x); }

std::vector<double> mixture_density(const MixtureModel& m, std::span<const Point> xs) {
    const auto pc = prepare(m);
    std::vector<double> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = eval(pc, xs[i]);
    return out;
}

PointSet mixture_sample(const MixtureModel& m, std::size_t n, std::uint64_t seed) {
    m.validate();
    std::vector<double> w;
    std::vector<density::Cholesky> chol;
    for (const auto& c : m.components) {
        w.push_back(c.weight);
        chol.emplace_back(c.cov);
    }
    Rng rng(seed);
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    std::normal_distribution<double> z;
    PointSet out(n);
    for (auto& p : out) {
        const std::size_t k = pick(rng);
        const double a = z(rng), b = z(rng);
        p = m.components[k].mean + chol[k].apply({a, b});
    }
    return out;
}

density::GridSpec oracle_grid(std::size_t nodes) { return {-5.0, 5.0, -5.0, 5.0, nodes, nodes}; }

TrueHdr true_hdr(const MixtureModel& m, double tau, const density::GridSpec& grid, std::size_t m_mc,
                 std::uint64_t seed, double spacing) {
    if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("true_hdr: tau must lie in (0, 1)");
    if (m_mc < 2) throw InvalidArgument("true_hdr: need Monte Carlo draws");
    grid.validate();

    auto fy = mixture_density(m, mixture_sample(m, m_mc, seed));
    std::sort(fy.begin(), fy.end());
    TrueHdr t;
    t.tau = tau;
    t.level = quantile_sorted(fy, tau);
    // distribution-free interval from the binomial spread of the order statistic
    const double d = std::sqrt(tau * (1.0 - tau) / static_cast<double>(m_mc));
    t.level_se = 0.5 * (quantile_sorted(fy, tau + d) - quantile_sorted(fy, tau - d));

    std::vector<double> values(grid.nx * grid.ny);
    const auto pc = prepare(m);
    parallel_for(grid.ny, [&](std::size_t j) {
        for (std::size_t i = 0; i < grid.nx; ++i) values[j * grid.nx + i] = eval(pc, {grid.x(i), grid.y(j)});
    });
    t.contour = std::make_shared<const contour::ContourSet>(contour::marching_squares(grid, values, t.level));
    t.boundary = t.contour->boundary_sample(spacing);
    return t;
}

}  // namespace hdrest::simbench
