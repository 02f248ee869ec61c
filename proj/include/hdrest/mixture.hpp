#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hdrest/contour.hpp"
#include "hdrest/density.hpp"
#include "hdrest/hdr.hpp"
#include "hdrest/point.hpp"

namespace hdrest::simbench {

/// Symmetric 2x2 covariance, same layout as a bandwidth matrix.
using Covariance = density::BandwidthMatrix;

struct MixtureComponent {
    double weight;
    Point mean;
    Covariance cov;
};

struct MixtureModel {
    int id = 0;
    std::string name;
    std::vector<MixtureComponent> components;

    void validate() const;  // weights positive summing to 1, covariances SPD
};

/// sigma_x, sigma_y, correlation -> covariance
Covariance cov_from(double sx, double sy, double rho);

/// The nine benchmark densities, ids 1..9.
const std::vector<MixtureModel>& catalogue();
const MixtureModel& model(int id);
MixtureModel standard_normal();

double mixture_density(const MixtureModel& m, Point x);
std::vector<double> mixture_density(const MixtureModel& m, std::span<const Point> xs);
PointSet mixture_sample(const MixtureModel& m, std::size_t n, std::uint64_t seed);

/// Grid large enough that the mass outside is negligible for every model.
density::GridSpec oracle_grid(std::size_t nodes = 801);

struct TrueHdr {
    double tau = 0;
    double level = 0;          // f_tau
    double level_se = 0;       // Monte Carlo standard error of the quantile
    std::shared_ptr<const contour::ContourSet> contour;
    PointSet boundary;         // boundary sample at the requested spacing

    hdr::Region region() const { return hdr::Region(contour); }
};

/// f_tau is the tau-quantile of f(Y) over m_mc model draws; the region is the
/// contour of the exact density on `grid` at that level.
TrueHdr true_hdr(const MixtureModel& m, double tau, const density::GridSpec& grid = oracle_grid(),
                 std::size_t m_mc = 1'000'000, std::uint64_t seed = 20200501, double spacing = 0.01);

}  // namespace hdrest::simbench
