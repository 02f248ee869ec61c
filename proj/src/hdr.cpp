#include "hdrest/hdr.hpp"

#include <algorithm>
#include <cmath>

#include "hdrest/errors.hpp"
#include "hdrest/parallel.hpp"
#include "hdrest/quantile.hpp"
#include "hdrest/rng.hpp"

namespace hdrest::hdr {

using geometry::RConvexHull;

std::string_view status_name(Status s) {
    switch (s) {
        case Status::Converged: return "converged";
        case Status::NotConverged: return "not_converged";
        case Status::EmptyPlusSet: return "empty_plus_set";
        case Status::ThresholdsCrossed: return "thresholds_crossed";
    }
    return "unknown";
}

bool Region::empty() const {
    if (hull_) return false;
    return !contour_ || contour_->empty();
}

bool Region::contains(Point q) const {
    if (hull_) return hull_->contains(q);
    if (contour_) return contour_->contains(q);
    return false;
}

std::size_t Region::component_count() const {
    if (hull_) return hull_->component_count();
    if (contour_) return contour_->component_count();
    return 0;
}

PointSet Region::boundary_sample(double spacing) const {
    if (hull_) return hull_->boundary_sample(spacing);
    if (contour_) return contour_->boundary_sample(spacing);
    return {};
}

double coverage(const Region& region, std::span<const Point> points) {
    if (points.empty()) return 0.0;
    std::vector<char> in(points.size());
    parallel_for(points.size(), [&](std::size_t i) { in[i] = region.contains(points[i]); });
    return static_cast<double>(std::count(in.begin(), in.end(), 1)) / static_cast<double>(points.size());
}

double hyndman_threshold(std::span<const double> density_values, double tau) {
    if (density_values.empty()) throw InvalidArgument("hyndman_threshold: no values");
    if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("hyndman_threshold: tau must lie in (0, 1)");
    return quantile(density_values, tau);
}

void HybridConfig::validate() const {
    if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("tau must lie in (0, 1)");
    if (B < 2) throw InvalidArgument("B must be at least 2");
    if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("p must lie in (0, 1)");
    if (!(step > 0.0 && step <= tau)) throw InvalidArgument("step must lie in (0, tau]");
    if (!(nu > 0.0 && nu <= 1.0)) throw InvalidArgument("nu must lie in (0, 1]");
    if (!(r0_tolerance > 0.0)) throw InvalidArgument("r0 tolerance must be positive");
}

std::size_t HybridConfig::iteration_limit() const {
    if (max_iterations > 0) return max_iterations;
    return static_cast<std::size_t>(std::ceil(tau / step - 1e-9)) + 1;
}

// ---------------------------------------------------------------------------
// plug-in

HdrEstimate plugin_hdr(std::span<const Point> points, double tau, density::Selector selector,
                       const PluginOptions& opt) {
    if (points.size() < 20) throw InvalidArgument("plugin_hdr: need at least 20 points");
    return plugin_hdr(points, tau, density::select_bandwidth(points, selector), opt);
}

HdrEstimate plugin_hdr(std::span<const Point> points, double tau, const density::BandwidthMatrix& h,
                       const PluginOptions& opt) {
    if (points.size() < 20) throw InvalidArgument("plugin_hdr: need at least 20 points");
    if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("plugin_hdr: tau must lie in (0, 1)");
    return plugin_hdr(points, tau, plugin_fit(points, h, opt));
}

PluginFit plugin_fit(std::span<const Point> points, const density::BandwidthMatrix& h, const PluginOptions& opt) {
    if (points.size() < 20) throw InvalidArgument("plugin_hdr: need at least 20 points");
    const density::GridSpec grid =
        opt.grid ? *opt.grid : density::GridSpec::around(points, opt.pad_sigmas * h.max_sigma(), opt.nx, opt.ny);
    return {h, density::Kde(points, h).at_sample(), density::kde_grid(points, h, grid)};
}

HdrEstimate plugin_hdr(std::span<const Point> points, double tau, const PluginFit& fit) {
    if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("plugin_hdr: tau must lie in (0, 1)");
    if (fit.at_sample.size() != points.size()) throw InvalidArgument("plugin_hdr: fit was built for another sample");
    const double level = hyndman_threshold(fit.at_sample, tau);
    if (level > fit.field.max_value())
        throw EmptyRegion("plugin_hdr: threshold exceeds the grid maximum; refine the grid");

    HdrEstimate est;
    est.method = "plugin";
    est.tau = est.tau_bar = tau;
    est.f_tau = est.f_tau_bar = level;
    est.bandwidth = fit.bandwidth;
    est.n = points.size();
    est.region = Region(std::make_shared<const contour::ContourSet>(contour::marching_squares(fit.field, level)));
    est.coverage = coverage(est.region, points);
    return est;
}

// ---------------------------------------------------------------------------
// r0

R0Result estimate_r0(std::span<const Point> x_plus, std::span<const Point> x_minus, double tol) {
    if (x_plus.empty()) throw InvalidArgument("estimate_r0: x_plus is empty");
    constexpr double inf = geometry::kInfinity;
    if (x_minus.empty()) return {inf, true, 0};

    PointSet all(x_plus.begin(), x_plus.end());
    all.insert(all.end(), x_minus.begin(), x_minus.end());
    const double diam = geometry::diameter(all);
    if (!(tol > 0.0)) tol = 1e-4 * diam;

    const auto dd = geometry::deduplicate(x_plus);
    std::shared_ptr<const geometry::Triangulation> tri;
    if (dd.sites.size() >= 3) {
        try {
            tri = std::make_shared<const geometry::Triangulation>(geometry::delaunay(dd.sites));
        } catch (const DegenerateInput&) {
        }
    }
    std::size_t evaluations = 0;
    auto hull = [&](double g) {
        ++evaluations;
        return tri ? RConvexHull(tri, g) : RConvexHull(dd.sites, g);
    };

    // only points of x_minus inside the convex hull can ever be covered
    PointSet candidates;
    {
        const auto convex = hull(inf);
        for (const auto& q : x_minus)
            if (convex.contains(q)) candidates.push_back(q);
    }
    if (candidates.empty()) return {inf, true, evaluations};

    auto separated = [&](double g) {
        const auto h = hull(g);
        return std::none_of(candidates.begin(), candidates.end(), [&](Point q) { return h.contains(q); });
    };
    // C_r only reaches the convex hull as r grows without bound, so a hull
    // that still separates at r = diam needs a larger upper bracket
    double hi = diam;
    while (separated(hi)) {
        if (hi > 1e12 * diam) return {hi, false, evaluations};
        hi *= 2.0;
    }
    if (hi > diam) {
        double lo = 0.5 * hi;
        while (hi - lo > tol) {
            const double mid = 0.5 * (lo + hi);
            (separated(mid) ? lo : hi) = mid;
        }
        return {lo, false, evaluations};
    }

    double lo = inf;
    if (dd.sites.size() >= 2) {
        const KdTree tree(dd.sites);
        for (std::size_t i = 0; i < dd.sites.size(); ++i)
            lo = std::min(lo, tree.nearest_excluding(dd.sites[i], i).distance);
        lo *= 0.5;
    } else {
        lo = 0.0;
    }
    if (!(lo < hi) || !separated(lo)) return {std::min(lo, hi), false, evaluations};
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (separated(mid) ? lo : hi) = mid;
    }
    return {lo, false, evaluations};
}

// ---------------------------------------------------------------------------
// bootstrap calibration

BootstrapCalibrator::BootstrapCalibrator(std::span<const Point> points, const density::BandwidthMatrix& h,
                                         std::uint64_t seed, bool refit)
    : points_(points.begin(), points.end()), h_(h), seed_(seed), refit_(refit) {
    if (points_.empty()) throw InvalidArgument("bootstrap: empty sample");
    if (!h.is_spd()) throw InvalidArgument("bootstrap: bandwidth is not positive definite");
    fx_ = density::Kde(points_, h_).at_sample();
    fx_sorted_ = fx_;
    std::sort(fx_sorted_.begin(), fx_sorted_.end());
}

void BootstrapCalibrator::ensure(std::size_t k, std::size_t B) {
    if (cache_.size() <= k) cache_.resize(k + 1);
    auto& reps = cache_[k];
    const std::size_t have = reps.size();
    if (have >= B) return;
    reps.resize(B);
    std::optional<density::Kde> original;
    if (!refit_) original.emplace(points_, h_);
    parallel_for(B - have, [&](std::size_t j) {
        const std::size_t i = have + j;
        const auto star = density::smoothed_bootstrap(points_, h_, points_.size(), derive_seed(seed_, {k, i}));
        std::vector<double> v;
        if (refit_) {
            v = density::Kde(star, h_).at_sample();
        } else {
            v.resize(star.size());
            for (std::size_t m = 0; m < star.size(); ++m) v[m] = (*original)(star[m]);
        }
        std::sort(v.begin(), v.end());
        reps[i] = std::move(v);
    });
}

void BootstrapCalibrator::proportions(std::size_t k, std::size_t B, double threshold, std::vector<double>& plus,
                                      std::vector<double>& minus) {
    ensure(k, B);
    plus.resize(B);
    minus.resize(B);
    for (std::size_t i = 0; i < B; ++i) {
        const auto& v = cache_[k][i];
        const auto below = static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), threshold) - v.begin());
        const double n = static_cast<double>(v.size());
        plus[i] = static_cast<double>(v.size() - below) / n;
        minus[i] = static_cast<double>(below) / n;
    }
}

// ---------------------------------------------------------------------------
// hybrid

HdrEstimate hybrid_hdr(std::span<const Point> points, const HybridConfig& cfg) {
    cfg.validate();
    if (points.size() < 3) throw InvalidArgument("hybrid_hdr: need at least 3 points");
    BootstrapCalibrator cal(points, density::select_bandwidth(points, cfg.selector), cfg.seed,
                            cfg.refit_bootstrap);
    return hybrid_hdr(points, cfg, cal);
}

HdrEstimate hybrid_hdr(std::span<const Point> points, const HybridConfig& cfg, BootstrapCalibrator& cal) {
    cfg.validate();
    const auto& fx = cal.sample_density();
    const auto& fs = cal.sorted_density();
    if (fx.size() != points.size()) throw InvalidArgument("hybrid_hdr: calibrator was built for another sample");
    const std::size_t n = points.size();

    HdrEstimate est;
    est.method = "hybrid";
    est.tau = cfg.tau;
    est.n = n;
    est.bandwidth = cal.bandwidth();
    est.f_tau = quantile_sorted(fs, cfg.tau);
    est.status = Status::NotConverged;

    const double diam = geometry::diameter(points);
    std::vector<double> plus_star, minus_star;
    const std::size_t limit = cfg.iteration_limit();
    for (std::size_t k = 0; k < limit; ++k) {
        const double tau_bar = cfg.tau - static_cast<double>(k) * cfg.step;
        if (tau_bar <= 1e-12) break;

        IterationTrace it{};
        it.k = k;
        it.tau_bar = tau_bar;
        it.f_tau_bar = quantile_sorted(fs, tau_bar);
        cal.proportions(k, cfg.B, it.f_tau_bar, plus_star, minus_star);
        it.tau_minus = quantile(minus_star, cfg.p);
        it.tau_plus = quantile(plus_star, cfg.p);
        it.f_minus = quantile_sorted(fs, it.tau_minus);
        it.f_plus = quantile_sorted(fs, 1.0 - it.tau_plus);
        it.d_n = std::max(it.f_plus - est.f_tau, est.f_tau - it.f_minus);

        est.tau_bar = tau_bar;
        est.f_tau_bar = it.f_tau_bar;
        est.f_plus = it.f_plus;
        est.f_minus = it.f_minus;
        est.d_n = it.d_n;

        if (it.f_minus > it.f_plus) {
            est.trace.push_back(it);
            est.status = Status::ThresholdsCrossed;
            break;
        }

        std::vector<Split> split(n, Split::Doubtful);
        PointSet xp, xm;
        for (std::size_t i = 0; i < n; ++i) {
            if (fx[i] >= it.f_plus) {
                split[i] = Split::Plus;
                xp.push_back(points[i]);
            } else if (fx[i] < it.f_minus) {
                split[i] = Split::Minus;
                xm.push_back(points[i]);
            }
        }
        it.n_plus = xp.size();
        it.n_minus = xm.size();
        est.split = std::move(split);
        if (xp.empty()) {
            est.trace.push_back(it);
            est.status = Status::EmptyPlusSet;
            break;
        }

        const auto r0 = estimate_r0(xp, xm, cfg.r0_tolerance * diam);
        it.r0 = r0.r0;
        it.convex_fallback = r0.convex_fallback;
        it.radius = r0.convex_fallback ? geometry::kInfinity : cfg.nu * r0.r0;
        auto hull = std::make_shared<const RConvexHull>(xp, it.radius);

        // X+ lies in its own hull; only the rest needs a membership test
        std::vector<char> in(n);
        parallel_for(n, [&](std::size_t i) {
            in[i] = est.split[i] == Split::Plus || hull->contains(points[i]);
        });
        it.coverage = static_cast<double>(std::count(in.begin(), in.end(), 1)) / static_cast<double>(n);

        est.r0 = it.r0;
        est.convex_fallback = it.convex_fallback;
        est.radius = it.radius;
        est.coverage = it.coverage;
        est.region = Region(std::move(hull));
        est.trace.push_back(it);
        if (it.coverage >= 1.0 - cfg.tau) {
            est.status = Status::Converged;
            break;
        }
    }
    return est;
}

}  // namespace hdrest::hdr
