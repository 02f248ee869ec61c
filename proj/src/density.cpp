#include "hdrest/density.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "hdrest/errors.hpp"
#include "hdrest/parallel.hpp"
#include "hdrest/rng.hpp"

namespace hdrest::density {
namespace {

constexpr double kPi = std::numbers::pi;

struct Eig2 {
    double l1, l2;  // eigenvalues, l1 >= l2
    Point v1, v2;   // unit eigenvectors
};

Eig2 eigen(const BandwidthMatrix& m) {
    const double tr = m.h11 + m.h22;
    const double diff = m.h11 - m.h22;
    const double disc = std::sqrt(diff * diff / 4.0 + m.h12 * m.h12);
    Eig2 e{tr / 2 + disc, tr / 2 - disc, {1, 0}, {0, 1}};
    if (m.h12 != 0.0) {
        Point v{e.l1 - m.h22, m.h12};
        const double l = norm(v);
        e.v1 = {v.x / l, v.y / l};
        e.v2 = {-e.v1.y, e.v1.x};
    } else if (m.h22 > m.h11) {
        e.v1 = {0, 1};
        e.v2 = {-1, 0};
    }
    return e;
}

// f(eigenvalues) applied through the eigenbasis
BandwidthMatrix spectral(const BandwidthMatrix& m, double (*f)(double)) {
    const Eig2 e = eigen(m);
    const double a = f(e.l1), b = f(e.l2);
    return {a * e.v1.x * e.v1.x + b * e.v2.x * e.v2.x, a * e.v1.x * e.v1.y + b * e.v2.x * e.v2.y,
            a * e.v1.y * e.v1.y + b * e.v2.y * e.v2.y};
}

BandwidthMatrix product(const BandwidthMatrix& a, const BandwidthMatrix& b, const BandwidthMatrix& c) {
    // a * b * c for symmetric inputs where the result is symmetric (a == c)
    const double m11 = a.h11 * b.h11 + a.h12 * b.h12, m12 = a.h11 * b.h12 + a.h12 * b.h22;
    const double m21 = a.h12 * b.h11 + a.h22 * b.h12, m22 = a.h12 * b.h12 + a.h22 * b.h22;
    const double r11 = m11 * c.h11 + m12 * c.h12, r12 = m11 * c.h12 + m12 * c.h22;
    const double r21 = m21 * c.h11 + m22 * c.h12, r22 = m21 * c.h12 + m22 * c.h22;
    return {r11, 0.5 * (r12 + r21), r22};
}

void require_spd(const BandwidthMatrix& s, const char* what) {
    const double scale = std::max(std::fabs(s.h11), std::fabs(s.h22));
    if (!std::isfinite(s.det()) || !(s.h11 > 0) || !(s.h22 > 0) || s.det() <= 1e-12 * scale * scale)
        throw DegenerateSample(std::string(what) + ": sample covariance is singular");
}

// Nelder-Mead with the standard coefficients (reflect 1, expand 2, contract
// 1/2, shrink 1/2).
template <std::size_t N>
std::array<double, N> nelder_mead(const std::function<double(const std::array<double, N>&)>& f,
                                  std::array<double, N> x0, double step) {
    using Vec = std::array<double, N>;
    std::array<Vec, N + 1> p;
    std::array<double, N + 1> v;
    for (std::size_t k = 0; k <= N; ++k) {
        p[k] = x0;
        if (k > 0) p[k][k - 1] += step;
        v[k] = f(p[k]);
    }
    std::array<std::size_t, N + 1> o;
    for (int it = 0; it < 200 * static_cast<int>(N); ++it) {
        for (std::size_t k = 0; k <= N; ++k) o[k] = k;
        std::sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        const std::size_t ib = o[0], iw = o[N];
        double spread = 0.0;
        for (std::size_t k = 0; k < N; ++k) spread = std::max(spread, std::fabs(p[iw][k] - p[ib][k]));
        if (std::fabs(v[iw] - v[ib]) <= 1e-14 * (std::fabs(v[ib]) + 1e-300) && spread < 1e-10) break;

        Vec c{};
        for (std::size_t k = 0; k < N; ++k)
            for (std::size_t d = 0; d < N; ++d) c[d] += p[o[k]][d] / static_cast<double>(N);
        auto along = [&](double t) {
            Vec x;
            for (std::size_t d = 0; d < N; ++d) x[d] = c[d] + t * (p[iw][d] - c[d]);
            return x;
        };
        const Vec xr = along(-1.0);
        const double fr = f(xr);
        if (fr < v[ib]) {
            const Vec xe = along(-2.0);
            const double fe = f(xe);
            if (fe < fr)
                p[iw] = xe, v[iw] = fe;
            else
                p[iw] = xr, v[iw] = fr;
        } else if (fr < v[o[N - 1]]) {
            p[iw] = xr, v[iw] = fr;
        } else {
            const Vec xc = fr < v[iw] ? along(-0.5) : along(0.5);
            const double fc = f(xc);
            if (fc < std::min(fr, v[iw])) {
                p[iw] = xc, v[iw] = fc;
            } else {
                for (std::size_t k = 1; k <= N; ++k) {
                    for (std::size_t d = 0; d < N; ++d) p[o[k]][d] = 0.5 * (p[o[k]][d] + p[ib][d]);
                    v[o[k]] = f(p[o[k]]);
                }
            }
        }
    }
    const auto i = static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
    return p[i];
}

// Kernel estimates of psi_r = E f^(r)(X) for every r = (k, order - k), from a
// sphered sample with the scalar pilot g:
// psi_r ~ n^-2 sum_ij g^-(order + 2) He_k(a) He_(order-k)(b) phi(a, b).
std::array<double, 7> hermite_functionals(const std::vector<double>& zx, const std::vector<double>& zy, double g,
                                          int order) {
    const std::size_t n = zx.size();
    std::array<double, 7> sum{};
    std::array<double, 7> ha{}, hb{};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double a = (zx[i] - zx[j]) / g, b = (zy[i] - zy[j]) / g;
            const double w = (i == j ? 1.0 : 2.0) * std::exp(-0.5 * (a * a + b * b));
            ha[0] = hb[0] = 1.0;
            ha[1] = a;
            hb[1] = b;
            for (int k = 1; k < order; ++k) {
                ha[k + 1] = a * ha[k] - k * ha[k - 1];
                hb[k + 1] = b * hb[k] - k * hb[k - 1];
            }
            for (int k = 0; k <= order; ++k) sum[k] += w * ha[order - k] * hb[k];
        }
    }
    const double nd = static_cast<double>(n);
    const double c = 1.0 / (2 * kPi * nd * nd * std::pow(g, order + 2));
    for (auto& v : sum) v *= c;
    return sum;  // sum[k] is psi_(order - k, k)
}

}  // namespace

double BandwidthMatrix::max_sigma() const { return std::sqrt(std::max(0.0, eigen(*this).l1)); }

Cholesky::Cholesky(const BandwidthMatrix& h) {
    if (!h.is_spd()) throw InvalidArgument("bandwidth matrix is not positive definite");
    l11 = std::sqrt(h.h11);
    l21 = h.h12 / l11;
    l22 = std::sqrt(h.h22 - l21 * l21);
}

void GridSpec::validate() const {
    if (nx < 2 || ny < 2) throw InvalidArgument("grid needs at least 2 nodes per axis");
    if (!(xmax > xmin) || !(ymax > ymin) || !std::isfinite(xmax - xmin) || !std::isfinite(ymax - ymin))
        throw InvalidArgument("grid extent must be finite and positive");
}

GridSpec GridSpec::around(std::span<const Point> points, double pad, std::size_t nx, std::size_t ny) {
    const BBox b = bounds(points).padded(pad);
    GridSpec g{b.xmin, b.xmax, b.ymin, b.ymax, nx, ny};
    if (g.xmax <= g.xmin) g.xmin -= 0.5, g.xmax += 0.5;
    if (g.ymax <= g.ymin) g.ymin -= 0.5, g.ymax += 0.5;
    return g;
}

double DensityField::max_value() const { return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end()); }

double DensityField::integral() const {
    double s = 0.0;
    for (std::size_t j = 0; j < grid.ny; ++j) {
        const double wy = (j == 0 || j + 1 == grid.ny) ? 0.5 : 1.0;
        for (std::size_t i = 0; i < grid.nx; ++i) {
            const double wx = (i == 0 || i + 1 == grid.nx) ? 0.5 : 1.0;
            s += wx * wy * at(i, j);
        }
    }
    return s * grid.dx() * grid.dy();
}

Moments sample_moments(std::span<const Point> points) {
    const auto n = static_cast<double>(points.size());
    if (points.size() < 2) throw DegenerateSample("covariance needs at least two points");
    Point m{0, 0};
    for (const auto& p : points) m = m + p;
    m = (1.0 / n) * m;
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& p : points) {
        const Point d = p - m;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    return {m, {sxx / (n - 1), sxy / (n - 1), syy / (n - 1)}};
}

BandwidthMatrix bandwidth_normal_scale(std::span<const Point> points) {
    if (points.size() < 3) throw InvalidArgument("normal-scale bandwidth needs n >= 3");
    if (!all_finite(points)) throw InvalidArgument("non-finite coordinate");
    const Moments mo = sample_moments(points);
    require_spd(mo.cov, "normal-scale bandwidth");
    return mo.cov.scaled(std::pow(static_cast<double>(points.size()), -1.0 / 3.0));
}

BandwidthMatrix bandwidth_plugin(std::span<const Point> points) {
    if (points.size() < 10) throw InvalidArgument("plug-in bandwidth needs n >= 10");
    if (!all_finite(points)) throw InvalidArgument("non-finite coordinate");
    const std::size_t n = points.size();
    const double nd = static_cast<double>(n);
    const Moments mo = sample_moments(points);
    require_spd(mo.cov, "plug-in bandwidth");
    const BandwidthMatrix s_half = spectral(mo.cov, [](double l) { return std::sqrt(l); });
    const BandwidthMatrix s_mhalf = spectral(mo.cov, [](double l) { return 1.0 / std::sqrt(l); });

    std::vector<double> zx(n), zy(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Point d = points[i] - mo.mean;
        zx[i] = s_mhalf.h11 * d.x + s_mhalf.h12 * d.y;
        zy[i] = s_mhalf.h12 * d.x + s_mhalf.h22 * d.y;
    }

    // Two-stage pilot. Sixth-order functionals use the normal-reference AMSE
    // pilot g6 = (8/n)^(1/10); each fourth-order functional then gets the
    // AMSE pilot g = [-2 K^(r)(0) / (n sum_i psi_(r + 2e_i))]^(1/8) from them.
    const auto p6 = hermite_functionals(zx, zy, std::pow(8.0 / nd, 0.1), 6);
    const double k40 = 3.0 / (2 * kPi), k22 = 1.0 / (2 * kPi);
    const double g_ref = std::pow(16.0 / (3.0 * nd), 1.0 / 8.0);
    auto pilot = [&](double k0, double sum) { return sum < 0 ? std::pow(-2 * k0 / (nd * sum), 1.0 / 8.0) : g_ref; };
    const double g40 = pilot(k40, p6[0] + p6[2]), g22 = pilot(k22, p6[2] + p6[4]), g04 = pilot(k40, p6[6] + p6[4]);
    const double psi40 = hermite_functionals(zx, zy, g40, 4)[0];
    const auto mid = hermite_functionals(zx, zy, g22, 4);
    const double psi04 = hermite_functionals(zx, zy, g04, 4)[4];
    const double psi31 = mid[1], psi22 = mid[2], psi13 = mid[3];
    // integrated squared bias is (1/4) v' Psi v with v = vech(H)
    std::array<double, 9> psi{psi40, 2 * psi31, psi22, 2 * psi31, 4 * psi22, 2 * psi13, psi22, 2 * psi13, psi04};
    auto positive_definite = [](const std::array<double, 9>& m) {
        const double d2 = m[0] * m[4] - m[1] * m[3];
        const double d3 = m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
                          m[2] * (m[3] * m[7] - m[4] * m[6]);
        return m[0] > 0 && d2 > 0 && d3 > 0;
    };
    if (!positive_definite(psi)) {
        const double r40 = 3.0 / (16.0 * kPi), r22 = 1.0 / (16.0 * kPi);
        psi = {r40, 0, r22, 0, 4 * r22, 0, r22, 0, r40};
    }

    // H in sphered space as L L' with L = [[e^u, 0], [t, e^w]]
    auto to_h = [](const std::array<double, 3>& q) {
        const double l11 = std::exp(q[0]), l21 = q[1], l22 = std::exp(q[2]);
        return BandwidthMatrix{l11 * l11, l11 * l21, l21 * l21 + l22 * l22};
    };
    auto amise = [&](const std::array<double, 3>& q) {
        const BandwidthMatrix hz = to_h(q);
        const double v[3] = {hz.h11, hz.h12, hz.h22};
        double bias = 0;
        for (int r = 0; r < 3; ++r)
            for (int k = 0; k < 3; ++k) bias += v[r] * psi[3 * r + k] * v[k];
        return 1.0 / (4 * kPi * nd * std::sqrt(hz.det())) + 0.25 * bias;
    };
    const double start = std::log(std::pow(nd, -1.0 / 6.0));
    const auto best = nelder_mead<3>(amise, {start, 0.0, start}, 0.2);
    const BandwidthMatrix h = product(s_half, to_h(best), s_half);
    if (!h.is_spd()) throw DegenerateSample("plug-in bandwidth is not positive definite");
    return h;
}

namespace {

struct PairDistances {
    std::vector<double> d2;  // whitened squared distances, i < j
    double sqrt_det;
    std::size_t n;
};

PairDistances pair_distances(std::span<const Point> points, const BandwidthMatrix& h) {
    const Cholesky ch(h);
    std::vector<Point> u(points.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = ch.solve(points[i]);
    PairDistances pd{{}, ch.l11 * ch.l22, points.size()};
    pd.d2.reserve(u.size() * (u.size() - 1) / 2);
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = i + 1; j < u.size(); ++j) pd.d2.push_back(dist2(u[i], u[j]));
    return pd;
}

double lscv_at(const PairDistances& pd, double c) {
    const double n = static_cast<double>(pd.n);
    const double s4 = kernel::exp_sum(pd.d2.data(), pd.d2.size(), 1.0 / (4 * c));
    const double s2 = kernel::exp_sum(pd.d2.data(), pd.d2.size(), 1.0 / (2 * c));
    const double term1 = (n + 2 * s4) / (n * n * 4 * kPi * c * pd.sqrt_det);
    const double term2 = 4 * s2 / (n * (n - 1) * 2 * kPi * c * pd.sqrt_det);
    return term1 - term2;
}

}  // namespace

double lscv_criterion(std::span<const Point> points, const BandwidthMatrix& h) {
    if (points.size() < 2) throw InvalidArgument("LSCV needs n >= 2");
    return lscv_at(pair_distances(points, h), 1.0);
}

LscvResult bandwidth_lscv_search(std::span<const Point> points, const LscvGrid& grid) {
    if (points.size() < 20) throw InvalidArgument("LSCV bandwidth needs n >= 20");
    if (grid.count < 2 || !(grid.log2_hi > grid.log2_lo)) throw InvalidArgument("invalid LSCV search grid");
    const BandwidthMatrix ns = bandwidth_normal_scale(points);
    const PairDistances pd = pair_distances(points, ns);
    LscvResult r;
    r.scales.resize(grid.count);
    r.values.resize(grid.count);
    parallel_for(grid.count, [&](std::size_t k) {
        const double e = grid.log2_lo + (grid.log2_hi - grid.log2_lo) * static_cast<double>(k) /
                                            static_cast<double>(grid.count - 1);
        r.scales[k] = std::exp2(e);
        r.values[k] = lscv_at(pd, r.scales[k]);
    });
    const auto [lo, hi] = std::minmax_element(r.values.begin(), r.values.end());
    r.criterion_ns = lscv_at(pd, 1.0);
    if (*hi - *lo < 1e-12) {
        r.flat = true;
        r.bandwidth = ns;
        r.scale = 1.0;
        r.criterion = r.criterion_ns;
        return r;
    }
    const auto k = static_cast<std::size_t>(lo - r.values.begin());
    r.scale = r.scales[k];
    r.criterion = r.values[k];
    r.bandwidth = ns.scaled(r.scale);
    return r;
}

BandwidthMatrix bandwidth_lscv(std::span<const Point> points, const LscvGrid& grid) {
    return bandwidth_lscv_search(points, grid).bandwidth;
}

Selector parse_selector(std::string_view name) {
    if (name == "plugin" || name == "H1" || name == "h1") return Selector::Plugin;
    if (name == "lscv" || name == "H2" || name == "h2") return Selector::Lscv;
    if (name == "normal" || name == "ns" || name == "normal-scale") return Selector::NormalScale;
    throw InvalidArgument("unknown bandwidth selector: " + std::string(name));
}

std::string_view selector_name(Selector s) {
    switch (s) {
        case Selector::Plugin: return "plugin";
        case Selector::Lscv: return "lscv";
        default: return "normal-scale";
    }
}

BandwidthMatrix select_bandwidth(std::span<const Point> points, Selector s) {
    switch (s) {
        case Selector::Plugin: return bandwidth_plugin(points);
        case Selector::Lscv: return bandwidth_lscv(points);
        default: return bandwidth_normal_scale(points);
    }
}

Kde::Kde(std::span<const Point> points, const BandwidthMatrix& h) : h_(h), chol_(h) {
    if (points.empty()) throw InvalidArgument("kde: empty sample");
    xs_.resize(points.size());
    ys_.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Point u = chol_.solve(points[i]);
        xs_[i] = u.x;
        ys_[i] = u.y;
    }
    norm_ = 1.0 / (static_cast<double>(points.size()) * 2 * kPi * chol_.l11 * chol_.l22);
}

double Kde::operator()(Point q) const {
    const Point u = chol_.solve(q);
    return norm_ * kernel::gaussian_sum(xs_.data(), ys_.data(), xs_.size(), u.x, u.y);
}

void Kde::eval(std::span<const Point> queries, std::span<double> out) const {
    constexpr std::size_t kBlock = 256;
    const std::size_t blocks = (queries.size() + kBlock - 1) / kBlock;
    parallel_for(blocks, [&](std::size_t b) {
        const std::size_t end = std::min(queries.size(), (b + 1) * kBlock);
        for (std::size_t i = b * kBlock; i < end; ++i) out[i] = (*this)(queries[i]);
    });
}

std::vector<double> Kde::eval(std::span<const Point> queries) const {
    std::vector<double> out(queries.size());
    eval(queries, out);
    return out;
}

std::vector<double> Kde::at_sample() const {
    std::vector<double> out(xs_.size());
    for (std::size_t i = 0; i < xs_.size(); ++i)
        out[i] = norm_ * kernel::gaussian_sum(xs_.data(), ys_.data(), xs_.size(), xs_[i], ys_[i]);
    return out;
}

std::vector<double> kde_eval(std::span<const Point> points, const BandwidthMatrix& h,
                             std::span<const Point> queries) {
    return Kde(points, h).eval(queries);
}

DensityField kde_grid(std::span<const Point> points, const BandwidthMatrix& h, const GridSpec& grid) {
    grid.validate();
    const Kde kde(points, h);
    DensityField f{grid, std::vector<double>(grid.nx * grid.ny), h};
    parallel_for(grid.ny, [&](std::size_t j) {
        const double y = grid.y(j);
        for (std::size_t i = 0; i < grid.nx; ++i) f.values[j * grid.nx + i] = kde({grid.x(i), y});
    });
    return f;
}

PointSet smoothed_bootstrap(std::span<const Point> points, const BandwidthMatrix& h, std::size_t m,
                            std::uint64_t seed) {
    if (points.empty()) throw InvalidArgument("bootstrap: empty sample");
    if (m == 0) throw InvalidArgument("bootstrap: m must be >= 1");
    const Cholesky ch(h);
    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
    std::normal_distribution<double> z;
    PointSet out(m);
    for (auto& p : out) {
        const std::size_t i = pick(rng);
        const double z1 = z(rng);
        const double z2 = z(rng);
        p = points[i] + ch.apply({z1, z2});
    }
    return out;
}

}  // namespace hdrest::density
