// Inner loops of the Gaussian kernel sums. This file may be compiled with
// relaxed floating-point flags; nothing here depends on strict IEEE ordering.
//
// exp(-t) for t >= 0 is evaluated inline: t is clamped to 700, split as
// k ln2 + r with |r| <= ln2 / 2, and e^r comes from a degree-13 Taylor
// polynomial (relative error about 2e-14). The library's vector exp falls
// back to a scalar path whenever a lane underflows, which is the common case
// for far-apart pairs under a small bandwidth.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>

#include "hdrest/density.hpp"

namespace hdrest::density::kernel {

namespace {

inline double exp_neg(double t) {
    constexpr double kLog2e = 1.4426950408889634;
    constexpr double kLn2Hi = 6.93147180369123816490e-01;
    constexpr double kLn2Lo = 1.90821492927058770002e-10;
    const double x = -std::min(t, 700.0);
    const double k = std::nearbyint(x * kLog2e);
    const double r = (x - k * kLn2Hi) - k * kLn2Lo;
    double p = 1.0 / 6227020800.0;
    p = p * r + 1.0 / 479001600.0;
    p = p * r + 1.0 / 39916800.0;
    p = p * r + 1.0 / 3628800.0;
    p = p * r + 1.0 / 362880.0;
    p = p * r + 1.0 / 40320.0;
    p = p * r + 1.0 / 5040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;
    const auto e = static_cast<std::int64_t>(static_cast<std::int32_t>(k) + 1023);
    return p * std::bit_cast<double>(e << 52);
}

}  // namespace

double gaussian_sum(const double* xs, const double* ys, std::size_t n, double qx, double qy) {
    double s = 0.0;
#pragma omp simd reduction(+ : s)
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - qx;
        const double dy = ys[i] - qy;
        s += exp_neg(0.5 * (dx * dx + dy * dy));
    }
    return s;
}

double exp_sum(const double* d2, std::size_t n, double scale) {
    double s = 0.0;
#pragma omp simd reduction(+ : s)
    for (std::size_t i = 0; i < n; ++i) s += exp_neg(scale * d2[i]);
    return s;
}

bool vectorized() {
#ifdef HDREST_VECTOR_KERNELS
    return true;
#else
    return false;
#endif
}

}  // namespace hdrest::density::kernel
