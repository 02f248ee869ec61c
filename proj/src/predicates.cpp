#include "hdrest/predicates.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace hdrest::geometry {
namespace {

// Nonoverlapping floating-point expansions, components in increasing magnitude.
using Expansion = std::vector<double>;

inline void two_sum(double a, double b, double& s, double& e) {
    s = a + b;
    const double bv = s - a;
    const double av = s - bv;
    e = (a - av) + (b - bv);
}

inline void two_product(double a, double b, double& p, double& e) {
    p = a * b;
    e = std::fma(a, b, -p);
}

Expansion grow(const Expansion& e, double b) {
    Expansion h;
    h.reserve(e.size() + 1);
    double q = b;
    for (double ei : e) {
        double s, err;
        two_sum(q, ei, s, err);
        if (err != 0.0) h.push_back(err);
        q = s;
    }
    if (q != 0.0 || h.empty()) h.push_back(q);
    return h;
}

Expansion add(Expansion e, const Expansion& f) {
    for (double fj : f) e = grow(e, fj);
    return e;
}

Expansion negate(Expansion e) {
    for (double& v : e) v = -v;
    return e;
}

Expansion scale(const Expansion& e, double b) {
    Expansion out{0.0};
    for (double ei : e) {
        double p, err;
        two_product(ei, b, p, err);
        out = grow(out, err);
        out = grow(out, p);
    }
    return out;
}

Expansion mul(const Expansion& e, const Expansion& f) {
    Expansion out{0.0};
    for (double fj : f) out = add(out, scale(e, fj));
    return out;
}

Expansion diff(double a, double b) {
    double s, err;
    two_sum(a, -b, s, err);
    Expansion e;
    if (err != 0.0) e.push_back(err);
    e.push_back(s);
    return e;
}

int sign_of(const Expansion& e) {
    for (auto it = e.rbegin(); it != e.rend(); ++it)
        if (*it != 0.0) return *it > 0.0 ? 1 : -1;
    return 0;
}

constexpr double kMachEps = std::numeric_limits<double>::epsilon() / 2.0;
constexpr double kCcwBound = (3.0 + 16.0 * kMachEps) * kMachEps;
constexpr double kIccBound = (10.0 + 96.0 * kMachEps) * kMachEps;

int orient_exact(Point a, Point b, Point c) {
    const Expansion acx = diff(a.x, c.x), acy = diff(a.y, c.y);
    const Expansion bcx = diff(b.x, c.x), bcy = diff(b.y, c.y);
    return sign_of(add(mul(acx, bcy), negate(mul(acy, bcx))));
}

int incircle_exact(Point a, Point b, Point c, Point d) {
    const Expansion adx = diff(a.x, d.x), ady = diff(a.y, d.y);
    const Expansion bdx = diff(b.x, d.x), bdy = diff(b.y, d.y);
    const Expansion cdx = diff(c.x, d.x), cdy = diff(c.y, d.y);
    const Expansion alift = add(mul(adx, adx), mul(ady, ady));
    const Expansion blift = add(mul(bdx, bdx), mul(bdy, bdy));
    const Expansion clift = add(mul(cdx, cdx), mul(cdy, cdy));
    const Expansion bc = add(mul(bdx, cdy), negate(mul(cdx, bdy)));
    const Expansion ca = add(mul(cdx, ady), negate(mul(adx, cdy)));
    const Expansion ab = add(mul(adx, bdy), negate(mul(bdx, ady)));
    return sign_of(add(add(mul(alift, bc), mul(blift, ca)), mul(clift, ab)));
}

}  // namespace

int orient_sign(Point a, Point b, Point c) {
    const double detleft = (a.x - c.x) * (b.y - c.y);
    const double detright = (a.y - c.y) * (b.x - c.x);
    const double det = detleft - detright;
    const double bound = kCcwBound * (std::fabs(detleft) + std::fabs(detright));
    if (det > bound) return 1;
    if (-det > bound) return -1;
    return orient_exact(a, b, c);
}

int incircle_sign(Point a, Point b, Point c, Point d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
    const double cdxady = cdx * ady, adxcdy = adx * cdy;
    const double adxbdy = adx * bdy, bdxady = bdx * ady;
    const double alift = adx * adx + ady * ady;
    const double blift = bdx * bdx + bdy * bdy;
    const double clift = cdx * cdx + cdy * cdy;
    const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
    const double permanent = (std::fabs(bdxcdy) + std::fabs(cdxbdy)) * alift +
                             (std::fabs(cdxady) + std::fabs(adxcdy)) * blift +
                             (std::fabs(adxbdy) + std::fabs(bdxady)) * clift;
    const double bound = kIccBound * permanent;
    if (det > bound) return 1;
    if (-det > bound) return -1;
    return incircle_exact(a, b, c, d);
}

int incircle_sign_perturbed(Point a, Point b, Point c, Point d) {
    const int s = incircle_sign(a, b, c, d);
    if (s != 0) return s;
    // d/d(eps_m) of the lifted 4x4 determinant is the cofactor of row m's
    // height entry: +orient(b,c,d), -orient(a,c,d), +orient(a,b,d), -orient(a,b,c).
    const std::array<Point, 4> p{a, b, c, d};
    std::array<int, 4> order{0, 1, 2, 3};
    std::sort(order.begin(), order.end(), [&](int i, int j) { return lex_less(p[j], p[i]); });
    for (int m : order) {
        int cof = 0;
        switch (m) {
            case 0: cof = orient_sign(b, c, d); break;
            case 1: cof = -orient_sign(a, c, d); break;
            case 2: cof = orient_sign(a, b, d); break;
            default: cof = -orient_sign(a, b, c); break;
        }
        if (cof != 0) return cof;
    }
    return 0;
}

}  // namespace hdrest::geometry
