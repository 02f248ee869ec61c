#pragma once

#include "hdrest/point.hpp"

namespace hdrest::geometry {

/// Sign of the orientation determinant of (a, b, c): +1 counter-clockwise,
/// -1 clockwise, 0 collinear. Exact: a floating-point filter with an
/// expansion-arithmetic fallback.
int orient_sign(Point a, Point b, Point c);

/// Sign of the in-circle determinant for counter-clockwise (a, b, c):
/// +1 if d lies strictly inside the circumcircle, -1 strictly outside,
/// 0 cocircular. Exact.
int incircle_sign(Point a, Point b, Point c, Point d);

/// In-circle test with cocircular ties broken by a lexicographic symbolic
/// perturbation of the lifting map: each point's lifted height is raised by
/// an infinitesimal whose order is fixed by the lexicographic rank of the
/// point, so the answer never depends on insertion order. Returns 0 only
/// when all four points are collinear.
int incircle_sign_perturbed(Point a, Point b, Point c, Point d);

}  // namespace hdrest::geometry
