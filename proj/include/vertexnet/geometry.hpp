#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

// Low-dimensional convex polytope operations for 1D/2D action spaces:
// halfplane clipping, interval intersection, canonical vertex ordering,
// membership tests, convex combinations and the closest-point fallback
// used when the per-step safe set has empty intersection with the
// actuator set.

namespace vn::geom {

using Vec = std::vector<double>;

// Two vertices closer than this are considered the same point.
inline constexpr double kDedupTol = 1e-9;
// Default tolerance for halfplane membership checks.
inline constexpr double kMembershipTol = 1e-7;

struct GeomError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyInput : GeomError {
  using GeomError::GeomError;
};
struct WeightContract : GeomError {
  using GeomError::GeomError;
};

// The set {u : normal . u <= offset}.
struct Halfplane {
  Vec normal;
  double offset = 0.0;
};

// H-representation: intersection of the listed halfplanes.
struct HalfplaneSet {
  std::vector<Halfplane> constraints;
};

// V-representation. In 2D the vertices are counter-clockwise starting
// from the lexicographically smallest one; in 1D they are ascending.
struct VertexPolytope {
  int dimension = 2;
  std::vector<Vec> vertices;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// [a_lo, a_hi] n [b_lo, b_hi], or nullopt when disjoint.
std::optional<Interval> intersect_interval(double a_lo, double a_hi,
                                           double b_lo, double b_hi);

// Clips a 2D polytope by one halfplane (Sutherland-Hodgman step).
// Degenerate results (segment, point) come back as 2-/1-vertex
// polytopes; nullopt means the intersection is empty.
std::optional<VertexPolytope> clip_polygon(const VertexPolytope& poly,
                                           const Halfplane& hp);

// Deduplicates 2D points and orders them counter-clockwise around the
// centroid, rotated so the lexicographically smallest vertex is first.
// Throws EmptyInput when nothing survives dedup.
VertexPolytope canonical_order(const std::vector<Vec>& points);

bool contains(const HalfplaneSet& hs, const Vec& point,
              double tol = kMembershipTol);

// Sum of weights[i] * vertices[i]. Weights must be nonnegative and sum
// to one within 1e-9; throws WeightContract otherwise.
Vec convex_combination(const VertexPolytope& poly,
                       const std::vector<double>& weights);

// 1D fallback: the endpoint of [u_lo, u_hi] nearest to the disjoint
// target interval [s_lo, s_hi], as a single-vertex polytope.
VertexPolytope closest_point_fallback(double s_lo, double s_hi, double u_lo,
                                      double u_hi);

// 2D fallback: the point of `base` minimizing Euclidean distance to the
// polyhedron `target`. Ties go to the lexicographically smallest point.
VertexPolytope closest_point_fallback(const HalfplaneSet& target,
                                      const VertexPolytope& base);

// Euclidean distance from a 2D point to the polyhedron `target` (0 when
// inside). Exposed for the fallback and its tests.
double distance_to_polyhedron(const HalfplaneSet& target, const Vec& point);

}  // namespace vn::geom
