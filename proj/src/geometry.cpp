#include "vertexnet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vn::geom {

namespace {

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double dist2(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

bool lex_less(const Vec& a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

// Signed slack of a point against a halfplane; <= 0 means inside.
double slack(const Halfplane& hp, const Vec& p) {
  return dot(hp.normal, p) - hp.offset;
}

}  // namespace

std::optional<Interval> intersect_interval(double a_lo, double a_hi,
                                           double b_lo, double b_hi) {
  const double lo = std::max(a_lo, b_lo);
  const double hi = std::min(a_hi, b_hi);
  if (lo > hi) return std::nullopt;
  return Interval{lo, hi};
}

VertexPolytope canonical_order(const std::vector<Vec>& points) {
  std::vector<Vec> kept;
  for (const Vec& p : points) {
    bool dup = false;
    for (const Vec& q : kept) {
      if (dist2(p, q) < kDedupTol * kDedupTol) {
        dup = true;
        break;
      }
    }
    if (!dup) kept.push_back(p);
  }
  if (kept.empty()) throw EmptyInput("canonical_order: no points after dedup");

  if (kept.size() <= 2) {
    std::sort(kept.begin(), kept.end(), lex_less);
    return VertexPolytope{2, kept};
  }

  // Collinear candidate sets reduce to the segment's extreme points.
  bool collinear = true;
  for (std::size_t i = 2; i < kept.size() && collinear; ++i) {
    const double cross = (kept[1][0] - kept[0][0]) * (kept[i][1] - kept[0][1]) -
                         (kept[1][1] - kept[0][1]) * (kept[i][0] - kept[0][0]);
    if (std::abs(cross) > kDedupTol) collinear = false;
  }
  if (collinear) {
    auto [lo, hi] = std::minmax_element(kept.begin(), kept.end(), lex_less);
    return VertexPolytope{2, {*lo, *hi}};
  }

  double cx = 0.0, cy = 0.0;
  for (const Vec& p : kept) {
    cx += p[0];
    cy += p[1];
  }
  cx /= static_cast<double>(kept.size());
  cy /= static_cast<double>(kept.size());

  std::sort(kept.begin(), kept.end(), [&](const Vec& a, const Vec& b) {
    const double aa = std::atan2(a[1] - cy, a[0] - cx);
    const double ab = std::atan2(b[1] - cy, b[0] - cx);
    if (aa != ab) return aa < ab;
    return dist2(a, {cx, cy}) < dist2(b, {cx, cy});
  });

  const auto first =
      std::min_element(kept.begin(), kept.end(), lex_less) - kept.begin();
  std::rotate(kept.begin(), kept.begin() + first, kept.end());
  return VertexPolytope{2, kept};
}

std::optional<VertexPolytope> clip_polygon(const VertexPolytope& poly,
                                           const Halfplane& hp) {
  // Treat points on the boundary as inside.
  constexpr double kEdgeEps = 1e-12;
  const auto& vs = poly.vertices;
  std::vector<Vec> out;

  if (vs.size() == 1) {
    if (slack(hp, vs[0]) <= kEdgeEps) out.push_back(vs[0]);
  } else {
    const std::size_t n = vs.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec& cur = vs[i];
      const Vec& nxt = vs[(i + 1) % n];
      const double dc = slack(hp, cur);
      const double dn = slack(hp, nxt);
      if (dc <= kEdgeEps) out.push_back(cur);
      const bool crosses = (dc > kEdgeEps && dn < -kEdgeEps) ||
                           (dc < -kEdgeEps && dn > kEdgeEps);
      if (crosses) {
        const double t = dc / (dc - dn);
        out.push_back({cur[0] + t * (nxt[0] - cur[0]),
                       cur[1] + t * (nxt[1] - cur[1])});
      }
      if (n == 2) break;  // a segment has a single edge
    }
  }

  if (out.empty()) return std::nullopt;
  return canonical_order(out);
}

bool contains(const HalfplaneSet& hs, const Vec& point, double tol) {
  for (const Halfplane& hp : hs.constraints) {
    if (slack(hp, point) > tol) return false;
  }
  return true;
}

Vec convex_combination(const VertexPolytope& poly,
                       const std::vector<double>& weights) {
  if (weights.size() != poly.vertices.size()) {
    throw WeightContract("convex_combination: weight/vertex count mismatch");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw WeightContract("convex_combination: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw WeightContract("convex_combination: weights do not sum to 1");
  }
  Vec out(poly.vertices[0].size(), 0.0);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    for (std::size_t d = 0; d < out.size(); ++d) {
      out[d] += weights[i] * poly.vertices[i][d];
    }
  }
  return out;
}

VertexPolytope closest_point_fallback(double s_lo, double s_hi, double u_lo,
                                      double u_hi) {
  const double p = (s_lo > u_hi) ? u_hi : u_lo;
  (void)s_hi;
  return VertexPolytope{1, {{p}}};
}

double distance_to_polyhedron(const HalfplaneSet& target, const Vec& point) {
  if (contains(target, point, 0.0)) return 0.0;

  // Projection onto a convex 2D polyhedron lands on a facet foot point
  // or on a corner (pairwise facet intersection); enumerate both.
  double best = std::numeric_limits<double>::infinity();
  const auto& cs = target.constraints;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const Vec& n = cs[i].normal;
    const double nn = dot(n, n);
    const double s = slack(cs[i], point);
    const Vec foot = {point[0] - s * n[0] / nn, point[1] - s * n[1] / nn};
    if (contains(target, foot, kMembershipTol)) {
      best = std::min(best, std::sqrt(dist2(point, foot)));
    }
    for (std::size_t j = i + 1; j < cs.size(); ++j) {
      const Vec& m = cs[j].normal;
      const double det = n[0] * m[1] - n[1] * m[0];
      if (std::abs(det) < 1e-14) continue;  // parallel facets
      const Vec corner = {(cs[i].offset * m[1] - cs[j].offset * n[1]) / det,
                          (n[0] * cs[j].offset - m[0] * cs[i].offset) / det};
      if (contains(target, corner, kMembershipTol)) {
        best = std::min(best, std::sqrt(dist2(point, corner)));
      }
    }
  }
  return best;
}

VertexPolytope closest_point_fallback(const HalfplaneSet& target,
                                      const VertexPolytope& base) {
  auto eval = [&](const Vec& p) { return distance_to_polyhedron(target, p); };

  Vec best_point = base.vertices[0];
  double best = eval(best_point);
  auto consider = [&](const Vec& p) {
    const double d = eval(p);
    if (d < best - kDedupTol ||
        (d < best + kDedupTol && lex_less(p, best_point))) {
      best = std::min(best, d);
      best_point = p;
    }
  };

  for (const Vec& v : base.vertices) consider(v);

  // Distance is convex along each edge; ternary search refines the
  // interior minimum when it is not at a vertex.
  const std::size_t n = base.vertices.size();
  if (n >= 2) {
    const std::size_t edges = (n == 2) ? 1 : n;
    for (std::size_t i = 0; i < edges; ++i) {
      const Vec& a = base.vertices[i];
      const Vec& b = base.vertices[(i + 1) % n];
      double lo = 0.0, hi = 1.0;
      auto at = [&](double t) -> Vec {
        return {a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
      };
      for (int it = 0; it < 100; ++it) {
        const double t1 = lo + (hi - lo) / 3.0;
        const double t2 = hi - (hi - lo) / 3.0;
        if (eval(at(t1)) <= eval(at(t2))) {
          hi = t2;
        } else {
          lo = t1;
        }
      }
      consider(at(0.5 * (lo + hi)));
    }
  }

  return VertexPolytope{2, {best_point}};
}

}  // namespace vn::geom
