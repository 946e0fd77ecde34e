#include "mcflab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "mcflab/errors.hpp"
#include "mcflab/parallel.hpp"

namespace mcflab {

namespace {

constexpr double kMinEdge = 1e-12;

double shoelace_area(const std::vector<Vec2>& pts) {
  double twice = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec2& a = pts[i];
    const Vec2& b = pts[(i + 1) % pts.size()];
    twice += cross(a, b);
  }
  return 0.5 * twice;
}

void check_edges(const std::vector<Vec2>& pts, bool closed) {
  std::size_t n = pts.size();
  std::size_t edges = closed ? n : n - 1;
  for (std::size_t i = 0; i < edges; ++i) {
    if (dist(pts[i], pts[(i + 1) % n]) < kMinEdge)
      throw DegenerateEdge("edge " + std::to_string(i) + " shorter than 1e-12");
  }
}

// (r_b^n - r_a^n) / (n (r_b - r_a)) evaluated as the stable polynomial sum
// (1/n) * sum_{k=0}^{n-1} r_a^k r_b^(n-1-k); exact at r_a == r_b.
double radial_mean_pow(double ra, double rb, int n) {
  double sum = 0.0;
  double pa = 1.0;
  for (int k = 0; k < n; ++k) {
    double pb = 1.0;
    for (int j = 0; j < n - 1 - k; ++j) pb *= rb;
    sum += pa * pb;
    pa *= ra;
  }
  return sum / n;
}

}  // namespace

double unit_sphere_area(int m) {
  // |S^m| = 2 pi^((m+1)/2) / Gamma((m+1)/2)
  double half = 0.5 * (m + 1);
  return 2.0 * std::pow(M_PI, half) / std::tgamma(half);
}

double unit_ball_volume(int n) {
  return std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

double menger_curvature(const Vec2& a, const Vec2& b, const Vec2& c) {
  double la = dist(a, b);
  double lb = dist(b, c);
  double lc = dist(a, c);
  if (la < kMinEdge || lb < kMinEdge)
    throw DegenerateEdge("degenerate triple in curvature stencil");
  if (lc < kMinEdge) return 0.0;  // folded back on itself; treat as straight
  double twice_area = cross(b - a, c - a);
  return 2.0 * twice_area / (la * lb * lc);
}

// ---------------------------------------------------------------------------
// Simplicity
// ---------------------------------------------------------------------------

namespace {

int orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  double v = cross(b - a, c - a);
  if (v > 0.0) return 1;
  if (v < 0.0) return -1;
  return 0;
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

// Whether closed segments [a,b] and [c,d] share any point.
bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c,
                        const Vec2& d) {
  int o1 = orient(a, b, c);
  int o2 = orient(a, b, d);
  int o3 = orient(c, d, a);
  int o4 = orient(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

// Edges i and j (i < j) conflict unless they are the same edge or adjacent;
// adjacent edges may only meet at the shared vertex.
bool edge_pair_bad(const std::vector<Vec2>& pts, bool closed, std::size_t i,
                   std::size_t j) {
  std::size_t n = pts.size();
  const Vec2& a = pts[i];
  const Vec2& b = pts[(i + 1) % n];
  const Vec2& c = pts[j];
  const Vec2& d = pts[(j + 1) % n];
  bool adjacent = (j == i + 1) || (closed && i == 0 && j == n - 1);
  if (!adjacent) return segments_intersect(a, b, c, d);
  // Shared endpoint is fine; anything more means a fold-back overlap.
  const Vec2& shared = (j == i + 1) ? b : a;
  const Vec2& tip1 = (j == i + 1) ? a : b;
  const Vec2& tip2 = (j == i + 1) ? d : c;
  if (orient(tip1, shared, tip2) != 0) return false;
  // Collinear: bad iff the segments overlap beyond the shared vertex.
  return dot(tip1 - shared, tip2 - shared) > 0.0 &&
         (on_segment(tip1, shared, tip2) || on_segment(tip2, shared, tip1));
}

}  // namespace

bool polyline_is_simple_bruteforce(const std::vector<Vec2>& pts, bool closed) {
  std::size_t n = pts.size();
  if (n < 3) return true;
  std::size_t edges = closed ? n : n - 1;
  for (std::size_t i = 0; i < edges; ++i)
    for (std::size_t j = i + 1; j < edges; ++j)
      if (edge_pair_bad(pts, closed, i, j)) return false;
  return true;
}

bool polyline_is_simple(const std::vector<Vec2>& pts, bool closed) {
  std::size_t n = pts.size();
  if (n < 3) return true;
  std::size_t edges = closed ? n : n - 1;
  if (edges < 64) return polyline_is_simple_bruteforce(pts, closed);

  // Uniform hash grid broad phase. Cell size tracks the median edge so that
  // strongly graded meshes stay cheap; an edge is registered in every cell
  // its bounding box covers, so any geometrically intersecting pair shares
  // at least one cell. Flat sorted (cell, edge) pairs instead of a hash map:
  // the flow engine re-checks simplicity every step, so the scratch buffers
  // are thread_local and reused without reallocating.
  thread_local std::vector<double> sorted_lens;
  thread_local std::vector<std::pair<unsigned long long, unsigned>> occupancy;
  sorted_lens.resize(edges);
  for (std::size_t i = 0; i < edges; ++i)
    sorted_lens[i] = dist(pts[i], pts[(i + 1) % n]);
  std::nth_element(sorted_lens.begin(), sorted_lens.begin() + edges / 2,
                   sorted_lens.end());
  double cell = std::max(1.5 * sorted_lens[edges / 2], 1e-12);

  auto cell_of = [cell](double v) {
    return static_cast<long long>(std::floor(v / cell));
  };
  auto key_of = [](long long cx, long long cy) {
    return (static_cast<unsigned long long>(cx) << 32) ^
           static_cast<unsigned long long>(cy & 0xffffffffLL);
  };
  occupancy.clear();
  for (std::size_t i = 0; i < edges; ++i) {
    const Vec2& a = pts[i];
    const Vec2& b = pts[(i + 1) % n];
    long long x0 = cell_of(std::min(a.x, b.x)), x1 = cell_of(std::max(a.x, b.x));
    long long y0 = cell_of(std::min(a.y, b.y)), y1 = cell_of(std::max(a.y, b.y));
    for (long long cx = x0; cx <= x1; ++cx)
      for (long long cy = y0; cy <= y1; ++cy)
        occupancy.emplace_back(key_of(cx, cy), static_cast<unsigned>(i));
  }
  std::sort(occupancy.begin(), occupancy.end());
  for (std::size_t lo = 0; lo < occupancy.size();) {
    std::size_t hi = lo + 1;
    while (hi < occupancy.size() && occupancy[hi].first == occupancy[lo].first)
      ++hi;
    for (std::size_t p = lo; p < hi; ++p)
      for (std::size_t q = p + 1; q < hi; ++q) {
        std::size_t i = std::min(occupancy[p].second, occupancy[q].second);
        std::size_t j = std::max(occupancy[p].second, occupancy[q].second);
        if (i == j) continue;
        if (edge_pair_bad(pts, closed, i, j)) return false;
      }
    lo = hi;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

PolyCurve PolyCurve::make(std::vector<Vec2> vertices, bool closed) {
  if (vertices.size() < 8)
    throw TooCoarse("PolyCurve needs at least 8 vertices, got " +
                    std::to_string(vertices.size()));
  check_edges(vertices, closed);
  if (closed && shoelace_area(vertices) < 0.0)
    std::reverse(vertices.begin(), vertices.end());
  if (!polyline_is_simple(vertices, closed))
    throw SelfIntersection("curve is not simple");
  PolyCurve c;
  c.vertices = std::move(vertices);
  c.closed = closed;
  return c;
}

AxisymProfile AxisymProfile::make(std::vector<Vec2> profile, int ambient_n,
                                  Closure closure) {
  if (ambient_n < 2)
    throw InvalidSpec("axisymmetric ambient dimension must be >= 2");
  if (profile.size() < 8)
    throw TooCoarse("profile needs at least 8 vertices, got " +
                    std::to_string(profile.size()));
  bool closed = closure == Closure::off_axis_loop;
  check_edges(profile, closed);

  if (closure == Closure::axis_to_axis) {
    // Snap near-zero endpoints onto the axis, then require them exact.
    for (std::size_t i : {std::size_t(0), profile.size() - 1})
      if (std::abs(profile[i].y) < 1e-14) profile[i].y = 0.0;
    if (profile.front().y != 0.0 || profile.back().y != 0.0)
      throw AxisViolation("axis_to_axis endpoints must lie on r = 0");
    if (profile.front().x > profile.back().x)
      std::reverse(profile.begin(), profile.end());
    for (std::size_t i = 1; i + 1 < profile.size(); ++i)
      if (profile[i].y <= 0.0)
        throw AxisViolation("interior vertex " + std::to_string(i) +
                            " has r <= 0");
  } else {
    for (std::size_t i = 0; i < profile.size(); ++i)
      if (profile[i].y <= 0.0)
        throw AxisViolation("vertex " + std::to_string(i) +
                            " has r <= 0 on an off-axis profile");
    if (closure == Closure::off_axis_loop) {
      // Stored clockwise so the outward normal points out of the solid.
      if (shoelace_area(profile) > 0.0)
        std::reverse(profile.begin(), profile.end());
    } else if (profile.front().x > profile.back().x) {
      std::reverse(profile.begin(), profile.end());
    }
  }
  if (!polyline_is_simple(profile, closed))
    throw SelfIntersection("profile is not simple");
  AxisymProfile p;
  p.profile = std::move(profile);
  p.ambient_n = ambient_n;
  p.closure = closure;
  return p;
}

void revalidate(const Geometry& g) {
  if (std::holds_alternative<PolyCurve>(g)) {
    const auto& c = std::get<PolyCurve>(g);
    check_edges(c.vertices, c.closed);
    if (!polyline_is_simple(c.vertices, c.closed))
      throw SelfIntersection("curve lost simplicity");
  } else {
    const auto& p = std::get<AxisymProfile>(g);
    check_edges(p.profile, p.closed());
    bool a2a = p.closure == Closure::axis_to_axis;
    for (std::size_t i = 0; i < p.profile.size(); ++i) {
      bool endpoint = a2a && (i == 0 || i + 1 == p.profile.size());
      if (endpoint) {
        if (p.profile[i].y != 0.0)
          throw AxisViolation("pole drifted off the axis");
      } else if (p.profile[i].y <= 0.0) {
        throw AxisViolation("vertex " + std::to_string(i) + " has r <= 0");
      }
    }
    if (!polyline_is_simple(p.profile, p.closed()))
      throw SelfIntersection("profile lost simplicity");
  }
}

// ---------------------------------------------------------------------------
// Quantities
// ---------------------------------------------------------------------------

QuantityField curve_quantities(const PolyCurve& curve) {
  const auto& v = curve.vertices;
  std::size_t n = v.size();
  check_edges(v, curve.closed);

  QuantityField q;
  q.n = 1;
  q.normal.resize(n);
  q.lambda_profile.resize(n);
  q.lambda_rot.resize(n);
  q.H.resize(n);
  q.A_norm_sq.resize(n);
  q.weight.resize(n);

  parallel_for(n, [&](std::size_t i) {
    Vec2 prev, next;
    bool interior = curve.closed || (i > 0 && i + 1 < n);
    if (curve.closed) {
      prev = v[(i + n - 1) % n];
      next = v[(i + 1) % n];
    } else {
      prev = v[i > 0 ? i - 1 : 0];
      next = v[i + 1 < n ? i + 1 : n - 1];
    }
    Vec2 tangent;
    if (interior)
      tangent = next - prev;
    else
      tangent = (i == 0) ? v[1] - v[0] : v[n - 1] - v[n - 2];
    double tl = tangent.norm();
    if (tl < kMinEdge) throw DegenerateEdge("zero tangent");
    tangent = tangent / tl;
    // Counterclockwise curves keep the solid on the left, so the outward
    // normal is the right normal of the travel direction.
    q.normal[i] = perp_cw(tangent);

    double kappa;
    if (interior) {
      kappa = menger_curvature(prev, v[i], next);
    } else {
      // One-sided: copy the nearest interior stencil.
      std::size_t j = (i == 0) ? 1 : n - 2;
      kappa = menger_curvature(v[j - 1], v[j], v[j + 1]);
    }
    q.lambda_profile[i] = kappa;
    q.lambda_rot[i] = kappa;
    q.H[i] = kappa;
    q.A_norm_sq[i] = kappa * kappa;

    double w = 0.0;
    if (curve.closed || i > 0) w += 0.5 * dist(v[(i + n - 1) % n], v[i]);
    if (curve.closed || i + 1 < n) w += 0.5 * dist(v[i], v[(i + 1) % n]);
    q.weight[i] = w;
  });
  return q;
}

QuantityField axisym_quantities(const AxisymProfile& prof) {
  const auto& v = prof.profile;
  std::size_t n = v.size();
  int dim = prof.ambient_n;
  bool closed = prof.closed();
  bool a2a = prof.closure == Closure::axis_to_axis;
  check_edges(v, closed);
  for (std::size_t i = 0; i < n; ++i) {
    bool pole = a2a && (i == 0 || i + 1 == n);
    if (!pole && v[i].y <= 0.0)
      throw AxisViolation("vertex " + std::to_string(i) + " has r <= 0");
    if (pole && v[i].y != 0.0)
      throw AxisViolation("pole vertex off the axis");
  }

  double orbit = unit_sphere_area(dim - 1);  // |S^(n-1)|

  QuantityField q;
  q.n = dim;
  q.normal.resize(n);
  q.lambda_profile.resize(n);
  q.lambda_rot.resize(n);
  q.H.resize(n);
  q.A_norm_sq.resize(n);
  q.weight.assign(n, 0.0);

  parallel_for(n, [&](std::size_t i) {
    bool left_pole = a2a && i == 0;
    bool right_pole = a2a && i + 1 == n;
    double lam_m, lam_r;
    Vec2 normal;
    if (left_pole || right_pole) {
      // Continue the meridian through the pole by mirror reflection: the
      // triple stays ordered along the traversal, which keeps the signed
      // curvature consistent with the interior stencils.
      double kappa;
      if (left_pole) {
        Vec2 nb = v[1];
        kappa = menger_curvature({nb.x, -nb.y}, v[0], nb);
        normal = {v[0].x < nb.x ? -1.0 : 1.0, 0.0};
      } else {
        Vec2 nb = v[n - 2];
        kappa = menger_curvature(nb, v[n - 1], {nb.x, -nb.y});
        normal = {v[n - 1].x > nb.x ? 1.0 : -1.0, 0.0};
      }
      lam_m = -kappa;
      lam_r = lam_m;  // umbilic limit at the axis
    } else {
      Vec2 prev, next;
      bool interior = closed || (i > 0 && i + 1 < n);
      if (closed) {
        prev = v[(i + n - 1) % n];
        next = v[(i + 1) % n];
      } else if (interior) {
        prev = v[i - 1];
        next = v[i + 1];
      }
      Vec2 tangent;
      double kappa;
      if (interior) {
        tangent = next - prev;
        kappa = menger_curvature(prev, v[i], next);
      } else {
        // Open segment endpoints (diagnostics-only profiles).
        tangent = (i == 0) ? v[1] - v[0] : v[n - 1] - v[n - 2];
        std::size_t j = (i == 0) ? 1 : n - 2;
        kappa = menger_curvature(v[j - 1], v[j], v[j + 1]);
      }
      double tl = tangent.norm();
      if (tl < kMinEdge) throw DegenerateEdge("zero tangent");
      tangent = tangent / tl;
      // Left normal of the traversal direction: points away from the axis on
      // left-to-right profiles and out of the solid on clockwise loops.
      normal = perp_ccw(tangent);
      lam_m = -kappa;
      lam_r = normal.y / v[i].y;
    }
    q.normal[i] = normal;
    q.lambda_profile[i] = lam_m;
    q.lambda_rot[i] = lam_r;
    q.H[i] = lam_m + (dim - 1) * lam_r;
    q.A_norm_sq[i] = lam_m * lam_m + (dim - 1) * lam_r * lam_r;
  });

  // Exact per-edge orbit integrals: integral of |S^(n-1)| r^(n-1) over the
  // edge, split half-half between its endpoints. The vertex weights then sum
  // to the exact polyline surface area.
  std::size_t edges = closed ? n : n - 1;
  for (std::size_t e = 0; e < edges; ++e) {
    std::size_t j = (e + 1) % n;
    double len = dist(v[e], v[j]);
    double integral = len * orbit * radial_mean_pow(v[e].y, v[j].y, dim);
    q.weight[e] += 0.5 * integral;
    q.weight[j] += 0.5 * integral;
  }
  return q;
}

QuantityField quantities(const Geometry& g) {
  if (std::holds_alternative<PolyCurve>(g))
    return curve_quantities(std::get<PolyCurve>(g));
  return axisym_quantities(std::get<AxisymProfile>(g));
}

double QuantityField::min_H() const {
  double m = std::numeric_limits<double>::infinity();
  for (double h : H) m = std::min(m, h);
  return m;
}
double QuantityField::max_H() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double h : H) m = std::max(m, h);
  return m;
}
double QuantityField::max_abs_H() const {
  double m = 0.0;
  for (double h : H) m = std::max(m, std::abs(h));
  return m;
}

// ---------------------------------------------------------------------------
// Area and volume
// ---------------------------------------------------------------------------

double polyline_length(const std::vector<Vec2>& pts, bool closed) {
  double len = 0.0;
  std::size_t n = pts.size();
  std::size_t edges = closed ? n : n - 1;
  for (std::size_t i = 0; i < edges; ++i) len += dist(pts[i], pts[(i + 1) % n]);
  return len;
}

double total_area(const Geometry& g) {
  if (std::holds_alternative<PolyCurve>(g)) {
    const auto& c = std::get<PolyCurve>(g);
    return polyline_length(c.vertices, c.closed);
  }
  const auto& p = std::get<AxisymProfile>(g);
  const auto& v = p.profile;
  double orbit = unit_sphere_area(p.ambient_n - 1);
  std::size_t n = v.size();
  std::size_t edges = p.closed() ? n : n - 1;
  double area = 0.0;
  for (std::size_t e = 0; e < edges; ++e) {
    std::size_t j = (e + 1) % n;
    area += dist(v[e], v[j]) * orbit * radial_mean_pow(v[e].y, v[j].y, p.ambient_n);
  }
  return area;
}

double enclosed_volume(const Geometry& g) {
  if (std::holds_alternative<PolyCurve>(g)) {
    const auto& c = std::get<PolyCurve>(g);
    if (!c.closed) return std::numeric_limits<double>::quiet_NaN();
    return std::abs(shoelace_area(c.vertices));
  }
  const auto& p = std::get<AxisymProfile>(g);
  if (p.closure == Closure::segment)
    return std::numeric_limits<double>::quiet_NaN();
  const auto& v = p.profile;
  int dim = p.ambient_n;
  double wn = unit_ball_volume(dim);
  std::size_t n = v.size();
  std::size_t edges = p.closed() ? n : n - 1;
  // V = omega_n * signed integral of r^n dx; per straight edge the integral
  // is exact: dx * (r_b^(n+1) - r_a^(n+1)) / ((n+1)(r_b - r_a)).
  double total = 0.0;
  for (std::size_t e = 0; e < edges; ++e) {
    std::size_t j = (e + 1) % n;
    double dx = v[j].x - v[e].x;
    total += dx * radial_mean_pow(v[e].y, v[j].y, dim + 1);
  }
  // Left-to-right profiles and clockwise loops both make this positive.
  return wn * total;
}

// ---------------------------------------------------------------------------
// Resampling and rescaling
// ---------------------------------------------------------------------------

namespace {

// How to manufacture control points past an open end: continue straight, or
// reflect across the axis of rotation (the smooth continuation through a
// pole, where the profile folds back with y negated).
enum class EndRule { extend, mirror_axis };

struct ArcTable {
  std::vector<double> s;  // cumulative arclength at each vertex (+ wrap)
  const std::vector<Vec2>* pts;
  bool closed;
  EndRule ends;
  std::size_t n;

  ArcTable(const std::vector<Vec2>& p, bool closed_, EndRule ends_)
      : pts(&p), closed(closed_), ends(ends_), n(p.size()) {
    s.resize(closed ? n + 1 : n);
    s[0] = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i)
      s[i] = s[i - 1] + dist((*pts)[i - 1], (*pts)[i % n]);
  }
  double length() const { return s.back(); }

  // Control point with index allowed one step past either end.
  Vec2 ctrl(std::ptrdiff_t i) const {
    std::ptrdiff_t m = static_cast<std::ptrdiff_t>(n);
    if (closed) return (*pts)[((i % m) + m) % m];
    if (i < 0) {
      const Vec2& a = (*pts)[0];
      const Vec2& b = (*pts)[static_cast<std::size_t>(-i)];
      return ends == EndRule::mirror_axis ? Vec2{b.x, -b.y}
                                          : a + (a - b);
    }
    if (i >= m) {
      std::size_t k = static_cast<std::size_t>(i - m) + 1;
      const Vec2& a = (*pts)[n - 1];
      const Vec2& b = (*pts)[n - 1 - k];
      return ends == EndRule::mirror_axis ? Vec2{b.x, -b.y}
                                          : a + (a - b);
    }
    return (*pts)[static_cast<std::size_t>(i)];
  }

  // Point at arclength t (clamped / wrapped). Interpolation is a Catmull-Rom
  // segment through the edge's endpoints: plain chords would shave the
  // sagitta off every curved span, and on a cap tip that repeated shaving
  // erodes the pole and leaves curvature spikes after each regrade.
  Vec2 at(double t) const {
    if (closed) {
      double L = length();
      t = std::fmod(t, L);
      if (t < 0) t += L;
    } else {
      t = std::clamp(t, 0.0, length());
    }
    auto it = std::upper_bound(s.begin(), s.end(), t);
    std::size_t e = std::min<std::size_t>(s.size() - 2, it - s.begin() - 1);
    double seg = s[e + 1] - s[e];
    double u = seg > 0 ? (t - s[e]) / seg : 0.0;
    std::ptrdiff_t ei = static_cast<std::ptrdiff_t>(e);
    Vec2 p0 = ctrl(ei - 1), p1 = ctrl(ei), p2 = ctrl(ei + 1), p3 = ctrl(ei + 2);
    double u2 = u * u, u3 = u2 * u;
    return (p1 * 2.0 + (p2 - p0) * u +
            (p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3) * u2 +
            (p1 * 3.0 - p2 * 3.0 + p3 - p0) * u3) *
           0.5;
  }
};

EndRule ends_for(const Geometry& g) {
  const AxisymProfile* p = std::get_if<AxisymProfile>(&g);
  return p && p->closure == Closure::axis_to_axis ? EndRule::mirror_axis
                                                  : EndRule::extend;
}

std::vector<Vec2> resample_points(const std::vector<Vec2>& pts, bool closed,
                                  std::size_t count, EndRule ends) {
  ArcTable table(pts, closed, ends);
  double L = table.length();
  std::vector<Vec2> out;
  out.reserve(count);
  if (closed) {
    for (std::size_t k = 0; k < count; ++k)
      out.push_back(table.at(L * static_cast<double>(k) / count));
  } else {
    for (std::size_t k = 0; k < count; ++k)
      out.push_back(table.at(L * static_cast<double>(k) / (count - 1)));
    out.front() = pts.front();  // endpoints preserved exactly
    out.back() = pts.back();
  }
  return out;
}

Geometry rebuild_like(const Geometry& g, std::vector<Vec2> pts) {
  if (std::holds_alternative<PolyCurve>(g)) {
    const auto& c = std::get<PolyCurve>(g);
    return PolyCurve::make(std::move(pts), c.closed);
  }
  const auto& p = std::get<AxisymProfile>(g);
  if (p.closure == Closure::axis_to_axis) {
    pts.front().y = 0.0;
    pts.back().y = 0.0;
  }
  return AxisymProfile::make(std::move(pts), p.ambient_n, p.closure);
}

double geometry_diameter(const std::vector<Vec2>& pts) {
  Vec2 lo = pts[0], hi = pts[0];
  for (const auto& p : pts) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  return (hi - lo).norm();
}

}  // namespace

Geometry resample(const Geometry& g, double target_spacing) {
  const auto& pts = points_of(g);
  if (!(target_spacing > 0.0))
    throw TooCoarse("target spacing must be positive");
  if (target_spacing > geometry_diameter(pts) / 8.0)
    throw TooCoarse("target spacing exceeds diameter/8");
  bool closed = is_closed(g);
  double L = polyline_length(pts, closed);
  std::size_t count = static_cast<std::size_t>(std::llround(L / target_spacing));
  if (!closed) count += 1;
  if (count < 8) throw TooCoarse("resampling would leave fewer than 8 vertices");
  return rebuild_like(g, resample_points(pts, closed, count, ends_for(g)));
}

Geometry resample_graded(const Geometry& g, const std::vector<double>& spacing) {
  const auto& pts = points_of(g);
  bool closed = is_closed(g);
  std::size_t n = pts.size();
  if (spacing.size() != n)
    throw InvalidSpec("graded spacing must have one entry per vertex");
  std::size_t edges = closed ? n : n - 1;
  // phi = integral of ds / h(s), h piecewise linear between vertices; new
  // vertices go at uniform phi.
  std::vector<double> phi(edges + 1, 0.0);
  std::vector<double> s(edges + 1, 0.0);
  for (std::size_t e = 0; e < edges; ++e) {
    std::size_t j = (e + 1) % n;
    double len = dist(pts[e], pts[j]);
    double h = 0.5 * (spacing[e] + spacing[j]);
    if (!(h > 0)) throw InvalidSpec("graded spacing must be positive");
    phi[e + 1] = phi[e] + len / h;
    s[e + 1] = s[e] + len;
  }
  double U = phi[edges];
  std::size_t count = std::max<std::size_t>(8, std::llround(U));
  if (!closed) count = std::max<std::size_t>(8, count + 1);
  ArcTable table(pts, closed, ends_for(g));
  std::vector<Vec2> out;
  out.reserve(count);
  std::size_t steps = closed ? count : count - 1;
  std::size_t seg = 0;
  for (std::size_t k = 0; k < count; ++k) {
    double target = U * static_cast<double>(k) / steps;
    while (seg + 1 < edges && phi[seg + 1] < target) ++seg;
    double dphi = phi[seg + 1] - phi[seg];
    double u = dphi > 0 ? (target - phi[seg]) / dphi : 0.0;
    out.push_back(table.at(s[seg] + u * (s[seg + 1] - s[seg])));
  }
  if (!closed) {
    out.front() = pts.front();
    out.back() = pts.back();
  }
  return rebuild_like(g, std::move(out));
}

std::pair<Geometry, double> parabolic_rescale(const Geometry& g, double time,
                                              const SpacetimePoint& center,
                                              double lambda) {
  if (!(lambda > 0.0)) throw InvalidSpec("rescaling factor must be positive");
  Geometry out = g;
  if (std::holds_alternative<AxisymProfile>(out)) {
    if (std::abs(center.x0.y) > 1e-14)
      throw OffAxisCenter("rescaling center must lie on the symmetry axis");
    auto& p = std::get<AxisymProfile>(out);
    for (auto& v : p.profile) {
      v.x = lambda * (v.x - center.x0.x);
      v.y = lambda * v.y;
    }
  } else {
    auto& c = std::get<PolyCurve>(out);
    for (auto& v : c.vertices) v = lambda * (v - center.x0);
  }
  return {std::move(out), lambda * lambda * (time - center.t0)};
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

const std::vector<Vec2>& points_of(const Geometry& g) {
  if (std::holds_alternative<PolyCurve>(g))
    return std::get<PolyCurve>(g).vertices;
  return std::get<AxisymProfile>(g).profile;
}

std::vector<Vec2>& points_of(Geometry& g) {
  if (std::holds_alternative<PolyCurve>(g))
    return std::get<PolyCurve>(g).vertices;
  return std::get<AxisymProfile>(g).profile;
}

bool is_closed(const Geometry& g) {
  if (std::holds_alternative<PolyCurve>(g))
    return std::get<PolyCurve>(g).closed;
  return std::get<AxisymProfile>(g).closed();
}

int hypersurface_dim(const Geometry& g) {
  if (std::holds_alternative<PolyCurve>(g)) return 1;
  return std::get<AxisymProfile>(g).ambient_n;
}

double min_edge_length(const Geometry& g) {
  const auto& pts = points_of(g);
  bool closed = is_closed(g);
  std::size_t n = pts.size();
  std::size_t edges = closed ? n : n - 1;
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < edges; ++i)
    m = std::min(m, dist(pts[i], pts[(i + 1) % n]));
  return m;
}

double max_edge_length(const Geometry& g) {
  const auto& pts = points_of(g);
  bool closed = is_closed(g);
  std::size_t n = pts.size();
  std::size_t edges = closed ? n : n - 1;
  double m = 0.0;
  for (std::size_t i = 0; i < edges; ++i)
    m = std::max(m, dist(pts[i], pts[(i + 1) % n]));
  return m;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  Vec2 ab = b - a;
  double len2 = ab.norm2();
  if (len2 == 0.0) return dist(p, a);
  double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return dist(p, a + ab * t);
}

double segment_segment_distance(const Vec2& a, const Vec2& b, const Vec2& c,
                                const Vec2& d) {
  if (segments_intersect(a, b, c, d)) return 0.0;
  return std::min(std::min(point_segment_distance(a, c, d),
                           point_segment_distance(b, c, d)),
                  std::min(point_segment_distance(c, a, b),
                           point_segment_distance(d, a, b)));
}

}  // namespace mcflab
