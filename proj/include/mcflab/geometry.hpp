#pragma once
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mcflab/vec2.hpp"

namespace mcflab {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

// Closed (or open) embedded polyline in the plane; the 1-dimensional
// hypersurface. Closed curves are stored counterclockwise (signed area > 0);
// open curves (graph segments such as the grim reaper window) keep their
// construction order and get half-weights at the endpoints.
struct PolyCurve {
  std::vector<Vec2> vertices;
  bool closed = true;

  // Validates spacing, vertex count, simplicity; flips orientation of closed
  // curves to counterclockwise.
  static PolyCurve make(std::vector<Vec2> vertices, bool closed = true);

  std::size_t size() const { return vertices.size(); }
};

enum class Closure {
  axis_to_axis,   // both endpoints on r = 0, interior r > 0
  off_axis_loop,  // closed loop with r > 0 everywhere (torus-like)
  segment,        // open profile with r > 0 everywhere; diagnostics only
};

// Profile curve (x, r) in the half-plane r >= 0 plus the ambient dimension n,
// representing a hypersurface of revolution in R^(n+1).
// axis_to_axis profiles are ordered left-to-right along the axis;
// off_axis_loop profiles are stored clockwise in the (x, r) plane so that the
// outward normal convention below points out of the enclosed solid.
struct AxisymProfile {
  std::vector<Vec2> profile;  // (x, r)
  int ambient_n = 2;
  Closure closure = Closure::axis_to_axis;

  static AxisymProfile make(std::vector<Vec2> profile, int ambient_n,
                            Closure closure);

  std::size_t size() const { return profile.size(); }
  bool closed() const { return closure == Closure::off_axis_loop; }
};

using Geometry = std::variant<PolyCurve, AxisymProfile>;

// Per-vertex geometric data. For a curve the single principal curvature is
// lambda_profile; for an axisymmetric hypersurface lambda_rot enters with
// multiplicity n-1.
struct QuantityField {
  int n = 1;  // hypersurface dimension
  std::vector<Vec2> normal;           // outward unit normal
  std::vector<double> lambda_profile; // curvature of the generating curve
  std::vector<double> lambda_rot;     // rotational curvature (= lambda_profile for curves)
  std::vector<double> H;              // lambda_profile + (n-1)*lambda_rot
  std::vector<double> A_norm_sq;      // lambda_profile^2 + (n-1)*lambda_rot^2
  std::vector<double> weight;         // discrete area element, sums to total_area
  double lambda1(std::size_t i) const {
    return n == 1 ? lambda_profile[i]
                  : std::min(lambda_profile[i], lambda_rot[i]);
  }
  double min_H() const;
  double max_H() const;
  double max_abs_H() const;
};

struct SpacetimePoint {
  Vec2 x0;
  double t0 = 0.0;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Menger (circumscribed-circle) curvature of the vertex triple (a, b, c):
// signed, positive when the triple turns counterclockwise.
double menger_curvature(const Vec2& a, const Vec2& b, const Vec2& c);

QuantityField curve_quantities(const PolyCurve& curve);
QuantityField axisym_quantities(const AxisymProfile& profile);
QuantityField quantities(const Geometry& g);

double total_area(const Geometry& g);
// Enclosed (n+1)-volume. NaN for open curves and profile segments, which do
// not bound a solid.
double enclosed_volume(const Geometry& g);

// Redistributes vertices to near-uniform arclength spacing along the same
// polyline (tangential motion only). Endpoint/axis constraints preserved.
Geometry resample(const Geometry& g, double target_spacing);

// Graded resampling: spacing[i] is the desired local spacing at arclength
// position of input vertex i (piecewise-linear in between). Used by the
// surgery-scale flows; plain resample is the uniform special case.
Geometry resample_graded(const Geometry& g, const std::vector<double>& spacing);

// x -> lambda * (x - x0), t -> lambda^2 * (t - t0). For axisymmetric input
// x0 must lie on the axis.
std::pair<Geometry, double> parabolic_rescale(const Geometry& g, double time,
                                              const SpacetimePoint& center,
                                              double lambda);

// True iff the polyline (closed or open) has no improper segment crossings.
// Exact segment tests behind a uniform spatial hash broad phase; identical
// verdicts to the all-pairs test.
bool polyline_is_simple(const std::vector<Vec2>& pts, bool closed);
// All-pairs reference implementation (property-test oracle).
bool polyline_is_simple_bruteforce(const std::vector<Vec2>& pts, bool closed);

// Helpers shared across modules.
const std::vector<Vec2>& points_of(const Geometry& g);
std::vector<Vec2>& points_of(Geometry& g);
bool is_closed(const Geometry& g);
int hypersurface_dim(const Geometry& g);
double min_edge_length(const Geometry& g);
double max_edge_length(const Geometry& g);
double polyline_length(const std::vector<Vec2>& pts, bool closed);
// Re-runs the construction invariants on existing geometry (after a step).
void revalidate(const Geometry& g);

// Surface measure of the unit m-sphere S^m in R^(m+1), 2*pi^((m+1)/2)/Gamma((m+1)/2).
double unit_sphere_area(int m);
// Volume of the unit n-ball.
double unit_ball_volume(int n);

// Minimum distance from point p to the segment [a, b].
double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);
// Minimum distance between segments [a,b] and [c,d].
double segment_segment_distance(const Vec2& a, const Vec2& b, const Vec2& c,
                                const Vec2& d);

}  // namespace mcflab
