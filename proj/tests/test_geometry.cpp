/// Discrete-geometry kernel tests: curvature stencils, quadrature weights,
/// resampling, rescaling, and the simplicity predicate.
///
/// The oracles are closed forms evaluated independently of the library code:
/// vertices placed exactly on a circle make the Menger stencil exact, an
/// inscribed regular polygon has a textbook perimeter, a piecewise-linear
/// cone profile has an elementary lateral area and volume, and the spatial-
/// hash simplicity test is cross-checked against the all-pairs reference on
/// randomized inputs. Failures here localize bugs to the geometry layer
/// before any flow is run.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "mcflab/errors.hpp"
#include "mcflab/geometry.hpp"

using namespace mcflab;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<Vec2> circle_points(std::size_t N, double R, Vec2 center = {0, 0},
                                bool clockwise = false) {
  std::vector<Vec2> pts(N);
  for (std::size_t i = 0; i < N; ++i) {
    double th = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(N);
    if (clockwise) th = -th;
    pts[i] = {center.x + R * std::cos(th), center.y + R * std::sin(th)};
  }
  return pts;
}

// Semicircular profile of a round sphere slice: endpoints on the axis,
// interior r > 0.
std::vector<Vec2> semicircle_points(std::size_t N, double R) {
  std::vector<Vec2> pts(N);
  for (std::size_t i = 0; i < N; ++i) {
    double th = kPi * static_cast<double>(i) / static_cast<double>(N - 1);
    pts[i] = {-R * std::cos(th), R * std::sin(th)};
  }
  pts.front().y = 0.0;
  pts.back().y = 0.0;
  return pts;
}

double shoelace_area(const std::vector<Vec2>& pts) {
  double s = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    s += cross(pts[i], pts[(i + 1) % pts.size()]);
  return 0.5 * s;
}

double max_edge(const std::vector<Vec2>& pts, bool closed) {
  double m = 0.0;
  std::size_t e = closed ? pts.size() : pts.size() - 1;
  for (std::size_t i = 0; i < e; ++i)
    m = std::max(m, dist(pts[i], pts[(i + 1) % pts.size()]));
  return m;
}

double min_edge(const std::vector<Vec2>& pts, bool closed) {
  double m = std::numeric_limits<double>::infinity();
  std::size_t e = closed ? pts.size() : pts.size() - 1;
  for (std::size_t i = 0; i < e; ++i)
    m = std::min(m, dist(pts[i], pts[(i + 1) % pts.size()]));
  return m;
}

}  // namespace

TEST_CASE("menger curvature is exact on circles and signed by orientation") {
  // Any three distinct points of a radius-R circle have circumradius R, so
  // the stencil must return exactly +-1/R up to rounding.
  const double R = 0.731;
  auto p = [&](double th) { return Vec2{R * std::cos(th), R * std::sin(th)}; };
  CHECK(menger_curvature(p(0.3), p(1.1), p(2.0)) == doctest::Approx(1.0 / R).epsilon(1e-12));
  CHECK(menger_curvature(p(2.0), p(1.1), p(0.3)) == doctest::Approx(-1.0 / R).epsilon(1e-12));
  // Collinear triples are flat.
  CHECK(menger_curvature({0, 0}, {1, 0}, {2.5, 0}) == doctest::Approx(0.0));
  // Degenerate stencils are rejected rather than returning garbage.
  CHECK_THROWS_AS(menger_curvature({0, 0}, {0, 0}, {1, 0}), DegenerateEdge);
}

TEST_CASE("curve quantities on an inscribed polygon match the circle") {
  const double R = 1.37;
  const std::size_t N = 256;
  PolyCurve c = PolyCurve::make(circle_points(N, R, {0.4, -0.2}));
  QuantityField q = curve_quantities(c);

  REQUIRE(q.n == 1);
  REQUIRE(q.H.size() == N);
  for (std::size_t i = 0; i < N; ++i) {
    // Consecutive vertex triples sit on the circle: curvature exact.
    CHECK(q.H[i] == doctest::Approx(1.0 / R).epsilon(1e-11));
    CHECK(q.lambda_profile[i] == q.H[i]);
    // Outward normal is radial from the center.
    Vec2 radial = (c.vertices[i] - Vec2{0.4, -0.2}) / R;
    CHECK(dot(q.normal[i], radial) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(q.normal[i].norm() == doctest::Approx(1.0).epsilon(1e-12));
  }

  // Quadrature weights tile the curve: their sum is the total length, and
  // the length of the inscribed N-gon is 2 N R sin(pi/N).
  double wsum = 0.0;
  for (double w : q.weight) wsum += w;
  double perimeter = 2.0 * N * R * std::sin(kPi / N);
  CHECK(wsum == doctest::Approx(total_area(Geometry{c})).epsilon(1e-13));
  CHECK(wsum == doctest::Approx(perimeter).epsilon(1e-12));
}

TEST_CASE("axisym quantities on a semicircle profile match the round sphere") {
  const double R = 0.85;
  const std::size_t N = 384;
  AxisymProfile prof = AxisymProfile::make(semicircle_points(N, R), 2,
                                           Closure::axis_to_axis);
  QuantityField q = axisym_quantities(prof);

  REQUIRE(q.n == 2);
  for (std::size_t i = 0; i < N; ++i) {
    // Both principal curvatures of the sphere are 1/R, so H = 2/R, also at
    // the poles where the rotational term is a limit.
    CHECK(q.H[i] == doctest::Approx(2.0 / R).epsilon(1e-9));
    CHECK(q.lambda1(i) == doctest::Approx(1.0 / R).epsilon(1e-9));
  }

  double wsum = 0.0;
  for (double w : q.weight) wsum += w;
  CHECK(wsum == doctest::Approx(total_area(Geometry{prof})).epsilon(1e-13));
  // Revolved inscribed polygon: area and volume converge to the round
  // values at second order; at N = 384 the defect is well under 1e-4.
  CHECK(total_area(Geometry{prof}) ==
        doctest::Approx(4.0 * kPi * R * R).epsilon(1e-4));
  CHECK(enclosed_volume(Geometry{prof}) ==
        doctest::Approx(4.0 / 3.0 * kPi * R * R * R).epsilon(1e-4));
}

TEST_CASE("piecewise-linear cone profile has elementary area and volume") {
  // Double cone: r rises 0 -> 1 over x in [0,1] and falls back over [1,2].
  // Lateral area of each frustum stack is pi * slant * (r0 + r1) summed,
  // here 2 * pi * 1 * sqrt(2); volume is 2 * (pi/3).
  std::vector<Vec2> pts;
  const int seg = 12;
  for (int i = 0; i <= seg; ++i)
    pts.push_back({static_cast<double>(i) / seg, static_cast<double>(i) / seg});
  for (int i = 1; i <= seg; ++i)
    pts.push_back({1.0 + static_cast<double>(i) / seg,
                   1.0 - static_cast<double>(i) / seg});
  AxisymProfile cone = AxisymProfile::make(pts, 2, Closure::axis_to_axis);
  CHECK(total_area(Geometry{cone}) ==
        doctest::Approx(2.0 * std::sqrt(2.0) * kPi).epsilon(1e-12));
  CHECK(enclosed_volume(Geometry{cone}) ==
        doctest::Approx(2.0 * kPi / 3.0).epsilon(1e-12));
}

TEST_CASE("enclosed volume of a polygon equals the shoelace closed form") {
  const double R = 2.1;
  const std::size_t N = 48;
  PolyCurve c = PolyCurve::make(circle_points(N, R));
  double exact = 0.5 * N * R * R * std::sin(2.0 * kPi / N);
  CHECK(enclosed_volume(Geometry{c}) == doctest::Approx(exact).epsilon(1e-13));
  // Open curves bound no solid.
  std::vector<Vec2> arc(circle_points(64, 1.0).begin(),
                        circle_points(64, 1.0).begin() + 33);
  PolyCurve open_arc = PolyCurve::make(arc, false);
  CHECK(std::isnan(enclosed_volume(Geometry{open_arc})));
}

TEST_CASE("unit sphere areas and ball volumes match the classical table") {
  CHECK(unit_sphere_area(1) == doctest::Approx(2.0 * kPi).epsilon(1e-14));
  CHECK(unit_sphere_area(2) == doctest::Approx(4.0 * kPi).epsilon(1e-14));
  CHECK(unit_sphere_area(3) == doctest::Approx(2.0 * kPi * kPi).epsilon(1e-14));
  CHECK(unit_ball_volume(1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(unit_ball_volume(2) == doctest::Approx(kPi).epsilon(1e-14));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-14));
  CHECK(unit_ball_volume(4) == doctest::Approx(kPi * kPi / 2.0).epsilon(1e-14));
}

TEST_CASE("make orients closed curves counterclockwise and validates input") {
  PolyCurve cw = PolyCurve::make(circle_points(32, 1.0, {0, 0}, true));
  CHECK(shoelace_area(cw.vertices) > 0.0);

  CHECK_THROWS_AS(PolyCurve::make(circle_points(7, 1.0)), TooCoarse);

  std::vector<Vec2> dup = circle_points(32, 1.0);
  dup[5] = dup[4];
  CHECK_THROWS_AS(PolyCurve::make(dup), DegenerateEdge);

  // Figure-eight self-crossing.
  std::vector<Vec2> eight;
  for (int i = 0; i < 40; ++i) {
    double th = 2.0 * kPi * i / 40.0;
    eight.push_back({std::sin(2.0 * th), std::sin(th)});
  }
  CHECK_THROWS_AS(PolyCurve::make(eight), SelfIntersection);
}

TEST_CASE("axisym profile validation enforces the half-plane rules") {
  // Interior vertex dipping below the axis.
  std::vector<Vec2> bad = semicircle_points(64, 1.0);
  bad[30].y = -0.01;
  CHECK_THROWS_AS(AxisymProfile::make(bad, 2, Closure::axis_to_axis),
                  AxisViolation);

  // axis_to_axis endpoints must be poles.
  std::vector<Vec2> lifted = semicircle_points(64, 1.0);
  lifted.front().y = 0.05;
  CHECK_THROWS_AS(AxisymProfile::make(lifted, 2, Closure::axis_to_axis),
                  AxisViolation);

  // Off-axis loops must stay strictly above the axis.
  std::vector<Vec2> loop = circle_points(48, 0.3, {0.0, 0.2});
  CHECK_THROWS_AS(AxisymProfile::make(loop, 2, Closure::off_axis_loop),
                  AxisViolation);

  CHECK_THROWS_AS(
      AxisymProfile::make(semicircle_points(64, 1.0), 1, Closure::axis_to_axis),
      InvalidSpec);
}

TEST_CASE("resample produces near-uniform spacing without leaving the shape") {
  const double R = 1.0;
  PolyCurve c = PolyCurve::make(circle_points(97, R));
  double target = 2.0 * kPi * R / 160.0;
  Geometry g = resample(Geometry{c}, target);
  const auto& pts = points_of(g);

  CHECK(max_edge(pts, true) / min_edge(pts, true) < 1.05);
  CHECK(polyline_length(pts, true) ==
        doctest::Approx(2.0 * kPi * R).epsilon(5e-3));
  // The interpolation is a cubic through the old vertices; resampled points
  // of a circle polygon must stay very close to the circle, not on chords.
  for (const Vec2& p : pts) CHECK(p.norm() == doctest::Approx(R).epsilon(2e-4));
}

TEST_CASE("resample keeps endpoint and axis constraints") {
  // Open curve: endpoints are pinned.
  std::vector<Vec2> graph;
  for (int i = 0; i <= 40; ++i) {
    double x = -1.0 + 2.0 * i / 40.0;
    graph.push_back({x, std::cos(x)});
  }
  PolyCurve open_c = PolyCurve::make(graph, false);
  Geometry rg = resample(Geometry{open_c}, 0.07);
  const auto& rp = points_of(rg);
  CHECK(rp.front().x == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(rp.back().x == doctest::Approx(1.0).epsilon(1e-14));

  // Sphere profile: poles stay on the axis, interior stays in r > 0, and the
  // resampled vertices stay on the sphere (the cubic reconstruction folds
  // smoothly through the poles instead of cutting the tip).
  AxisymProfile prof = AxisymProfile::make(semicircle_points(80, 1.0), 2,
                                           Closure::axis_to_axis);
  Geometry rs = resample(Geometry{prof}, kPi / 200.0);
  const auto& sp = points_of(rs);
  CHECK(sp.front().y == 0.0);
  CHECK(sp.back().y == 0.0);
  for (const Vec2& p : sp) CHECK(p.norm() == doctest::Approx(1.0).epsilon(2e-4));
  revalidate(rs);
}

TEST_CASE("graded resample follows a requested spacing profile") {
  PolyCurve c = PolyCurve::make(circle_points(200, 1.0));
  // Fine spacing near angle 0, coarse on the far side.
  std::vector<double> want(200);
  for (std::size_t i = 0; i < 200; ++i) {
    double th = 2.0 * kPi * static_cast<double>(i) / 200.0;
    want[i] = 0.01 + 0.05 * (1.0 - std::cos(th)) / 2.0;
  }
  Geometry g = resample_graded(Geometry{c}, want);
  const auto& pts = points_of(g);
  revalidate(g);

  // Edges near theta = 0 must be several times shorter than near theta = pi,
  // and neighbor edges must not jump abruptly.
  double near0 = std::numeric_limits<double>::infinity(), nearpi = 0.0;
  std::vector<double> edges(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Vec2 a = pts[i], b = pts[(i + 1) % pts.size()];
    double e = dist(a, b);
    edges[i] = e;
    double th = std::atan2(a.y, a.x);
    if (std::abs(th) < 0.3) near0 = std::min(near0, e);
    if (std::abs(std::abs(th) - kPi) < 0.3) nearpi = std::max(nearpi, e);
  }
  CHECK(nearpi / near0 > 2.5);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    double r = edges[i] / edges[(i + 1) % edges.size()];
    CHECK(std::max(r, 1.0 / r) < 1.35);
  }

  // Constant grading degenerates to the uniform resample.
  std::vector<double> flat(200, 0.05);
  Geometry gu = resample_graded(Geometry{c}, flat);
  const auto& up = points_of(gu);
  CHECK(max_edge(up, true) / min_edge(up, true) < 1.05);

  CHECK_THROWS_AS(resample_graded(Geometry{c}, std::vector<double>(7, 0.05)),
                  InvalidSpec);
}

TEST_CASE("parabolic rescale maps space and time consistently") {
  const double R = 0.6;
  PolyCurve c = PolyCurve::make(circle_points(64, R, {0.3, 0.0}));
  SpacetimePoint center{{0.3, 0.0}, 0.55};
  auto [g2, t2] = parabolic_rescale(Geometry{c}, 0.3, center, 2.0);
  // x -> 2 (x - x0): a circle of radius R about x0 becomes radius 2R about 0.
  for (const Vec2& p : points_of(g2))
    CHECK(p.norm() == doctest::Approx(2.0 * R).epsilon(1e-13));
  // t -> lambda^2 (t - t0) = 4 * (0.3 - 0.55).
  CHECK(t2 == doctest::Approx(-1.0).epsilon(1e-14));

  AxisymProfile prof = AxisymProfile::make(semicircle_points(64, 1.0), 2,
                                           Closure::axis_to_axis);
  SpacetimePoint off_axis{{0.0, 0.2}, 0.0};
  CHECK_THROWS_AS(parabolic_rescale(Geometry{prof}, 0.0, off_axis, 1.0),
                  OffAxisCenter);
  CHECK_THROWS_AS(parabolic_rescale(Geometry{c}, 0.3, center, -1.0),
                  InvalidSpec);
}

TEST_CASE("hashed simplicity test agrees with the all-pairs reference") {
  std::mt19937 rng(20240817u);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  int crossings_seen = 0;
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t N = 16 + static_cast<std::size_t>(unif(rng) * 80);
    bool closed = trial % 2 == 0;
    std::vector<Vec2> pts(N);
    if (trial % 3 == 0) {
      // Star polygon with strong radial jitter: frequently self-crossing.
      for (std::size_t i = 0; i < N; ++i) {
        double th = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(N);
        double r = 0.4 + 1.2 * unif(rng);
        pts[i] = {r * std::cos(th), r * std::sin(th)};
      }
    } else {
      // Random walk: open ones cross themselves often, mild ones do not.
      Vec2 p{0, 0};
      for (std::size_t i = 0; i < N; ++i) {
        p += Vec2{unif(rng) - 0.5, unif(rng) - 0.5};
        pts[i] = p;
      }
    }
    bool a = polyline_is_simple(pts, closed);
    bool b = polyline_is_simple_bruteforce(pts, closed);
    CHECK(a == b);
    if (!b) ++crossings_seen;
  }
  // The ensemble must actually exercise both verdicts.
  CHECK(crossings_seen > 5);

  // Deterministic positive and negative instances.
  CHECK(polyline_is_simple(circle_points(32, 1.0), true));
  std::vector<Vec2> bowtie{{0, 0}, {1, 1}, {1, 0}, {0, 1}};
  CHECK_FALSE(polyline_is_simple(bowtie, true));
  CHECK_FALSE(polyline_is_simple_bruteforce(bowtie, true));
}

TEST_CASE("point and segment distances match hand geometry") {
  CHECK(point_segment_distance({0, 1}, {-1, 0}, {1, 0}) == doctest::Approx(1.0));
  CHECK(point_segment_distance({3, 4}, {-1, 0}, {1, 0}) ==
        doctest::Approx(std::sqrt(4.0 + 16.0)).epsilon(1e-14));
  // Beyond the endpoint the distance is to the endpoint itself.
  CHECK(point_segment_distance({2, 0}, {-1, 0}, {1, 0}) == doctest::Approx(1.0));

  CHECK(segment_segment_distance({-1, 0}, {1, 0}, {0, -1}, {0, 1}) ==
        doctest::Approx(0.0));
  CHECK(segment_segment_distance({-1, 1}, {1, 1}, {-1, -1}, {1, -1}) ==
        doctest::Approx(2.0));
  CHECK(segment_segment_distance({0, 1}, {1, 2}, {2, 0}, {3, 0}) ==
        doctest::Approx(dist({1, 2}, {2, 0})).epsilon(1e-14));
}
