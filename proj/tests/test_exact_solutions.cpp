/// Model-flow tests: the closed-form sphere/cylinder radii, the translating
/// graph, the dumbbell family (plain, asymmetric, terraced), and the
/// self-shrinker residual.
///
/// Radii and extinction times are checked against hand-evaluated square
/// roots; the translating graph against its defining ODE (curvature equals
/// the vertical speed component); the dumbbells against their design radii
/// and the mean-convexity requirement every downstream consumer relies on.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mcflab/errors.hpp"
#include "mcflab/exact_solutions.hpp"
#include "mcflab/geometry.hpp"

using namespace mcflab;

namespace {

constexpr double kPi = 3.14159265358979323846;

double min_y(const std::vector<Vec2>& pts) {
  double m = std::numeric_limits<double>::infinity();
  for (const Vec2& p : pts) m = std::min(m, p.y);
  return m;
}

double max_y(const std::vector<Vec2>& pts) {
  double m = -std::numeric_limits<double>::infinity();
  for (const Vec2& p : pts) m = std::max(m, p.y);
  return m;
}

}  // namespace

TEST_CASE("sphere radius follows sqrt(R0^2 - 2 n t)") {
  SphereSolution circle{1.0, 1};
  CHECK(circle.extinction_time() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(circle.radius(0.18) ==
        doctest::Approx(std::sqrt(1.0 - 0.36)).epsilon(1e-15));

  SphereSolution sphere{1.0, 2};
  CHECK(sphere.extinction_time() == doctest::Approx(0.25).epsilon(1e-15));
  // Hand value: sqrt(1 - 4 * 0.2) = sqrt(0.2).
  CHECK(sphere.radius(0.2) ==
        doctest::Approx(0.44721359549995793).epsilon(1e-15));
  CHECK(sphere.radius(0.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(sphere.radius(0.2501), PastExtinction);
}

TEST_CASE("cylinder radius uses the curved dimensions only") {
  // One flat factor: n - j = 1 curved direction, R(t) = sqrt(R0^2 - 2t).
  CylinderSolution cyl{1.0, 2, 1};
  CHECK(cyl.extinction_time() == doctest::Approx(0.5).epsilon(1e-15));
  // Hand value: sqrt(1 - 0.6) = sqrt(0.4).
  CHECK(cyl.radius(0.3) == doctest::Approx(0.63245553203367588).epsilon(1e-15));
  CHECK_THROWS_AS(cyl.radius(0.51), PastExtinction);
  CHECK_THROWS_AS((CylinderSolution{1.0, 2, 2}.radius(0.0)),
                  UnsupportedFactorization);
}

TEST_CASE("sphere_at emits the round slice at the shrunken radius") {
  SphereSolution circle{1.0, 1};
  Geometry g1 = sphere_at(circle, 0.3, 128);
  const PolyCurve* c = std::get_if<PolyCurve>(&g1);
  REQUIRE(c != nullptr);
  CHECK(c->size() == 128);
  double R = std::sqrt(1.0 - 0.6);
  for (const Vec2& p : c->vertices)
    CHECK(p.norm() == doctest::Approx(R).epsilon(1e-13));

  SphereSolution sphere{0.8, 2};
  Geometry g2 = sphere_at(sphere, 0.1, 200);
  const AxisymProfile* prof = std::get_if<AxisymProfile>(&g2);
  REQUIRE(prof != nullptr);
  CHECK(prof->closure == Closure::axis_to_axis);
  double R2 = std::sqrt(0.64 - 0.4);
  for (const Vec2& p : prof->profile)
    CHECK(p.norm() == doctest::Approx(R2).epsilon(1e-13));
  CHECK(prof->profile.front().y == 0.0);
  CHECK(prof->profile.back().y == 0.0);
  QuantityField q = axisym_quantities(*prof);
  CHECK(q.min_H() == doctest::Approx(2.0 / R2).epsilon(1e-8));
  CHECK(q.max_H() == doctest::Approx(2.0 / R2).epsilon(1e-8));
}

TEST_CASE("cylinder_at emits a flat off-axis segment of the right radius") {
  CylinderSolution cyl{0.5, 2, 1};
  AxisymProfile seg = cylinder_at(cyl, 0.08, 2.0, 100);
  CHECK(seg.closure == Closure::segment);
  double r = std::sqrt(0.25 - 0.16);
  CHECK(min_y(seg.profile) == doctest::Approx(r).epsilon(1e-14));
  CHECK(max_y(seg.profile) == doctest::Approx(r).epsilon(1e-14));
  CHECK(seg.profile.front().x == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(seg.profile.back().x == doctest::Approx(1.0).epsilon(1e-14));
  // Straight profile: H comes from the rotational curvature alone.
  QuantityField q = axisym_quantities(seg);
  for (std::size_t i = 1; i + 1 < seg.size(); ++i) {
    CHECK(q.lambda_profile[i] == doctest::Approx(0.0));
    CHECK(q.H[i] == doctest::Approx(1.0 / r).epsilon(1e-10));
  }
}

TEST_CASE("grim reaper graph satisfies its translation law") {
  std::vector<double> grid;
  for (int i = 0; i <= 400; ++i) grid.push_back(-1.45 + 2.9 * i / 400.0);

  // The graph at time t is the time-0 graph shifted vertically by t.
  PolyCurve g0 = grim_reaper(0.0, grid);
  PolyCurve g1 = grim_reaper(0.37, grid);
  REQUIRE(g0.size() == g1.size());
  for (std::size_t i = 0; i < g0.size(); ++i) {
    CHECK(g1.vertices[i].x == doctest::Approx(g0.vertices[i].x));
    CHECK(g1.vertices[i].y - g0.vertices[i].y ==
          doctest::Approx(0.37).epsilon(1e-14));
  }
  // Height oracle: u(p) = t - log cos p at p = 1 and t = 0.37.
  auto it = std::find_if(grid.begin(), grid.end(),
                         [](double p) { return std::abs(p - 1.0) < 1e-9; });
  REQUIRE(it != grid.end());
  std::size_t idx = static_cast<std::size_t>(it - grid.begin());
  CHECK(g1.vertices[idx].y ==
        doctest::Approx(0.37 - std::log(std::cos(1.0))).epsilon(1e-14));

  // Curvature of y = -log cos x is cos x, and the unit vertical translation
  // has normal component nu_y, so the translator identity is H = -nu_y
  // pointwise regardless of which way the discrete normal is oriented.
  QuantityField q = curve_quantities(g0);
  for (std::size_t i = 0; i < g0.size(); ++i) {
    double x = g0.vertices[i].x;
    if (std::abs(x) > 1.2) continue;
    CHECK(std::abs(q.H[i]) == doctest::Approx(std::cos(x)).epsilon(1e-3));
    CHECK(q.H[i] == doctest::Approx(-q.normal[i].y).epsilon(1e-3));
  }
}

TEST_CASE("dumbbell meets its design radii and is mean convex") {
  DumbbellSpec spec;  // bulbs 1.0, neck 0.2, halflength 1.5
  AxisymProfile prof = dumbbell(spec, 1200);
  CHECK(prof.closure == Closure::axis_to_axis);
  CHECK(prof.profile.front().y == 0.0);
  CHECK(prof.profile.back().y == 0.0);
  CHECK(min_y(prof.profile) == 0.0);

  // Waist radius and bulb radius within a percent of the request.
  double waist = std::numeric_limits<double>::infinity();
  for (const Vec2& p : prof.profile)
    if (std::abs(p.x) < 0.5) waist = std::min(waist, p.y);
  CHECK(waist == doctest::Approx(0.2).epsilon(1e-2));
  CHECK(max_y(prof.profile) == doctest::Approx(1.0).epsilon(1e-2));

  // Mean convexity is the standing requirement on every seed surface.
  QuantityField q = axisym_quantities(prof);
  CHECK(q.min_H() > 0.0);
  // The tube sets the curvature scale: H ~ 1/0.2.
  CHECK(q.max_H() < 3.0 / 0.2);

  // Axial extent covers two bulbs plus the tube.
  double extent = prof.profile.back().x - prof.profile.front().x;
  CHECK(extent > 2.0 * (1.0 + 1.5));
  CHECK(extent < 2.0 * (2.0 + 1.5 + 1.0));
}

TEST_CASE("asymmetric dumbbell shrinks the second bulb only") {
  DumbbellSpec spec;
  spec.bulb2_radius = 0.55;
  AxisymProfile prof = dumbbell(spec, 1200);
  double left_max = 0.0, right_max = 0.0;
  for (const Vec2& p : prof.profile)
    (p.x < 0.0 ? left_max : right_max) = std::max(
        p.x < 0.0 ? left_max : right_max, p.y);
  CHECK(left_max == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(right_max == doctest::Approx(0.55).epsilon(1e-2));
  CHECK(axisym_quantities(prof).min_H() > 0.0);
}

TEST_CASE("seeded dip lowers the waist at the requested station") {
  DumbbellSpec spec;
  spec.dip_depth = 0.03;
  spec.dip_center = 0.4;
  spec.dip_halfwidth = 0.25;
  AxisymProfile prof = dumbbell(spec, 1600);
  double at_dip = std::numeric_limits<double>::infinity();
  double at_mirror = std::numeric_limits<double>::infinity();
  for (const Vec2& p : prof.profile) {
    if (std::abs(p.x - 0.4) < 0.05) at_dip = std::min(at_dip, p.y);
    if (std::abs(p.x + 0.4) < 0.05) at_mirror = std::min(at_mirror, p.y);
  }
  CHECK(at_dip == doctest::Approx(0.17).epsilon(2e-2));
  CHECK(at_mirror == doctest::Approx(0.2).epsilon(1e-2));
  CHECK(axisym_quantities(prof).min_H() > 0.0);
}

TEST_CASE("terraced dumbbell realizes all four radius levels, mean convex") {
  DumbbellSpec spec;
  spec.bulb_radius = 1.0;
  spec.neck_radius = 0.2;
  spec.neck_halflength = 0.3;
  spec.smoothing = 0.35;
  spec.terrace_radius = 0.051;
  spec.terrace_length = 1.8;
  spec.floor_radius = 0.05;
  spec.floor_halfwidth = 0.2;
  spec.ramp_length = 0.06;
  spec.terrace_ramp_length = 0.35;

  AxisymProfile prof = dumbbell(spec, 1600);
  QuantityField q = axisym_quantities(prof);
  CHECK(q.min_H() > 0.0);

  // The narrowest point is the floor, and the terrace plateau is present as
  // a long stretch at its own level.
  CHECK(min_y(prof.profile) == doctest::Approx(0.05).epsilon(1e-6));
  double terrace_span_lo = 1e300, terrace_span_hi = -1e300;
  for (const Vec2& p : prof.profile)
    if (std::abs(p.y - 0.051) < 1e-6) {
      terrace_span_lo = std::min(terrace_span_lo, p.x);
      terrace_span_hi = std::max(terrace_span_hi, p.x);
    }
  CHECK(terrace_span_hi - terrace_span_lo > 1.0);
  // Floor curvature scale: H = (n-1)/r at a straight cylinder stretch.
  double floor_H = 0.0;
  for (std::size_t i = 0; i < prof.size(); ++i)
    if (std::abs(prof.profile[i].y - 0.05) < 1e-9)
      floor_H = std::max(floor_H, q.H[i]);
  CHECK(floor_H == doctest::Approx(20.0).epsilon(5e-2));

  // One-sided variant: same chain on the left, small bulb closing the floor.
  spec.terrace_one_sided = true;
  spec.bulb2_radius = 0.10;
  AxisymProfile one = dumbbell(spec, 1600);
  CHECK(axisym_quantities(one).min_H() > 0.0);
  CHECK(min_y(one.profile) == doctest::Approx(0.05).epsilon(1e-6));
  double right_max = 0.0;
  for (const Vec2& p : one.profile)
    if (p.x > one.profile.back().x - 0.5) right_max = std::max(right_max, p.y);
  CHECK(right_max == doctest::Approx(0.10).epsilon(5e-2));
}

TEST_CASE("dumbbell specs with impossible orderings are rejected") {
  DumbbellSpec base;

  DumbbellSpec neck_too_fat = base;
  neck_too_fat.neck_radius = 1.1;
  CHECK_THROWS_AS(dumbbell(neck_too_fat, 800), InvalidSpec);

  DumbbellSpec negative = base;
  negative.neck_halflength = -0.1;
  CHECK_THROWS_AS(dumbbell(negative, 800), InvalidSpec);

  DumbbellSpec dip_too_deep = base;
  dip_too_deep.dip_depth = 0.25;
  CHECK_THROWS_AS(dumbbell(dip_too_deep, 800), InvalidSpec);

  DumbbellSpec terr = base;
  terr.terrace_radius = 0.051;
  terr.terrace_length = 1.8;
  terr.floor_radius = 0.05;
  terr.floor_halfwidth = 0.2;
  terr.ramp_length = 0.06;
  terr.terrace_ramp_length = 0.35;

  DumbbellSpec floor_above_terrace = terr;
  floor_above_terrace.floor_radius = 0.06;
  CHECK_THROWS_AS(dumbbell(floor_above_terrace, 800), InvalidSpec);

  DumbbellSpec terrace_above_neck = terr;
  terrace_above_neck.terrace_radius = 0.25;
  terrace_above_neck.floor_radius = 0.24;
  CHECK_THROWS_AS(dumbbell(terrace_above_neck, 800), InvalidSpec);

  DumbbellSpec no_ramp = terr;
  no_ramp.ramp_length = 0.0;
  CHECK_THROWS_AS(dumbbell(no_ramp, 800), InvalidSpec);

  DumbbellSpec dip_and_terrace = terr;
  dip_and_terrace.dip_depth = 0.02;
  CHECK_THROWS_AS(dumbbell(dip_and_terrace, 800), InvalidSpec);

  DumbbellSpec one_sided_no_bulb = terr;
  one_sided_no_bulb.terrace_one_sided = true;
  CHECK_THROWS_AS(dumbbell(one_sided_no_bulb, 800), InvalidSpec);

  DumbbellSpec bulb2_below_attach = terr;
  bulb2_below_attach.terrace_one_sided = true;
  bulb2_below_attach.bulb2_radius = 0.04;  // under the floor level it joins
  CHECK_THROWS_AS(dumbbell(bulb2_below_attach, 800), InvalidSpec);
}

TEST_CASE("soliton residual vanishes on shrinkers and rejects t >= 0") {
  // Circle reaching the origin at time 0: R(t) = sqrt(-2t), so at t = -0.5
  // the radius is 1 and H = |x|/(2|t|) pointwise.
  SphereSolution circle{1.0, 1};
  Geometry g = sphere_at(circle, 0.0, 256);
  // Vertices sit exactly on the circle, so the discrete stencils are exact
  // and the residual is pure rounding noise.
  for (double r : soliton_residual(g, -0.5)) CHECK(r < 1e-9);

  // Sphere: R = 1 at t = -R^2/(2n) = -0.25.
  SphereSolution sphere{1.0, 2};
  for (double r : soliton_residual(sphere_at(sphere, 0.0, 256), -0.25))
    CHECK(r < 1e-9);

  // A circle at the wrong scale for the claimed time is far from shrinking.
  std::vector<double> off = soliton_residual(g, -0.125);
  double worst = 0.0;
  for (double r : off) worst = std::max(worst, r);
  CHECK(worst > 0.5);

  CHECK_THROWS_AS(soliton_residual(g, 0.0), NonNegativeTime);
  CHECK_THROWS_AS(soliton_residual(g, 0.3), NonNegativeTime);
}
