#pragma once

#include <vector>

#include "mcflab/geometry.hpp"

namespace mcflab {

// Closed-form model flows used as oracles throughout the test suite.

struct SphereSolution {
  double R0 = 1.0;
  int n = 2;

  double extinction_time() const { return R0 * R0 / (2.0 * n); }
  double radius(double t) const;  // sqrt(R0^2 - 2 n t); throws PastExtinction
};

struct CylinderSolution {
  double R0 = 1.0;
  int n = 2;
  int j = 1;  // number of flat factors

  double extinction_time() const { return R0 * R0 / (2.0 * (n - j)); }
  double radius(double t) const;
};

struct DumbbellSpec {
  double bulb_radius = 1.0;
  double neck_radius = 0.2;
  double neck_halflength = 1.5;
  double smoothing = 0.35;
  // Optional asymmetry: radius of the second (right) bulb; 0 = equal bulbs.
  double bulb2_radius = 0.0;
  // Optional seeded waist: a shallow dimple that selects where the neck
  // pinches first. depth 0 disables it.
  double dip_depth = 0.0;
  double dip_center = 0.0;
  double dip_halfwidth = 0.25;
  // Cosine of the tube-to-bulb junction angle per side; 0 = automatic
  // (chosen to keep the shoulder noncollapsed). Larger values make the
  // shoulder gentler, raising its mean curvature floor.
  double shoulder_cos = 0.0;
  double shoulder2_cos = 0.0;
  // Optional terraced waist replacing the plain tube between the shoulders:
  // from the tube the radius steps down through a long flat terrace to a
  // narrow central floor, all joined by C^2 quintic ramps so the levels
  // pinch in a controlled order. terrace_radius 0 disables it. One-sided
  // terraces keep the chain on the left only and close the second bulb
  // directly onto the floor level.
  double terrace_radius = 0.0;
  double terrace_length = 0.0;
  double floor_radius = 0.0;
  double floor_halfwidth = 0.0;
  double ramp_length = 0.0;          // terrace <-> floor ramp
  double terrace_ramp_length = 0.0;  // tube <-> terrace ramp
  bool terrace_one_sided = false;
};

// Round sphere slice: a PolyCurve circle for n = 1, otherwise a semicircular
// axis_to_axis profile.
Geometry sphere_at(const SphereSolution& sol, double t, std::size_t N);

// Open cylinder segment (diagnostics only; the flow engine requires closed
// geometry). Emitted as an off-axis open segment of the given axial length
// centered at x = 0.
AxisymProfile cylinder_at(const CylinderSolution& sol, double t, double length,
                          std::size_t N);

// Open translating graph u(p) = t - log cos p over the supplied grid.
PolyCurve grim_reaper(double t, const std::vector<double>& p_grid);

// Two spherical bulbs joined by a tube, blended by a C^2 curvature program
// along arclength. Always a valid axis_to_axis profile for valid specs.
AxisymProfile dumbbell(const DumbbellSpec& spec, std::size_t N,
                       int ambient_n = 2);

// Per-vertex |H_vec - x_perp/(2t)| for a surface centered so that the
// self-similar center is the spacetime origin. Zero exactly on shrinkers.
std::vector<double> soliton_residual(const Geometry& g, double t);

}  // namespace mcflab
