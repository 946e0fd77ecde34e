#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mcflab/flow_engine.hpp"
#include "mcflab/geometry.hpp"

namespace mcflab {

struct DensityProbe {
  SpacetimePoint center;
  double rho = std::numeric_limits<double>::infinity();
  std::vector<double> r_grid;
};

// One density sample. The slice is taken at the nearest recorded snapshot;
// r_effective = sqrt(t0 - t_snapshot) is the scale actually realized and is
// the honest abscissa for monotonicity comparisons.
struct DensitySample {
  double r_requested = 0.0;
  double r_effective = 0.0;
  double theta = 0.0;
  double defect = 0.0;
};

struct MonotonicityReport {
  std::vector<DensitySample> series;  // sorted by increasing r
  double max_violation = 0.0;  // max over consecutive scales of later - earlier
};

struct AndrewsReport {
  std::vector<double> Z_star;   // per-vertex sup of the chord quantity
  std::vector<double> Z_lower;  // per-vertex inf
  std::vector<double> H;
  double alpha_interior = 0.0;
  double alpha_exterior = 0.0;
  double alpha = 0.0;
};

struct ConvexityRatio {
  double min_ratio = 0.0;  // min over vertices of lambda_1 / H
  std::size_t location = 0;
};

enum class TangentLabel { plane, sphere, cylinder_1, unclassified };

std::string tangent_label_name(TangentLabel label);

struct TangentClass {
  TangentLabel label = TangentLabel::unclassified;
  double density_value = 0.0;
  double confidence = 0.0;  // 1 - relative distance to the matched reference
};

struct ReferenceDensity {
  TangentLabel label;
  double theta;
};

// Backwards heat kernel (4 pi (t0-t))^(-n/2) exp(-|x-x0|^2 / (4(t0-t))).
// NonBackwardTime if t >= t0.
double heat_kernel(const Vec2& x, double t, const SpacetimePoint& center,
                   int n);

// Localization cutoff (1 - (|x-x0|^2 + 2n(t-t0)) / rho^2)_+^3.
double cutoff(const Vec2& x, double t, const SpacetimePoint& center, int n,
              double rho);

// Density ratio per scale: quadrature of kernel * cutoff over the slice at
// t0 - r^2 (nearest recorded snapshot). UncoveredTime if a slice falls
// outside the history.
std::vector<DensitySample> gaussian_density(const FlowHistory& history,
                                            const DensityProbe& probe);

// Density series over >= 4 scales plus the worst monotonicity violation and
// the per-slice shrinker defect.
MonotonicityReport monotonicity_report(const FlowHistory& history,
                                       const DensityProbe& probe);

// Pointwise chord extremes and the derived noncollapsing constants.
// NotMeanConvex if min H <= 0.
AndrewsReport andrews_quantities(const Geometry& g);

// min over vertices of lambda_1/H. NotMeanConvex if min H <= 0.
ConvexityRatio convexity_ratio(const Geometry& g);

// (measure of the hypersurface inside B(x, r)) / (omega_n r^n).
double area_ratio(const Geometry& g, const Vec2& x, double r);

// Reference densities for the model shrinkers in dimension n, computed at
// runtime from the exact solutions (plane, sphere, round cylinder with one
// flat factor for n >= 2).
std::vector<ReferenceDensity> reference_densities(int n);

// Nearest reference within 5% relative, else unclassified. NonPositiveDensity
// if theta <= 0.
TangentClass classify_tangent_flow(double theta, int n);

}  // namespace mcflab
