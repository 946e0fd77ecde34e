#include "mcflab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mcflab/errors.hpp"
#include "mcflab/parallel.hpp"

namespace mcflab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double kernel_from_dist2(double d2, double tau, int n) {
  // tau = t0 - t > 0.
  return std::pow(4.0 * M_PI * tau, -0.5 * n) * std::exp(-d2 / (4.0 * tau));
}

double cutoff_from_dist2(double d2, double tau, int n, double rho) {
  if (!std::isfinite(rho)) return 1.0;
  // t - t0 = -tau, so the heat-ball argument is d2 - 2 n tau.
  double arg = 1.0 - (d2 - 2.0 * n * tau) / (rho * rho);
  if (arg <= 0.0) return 0.0;
  return arg * arg * arg;
}

}  // namespace

std::string tangent_label_name(TangentLabel label) {
  switch (label) {
    case TangentLabel::plane: return "plane";
    case TangentLabel::sphere: return "sphere";
    case TangentLabel::cylinder_1: return "cylinder-1";
    case TangentLabel::unclassified: return "unclassified";
  }
  return "unclassified";
}

double heat_kernel(const Vec2& x, double t, const SpacetimePoint& center,
                   int n) {
  double tau = center.t0 - t;
  if (!(tau > 0.0))
    throw NonBackwardTime("kernel requires t < t0");
  return kernel_from_dist2((x - center.x0).norm2(), tau, n);
}

double cutoff(const Vec2& x, double t, const SpacetimePoint& center, int n,
              double rho) {
  if (!std::isfinite(rho)) return 1.0;
  double d2 = (x - center.x0).norm2();
  double arg = 1.0 - (d2 + 2.0 * n * (t - center.t0)) / (rho * rho);
  if (arg <= 0.0) return 0.0;
  return arg * arg * arg;
}

namespace {

// Orbit average of kernel*cutoff (and of the shrinker defect integrand) for a
// profile vertex whose orbit is viewed from an off-axis center. The chordal
// distance depends on the azimuth only through c = cos(theta); the average
// over S^(n-1) weights c by sin^(n-2)(theta). Composite Simpson in theta,
// self-normalized.
struct OrbitAverages {
  double kphi = 0.0;         // <kernel * cutoff>
  double kphi_defect = 0.0;  // <kernel * cutoff * |H - <x-x0,nu>/(2 tau)|^2>
};

OrbitAverages orbit_averages(const Vec2& p, const Vec2& nu, double H,
                             const Vec2& center, double tau, int n,
                             double rho) {
  constexpr int kPanels = 128;  // even
  double axial = p.x - center.x;
  double base = axial * axial + p.y * p.y + center.y * center.y;
  double cross_term = 2.0 * p.y * center.y;
  OrbitAverages out;
  double norm = 0.0;
  for (int k = 0; k <= kPanels; ++k) {
    double theta = M_PI * k / kPanels;
    double c = std::cos(theta);
    double simpson = (k == 0 || k == kPanels) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    double sphere_w = (n == 2) ? 1.0 : std::pow(std::sin(theta), n - 2);
    double w = simpson * sphere_w;
    double d2 = base - cross_term * c;
    double kphi = kernel_from_dist2(d2, tau, n) *
                  cutoff_from_dist2(d2, tau, n, rho);
    double inner = nu.x * axial + nu.y * (p.y - center.y * c);
    double v = H - inner / (2.0 * tau);
    out.kphi += w * kphi;
    out.kphi_defect += w * kphi * v * v;
    norm += w;
  }
  out.kphi /= norm;
  out.kphi_defect /= norm;
  return out;
}

DensitySample sample_at_snapshot(const FlowState& snap,
                                 const DensityProbe& probe, double r_req) {
  double tau = probe.center.t0 - snap.time;
  if (!(tau > 0.0))
    throw UncoveredTime("density slice at or after the probe time");
  const Geometry& g = snap.geometry;
  QuantityField q = quantities(g);
  const auto& pts = points_of(g);
  int n = hypersurface_dim(g);
  double theta = 0.0, defect = 0.0;

  bool axisym = std::holds_alternative<AxisymProfile>(g);
  bool off_axis = axisym && std::abs(probe.center.x0.y) > 1e-14;
  if (!off_axis) {
    // Planar curves, and axisymmetric probes centered on the axis, where the
    // ambient squared distance equals the profile-plane squared distance.
    Vec2 c = axisym ? Vec2{probe.center.x0.x, 0.0} : probe.center.x0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      double d2 = (pts[i] - c).norm2();
      double kphi = kernel_from_dist2(d2, tau, n) *
                    cutoff_from_dist2(d2, tau, n, probe.rho);
      double v = q.H[i] - dot(pts[i] - c, q.normal[i]) / (2.0 * tau);
      theta += q.weight[i] * kphi;
      defect += q.weight[i] * kphi * v * v;
    }
  } else {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      OrbitAverages avg = orbit_averages(pts[i], q.normal[i], q.H[i],
                                         probe.center.x0, tau, n, probe.rho);
      theta += q.weight[i] * avg.kphi;
      defect += q.weight[i] * avg.kphi_defect;
    }
  }
  DensitySample s;
  s.r_requested = r_req;
  s.r_effective = std::sqrt(tau);
  s.theta = theta;
  s.defect = defect;
  return s;
}

}  // namespace

std::vector<DensitySample> gaussian_density(const FlowHistory& history,
                                            const DensityProbe& probe) {
  if (probe.r_grid.empty()) throw InvalidSpec("density probe needs scales");
  std::vector<DensitySample> out;
  out.reserve(probe.r_grid.size());
  for (double r : probe.r_grid) {
    if (!(r > 0.0)) throw InvalidSpec("density scales must be positive");
    double t_slice = probe.center.t0 - r * r;
    std::size_t idx = history.nearest_snapshot(t_slice);
    out.push_back(sample_at_snapshot(history.snapshots[idx], probe, r));
  }
  return out;
}

MonotonicityReport monotonicity_report(const FlowHistory& history,
                                       const DensityProbe& probe) {
  if (probe.r_grid.size() < 4)
    throw InvalidSpec("monotonicity check needs at least 4 scales");
  MonotonicityReport rep;
  rep.series = gaussian_density(history, probe);
  std::sort(rep.series.begin(), rep.series.end(),
            [](const DensitySample& a, const DensitySample& b) {
              return a.r_effective < b.r_effective;
            });
  rep.max_violation = -kInf;
  for (std::size_t k = 0; k + 1 < rep.series.size(); ++k)
    rep.max_violation = std::max(
        rep.max_violation, rep.series[k].theta - rep.series[k + 1].theta);
  return rep;
}

AndrewsReport andrews_quantities(const Geometry& g) {
  QuantityField q = quantities(g);
  if (!(q.min_H() > 0.0))
    throw NotMeanConvex("chord quantities need min H > 0");
  const auto& pts = points_of(g);
  std::size_t N = pts.size();
  bool axisym = std::holds_alternative<AxisymProfile>(g);

  AndrewsReport rep;
  rep.Z_star.assign(N, -kInf);
  rep.Z_lower.assign(N, kInf);
  rep.H = q.H;

  parallel_for(N, [&](std::size_t i) {
    const Vec2& p = pts[i];
    Vec2 nu_in = q.normal[i] * -1.0;
    double zmax = -kInf, zmin = kInf;
    if (!axisym) {
      for (std::size_t j = 0; j < N; ++j) {
        if (j == i) continue;
        Vec2 d = pts[j] - p;
        double d2 = d.norm2();
        if (d2 < 1e-24) continue;
        double z = 2.0 * dot(d, nu_in) / d2;
        zmax = std::max(zmax, z);
        zmin = std::min(zmin, z);
      }
    } else {
      // The chord quantity against the orbit of vertex j depends on the
      // azimuth c = cos(theta) as a Moebius function, so its extremes over
      // the orbit sit exactly at theta = 0 and theta = pi.
      for (std::size_t j = 0; j < N; ++j) {
        double dx = pts[j].x - p.x;
        for (int sign = +1; sign >= -1; sign -= 2) {
          if (j == i && sign == +1) continue;  // the point itself
          double dr = sign * pts[j].y - p.y;
          double d2 = dx * dx + p.y * p.y + pts[j].y * pts[j].y -
                      2.0 * p.y * pts[j].y * sign;
          if (d2 < 1e-24) continue;
          double num = nu_in.x * dx + nu_in.y * dr;
          double z = 2.0 * num / d2;
          zmax = std::max(zmax, z);
          zmin = std::min(zmin, z);
        }
      }
    }
    rep.Z_star[i] = zmax;
    rep.Z_lower[i] = zmin;
  });

  rep.alpha_interior = kInf;
  rep.alpha_exterior = kInf;
  for (std::size_t i = 0; i < N; ++i) {
    if (rep.Z_star[i] > 0.0)
      rep.alpha_interior = std::min(rep.alpha_interior, q.H[i] / rep.Z_star[i]);
    if (rep.Z_lower[i] < 0.0)
      rep.alpha_exterior =
          std::min(rep.alpha_exterior, q.H[i] / (-rep.Z_lower[i]));
  }
  rep.alpha = std::min(rep.alpha_interior, rep.alpha_exterior);
  return rep;
}

ConvexityRatio convexity_ratio(const Geometry& g) {
  QuantityField q = quantities(g);
  if (!(q.min_H() > 0.0))
    throw NotMeanConvex("convexity ratio needs min H > 0");
  ConvexityRatio out;
  out.min_ratio = kInf;
  for (std::size_t i = 0; i < q.H.size(); ++i) {
    double ratio = q.lambda1(i) / q.H[i];
    if (ratio < out.min_ratio) {
      out.min_ratio = ratio;
      out.location = i;
    }
  }
  return out;
}

namespace {

// Parameters t in (0,1) where |a + t u - c|^2 = r^2 crosses, clipped to [0,1].
// Returns break points splitting [0,1] into intervals on which the edge stays
// on one side of the sphere around c.
void circle_crossings(const Vec2& a, const Vec2& u, const Vec2& c, double r,
                      std::vector<double>& breaks) {
  double A = u.norm2();
  if (A <= 0.0) return;
  Vec2 w = a - c;
  double B = dot(w, u);
  double C = w.norm2() - r * r;
  double disc = B * B - A * C;
  if (disc <= 0.0) return;
  double sq = std::sqrt(disc);
  for (double t : {(-B - sq) / A, (-B + sq) / A})
    if (t > 0.0 && t < 1.0) breaks.push_back(t);
}

// Fraction of the orbit S^(n-1) of profile point (x, r_orb) lying inside the
// ambient ball of radius r around the (possibly off-axis) center (cx, cr).
double orbit_fraction(double x, double r_orb, const Vec2& c, double r, int n) {
  double d2_axis = (x - c.x) * (x - c.x);
  if (r_orb <= 1e-300 || std::abs(c.y) <= 1e-14) {
    double d2 = d2_axis + r_orb * r_orb + c.y * c.y;
    return d2 <= r * r ? 1.0 : 0.0;
  }
  // Inside iff cos(theta) >= tau_c.
  double tau_c = (d2_axis + r_orb * r_orb + c.y * c.y - r * r) /
                 (2.0 * r_orb * c.y);
  if (tau_c <= -1.0) return 1.0;
  if (tau_c >= 1.0) return 0.0;
  if (n == 2) return std::acos(tau_c) / M_PI;
  if (n == 3) return 0.5 * (1.0 - tau_c);
  // General n: normalized incomplete sin^(n-2) integral.
  constexpr int kPanels = 256;
  double theta_star = std::acos(tau_c);
  double inside = 0.0, total = 0.0;
  for (int k = 0; k <= kPanels; ++k) {
    double th = M_PI * k / kPanels;
    double simpson = (k == 0 || k == kPanels) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    double w = simpson * std::pow(std::sin(th), n - 2);
    total += w;
    if (th <= theta_star) inside += w;
  }
  return inside / total;
}

const double kGx8[] = {-0.9602898564975363, -0.7966664774136267,
                       -0.5255324099163290, -0.1834346424956498,
                       0.1834346424956498,  0.5255324099163290,
                       0.7966664774136267,  0.9602898564975363};
const double kGw8[] = {0.1012285362903763, 0.2223810344533745,
                       0.3137066458778873, 0.3626837833783620,
                       0.3626837833783620, 0.3137066458778873,
                       0.2223810344533745, 0.1012285362903763};

}  // namespace

double area_ratio(const Geometry& g, const Vec2& x, double r) {
  if (!(r > 0.0)) throw InvalidSpec("area ratio needs a positive radius");
  const auto& pts = points_of(g);
  bool closed = is_closed(g);
  std::size_t N = pts.size();
  std::size_t edges = closed ? N : N - 1;
  int n = hypersurface_dim(g);
  double measure = 0.0;

  if (std::holds_alternative<PolyCurve>(g)) {
    // Exact clip of each edge against the disk.
    for (std::size_t e = 0; e < edges; ++e) {
      const Vec2& a = pts[e];
      Vec2 u = pts[(e + 1) % N] - a;
      std::vector<double> br = {0.0, 1.0};
      circle_crossings(a, u, x, r, br);
      std::sort(br.begin(), br.end());
      for (std::size_t k = 0; k + 1 < br.size(); ++k) {
        double tm = 0.5 * (br[k] + br[k + 1]);
        if ((a + u * tm - x).norm2() <= r * r)
          measure += (br[k + 1] - br[k]) * u.norm();
      }
    }
    return measure / (unit_ball_volume(1) * r);
  }

  // Axisymmetric: split each edge where the orbit fraction has kinks (the
  // planar circles around (cx, cr) and its mirror), then Gauss-8 in between.
  Vec2 mirror{x.x, -x.y};
  for (std::size_t e = 0; e < edges; ++e) {
    const Vec2& a = pts[e];
    Vec2 u = pts[(e + 1) % N] - a;
    double len = u.norm();
    if (len <= 0.0) continue;
    std::vector<double> br = {0.0, 1.0};
    circle_crossings(a, u, x, r, br);
    circle_crossings(a, u, mirror, r, br);
    std::sort(br.begin(), br.end());
    double sphere = unit_sphere_area(n - 1);
    for (std::size_t k = 0; k + 1 < br.size(); ++k) {
      double t0 = br[k], t1 = br[k + 1];
      if (t1 - t0 < 1e-15) continue;
      double seg = 0.0;
      for (int gq = 0; gq < 8; ++gq) {
        double t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * kGx8[gq];
        Vec2 p = a + u * t;
        double frac = orbit_fraction(p.x, p.y, x, r, n);
        seg += 0.5 * kGw8[gq] * frac * std::pow(std::max(p.y, 0.0), n - 1);
      }
      measure += seg * (t1 - t0) * len * sphere;
    }
  }
  return measure / (unit_ball_volume(n) * std::pow(r, n));
}

std::vector<ReferenceDensity> reference_densities(int n) {
  if (n < 1) throw InvalidSpec("reference densities need n >= 1");
  auto sphere_density = [](int m) {
    return unit_sphere_area(m) * std::pow(m / (2.0 * M_PI), 0.5 * m) *
           std::exp(-0.5 * m);
  };
  std::vector<ReferenceDensity> refs;
  refs.push_back({TangentLabel::plane, 1.0});
  refs.push_back({TangentLabel::sphere, sphere_density(n)});
  if (n >= 2)
    refs.push_back({TangentLabel::cylinder_1, sphere_density(n - 1)});
  return refs;
}

TangentClass classify_tangent_flow(double theta, int n) {
  if (!(theta > 0.0))
    throw NonPositiveDensity("density must be positive to classify");
  TangentClass out;
  out.density_value = theta;
  double best_rel = kInf;
  for (const auto& ref : reference_densities(n)) {
    double rel = std::abs(theta - ref.theta) / ref.theta;
    if (rel < best_rel) {
      best_rel = rel;
      out.label = ref.label;
    }
  }
  if (best_rel <= 0.05) {
    out.confidence = 1.0 - best_rel;
  } else {
    out.label = TangentLabel::unclassified;
    out.confidence = 0.0;
  }
  return out;
}

}  // namespace mcflab
