#include "mcflab/exact_solutions.hpp"

#include <algorithm>
#include <cmath>

#include "mcflab/errors.hpp"

namespace mcflab {

double SphereSolution::radius(double t) const {
  if (t >= extinction_time())
    throw PastExtinction("t = " + std::to_string(t) + " >= T = " +
                         std::to_string(extinction_time()));
  return std::sqrt(R0 * R0 - 2.0 * n * t);
}

double CylinderSolution::radius(double t) const {
  if (t >= extinction_time())
    throw PastExtinction("t = " + std::to_string(t) + " >= T = " +
                         std::to_string(extinction_time()));
  return std::sqrt(R0 * R0 - 2.0 * (n - j) * t);
}

Geometry sphere_at(const SphereSolution& sol, double t, std::size_t N) {
  double r = sol.radius(t);
  if (sol.n == 1) {
    std::vector<Vec2> pts(N);
    for (std::size_t k = 0; k < N; ++k) {
      double th = 2.0 * M_PI * k / N;
      pts[k] = {r * std::cos(th), r * std::sin(th)};
    }
    return PolyCurve::make(std::move(pts), /*closed=*/true);
  }
  std::vector<Vec2> pts(N);
  for (std::size_t k = 0; k < N; ++k) {
    double phi = M_PI * k / (N - 1);
    pts[k] = {-r * std::cos(phi), r * std::sin(phi)};
  }
  pts.front().y = 0.0;
  pts.back().y = 0.0;
  return AxisymProfile::make(std::move(pts), sol.n, Closure::axis_to_axis);
}

AxisymProfile cylinder_at(const CylinderSolution& sol, double t, double length,
                          std::size_t N) {
  if (sol.j != 1)
    throw UnsupportedFactorization("only one flat factor is representable");
  double r = sol.radius(t);
  std::vector<Vec2> pts(N);
  for (std::size_t k = 0; k < N; ++k) {
    double x = -0.5 * length + length * k / (N - 1);
    pts[k] = {x, r};
  }
  return AxisymProfile::make(std::move(pts), sol.n, Closure::segment);
}

PolyCurve grim_reaper(double t, const std::vector<double>& p_grid) {
  std::vector<Vec2> pts;
  pts.reserve(p_grid.size());
  for (double p : p_grid) {
    if (std::abs(p) >= M_PI / 2.0)
      throw DomainViolation("grim reaper grid point |p| >= pi/2");
    pts.push_back({p, t - std::log(std::cos(p))});
  }
  return PolyCurve::make(std::move(pts), /*closed=*/false);
}

// ---------------------------------------------------------------------------
// Dumbbell: a meridian built from a prescribed curvature program kappa(s).
// Each half runs from the waist (x = 0, r = neck_radius, horizontal tangent)
// to its pole: straight tube -> C^2 ease -> circular shoulder arc (meridian
// bending up) -> C^2 ease -> spherical bulb arc down to the axis. The
// tangent angle psi(s) integrates the program in closed form (the eases are
// quintic, so psi is polynomial there); positions come from Gauss panels on
// (cos psi, sin psi). The shoulder arc length is the one free parameter and
// is solved by bisection so the bulb arc lands exactly on the axis.
// ---------------------------------------------------------------------------

namespace {

// Quintic C^2 ramp q: [0,1] -> [0,1] and its integral Q (Q(1) = 1/2).
double ramp(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }
double ramp_integral(double u) {
  double u4 = u * u * u * u;
  return u4 * (2.5 + u * (-3.0 + u));
}

// 5-point Gauss-Legendre on [0,1].
constexpr double kGx[5] = {0.04691007703066800, 0.23076534494715845, 0.5,
                           0.76923465505284155, 0.95308992296933200};
constexpr double kGw[5] = {0.11846344252809454, 0.23931433524968324,
                           0.28444444444444444, 0.23931433524968324,
                           0.11846344252809454};

struct ProgramPhase {
  double length;
  double kappa0;
  double kappa1;
  bool ease;  // quintic ramp kappa0 -> kappa1; otherwise constant kappa0

  double psi_delta(double u) const {  // psi(u) - psi(0), u in [0,1]
    if (ease)
      return length * (kappa0 * u + (kappa1 - kappa0) * ramp_integral(u));
    return length * kappa0 * u;
  }
  double total_delta() const { return psi_delta(1.0); }
};

struct SideProgram {
  std::vector<ProgramPhase> phases;

  double total_length() const {
    double L = 0.0;
    for (const auto& p : phases) L += p.length;
    return L;
  }

  // Integrate (x, r) from (0, r_start) with psi(0) = 0, appending sampled
  // points (phase boundaries always included). h_fine bounds the output
  // spacing so later resampling never straddles coarse chords.
  std::vector<Vec2> integrate(double r_start, double h_fine) const {
    std::vector<Vec2> pts;
    pts.push_back({0.0, r_start});
    double x = 0.0, r = r_start, psi_base = 0.0;
    for (const auto& ph : phases) {
      double max_turn = std::max(std::abs(ph.kappa0), std::abs(ph.kappa1)) *
                        ph.length;
      int panels = std::max({24, static_cast<int>(std::ceil(max_turn / 0.02)),
                             static_cast<int>(std::ceil(ph.length / h_fine))});
      for (int p = 0; p < panels; ++p) {
        double u0 = static_cast<double>(p) / panels;
        double u1 = static_cast<double>(p + 1) / panels;
        double dx = 0.0, dr = 0.0;
        for (int g = 0; g < 5; ++g) {
          double u = u0 + (u1 - u0) * kGx[g];
          double psi = psi_base + ph.psi_delta(u);
          dx += kGw[g] * std::cos(psi);
          dr += kGw[g] * std::sin(psi);
        }
        double seg = ph.length * (u1 - u0);
        x += seg * dx;
        r += seg * dr;
        pts.push_back({x, r});
      }
      psi_base += ph.total_delta();
    }
    return pts;
  }
};

struct SidePlan {
  SideProgram program;
  double pole_x;  // axial extent of the half
};

// r gained across an ease phase starting at angle psi0 (Gauss panels; the
// integrand is smooth).
double ease_rise(double psi0, double length, double kappa0, double kappa1) {
  ProgramPhase ph{length, kappa0, kappa1, true};
  int panels = 16;
  double rise = 0.0;
  for (int p = 0; p < panels; ++p) {
    double u0 = static_cast<double>(p) / panels;
    double u1 = static_cast<double>(p + 1) / panels;
    double acc = 0.0;
    for (int g = 0; g < 5; ++g) {
      double u = u0 + (u1 - u0) * kGx[g];
      acc += kGw[g] * std::sin(psi0 + ph.psi_delta(u));
    }
    rise += length * (u1 - u0) * acc;
  }
  return rise;
}

// Build one half of the dumbbell: bulb radius b, waist radius rn, tube
// half-length hl, smoothing sm, junction cosine cj. The smoothing length
// halves automatically while the eases alone would overshoot the junction
// height (near-degenerate wide necks).
SidePlan plan_side(double b, double rn, double hl, double sm, double cj) {
  if (!(cj > 0.0 && cj < 1.0))
    throw InvalidSpec("junction cosine must lie in (0,1)");
  if (b * cj <= rn * (1.0 + 1e-9))
    throw InvalidSpec(
        "neck too wide for the bulb: junction height b*cos(theta) must "
        "exceed the neck radius");
  double R_a = (b * cj - rn) / (1.0 - cj);  // shoulder arc radius
  double ka = 1.0 / R_a;
  double kb = -1.0 / b;

  // Junction angle and height as functions of the shoulder arc length L.
  auto psi_junction = [&](double s, double L) {
    return ka * (s + L) + kb * s / 2.0;  // ease halves: s*ka/2 + s(ka+kb)/2
  };
  auto height_defect = [&](double s, double L) {
    double psi1 = ka * s / 2.0;         // after ease-in
    double psi2 = psi1 + ka * L;        // after the arc
    double r_j = rn + ease_rise(0.0, s, 0.0, ka) +
                 (std::cos(psi1) - std::cos(psi2)) / ka +
                 ease_rise(psi2, s, ka, kb);
    return r_j - b * std::cos(psi_junction(s, L));
  };

  double psi_cap = 1.45;  // keep the junction well below vertical
  for (int shrink = 0; shrink < 24; ++shrink, sm *= 0.5) {
    double L_hi = (psi_cap - kb * sm / 2.0) / ka - sm;
    if (L_hi <= 0.0 || height_defect(sm, 0.0) >= 0.0) continue;
    if (height_defect(sm, L_hi) <= 0.0)
      throw InvalidSpec("bulb cannot close onto the axis with this shoulder");
    double lo = 0.0, hi = L_hi;
    for (int it = 0; it < 100; ++it) {
      double mid = 0.5 * (lo + hi);
      (height_defect(sm, mid) < 0.0 ? lo : hi) = mid;
    }
    double L = 0.5 * (lo + hi);

    double psi_j = psi_junction(sm, L);
    SidePlan plan;
    plan.program.phases = {
        {hl, 0.0, 0.0, false},
        {sm, 0.0, ka, true},
        {L, ka, ka, false},
        {sm, ka, kb, true},
        {b * (psi_j + M_PI / 2.0), kb, kb, false},  // bulb arc to the pole
    };
    plan.pole_x = 0.0;  // filled by caller after integration
    return plan;
  }
  throw InvalidSpec("no feasible shoulder for this neck/bulb pair");
}

// Samples of the terraced waist graph r(x) on [0, total]: quintic steps from
// the tube level down to the terrace, down again to the central floor, and
// (unless half_only) back up symmetrically. Spacing bounded by h_fine, all
// segment joints sampled exactly.
std::vector<Vec2> terraced_chain(const DumbbellSpec& spec, double h_fine,
                                 bool half_only) {
  struct Seg {
    double len, r0, r1;
  };
  double rn = spec.neck_radius, rt = spec.terrace_radius,
         rf = spec.floor_radius;
  double w2 = spec.terrace_ramp_length, w1 = spec.ramp_length;
  // One-sided chains stop halfway across the floor; the second bulb's own
  // tube segment supplies the other half.
  std::vector<Seg> segs = {
      {w2, rn, rt},
      {spec.terrace_length, rt, rt},
      {w1, rt, rf},
      {(half_only ? 1.0 : 2.0) * spec.floor_halfwidth, rf, rf},
  };
  if (!half_only) {
    segs.push_back({w1, rf, rt});
    segs.push_back({spec.terrace_length, rt, rt});
    segs.push_back({w2, rt, rn});
  }
  std::vector<Vec2> out;
  out.push_back({0.0, rn});
  double x0 = 0.0;
  for (const auto& seg : segs) {
    int panels = std::max(2, static_cast<int>(std::ceil(seg.len / h_fine)));
    for (int k = 1; k <= panels; ++k) {
      double u = static_cast<double>(k) / panels;
      double r = seg.r0 == seg.r1 ? seg.r0
                                  : seg.r0 + (seg.r1 - seg.r0) * ramp(u);
      out.push_back({x0 + seg.len * u, r});
    }
    x0 += seg.len;
  }
  return out;
}

}  // namespace

AxisymProfile dumbbell(const DumbbellSpec& spec, std::size_t N, int ambient_n) {
  bool terraced = spec.terrace_radius > 0.0;
  if (!(spec.neck_radius > 0.0))
    throw InvalidSpec("neck radius must be positive");
  if (spec.neck_radius >= spec.bulb_radius)
    throw InvalidSpec("neck radius must be smaller than the bulb radius");
  if (!(spec.neck_halflength > 0.0) || !(spec.smoothing > 0.0))
    throw InvalidSpec("tube half-length and smoothing must be positive");
  if (terraced) {
    if (!(spec.floor_radius > 0.0 && spec.floor_radius < spec.terrace_radius &&
          spec.terrace_radius < spec.neck_radius))
      throw InvalidSpec(
          "terrace levels must satisfy 0 < floor < terrace < neck");
    if (!(spec.terrace_length > 0.0 && spec.floor_halfwidth > 0.0 &&
          spec.ramp_length > 0.0 && spec.terrace_ramp_length > 0.0))
      throw InvalidSpec("terrace lengths must be positive");
    if (spec.dip_depth > 0.0)
      throw InvalidSpec("seeded dip and terraced waist cannot be combined");
    if (spec.terrace_one_sided && !(spec.bulb2_radius > 0.0))
      throw InvalidSpec("one-sided terrace needs an explicit second bulb");
  }
  // The second bulb closes onto the tube, or onto the floor for one-sided
  // terraces; it must clear whichever radius it attaches at.
  double attach2 = (terraced && spec.terrace_one_sided) ? spec.floor_radius
                                                        : spec.neck_radius;
  if (spec.bulb2_radius > 0.0 && attach2 >= spec.bulb2_radius)
    throw InvalidSpec("second bulb must exceed the radius it attaches at");

  double rn = spec.neck_radius;
  double bl = spec.bulb_radius;
  double br = spec.bulb2_radius > 0.0 ? spec.bulb2_radius : spec.bulb_radius;
  auto auto_cos = [](double b, double r_at) {
    return (b + 0.65 * r_at) / (1.65 * b);
  };
  double cl = spec.shoulder_cos > 0.0 ? spec.shoulder_cos : auto_cos(bl, rn);
  double cr =
      spec.shoulder2_cos > 0.0 ? spec.shoulder2_cos : auto_cos(br, attach2);

  double hl_right =
      (terraced && spec.terrace_one_sided) ? spec.floor_halfwidth
                                           : spec.neck_halflength;
  SidePlan left = plan_side(bl, rn, spec.neck_halflength, spec.smoothing, cl);
  SidePlan right = plan_side(br, attach2, hl_right, spec.smoothing, cr);

  double chain_len = 0.0;
  if (terraced) {
    chain_len = spec.terrace_ramp_length + spec.terrace_length +
                spec.ramp_length + spec.floor_halfwidth;
    if (!spec.terrace_one_sided)
      chain_len += spec.floor_halfwidth + spec.ramp_length +
                   spec.terrace_length + spec.terrace_ramp_length;
  }
  double total_len = left.program.total_length() +
                     right.program.total_length() + chain_len;
  double h_fine = std::min(2e-3 * total_len, total_len / N / 3.0);
  std::vector<Vec2> rhs = right.program.integrate(attach2, h_fine);
  std::vector<Vec2> lhs = left.program.integrate(rn, h_fine);
  rhs.back().y = 0.0;  // bisection lands within roundoff; snap the poles
  lhs.back().y = 0.0;

  // Assemble left pole -> waist chain -> right pole; the left half mirrors
  // in x and the right half shifts past the chain (absent for plain tubes).
  std::vector<Vec2> pts;
  pts.reserve(lhs.size() + rhs.size() - 1);
  for (std::size_t i = lhs.size(); i-- > 0;) pts.push_back({-lhs[i].x, lhs[i].y});
  double shift = 0.0;
  if (terraced) {
    std::vector<Vec2> chain =
        terraced_chain(spec, h_fine, spec.terrace_one_sided);
    shift = chain.back().x;
    for (std::size_t i = 1; i < chain.size(); ++i) pts.push_back(chain[i]);
  }
  for (std::size_t i = 1; i < rhs.size(); ++i)
    pts.push_back({shift + rhs[i].x, rhs[i].y});

  // Seeded waist: shallow C^2 dimple in the tube.
  if (spec.dip_depth > 0.0) {
    double w = spec.dip_halfwidth;
    if (!(w > 0.0)) throw InvalidSpec("dip halfwidth must be positive");
    if (spec.dip_depth >= 0.5 * rn)
      throw InvalidSpec("dip depth must stay well below the neck radius");
    for (auto& p : pts) {
      double u = (p.x - spec.dip_center) / w;
      if (std::abs(u) < 1.0) {
        double one_m = 1.0 - u * u;
        p.y -= spec.dip_depth * one_m * one_m * one_m;
      }
    }
  }

  auto profile = AxisymProfile::make(std::move(pts), ambient_n,
                                     Closure::axis_to_axis);
  double spacing = polyline_length(profile.profile, false) / N;
  Geometry g = resample(Geometry{std::move(profile)}, spacing);
  return std::get<AxisymProfile>(std::move(g));
}

std::vector<double> soliton_residual(const Geometry& g, double t) {
  if (t >= 0.0) throw NonNegativeTime("soliton residual needs t < 0");
  QuantityField q = quantities(g);
  const auto& pts = points_of(g);
  std::vector<double> res(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    // |H_vec - x_perp/(2t)| where both vectors are multiples of nu.
    double x_dot_nu = dot(pts[i], q.normal[i]);
    res[i] = std::abs(q.H[i] + x_dot_nu / (2.0 * t));
  }
  return res;
}

}  // namespace mcflab
