#include "mcflab/surgery.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <limits>

#include "mcflab/diagnostics.hpp"
#include "mcflab/errors.hpp"
#include "mcflab/snapshot_io.hpp"

namespace mcflab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void SurgeryParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw InvalidSpec("noncollapsing floor must lie in (0, 1]");
  if (!(beta > 0.0 && beta <= 1.0))
    throw InvalidSpec("two-convexity floor must lie in (0, 1]");
  if (!(gamma > 0.0)) throw InvalidSpec("initial curvature ceiling must be positive");
  if (!(delta > 0.0 && delta <= 0.1))
    throw InvalidSpec("neck quality must lie in (0, 0.1]");
  if (!(H_th > 0.0 && H_th < H_neck && H_neck < H_trig))
    throw InvalidSpec("curvature scales must satisfy 0 < H_th < H_neck < H_trig");
  if (!(H_neck >= 10.0 * H_th && H_trig >= 10.0 * H_neck))
    throw InvalidSpec("curvature scales need ratios of at least 10");
  if (!(Gamma >= 10.0)) throw InvalidSpec("cap scale must be at least 10");
  if (!(mu >= 1.0)) throw InvalidSpec("neck-radius band must be at least 1");
}

std::string discard_topology_name(DiscardTopology t) {
  return t == DiscardTopology::ball ? "ball" : "solid_torus";
}

// ---------------------------------------------------------------------------
// Neck detection
// ---------------------------------------------------------------------------

namespace {

struct CylinderChecks {
  double worst = kInf;  // max normalized residual; certified iff <= delta
};

// Compare the profile around axial position x_c on one slice against the
// round shrinking cylinder of radius s * m. The window is grown contiguously
// from the nearest vertex so overhanging far-away branches never leak in.
CylinderChecks check_slice(const AxisymProfile& prof, double x_c, double s,
                           double m, double delta) {
  const auto& pts = prof.profile;
  std::size_t N = pts.size();
  CylinderChecks out;
  if (N < 3) return out;

  std::size_t j0 = 0;
  double best = kInf;
  for (std::size_t j = 0; j < N; ++j) {
    double d = std::abs(pts[j].x - x_c) + std::abs(pts[j].y - s * m);
    if (d < best) {
      best = d;
      j0 = j;
    }
  }
  double halfwidth = s / delta;
  std::size_t lo = j0, hi = j0;
  while (lo > 0 && std::abs(pts[lo - 1].x - x_c) <= halfwidth) --lo;
  while (hi + 1 < N && std::abs(pts[hi + 1].x - x_c) <= halfwidth) ++hi;
  if (hi - lo < 2) return out;

  double worst = 0.0;
  for (std::size_t j = std::max(lo, std::size_t(1));
       j + 1 <= hi && j + 1 < N; ++j) {
    double hm = pts[j].x - pts[j - 1].x;
    double hp = pts[j + 1].x - pts[j].x;
    if (std::abs(hm) < 1e-14 || std::abs(hp) < 1e-14) return out;
    double r = pts[j].y;
    double rp = (pts[j + 1].y - pts[j - 1].y) / (hm + hp);
    double rpp = 2.0 * ((pts[j + 1].y - pts[j].y) / hp -
                        (pts[j].y - pts[j - 1].y) / hm) /
                 (hm + hp);
    worst = std::max(worst, std::abs(r / (s * m) - 1.0));
    worst = std::max(worst, std::abs(rp));
    worst = std::max(worst, std::abs(s * rpp / m));
  }
  out.worst = worst;
  return out;
}

struct SliceRef {
  const AxisymProfile* prof;
  double dt_back;  // now.time - slice.time >= 0
};

std::vector<NeckRegion> detect_on_slices(
    const AxisymProfile& now, const SurgeryParams& params,
    const std::vector<SliceRef>& slices) {
  QuantityField q = axisym_quantities(now);
  int n = now.ambient_n;
  double s_lo = params.s_sharp(n) / std::sqrt(params.mu);
  double s_hi = params.s_sharp(n) * std::sqrt(params.mu);

  std::size_t N = now.profile.size();
  std::vector<double> quality(N, kInf);
  for (std::size_t i = 0; i < N; ++i) {
    double s = now.profile[i].y;
    if (s < s_lo || s > s_hi) continue;
    // Curvature gate on the present slice only: the center must sit at the
    // surgery curvature scale. Backward slices are judged by the cylinder
    // residuals alone (their H drifts with the shrinking model radius).
    if (std::abs(q.H[i] - params.H_neck) > 0.1 * params.H_neck) continue;
    double worst = 0.0;
    for (const auto& slice : slices) {
      // Shrinking-cylinder model in the candidate's own scale: a neck of
      // radius s at time t had radius s*m a time dt_back earlier.
      double m = std::sqrt(1.0 + 2.0 * (n - 1) * slice.dt_back / (s * s));
      CylinderChecks c =
          check_slice(*slice.prof, now.profile[i].x, s, m, params.delta);
      worst = std::max(worst, c.worst);
    }
    quality[i] = worst;
  }

  std::vector<NeckRegion> regions;
  std::size_t i = 0;
  while (i < N) {
    if (quality[i] > params.delta) {
      ++i;
      continue;
    }
    std::size_t lo = i;
    while (i + 1 < N && quality[i + 1] <= params.delta) ++i;
    std::size_t hi = i;
    std::size_t center = lo;
    for (std::size_t j = lo; j <= hi; ++j)
      if (quality[j] < quality[center]) center = j;
    NeckRegion reg;
    reg.lo = lo;
    reg.hi = hi;
    reg.center_x = now.profile[center].x;
    reg.radius = now.profile[center].y;
    reg.quality = quality[center];
    regions.push_back(reg);
    ++i;
  }
  return regions;
}

const AxisymProfile& as_profile(const Geometry& g) {
  if (!std::holds_alternative<AxisymProfile>(g))
    throw InvalidSpec("neck detection needs an axisymmetric profile");
  return std::get<AxisymProfile>(g);
}

std::size_t nearest_snapshot_any(const FlowHistory& history, double t) {
  if (history.snapshots.empty()) throw UncoveredTime("empty history");
  std::size_t best = 0;
  double gap = kInf;
  for (std::size_t i = 0; i < history.snapshots.size(); ++i) {
    double d = std::abs(history.snapshots[i].time - t);
    if (d < gap) {
      gap = d;
      best = i;
    }
  }
  return best;
}

}  // namespace

std::vector<NeckRegion> detect_necks(const FlowHistory& history, double t,
                                     const SurgeryParams& params) {
  params.validate();
  const FlowState& now = history.snapshots[nearest_snapshot_any(history, t)];
  const AxisymProfile& prof = as_profile(now.geometry);
  int component = now.component;
  double s_ref = params.s_sharp(prof.ambient_n);

  // Backward slices at rescaled times 0, -1/2, -1 (in units of s^2); each is
  // realized at its nearest recorded snapshot and compared against the
  // shrinking-cylinder radius at the effective rescaled time.
  std::vector<SliceRef> slices;
  for (double tau_hat : {0.0, -0.5, -1.0}) {
    double t_want = now.time + tau_hat * s_ref * s_ref;
    double gap = kInf;
    const FlowState* pick = nullptr;
    for (const auto& snap : history.snapshots) {
      if (snap.component != component) continue;
      double d = std::abs(snap.time - t_want);
      if (d < gap) {
        gap = d;
        pick = &snap;
      }
    }
    if (!pick || pick->time > now.time + 1e-300)
      throw InsufficientHistory("no usable backward slice");
    double tau_eff = (pick->time - now.time) / (s_ref * s_ref);
    if (tau_hat < -0.25 && tau_eff > -0.05 * (-tau_hat))
      throw InsufficientHistory("backward window not covered by snapshots");
    SliceRef ref;
    ref.prof = &as_profile(pick->geometry);
    ref.dt_back = now.time - pick->time;
    slices.push_back(ref);
  }
  return detect_on_slices(prof, params, slices);
}

std::vector<NeckRegion> detect_necks_final(const FlowState& state,
                                           const SurgeryParams& params) {
  params.validate();
  const AxisymProfile& prof = as_profile(state.geometry);
  std::vector<SliceRef> slices = {{&prof, 0.0}};
  return detect_on_slices(prof, params, slices);
}

// ---------------------------------------------------------------------------
// Standard cap
// ---------------------------------------------------------------------------

namespace {

// Quintic ramp used to ease curvature transitions (C^2 endpoints).
double ramp5(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }

struct CapShape {
  std::vector<Vec2> pts;  // fine polyline from the tip outward
  double x_end = 0.0;     // axial coordinate where r reaches 1
};

// Integrate the cap's curvature program: from the tip the tangent angle psi
// starts at pi/2, drops along a circular arc of radius rho_t down to psi_c,
// then eases to 0 with a quintic ramp. The free parameter psi_c is chosen so
// the profile lands exactly at r = 1.
CapShape integrate_cap(double psi_c, double rho_t, int substeps) {
  CapShape shape;
  double arc_len = rho_t * (M_PI / 2.0 - psi_c);
  double ease_len = 2.0 * rho_t * psi_c;
  double total = arc_len + ease_len;
  int steps = std::max(substeps, 64);
  double h = total / steps;
  double x = 0.0, r = 0.0;
  shape.pts.push_back({0.0, 0.0});
  auto kappa_at = [&](double s) {
    if (s <= arc_len) return -1.0 / rho_t;
    double u = (s - arc_len) / ease_len;
    return -(1.0 - ramp5(std::min(u, 1.0))) / rho_t;
  };
  double psi = M_PI / 2.0;
  for (int k = 0; k < steps; ++k) {
    double s0 = k * h;
    // RK4 on (x, r, psi) with psi' = kappa(s).
    double k1 = kappa_at(s0);
    double k2 = kappa_at(s0 + 0.5 * h);
    double k3 = kappa_at(s0 + h);
    double psi_mid = psi + 0.5 * h * k1;
    double psi_mid2 = psi + 0.5 * h * k2;
    double psi_end = psi + h * k2;
    x += h / 6.0 *
         (std::cos(psi) + 2.0 * std::cos(psi_mid) + 2.0 * std::cos(psi_mid2) +
          std::cos(psi_end));
    r += h / 6.0 *
         (std::sin(psi) + 2.0 * std::sin(psi_mid) + 2.0 * std::sin(psi_mid2) +
          std::sin(psi_end));
    psi += h / 6.0 * (k1 + 4.0 * k2 + k3);
    shape.pts.push_back({x, r});
  }
  shape.x_end = x;
  return shape;
}

double cap_final_r(double psi_c, double rho_t) {
  CapShape s = integrate_cap(psi_c, rho_t, 2048);
  return s.pts.back().y;
}

// Uniform-arclength resample of an open polyline onto exactly N points.
std::vector<Vec2> resample_open(const std::vector<Vec2>& pts, std::size_t N) {
  std::vector<double> cum(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i)
    cum[i] = cum[i - 1] + dist(pts[i - 1], pts[i]);
  double L = cum.back();
  std::vector<Vec2> out;
  out.reserve(N);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < N; ++k) {
    double target = L * k / (N - 1);
    while (seg + 2 < pts.size() && cum[seg + 1] < target) ++seg;
    double span = cum[seg + 1] - cum[seg];
    double w = span > 0.0 ? (target - cum[seg]) / span : 0.0;
    out.push_back(pts[seg] + (pts[seg + 1] - pts[seg]) * w);
  }
  out.front() = pts.front();
  out.back() = pts.back();
  return out;
}

}  // namespace

std::vector<Vec2> standard_cap_profile(double Gamma, std::size_t N) {
  if (!(Gamma >= 10.0)) throw InvalidSpec("cap scale must be at least 10");
  if (N < 16) throw TooCoarse("cap needs at least 16 points");
  // Tip radius: the landing radius ranges from rho_t (pure arc, psi_c -> 0)
  // up to about 1.17*rho_t at full ease, so rho_t = 0.92 brackets r = 1 with
  // margin on both sides.
  const double rho_t = 0.92;
  // Solve cap_final_r(psi_c) = 1 by bisection; the landing radius grows
  // monotonically with psi_c.
  double lo = 1e-3, hi = M_PI / 2.0 - 1e-3;
  if (cap_final_r(hi, rho_t) < 1.0)
    throw InvalidSpec("cap program cannot reach unit radius");
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (lo + hi);
    (cap_final_r(mid, rho_t) < 1.0 ? lo : hi) = mid;
  }
  CapShape shape = integrate_cap(0.5 * (lo + hi), rho_t, 4096);
  // Snap the landing exactly onto r = 1 and extend the flat tail to Gamma.
  for (auto& p : shape.pts) p.y = std::min(p.y, 1.0);
  shape.pts.back().y = 1.0;
  if (shape.x_end >= Gamma - 1.0)
    throw InvalidSpec("cap scale leaves no flat tail");
  shape.pts.push_back({Gamma, 1.0});
  return resample_open(shape.pts, N);
}

// ---------------------------------------------------------------------------
// Neck replacement
// ---------------------------------------------------------------------------

namespace {

// r of the unit cap at axial coordinate xi in [0, Gamma], linear interp on a
// cached fine sampling. Monotone nondecreasing from 0 to 1; x_unit marks the
// end of the curved section (r = 1 from there on).
struct CapEvaluator {
  std::vector<Vec2> pts;
  std::size_t idx_unit = 0;  // first cache index with r = 1
  double x_unit = 0.0;
  double arc_step = 0.0;  // mean arclength spacing of the cache

  explicit CapEvaluator(double Gamma)
      : pts(standard_cap_profile(Gamma, 2048)) {
    double arc = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
      arc += dist(pts[i - 1], pts[i]);
    arc_step = arc / (pts.size() - 1);
    idx_unit = pts.size() - 1;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (pts[i].y >= 1.0 - 1e-12) {
        idx_unit = i;
        break;
      }
    x_unit = pts[idx_unit].x;
  }

  double r_at(double xi) const {
    if (xi <= 0.0) return 0.0;
    if (xi >= pts.back().x) return 1.0;
    // pts.x is monotone for the standard program (psi in [0, pi/2]).
    std::size_t lo = 0, hi = pts.size() - 1;
    while (hi - lo > 1) {
      std::size_t mid = (lo + hi) / 2;
      (pts[mid].x <= xi ? lo : hi) = mid;
    }
    double span = pts[hi].x - pts[lo].x;
    double w = span > 0.0 ? (xi - pts[lo].x) / span : 0.0;
    return pts[lo].y + w * (pts[hi].y - pts[lo].y);
  }

  // Cache points over the curved section, subsampled to roughly `spacing`
  // in unit arclength and ordered from the tip outward. The tip itself is
  // excluded; the first flat point (r = 1 exactly) is always included.
  std::vector<Vec2> tip_samples(double spacing) const {
    std::size_t stride = std::max<std::size_t>(
        1, (std::size_t)std::llround(spacing / std::max(arc_step, 1e-12)));
    std::vector<Vec2> out;
    for (std::size_t i = stride; i < idx_unit; i += stride)
      out.push_back(pts[i]);
    out.push_back(pts[idx_unit]);
    return out;
  }
};

// One clamped Laplacian pass on r over [lo, hi]; never rises above r_pre.
void seam_smooth(std::vector<Vec2>& pts, std::size_t lo, std::size_t hi,
                 const std::vector<double>& r_pre) {
  if (hi <= lo + 1) return;
  std::vector<double> r(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) r[i] = pts[i].y;
  for (std::size_t i = std::max(lo, std::size_t(1));
       i <= hi && i + 1 < pts.size(); ++i) {
    double smoothed = 0.25 * r[i - 1] + 0.5 * r[i] + 0.25 * r[i + 1];
    pts[i].y = std::min(smoothed, r_pre[i]);
  }
}

}  // namespace

ReplaceOutcome replace_neck(const AxisymProfile& geometry,
                            const NeckRegion& neck,
                            const SurgeryParams& params) {
  params.validate();
  if (geometry.closure != Closure::axis_to_axis)
    throw InvalidSpec("neck replacement expects an axis-to-axis profile");
  double s = neck.radius;
  double x_c = neck.center_x;
  double G = params.Gamma;
  const auto& pts = geometry.profile;

  // The modification lives on |x - x_c| <= 2 Gamma s; the profile must be
  // neck-like across all of it.
  double span_lo = x_c - 2.0 * G * s, span_hi = x_c + 2.0 * G * s;
  if (pts.front().x > span_lo || pts.back().x < span_hi)
    throw NeckTooShort("modification region leaves the profile");
  for (const auto& p : pts)
    if (p.x > span_lo && p.x < span_hi && (p.y < 0.5 * s || p.y > 2.0 * s))
      throw NeckTooShort("modification region leaves the neck band");

  CapEvaluator cap(G);
  ReplaceOutcome out;
  out.ball_center = {x_c, 0.0};
  out.ball_radius = 5.0 * G * s;

  double cutL = x_c - G * s;  // left piece keeps x < cutL, tip lands at cutL
  double cutR = x_c + G * s;

  // Pre-surgery radius near axial position x: the smaller endpoint radius of
  // any bracketing edge near the neck (conservative, so min-merging against
  // it keeps the new vertices inside the pre-surgery solid pointwise).
  auto r_pre_near = [&](double x) {
    double best = kInf;
    double nearest = kInf, nearest_r = 2.0 * s;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      if (std::abs(pts[i].x - x_c) > 2.5 * G * s) continue;
      double a = pts[i].x, b = pts[i + 1].x;
      if ((a - x) * (b - x) <= 0.0)
        best = std::min(best, std::min(pts[i].y, pts[i + 1].y));
      double d = std::abs(a - x);
      if (d < nearest) {
        nearest = d;
        nearest_r = pts[i].y;
      }
    }
    return best < kInf ? best : nearest_r;
  };

  // The born mesh must resolve the cap's curvature scale ~s, which is much
  // finer than the inherited neck spacing, so the curved tip section is laid
  // down from analytic cap samples (about ten vertices per curvature radius)
  // and inherited vertices survive only on the flat tail.
  const double xi_keep = cap.x_unit + 0.02;
  const std::vector<Vec2> fine = cap.tip_samples(0.1);

  auto build_piece = [&](bool left) {
    std::vector<Vec2> piece;
    std::vector<double> r_pre;
    double cut = left ? cutL : cutR;
    double eps = 1e-9 * s;  // keep the cut-face comparison strict
    if (left) {
      for (const auto& p : pts) {
        if (p.x >= cut - eps) break;
        piece.push_back(p);
      }
    } else {
      std::size_t start = pts.size();
      for (std::size_t i = 0; i < pts.size(); ++i)
        if (pts[i].x > cut + eps) {
          start = i;
          break;
        }
      piece.assign(pts.begin() + start, pts.end());
      std::reverse(piece.begin(), piece.end());
    }
    // Both sides now run from the far end toward the cut. Inherited vertices
    // inside the analytic tip zone are dropped before the cap goes in.
    auto xi_of = [&](const Vec2& p) {
      return (left ? cut - p.x : p.x - cut) / s;
    };
    while (!piece.empty() && xi_of(piece.back()) < xi_keep) piece.pop_back();
    if (piece.size() < 8) throw NeckTooShort("kept side has too few vertices");
    r_pre.resize(piece.size());
    for (std::size_t i = 0; i < piece.size(); ++i) r_pre[i] = piece[i].y;

    // Min-merge the rescaled cap's flat tail over the overlap.
    bool any = false;
    std::size_t merge_lo = piece.size(), merge_hi = 0;
    for (std::size_t i = 0; i < piece.size(); ++i) {
      double xi = xi_of(piece[i]);
      if (xi < 0.0 || xi > G) continue;
      piece[i].y = std::min(piece[i].y, s * cap.r_at(xi));
      merge_lo = std::min(merge_lo, i);
      merge_hi = std::max(merge_hi, i);
      any = true;
    }
    if (!any) throw NeckTooShort("no vertices in the merge region");
    seam_smooth(piece, merge_lo > 1 ? merge_lo - 1 : 0, merge_hi, r_pre);

    // Analytic tip: cap samples from the seam down to the axis at the cut.
    for (std::size_t k = fine.size(); k-- > 0;) {
      double x = left ? cut - s * fine[k].x : cut + s * fine[k].x;
      Vec2 v{x, std::min(s * fine[k].y, r_pre_near(x))};
      if (dist(v, piece.back()) > 1e-7 * s) piece.push_back(v);
    }
    piece.push_back({cut, 0.0});
    if (!left) std::reverse(piece.begin(), piece.end());
    return AxisymProfile::make(std::move(piece), geometry.ambient_n,
                               Closure::axis_to_axis);
  };

  out.pieces.push_back(build_piece(true));
  out.pieces.push_back(build_piece(false));

  // sup |A| over the modified regions, reported in absolute units.
  out.cap_curvature = 0.0;
  for (const auto& piece : out.pieces) {
    QuantityField q = axisym_quantities(piece);
    for (std::size_t i = 0; i < piece.size(); ++i)
      if (std::abs(piece.profile[i].x - x_c) <= 2.0 * G * s)
        out.cap_curvature =
            std::max(out.cap_curvature, std::sqrt(q.A_norm_sq[i]));
  }
  return out;
}

DiscardOutcome discard_components(const std::vector<AxisymProfile>& components,
                                  const std::vector<int>& component_ids,
                                  const SurgeryParams& params, double time) {
  if (components.size() != component_ids.size())
    throw InvalidSpec("component list and id list differ in length");
  DiscardOutcome out;
  for (std::size_t k = 0; k < components.size(); ++k) {
    QuantityField q = axisym_quantities(components[k]);
    double min_H = q.min_H();
    if (min_H > params.H_th) {
      DiscardRecord rec;
      rec.component = component_ids[k];
      rec.topology = components[k].closure == Closure::off_axis_loop
                         ? DiscardTopology::solid_torus
                         : DiscardTopology::ball;
      rec.min_H = min_H;
      rec.time = time;
      out.discarded.push_back(rec);
    } else {
      out.kept.push_back(components[k]);
      out.kept_components.push_back(component_ids[k]);
    }
  }
  return out;
}

bool separation_check(const AxisymProfile& geometry,
                      const std::vector<NeckRegion>& necks,
                      const SurgeryParams& params) {
  QuantityField q = axisym_quantities(geometry);
  const auto& pts = geometry.profile;
  // Walk the profile; every transition between a hot vertex (H near the
  // trigger) and a cold vertex (H at or below the thick threshold) must have
  // a neck center strictly between them in x.
  int last_class = 0;  // +1 hot, -1 cold, 0 none yet
  double last_x = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    int cls = 0;
    if (q.H[i] >= 0.99 * params.H_trig)
      cls = +1;
    else if (q.H[i] <= params.H_th)
      cls = -1;
    if (cls == 0) continue;
    if (last_class != 0 && cls != last_class) {
      double xlo = std::min(last_x, pts[i].x);
      double xhi = std::max(last_x, pts[i].x);
      bool covered = false;
      for (const auto& neck : necks)
        if (neck.center_x > xlo && neck.center_x < xhi) covered = true;
      if (!covered) return false;
    }
    last_class = cls;
    last_x = pts[i].x;
  }
  return true;
}

// ---------------------------------------------------------------------------
// The full surgery loop
// ---------------------------------------------------------------------------

namespace {

struct Gap {
  double x_lo = 0.0, x_hi = 0.0;
  bool cold_on_left = false;
};

// Hot/cold transitions of the profile, each of which must receive a cut.
std::vector<Gap> find_gaps(const AxisymProfile& prof,
                           const SurgeryParams& params) {
  QuantityField q = axisym_quantities(prof);
  std::vector<Gap> gaps;
  int last_class = 0;
  double last_x = 0.0;
  for (std::size_t i = 0; i < prof.profile.size(); ++i) {
    int cls = 0;
    if (q.H[i] >= 0.99 * params.H_trig)
      cls = +1;
    else if (q.H[i] <= params.H_th)
      cls = -1;
    if (cls == 0) continue;
    if (last_class != 0 && cls != last_class) {
      Gap gap;
      gap.x_lo = std::min(last_x, prof.profile[i].x);
      gap.x_hi = std::max(last_x, prof.profile[i].x);
      gap.cold_on_left = (cls == +1) == (prof.profile[i].x > last_x);
      gaps.push_back(gap);
    }
    last_class = cls;
    last_x = prof.profile[i].x;
  }
  return gaps;
}

// Pick the cut for one gap: the leftmost certified region whose center lies
// strictly inside the gap; the cut lands on the region's central
// cross-section (the certified vertex nearest the run's axial midpoint that
// still fits the modification band).
NeckRegion select_cut(const AxisymProfile& prof,
                      const std::vector<NeckRegion>& regions, const Gap& gap,
                      const SurgeryParams& params) {
  const NeckRegion* run = nullptr;
  for (const auto& reg : regions) {
    if (!(reg.center_x > gap.x_lo && reg.center_x < gap.x_hi)) continue;
    if (!run || reg.center_x < run->center_x) run = &reg;
  }
  if (!run) throw NoSeparatingNecks("a hot-cold gap has no certified neck");

  double rlo = prof.profile[run->lo].x, rhi = prof.profile[run->hi].x;
  if (rlo > rhi) std::swap(rlo, rhi);
  if (rhi - rlo < 10.0 * params.Gamma * run->radius)
    throw NeckTooShort("certified extent below ten cap scales");

  double mid = 0.5 * (rlo + rhi);
  bool found = false;
  std::size_t chosen_idx = 0;
  double best = kInf;
  for (std::size_t j = run->lo; j <= run->hi; ++j) {
    double xv = prof.profile[j].x;
    double sv = prof.profile[j].y;
    if (xv - 2.0 * params.Gamma * sv < rlo ||
        xv + 2.0 * params.Gamma * sv > rhi)
      continue;
    double d = std::abs(xv - mid);
    if (d < best) {
      best = d;
      found = true;
      chosen_idx = j;
    }
  }
  if (!found)
    throw NeckTooShort("no admissible cut vertex inside the certified run");
  NeckRegion cut = *run;
  cut.center_x = prof.profile[chosen_idx].x;
  cut.radius = prof.profile[chosen_idx].y;
  return cut;
}

void merge_history(FlowHistory& global, FlowHistory&& part) {
  for (auto& s : part.snapshots) global.snapshots.push_back(std::move(s));
  for (auto& e : part.events) global.events.push_back(std::move(e));
  for (auto& d : part.dense_scalars)
    global.dense_scalars.push_back(std::move(d));
  global.max_area_defect = std::max(global.max_area_defect,
                                    part.max_area_defect);
}

}  // namespace

namespace {

// Sum of the two smallest principal curvatures of an axisymmetric slice:
// the rotational curvature has multiplicity n-1, so the two smallest are
// {lambda_profile, lambda_rot} unless lambda_rot is the smaller twice over.
double two_smallest(const QuantityField& q, int n, std::size_t i) {
  if (n == 2) return q.H[i];
  return q.lambda_profile[i] <= q.lambda_rot[i]
             ? q.lambda_profile[i] + q.lambda_rot[i]
             : 2.0 * q.lambda_rot[i];
}

}  // namespace

FlowHistory surgery_flow(const FlowState& initial, const SurgeryParams& params,
                         double horizon, const EngineParams& engine,
                         FlowHistory* partial_out) {
  params.validate();
  const AxisymProfile& prof0 = as_profile(initial.geometry);

  // Controlled initial condition: curvature ceiling, noncollapsing floor,
  // two-convexity floor.
  {
    QuantityField q = axisym_quantities(prof0);
    if (!(q.max_H() <= params.gamma))
      throw InvalidSpec("initial curvature exceeds the ceiling");
    if (!(q.min_H() > 0.0)) throw InvalidSpec("initial surface not mean convex");
    for (std::size_t i = 0; i < q.H.size(); ++i)
      if (two_smallest(q, prof0.ambient_n, i) <
          (params.beta - 1e-9) * q.H[i])
        throw InvalidSpec("initial surface not uniformly two-convex");
    AndrewsReport rep = andrews_quantities(initial.geometry);
    if (!(rep.alpha >= params.alpha))
      throw InvalidSpec("initial surface more collapsed than the floor");
  }

  EngineParams eng = engine;
  eng.graded = true;
  if (eng.grade_floor <= 0.0) eng.grade_floor = 0.2 / (1.1 * params.H_trig);
  eng.tighten_stride_at_H =
      std::min(eng.tighten_stride_at_H, 0.5 * params.H_neck);

  double area_tol = 1e-4 * total_area(initial.geometry);

  FlowHistory global;
  std::deque<FlowState> queue;
  queue.push_back(initial);
  int next_component = initial.component + 1;
  int surgeries = 0;

  auto finalize = [](FlowHistory& g) {
    std::stable_sort(g.snapshots.begin(), g.snapshots.end(),
                     [](const FlowState& a, const FlowState& b) {
                       return a.time < b.time;
                     });
    std::stable_sort(g.events.begin(), g.events.end(),
                     [](const Event& a, const Event& b) {
                       return a.time < b.time;
                     });
    std::stable_sort(g.dense_scalars.begin(), g.dense_scalars.end(),
                     [](const DenseRow& a, const DenseRow& b) {
                       return a.time < b.time;
                     });
  };

  try {
  while (!queue.empty()) {
    FlowState piece = queue.front();
    queue.pop_front();

    FlowHistory h = evolve(piece,
                           {StopCriterion::extinction(area_tol),
                            StopCriterion::trigger(params.H_trig),
                            StopCriterion::horizon(horizon)},
                           eng);
    EventKind outcome =
        h.events.empty() ? EventKind::horizon : h.events.back().kind;
    FlowState last = h.snapshots.back();
    double t_now = last.time;
    if (std::getenv("MCFLAB_SURGERY_TRACE")) {
      const AxisymProfile* pp = std::get_if<AxisymProfile>(&last.geometry);
      double rmin = kInf, maxH = 0.0;
      if (pp) {
        QuantityField q = axisym_quantities(*pp);
        maxH = q.max_H();
        for (const auto& p : pp->profile) rmin = std::min(rmin, p.y);
      }
      std::fprintf(stderr,
                   "[surgery] piece=%d t=%.8f outcome=%d N=%zu rmin=%.3e "
                   "maxH=%.1f\n",
                   piece.component, t_now, (int)outcome,
                   pp ? pp->profile.size() : 0, rmin, maxH);
    }
    if (outcome != EventKind::trigger) {
      merge_history(global, std::move(h));
      continue;
    }

    if (++surgeries > 64)
      throw InvalidSpec("surgery count exceeded the safety budget");

    // Detect on this piece's own history before merging, so backward slices
    // can never alias a sibling component at the same time.
    std::vector<NeckRegion> regions;
    bool fell_back = false;
    std::string fallback_msg;
    try {
      regions = detect_necks(h, t_now, params);
    } catch (const InsufficientHistory& e) {
      fell_back = true;
      fallback_msg = e.what();
      regions = detect_necks_final(last, params);
    }
    merge_history(global, std::move(h));
    if (fell_back)
      global.events.push_back(
          {t_now, EventKind::warning,
           "fallback to final-slice detection: " + fallback_msg});
    const AxisymProfile& prof = as_profile(last.geometry);
    if (std::getenv("MCFLAB_SURGERY_TRACE")) {
      std::fprintf(stderr, "[surgery]   regions=%zu fallback=%d\n",
                   regions.size(), (int)fell_back);
      for (const auto& r : regions)
        std::fprintf(stderr,
                     "[surgery]   region center_x=%+.4f s=%.4e q=%.4f "
                     "x=[%+.4f,%+.4f]\n",
                     r.center_x, r.radius, r.quality, prof.profile[r.lo].x,
                     prof.profile[r.hi].x);
    }
    if (!separation_check(prof, regions, params))
      throw NoSeparatingNecks("certified necks do not separate hot from cold");

    // One cut per uncovered hot-cold gap, chosen greedily left to right; a
    // gap already separated by an earlier choice needs no cut of its own.
    std::vector<Gap> gaps = find_gaps(prof, params);
    std::vector<NeckRegion> cuts;
    for (const auto& gap : gaps) {
      bool covered = false;
      for (const auto& c : cuts)
        if (c.center_x > gap.x_lo && c.center_x < gap.x_hi) covered = true;
      if (!covered) cuts.push_back(select_cut(prof, regions, gap, params));
    }
    if (!cuts.empty()) {
      // The chosen collection must separate, and must be minimal: dropping
      // any single neck has to break separation again.
      if (!separation_check(prof, cuts, params))
        throw InvalidSpec("chosen cuts do not separate hot from cold");
      for (std::size_t i = 0; i < cuts.size(); ++i) {
        std::vector<NeckRegion> rest;
        for (std::size_t j = 0; j < cuts.size(); ++j)
          if (j != i) rest.push_back(cuts[j]);
        if (separation_check(prof, rest, params))
          throw InvalidSpec("chosen cut collection is not minimal");
      }
    }
    std::sort(cuts.begin(), cuts.end(),
              [](const NeckRegion& a, const NeckRegion& b) {
                return a.center_x > b.center_x;
              });

    std::vector<AxisymProfile> pieces = {prof};
    std::vector<int> ids = {last.component};
    for (const auto& cut : cuts) {
      // Locate the piece currently containing the cut (right-to-left order
      // keeps every remaining cut inside exactly one piece).
      std::size_t host = pieces.size();
      for (std::size_t k = 0; k < pieces.size(); ++k) {
        double lo = pieces[k].profile.front().x;
        double hi = pieces[k].profile.back().x;
        if (cut.center_x > lo && cut.center_x < hi) host = k;
      }
      if (host == pieces.size())
        throw NoSeparatingNecks("cut position fell outside every piece");
      ReplaceOutcome rep = replace_neck(pieces[host], cut, params);
      pieces.erase(pieces.begin() + host);
      ids.erase(ids.begin() + host);
      for (auto& np : rep.pieces) {
        pieces.push_back(std::move(np));
        ids.push_back(next_component++);
      }
      // One run constant bounds |A| <= C/s over every cap built in this run.
      global.surgery_cap_constant = std::max(global.surgery_cap_constant,
                                             rep.cap_curvature * cut.radius);
      global.events.push_back(
          {t_now, EventKind::surgery,
           format_double(cut.center_x) + "," + format_double(cut.radius) +
               "," + format_double(cut.quality) + "," +
               std::to_string(pieces.size() + queue.size())});
    }

    DiscardOutcome disc = discard_components(pieces, ids, params, t_now);
    if (cuts.empty() && disc.discarded.empty())
      throw NoSeparatingNecks(
          "trigger fired with no hot-cold gap and no discardable component");
    for (const auto& rec : disc.discarded)
      global.events.push_back(
          {t_now, EventKind::discard,
           std::to_string(rec.component) + "," +
               discard_topology_name(rec.topology) + "," +
               format_double(rec.min_H)});
    // Keep a terminal snapshot of each discarded component for inspection.
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      bool kept = false;
      for (std::size_t m = 0; m < disc.kept.size(); ++m)
        if (disc.kept_components[m] == ids[k]) kept = true;
      if (!kept) {
        FlowState dead;
        dead.geometry = pieces[k];
        dead.time = t_now;
        dead.component = ids[k];
        global.snapshots.push_back(std::move(dead));
      }
    }
    for (std::size_t m = 0; m < disc.kept.size(); ++m) {
      FlowState cont;
      cont.geometry = disc.kept[m];
      cont.time = t_now;
      cont.step_index = 0;
      cont.component = disc.kept_components[m];
      queue.push_back(std::move(cont));
    }
  }
  } catch (...) {
    // Leave the record accumulated so far behind for diagnostics before the
    // abort propagates.
    if (partial_out) {
      finalize(global);
      *partial_out = std::move(global);
    }
    throw;
  }

  finalize(global);

  // Standing guarantees over every recorded state: the trigger discipline
  // caps max H, and mean-convex states stay uniformly two-convex.
  for (const auto& snap : global.snapshots) {
    const AxisymProfile* pp = std::get_if<AxisymProfile>(&snap.geometry);
    if (!pp) continue;
    QuantityField q = axisym_quantities(*pp);
    if (!(q.max_H() <= 1.01 * params.H_trig))
      throw InvalidSpec("recorded state exceeds the trigger ceiling");
    for (std::size_t i = 0; i < q.H.size(); ++i) {
      if (!(q.H[i] > 0.0)) continue;
      if (two_smallest(q, pp->ambient_n, i) <
          (0.95 * params.beta - 1e-9) * q.H[i])
        throw InvalidSpec("recorded state loses uniform two-convexity");
    }
  }
  return global;
}

}  // namespace mcflab
