#include "mcflab/flow_engine.hpp"

#include <algorithm>
#include <cmath>

#include "mcflab/diagnostics.hpp"
#include "mcflab/errors.hpp"
#include "mcflab/parallel.hpp"

namespace mcflab {

std::string event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::surgery: return "surgery";
    case EventKind::discard: return "discard";
    case EventKind::extinction: return "extinction";
    case EventKind::blowup_stop: return "blowup_stop";
    case EventKind::trigger: return "trigger";
    case EventKind::horizon: return "horizon";
    case EventKind::self_intersection: return "self_intersection";
    case EventKind::warning: return "warning";
  }
  return "unknown";
}

std::size_t FlowHistory::nearest_snapshot(double t, int component) const {
  std::size_t best = snapshots.size();
  double best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    if (snapshots[i].component != component) continue;
    double gap = std::abs(snapshots[i].time - t);
    if (gap < best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  if (best == snapshots.size())
    throw UncoveredTime("no snapshot for component " +
                        std::to_string(component));
  return best;
}

double FlowHistory::first_time() const {
  if (snapshots.empty()) throw UncoveredTime("empty history");
  double t = snapshots.front().time;
  for (const auto& s : snapshots) t = std::min(t, s.time);
  return t;
}

double FlowHistory::last_time() const {
  if (snapshots.empty()) throw UncoveredTime("empty history");
  double t = snapshots.front().time;
  for (const auto& s : snapshots) t = std::max(t, s.time);
  return t;
}

namespace {

double dt_bound(double h_min, double max_abs_H, double cfl) {
  return cfl * h_min * h_min / (2.0 + h_min * max_abs_H);
}

double checked_h_min(const Geometry& g) {
  double h_min = min_edge_length(g);
  if (!(h_min > 0.0)) throw DegenerateGeometry("minimal edge length is zero");
  return h_min;
}

}  // namespace

double choose_dt(const FlowState& state, double cfl) {
  if (!(cfl > 0.0 && cfl <= 1.0))
    throw InvalidSpec("cfl must lie in (0, 1]");
  double h_min = checked_h_min(state.geometry);
  QuantityField q = quantities(state.geometry);
  return dt_bound(h_min, q.max_abs_H(), cfl);
}

namespace {

// Move every vertex by -dt * H * nu_out. Open-curve endpoints are pinned
// (translator boundary condition); axis poles move along the axis.
Geometry advect(const Geometry& g, const QuantityField& q, double dt,
                bool pin_open_endpoints) {
  Geometry out = g;
  auto& pts = points_of(out);
  bool closed = is_closed(out);
  bool pin = pin_open_endpoints && !closed &&
             std::holds_alternative<PolyCurve>(out);
  std::size_t n = pts.size();
  parallel_for(n, [&](std::size_t i) {
    if (pin && (i == 0 || i + 1 == n)) return;
    pts[i] -= q.normal[i] * (dt * q.H[i]);
  });
  if (std::holds_alternative<AxisymProfile>(out)) {
    auto& prof = std::get<AxisymProfile>(out);
    if (prof.closure == Closure::axis_to_axis) {
      prof.profile.front().y = 0.0;  // poles stay exactly on the axis
      prof.profile.back().y = 0.0;
    }
  }
  return out;
}

// Step body shared by the public step() and the evolve loop; q and h_min
// describe `state` and are reused instead of recomputed.
FlowState step_core(const FlowState& state, const QuantityField& q,
                    double h_min, double dt, const EngineParams& params,
                    double* area_defect) {
  double bound = dt_bound(h_min, q.max_abs_H(), 1.0);
  if (dt > bound * (1.0 + 1e-12))
    throw StepTooLarge("dt exceeds the stability bound");
  FlowState next;
  next.geometry = advect(state.geometry, q, dt, params.pin_open_endpoints);
  next.time = state.time + dt;
  next.step_index = state.step_index + 1;
  next.component = state.component;

  if (area_defect) {
    // Area decay identity dA/dt = -sum H^2 w, checked on the advected mesh
    // before resampling can shuffle vertices.
    double decay = 0.0;
    for (std::size_t i = 0; i < q.H.size(); ++i)
      decay += q.H[i] * q.H[i] * q.weight[i];
    double measured = total_area(next.geometry) - total_area(state.geometry);
    *area_defect = std::abs(measured / dt + decay) / std::max(decay, 1e-300);
  }

  // Uniform-spacing repair when the ratio degrades. Graded meshes exceed any
  // global ratio by design; there the evolve-level drift rule owns spacing.
  if (!params.graded) {
    double lo = min_edge_length(next.geometry);
    double hi = max_edge_length(next.geometry);
    if (lo < 1e-12 || hi / lo > params.remesh_ratio) {
      const auto& pts = points_of(next.geometry);
      bool closed = is_closed(next.geometry);
      double spacing = polyline_length(pts, closed) /
                       std::max<std::size_t>(pts.size(), 8);
      next.geometry = resample(next.geometry, spacing);
    }
  }
  revalidate(next.geometry);
  return next;
}

struct Recorder {
  FlowHistory history;
  const EngineParams& params;
  double h_ref;  // reference spacing for shrink coarsening / grading cap
  bool last_was_recorded = false;

  explicit Recorder(const EngineParams& p, double h) : params(p), h_ref(h) {}

  void dense(const FlowState& s, const QuantityField& q, double alpha,
             double area) {
    DenseRow row;
    row.time = s.time;
    row.area = area;
    row.volume = enclosed_volume(s.geometry);
    row.max_H = q.max_H();
    row.min_H = q.min_H();
    double nan = std::numeric_limits<double>::quiet_NaN();
    if (row.min_H > 0.0) {
      double worst = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < q.H.size(); ++i) {
        double l1 = q.lambda1(i);
        worst = std::min(worst, l1 / q.H[i]);
      }
      row.min_lambda1_over_H = worst;
    } else {
      row.min_lambda1_over_H = nan;
    }
    row.andrews_alpha = alpha;
    row.component = s.component;
    history.dense_scalars.push_back(row);
  }

  void snapshot(const FlowState& s) {
    if (!history.snapshots.empty() &&
        history.snapshots.back().step_index == s.step_index &&
        history.snapshots.back().component == s.component)
      return;
    history.snapshots.push_back(s);
  }

  void event(const FlowState& before, const FlowState& at, EventKind kind,
             const std::string& payload) {
    snapshot(before);  // guarantee a snapshot on each side of the event
    snapshot(at);
    history.events.push_back({at.time, kind, payload});
  }
};

double sampled_alpha(const Geometry& g, double min_H) {
  if (!(min_H > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return andrews_quantities(g).alpha;
}

// Curvature-graded target spacing: h_i = clamp(k/|H_i|, floor, h0), smoothed
// so adjacent targets differ by at most 20%.
std::vector<double> graded_targets(const QuantityField& q, double k,
                                   double floor_h, double h0, bool closed) {
  std::size_t n = q.H.size();
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mag = std::max(std::abs(q.H[i]), 1e-12);
    h[i] = std::clamp(k / mag, floor_h, h0);
  }
  // Two sweeps enforce h_{i+1} <= 1.2 h_i in both directions.
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 1; i < n; ++i) h[i] = std::min(h[i], h[i - 1] * 1.2);
    for (std::size_t i = n - 1; i-- > 0;) h[i] = std::min(h[i], h[i + 1] * 1.2);
    if (closed) {
      h[0] = std::min(h[0], h[n - 1] * 1.2);
      h[n - 1] = std::min(h[n - 1], h[0] * 1.2);
    }
  }
  return h;
}

bool grading_drifted(const Geometry& g, const std::vector<double>& target) {
  const auto& pts = points_of(g);
  bool closed = is_closed(g);
  std::size_t n = pts.size();
  std::size_t edges = closed ? n : n - 1;
  for (std::size_t e = 0; e < edges; ++e) {
    double len = dist(pts[e], pts[(e + 1) % n]);
    double want = 0.5 * (target[e] + target[(e + 1) % n]);
    if (len > 1.5 * want || len < want / 1.5) return true;
  }
  return false;
}

}  // namespace

FlowState step(const FlowState& state, double dt, const EngineParams& params,
               double* area_defect) {
  QuantityField q = quantities(state.geometry);
  return step_core(state, q, checked_h_min(state.geometry), dt, params,
                   area_defect);
}

FlowHistory evolve(const FlowState& initial,
                   const std::vector<StopCriterion>& stops,
                   const EngineParams& params) {
  revalidate(initial.geometry);
  const auto& pts0 = points_of(initial.geometry);
  double h_ref = polyline_length(pts0, is_closed(initial.geometry)) /
                 std::max<std::size_t>(pts0.size(), 1);
  Recorder rec(params, h_ref);

  const StopCriterion* trig = nullptr;
  for (const auto& s : stops)
    if (s.kind == StopCriterion::Kind::trigger) trig = &s;

  if (!(params.cfl > 0.0 && params.cfl <= 1.0))
    throw InvalidSpec("cfl must lie in (0, 1]");

  FlowState state = initial;
  FlowState prev = initial;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  std::int64_t steps_since_alpha = params.alpha_stride;  // sample at step 0

  while (true) {
    QuantityField q = quantities(state.geometry);
    double h_min = checked_h_min(state.geometry);
    double max_H = q.max_H();
    double area = total_area(state.geometry);

    if (params.alpha_stride > 0 && steps_since_alpha >= params.alpha_stride) {
      alpha = sampled_alpha(state.geometry, q.min_H());
      steps_since_alpha = 0;
    }
    rec.dense(state, q, alpha, area);

    std::int64_t stride = (max_H >= params.tighten_stride_at_H)
                              ? 1
                              : std::max<std::int64_t>(params.record_stride, 1);
    if (state.step_index % stride == 0) rec.snapshot(state);

    // Stop checks on the current state, in fixed priority order.
    bool stopped = false;
    for (const auto& s : stops) {
      if (s.kind == StopCriterion::Kind::extinction && area < s.value) {
        rec.event(prev, state, EventKind::extinction,
                  "area=" + std::to_string(area));
        stopped = true;
      }
    }
    if (!stopped)
      for (const auto& s : stops)
        if (s.kind == StopCriterion::Kind::blowup && max_H >= s.value) {
          rec.event(prev, state, EventKind::blowup_stop,
                    "maxH=" + std::to_string(max_H));
          stopped = true;
        }
    if (!stopped && trig && max_H >= 0.995 * trig->value) {
      rec.event(prev, state, EventKind::trigger,
                "maxH=" + std::to_string(max_H));
      stopped = true;
    }
    if (!stopped)
      for (const auto& s : stops)
        if (s.kind == StopCriterion::Kind::horizon && state.time >= s.value) {
          rec.event(prev, state, EventKind::horizon, "");
          stopped = true;
        }
    if (stopped) break;

    if (state.step_index >= params.max_steps)
      throw InvalidSpec("step budget exceeded; check the configuration");

    double dt = dt_bound(h_min, q.max_abs_H(), params.cfl);
    for (const auto& s : stops)
      if (s.kind == StopCriterion::Kind::horizon && state.time + dt > s.value)
        dt = s.value - state.time;

    // Evolve-level remeshing policies (the per-step ratio rule lives in
    // step itself). Applied before the trigger-overshoot check so the
    // recorded state is the one the stop decision saw.
    auto polish = [&](FlowState& st) {
      if (params.graded) {
        QuantityField qn = quantities(st.geometry);
        double floor_h = params.grade_floor > 0.0 ? params.grade_floor : 1e-9;
        auto targets = graded_targets(qn, params.grade_k, floor_h, rec.h_ref,
                                      is_closed(st.geometry));
        if (grading_drifted(st.geometry, targets)) {
          st.geometry = resample_graded(st.geometry, targets);
          revalidate(st.geometry);
        }
      } else if (params.coarsen_on_shrink) {
        double max_e = max_edge_length(st.geometry);
        const auto& pts = points_of(st.geometry);
        double L = polyline_length(pts, is_closed(st.geometry));
        if (max_e < 0.5 * rec.h_ref && std::llround(L / rec.h_ref) >= 16) {
          st.geometry = resample(st.geometry, rec.h_ref);
          revalidate(st.geometry);
        }
      }
    };

    FlowState next;
    try {
      double defect = 0.0;
      next = step_core(state, q, h_min, dt, params, &defect);
      polish(next);
      // Keep the trigger discipline: never overshoot H_trig by more than ~1%.
      if (trig) {
        for (int halve = 0; halve < 60; ++halve) {
          QuantityField qn = quantities(next.geometry);
          if (qn.max_H() <= 1.005 * trig->value) break;
          dt *= 0.5;
          next = step_core(state, q, h_min, dt, params, &defect);
          polish(next);
        }
      }
      rec.history.max_area_defect =
          std::max(rec.history.max_area_defect, defect);
    } catch (const SelfIntersection& e) {
      rec.event(prev, state, EventKind::self_intersection, e.what());
      break;
    }

    prev = state;
    state = std::move(next);
    ++steps_since_alpha;
  }
  return std::move(rec.history);
}

double pair_distance(const FlowState& a, const FlowState& b) {
  if (hypersurface_dim(a.geometry) != hypersurface_dim(b.geometry))
    throw InvalidSpec("pair_distance needs matching ambient dimensions");
  const auto& pa = points_of(a.geometry);
  const auto& pb = points_of(b.geometry);
  bool ca = is_closed(a.geometry);
  bool cb = is_closed(b.geometry);
  std::size_t na = pa.size(), nb = pb.size();
  std::size_t ea = ca ? na : na - 1;
  std::size_t eb = cb ? nb : nb - 1;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ea; ++i)
    for (std::size_t j = 0; j < eb; ++j)
      best = std::min(best, segment_segment_distance(
                                pa[i], pa[(i + 1) % na], pb[j],
                                pb[(j + 1) % nb]));
  return best;
}

}  // namespace mcflab
