#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mcflab/geometry.hpp"

namespace mcflab {

struct FlowState {
  Geometry geometry;
  double time = 0.0;
  std::int64_t step_index = 0;
  int component = 0;  // id assigned when a flow splits
};

enum class EventKind {
  surgery,
  discard,
  extinction,
  blowup_stop,
  trigger,
  horizon,
  self_intersection,
  warning,
};

std::string event_kind_name(EventKind k);

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::horizon;
  std::string payload;
};

// One row of the per-step scalar series (CSV: time,area,volume,maxH,minH,
// minL1H,alpha). alpha and minL1H are NaN when the slice is not mean convex.
struct DenseRow {
  double time = 0.0;
  double area = 0.0;
  double volume = 0.0;
  double max_H = 0.0;
  double min_H = 0.0;
  double min_lambda1_over_H = 0.0;
  double andrews_alpha = 0.0;
  int component = 0;
};

struct FlowHistory {
  std::vector<FlowState> snapshots;  // time-ordered, stride + event times
  std::vector<Event> events;
  std::vector<DenseRow> dense_scalars;
  // Largest per-step relative defect of the area-decay identity
  // dA/dt = -sum H^2 w, measured before any remeshing inside the step.
  double max_area_defect = 0.0;
  // Surgery runs record one constant C with sup|A| <= C / s over every
  // cap-modified region built during the run (0 when no surgery happened).
  double surgery_cap_constant = 0.0;

  // Index of the snapshot whose time is nearest to t (same component).
  std::size_t nearest_snapshot(double t, int component = 0) const;
  double first_time() const;
  double last_time() const;
};

struct StopCriterion {
  enum class Kind { horizon, extinction, blowup, trigger } kind;
  double value = 0.0;

  static StopCriterion horizon(double T) { return {Kind::horizon, T}; }
  static StopCriterion extinction(double area_tol) {
    return {Kind::extinction, area_tol};
  }
  static StopCriterion blowup(double H_max) { return {Kind::blowup, H_max}; }
  static StopCriterion trigger(double H_trig) {
    return {Kind::trigger, H_trig};
  }
};

struct EngineParams {
  double cfl = 0.5;
  std::int64_t record_stride = 5;
  // Andrews alpha is O(N^2); recomputed every alpha_stride steps and carried
  // forward in between. 0 disables the alpha column (NaN).
  std::int64_t alpha_stride = 50;
  double remesh_ratio = 2.0;       // resample when max/min spacing exceeds this
  bool coarsen_on_shrink = true;   // re-coarsen as the surface shrinks
  // Curvature-graded remeshing (used by surgery runs): spacing
  // clamp(grade_k/|H|, grade_floor, h0) with bounded neighbor ratio.
  bool graded = false;
  double grade_k = 0.2;
  double grade_floor = 0.0;
  // Record stride drops to 1 once max H reaches this (backward-slice probes
  // need dense history around surgery times).
  double tighten_stride_at_H = std::numeric_limits<double>::infinity();
  bool pin_open_endpoints = true;
  std::int64_t max_steps = 10'000'000;
};

// dt = cfl * h_min^2 / (2 + h_min * max|H|). DegenerateGeometry if h_min = 0.
double choose_dt(const FlowState& state, double cfl);

// One explicit step x <- x - dt * H * nu_out, plus remeshing when spacing
// degrades and a simplicity re-check. StepTooLarge if dt exceeds the cfl=1
// bound; SelfIntersection if the step breaks embeddedness. When area_defect
// is non-null it receives |dArea/dt + sum H^2 w| / (sum H^2 w) for this step,
// measured on the advected mesh before any resampling.
FlowState step(const FlowState& state, double dt,
               const EngineParams& params = {},
               double* area_defect = nullptr);

// Integrate until the first stop criterion fires. The firing criterion is
// recorded as the final event; step failures become events, never silent
// aborts.
FlowHistory evolve(const FlowState& initial,
                   const std::vector<StopCriterion>& stops,
                   const EngineParams& params = {});

// Minimum distance between two discrete hypersurfaces (profiles must share
// the axis; exact segment-segment distances).
double pair_distance(const FlowState& a, const FlowState& b);

}  // namespace mcflab
