#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mcflab/flow_engine.hpp"
#include "mcflab/geometry.hpp"

namespace mcflab {

struct SurgeryParams {
  double alpha = 0.3;   // noncollapsing floor of the controlled condition
  double beta = 0.1;    // two-convexity floor
  double gamma = 10.0;  // initial curvature ceiling
  double delta = 0.05;  // neck quality
  double H_th = 10.0;
  double H_neck = 100.0;
  double H_trig = 1000.0;
  double Gamma = 20.0;  // cap scale
  double mu = 2.0;      // neck-radius band around s_sharp

  // Canonical neck radius (n-1)/H_neck for hypersurface dimension n.
  double s_sharp(int n) const { return (n - 1) / H_neck; }

  void validate() const;  // InvalidSpec on ordering/ratio violations
};

struct NeckRegion {
  double center_x = 0.0;  // axis position of the neck center
  double radius = 0.0;    // realized neck radius s
  std::size_t lo = 0;     // certified profile index range [lo, hi]
  std::size_t hi = 0;
  double quality = 0.0;   // achieved delta-hat <= params.delta
};

enum class DiscardTopology { ball, solid_torus };

std::string discard_topology_name(DiscardTopology t);

struct DiscardRecord {
  int component = 0;
  DiscardTopology topology = DiscardTopology::ball;
  double min_H = 0.0;
  double time = 0.0;
};

// Neck detection against the evolving-cylinder model at rescaled times
// {-1, -1/2, 0} sampled from history (nearest snapshots, per-slice effective
// times). Returns pairwise disjoint regions. InsufficientHistory if the
// backward window is uncovered; callers may fall back to the final slice.
std::vector<NeckRegion> detect_necks(const FlowHistory& history, double t,
                                     const SurgeryParams& params);

// Final-time-only variant (no backward verification) used as the logged
// fallback and for synthetic single-slice inputs.
std::vector<NeckRegion> detect_necks_final(const FlowState& state,
                                           const SurgeryParams& params);

// Unit-radius standard cap: r = 1 exactly for axial coordinate in
// [10, Gamma], convex C^2 closure to the axis at 0. Points ordered from the
// tip (on the axis) outward.
std::vector<Vec2> standard_cap_profile(double Gamma, std::size_t N);

struct ReplaceOutcome {
  std::vector<AxisymProfile> pieces;
  Vec2 ball_center;         // all modification confined to B(center, 5*Gamma*s)
  double ball_radius = 0.0;
  double cap_curvature = 0.0;  // sup |A| over the modified region
};

// Cut the neck at its center cross-section and close each side with the
// rescaled standard cap. Post-surgery profiles are contained in the
// pre-surgery solid; vertices outside the ball are bitwise unchanged.
// NeckTooShort if the certified extent cannot host the modification.
ReplaceOutcome replace_neck(const AxisymProfile& geometry,
                            const NeckRegion& neck,
                            const SurgeryParams& params);

struct DiscardOutcome {
  std::vector<AxisymProfile> kept;
  std::vector<int> kept_components;  // ids parallel to kept
  std::vector<DiscardRecord> discarded;
};

// A component is discarded iff min H > H_th; topology ball for axis_to_axis
// components, solid_torus for off-axis loops.
DiscardOutcome discard_components(const std::vector<AxisymProfile>& components,
                                  const std::vector<int>& component_ids,
                                  const SurgeryParams& params, double time);

// True iff every profile path from a vertex with H >= 0.99*H_trig to a
// vertex with H <= H_th has some neck center strictly between them in x.
bool separation_check(const AxisymProfile& geometry,
                      const std::vector<NeckRegion>& necks,
                      const SurgeryParams& params);

// The full trigger/detect/replace/discard/continue loop. The initial state
// must satisfy the controlled condition (validated via InvalidSpec). Events
// from all component continuations are merged by time. NoSeparatingNecks if
// a trigger fires and no admissible neck collection separates the hot set
// from the cold set; when that (or any other mid-run error) aborts the run
// and partial_out is non-null, the history accumulated so far is stored
// there before the exception propagates, so drivers can dump diagnostics.
FlowHistory surgery_flow(const FlowState& initial, const SurgeryParams& params,
                         double horizon, const EngineParams& engine = {},
                         FlowHistory* partial_out = nullptr);

}  // namespace mcflab
