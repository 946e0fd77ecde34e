#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mcflab/flow_engine.hpp"
#include "mcflab/geometry.hpp"

namespace mcflab {

// Plain-text snapshot, format v1:
//   line 1: MCFLAB v1 <kind> <n> <N> <time>
//   then N lines "x y" (curves) or "x r" (profiles), printf %.17g.
// Kinds: curve, curve-open, axisym-open, axisym-loop, axisym-segment.

std::string snapshot_kind(const Geometry& g);

std::string format_snapshot(const Geometry& g, double time);
void write_snapshot(const std::string& path, const Geometry& g, double time);

struct Snapshot {
  Geometry geometry;
  double time = 0.0;
};

Snapshot parse_snapshot(const std::string& text);
Snapshot read_snapshot(const std::string& path);

// printf %.17g — round-trips doubles exactly.
std::string format_double(double v);

// CSV emission for a FlowHistory (dense_scalars.csv, events.csv) plus one
// snapshot file per recorded state under <dir>/snapshots/.
void write_history(const std::string& dir, const FlowHistory& history);

// Sorted list of snapshot files under <dir>/snapshots/.
std::vector<std::string> list_snapshot_files(const std::string& dir);

// Rebuild a history (snapshots only; events/dense series stay on disk) from
// a run directory written by write_history.
FlowHistory read_history(const std::string& dir);

}  // namespace mcflab
