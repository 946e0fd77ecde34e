#include "mcflab/snapshot_io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mcflab/errors.hpp"

namespace fs = std::filesystem;

namespace mcflab {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string snapshot_kind(const Geometry& g) {
  if (std::holds_alternative<PolyCurve>(g))
    return std::get<PolyCurve>(g).closed ? "curve" : "curve-open";
  switch (std::get<AxisymProfile>(g).closure) {
    case Closure::axis_to_axis: return "axisym-open";
    case Closure::off_axis_loop: return "axisym-loop";
    case Closure::segment: return "axisym-segment";
  }
  return "axisym-open";
}

std::string format_snapshot(const Geometry& g, double time) {
  const auto& pts = points_of(g);
  std::string out = "MCFLAB v1 " + snapshot_kind(g) + " " +
                    std::to_string(hypersurface_dim(g)) + " " +
                    std::to_string(pts.size()) + " " + format_double(time) +
                    "\n";
  for (const auto& p : pts)
    out += format_double(p.x) + " " + format_double(p.y) + "\n";
  return out;
}

void write_snapshot(const std::string& path, const Geometry& g, double time) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << format_snapshot(g, time);
  if (!f) throw ConfigError("short write to " + path);
}

Snapshot parse_snapshot(const std::string& text) {
  std::istringstream in(text);
  std::string magic, version, kind;
  int n = 0;
  std::size_t N = 0;
  double time = 0.0;
  if (!(in >> magic >> version >> kind >> n >> N >> time))
    throw ConfigError("malformed snapshot header");
  if (magic != "MCFLAB" || version != "v1")
    throw ConfigError("not a MCFLAB v1 snapshot");
  if (n < 1) throw ConfigError("snapshot header has n < 1");
  std::vector<Vec2> pts(N);
  for (std::size_t i = 0; i < N; ++i)
    if (!(in >> pts[i].x >> pts[i].y))
      throw ConfigError("snapshot body ends early at vertex " +
                        std::to_string(i));
  Snapshot snap;
  snap.time = time;
  if (kind == "curve" || kind == "curve-open") {
    if (n != 1) throw ConfigError("curve snapshots require n = 1");
    snap.geometry = PolyCurve::make(std::move(pts), kind == "curve");
  } else if (kind == "axisym-open" || kind == "axisym-loop" ||
             kind == "axisym-segment") {
    Closure c = kind == "axisym-open"
                    ? Closure::axis_to_axis
                    : (kind == "axisym-loop" ? Closure::off_axis_loop
                                             : Closure::segment);
    snap.geometry = AxisymProfile::make(std::move(pts), n, c);
  } else {
    throw ConfigError("unknown snapshot kind '" + kind + "'");
  }
  return snap;
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_snapshot(buf.str());
}

namespace {

std::string snapshot_name(std::size_t index, int component) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snap_%06zu_c%d.txt", index, component);
  return buf;
}

}  // namespace

void write_history(const std::string& dir, const FlowHistory& history) {
  fs::create_directories(fs::path(dir) / "snapshots");

  {
    std::ofstream f(fs::path(dir) / "dense_scalars.csv");
    if (!f) throw ConfigError("cannot write dense_scalars.csv in " + dir);
    f << "time,area,volume,maxH,minH,minL1H,alpha\n";
    for (const auto& row : history.dense_scalars)
      f << format_double(row.time) << ',' << format_double(row.area) << ','
        << format_double(row.volume) << ',' << format_double(row.max_H) << ','
        << format_double(row.min_H) << ','
        << format_double(row.min_lambda1_over_H) << ','
        << format_double(row.andrews_alpha) << '\n';
  }
  {
    std::ofstream f(fs::path(dir) / "events.csv");
    if (!f) throw ConfigError("cannot write events.csv in " + dir);
    f << "time,kind,payload\n";
    for (const auto& ev : history.events)
      f << format_double(ev.time) << ',' << event_kind_name(ev.kind) << ','
        << ev.payload << '\n';
  }
  {
    std::ofstream f(fs::path(dir) / "summary.txt");
    if (!f) throw ConfigError("cannot write summary.txt in " + dir);
    f << "max_area_defect " << format_double(history.max_area_defect) << '\n'
      << "surgery_cap_constant "
      << format_double(history.surgery_cap_constant) << '\n';
  }
  for (std::size_t i = 0; i < history.snapshots.size(); ++i) {
    const FlowState& s = history.snapshots[i];
    write_snapshot((fs::path(dir) / "snapshots" /
                    snapshot_name(i, s.component))
                       .string(),
                   s.geometry, s.time);
  }
}

std::vector<std::string> list_snapshot_files(const std::string& dir) {
  fs::path sub = fs::path(dir) / "snapshots";
  if (!fs::is_directory(sub))
    throw ConfigError("no snapshots directory under " + dir);
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(sub))
    if (entry.is_regular_file() && entry.path().extension() == ".txt")
      files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  return files;
}

FlowHistory read_history(const std::string& dir) {
  FlowHistory history;
  for (const std::string& path : list_snapshot_files(dir)) {
    Snapshot snap = read_snapshot(path);
    FlowState state;
    state.geometry = std::move(snap.geometry);
    state.time = snap.time;
    state.step_index = static_cast<std::int64_t>(history.snapshots.size());
    // Component id is encoded in the file name (…_c<k>.txt); bare files
    // default to component 0.
    std::string stem = fs::path(path).stem().string();
    auto pos = stem.rfind("_c");
    if (pos != std::string::npos) {
      try {
        state.component = std::stoi(stem.substr(pos + 2));
      } catch (...) {
        state.component = 0;
      }
    }
    history.snapshots.push_back(std::move(state));
  }
  if (history.snapshots.empty())
    throw UncoveredTime("history at " + dir + " holds no snapshots");
  std::stable_sort(history.snapshots.begin(), history.snapshots.end(),
                   [](const FlowState& a, const FlowState& b) {
                     return a.time < b.time;
                   });
  std::ifstream sum(fs::path(dir) / "summary.txt");
  if (sum) {
    std::string key;
    double value = 0.0;
    while (sum >> key >> value) {
      if (key == "max_area_defect") history.max_area_defect = value;
      if (key == "surgery_cap_constant") history.surgery_cap_constant = value;
    }
  }
  return history;
}

}  // namespace mcflab
