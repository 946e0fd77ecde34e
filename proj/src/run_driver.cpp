#include "mcflab/run_driver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "mcflab/errors.hpp"
#include "mcflab/exact_solutions.hpp"
#include "mcflab/snapshot_io.hpp"

namespace fs = std::filesystem;

namespace mcflab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<DensityProbe> parse_probes(Config& cfg) {
  std::set<std::string> names;
  for (const std::string& key : cfg.keys_with_prefix("probe.")) {
    std::size_t dot = key.find('.', 6);
    if (dot == std::string::npos)
      throw ConfigError("probe keys look like probe.<name>.<field>: " + key);
    names.insert(key.substr(6, dot - 6));
  }
  std::vector<DensityProbe> probes;
  for (const std::string& name : names) {
    std::string base = "probe." + name + ".";
    DensityProbe p;
    p.center.x0.x = cfg.get_double(base + "x", 0.0);
    p.center.x0.y = cfg.get_double(base + "y", 0.0);
    p.center.t0 = cfg.require_double(base + "t");
    p.rho = cfg.get_double(base + "rho", kInf);
    p.r_grid = cfg.get_doubles(base + "radii");
    if (p.r_grid.empty())
      throw ConfigError("probe." + name + " needs a radii list");
    probes.push_back(std::move(p));
  }
  return probes;
}

}  // namespace

ExperimentConfig parse_experiment(Config& cfg) {
  ExperimentConfig ec;
  ec.preset = cfg.require_string("experiment.preset");
  const std::set<std::string> known = {"sphere",   "ellipse", "grim-reaper",
                                       "dumbbell", "plane",   "snapshot"};
  if (!known.count(ec.preset))
    throw ConfigError("unknown preset '" + ec.preset + "'");
  ec.n = static_cast<int>(
      cfg.get_int("experiment.n", ec.preset == "dumbbell" ? 2 : 1));
  long long N = cfg.get_int("experiment.N", 256);
  if (N < 8) throw ConfigError("experiment.N must be at least 8");
  ec.N = static_cast<std::size_t>(N);
  ec.seed = cfg.get_int("experiment.seed", 1);

  ec.radius = cfg.get_double("geometry.radius", 1.0);
  ec.a = cfg.get_double("geometry.a", 2.0);
  ec.b = cfg.get_double("geometry.b", 1.0);
  ec.halfwidth = cfg.get_double("geometry.halfwidth", 1.4);
  ec.halflength = cfg.get_double("geometry.halflength", 40.0);
  ec.snapshot_path = cfg.get_string("geometry.snapshot", "");
  if (ec.preset == "snapshot" && ec.snapshot_path.empty())
    throw ConfigError("preset snapshot needs geometry.snapshot = <path>");
  if (ec.preset == "grim-reaper" &&
      !(ec.halfwidth > 0.0 && ec.halfwidth < M_PI / 2.0))
    throw ConfigError("grim reaper halfwidth must lie in (0, pi/2)");

  ec.dumbbell.bulb_radius = cfg.get_double("dumbbell.bulb_radius", 1.0);
  ec.dumbbell.neck_radius = cfg.get_double("dumbbell.neck_radius", 0.2);
  ec.dumbbell.neck_halflength =
      cfg.get_double("dumbbell.neck_halflength", 1.5);
  ec.dumbbell.smoothing = cfg.get_double("dumbbell.smoothing", 0.35);
  ec.dumbbell.bulb2_radius = cfg.get_double("dumbbell.bulb2_radius", 0.0);
  ec.dumbbell.dip_center = cfg.get_double("dumbbell.dip_center", 0.0);
  ec.dumbbell.dip_halfwidth = cfg.get_double("dumbbell.dip_halfwidth", 0.25);
  ec.dumbbell.shoulder_cos = cfg.get_double("dumbbell.shoulder_cos", 0.0);
  ec.dumbbell.shoulder2_cos = cfg.get_double("dumbbell.shoulder2_cos", 0.0);
  ec.dumbbell.terrace_radius = cfg.get_double("dumbbell.terrace_radius", 0.0);
  ec.dumbbell.terrace_length = cfg.get_double("dumbbell.terrace_length", 0.0);
  ec.dumbbell.floor_radius = cfg.get_double("dumbbell.floor_radius", 0.0);
  ec.dumbbell.floor_halfwidth =
      cfg.get_double("dumbbell.floor_halfwidth", 0.0);
  ec.dumbbell.ramp_length = cfg.get_double("dumbbell.ramp_length", 0.0);
  ec.dumbbell.terrace_ramp_length =
      cfg.get_double("dumbbell.terrace_ramp_length", 0.0);
  ec.dumbbell.terrace_one_sided =
      cfg.get_bool("dumbbell.terrace_one_sided", false);

  ec.engine.cfl = cfg.get_double("flow.cfl", 0.5);
  ec.engine.record_stride = cfg.get_int("flow.record_stride", 5);
  ec.engine.alpha_stride = cfg.get_int("flow.alpha_stride", 50);
  ec.engine.remesh_ratio = cfg.get_double("flow.remesh_ratio", 2.0);
  ec.engine.coarsen_on_shrink = cfg.get_bool("flow.coarsen_on_shrink", true);
  ec.engine.graded = cfg.get_bool("flow.graded", false);
  ec.engine.grade_k = cfg.get_double("flow.grade_k", 0.2);
  ec.engine.grade_floor = cfg.get_double("flow.grade_floor", 0.0);
  ec.engine.tighten_stride_at_H =
      cfg.get_double("flow.tighten_stride_at_H", kInf);
  ec.engine.pin_open_endpoints =
      cfg.get_bool("flow.pin_open_endpoints", true);
  ec.engine.max_steps = cfg.get_int("flow.max_steps", 10'000'000);

  ec.horizon = cfg.get_double("stop.horizon", kInf);
  double area_tol = cfg.get_double("stop.extinction_area", 0.0);
  double blowup_H = cfg.get_double("stop.blowup_H", kInf);
  double trigger_H = cfg.get_double("stop.trigger_H", 0.0);
  if (area_tol > 0.0) ec.stops.push_back(StopCriterion::extinction(area_tol));
  if (std::isfinite(blowup_H))
    ec.stops.push_back(StopCriterion::blowup(blowup_H));
  if (trigger_H > 0.0) ec.stops.push_back(StopCriterion::trigger(trigger_H));
  if (std::isfinite(ec.horizon))
    ec.stops.push_back(StopCriterion::horizon(ec.horizon));
  if (ec.stops.empty() && !cfg.get_bool("surgery.enabled", false))
    throw ConfigError("no stop criterion configured");

  ec.with_surgery = cfg.get_bool("surgery.enabled", false);
  const SurgeryParams sp_default;
  ec.surgery.alpha = cfg.get_double("surgery.alpha", sp_default.alpha);
  ec.surgery.beta = cfg.get_double("surgery.beta", sp_default.beta);
  ec.surgery.gamma = cfg.get_double("surgery.gamma", sp_default.gamma);
  ec.surgery.delta = cfg.get_double("surgery.delta", sp_default.delta);
  ec.surgery.H_th = cfg.get_double("surgery.H_th", sp_default.H_th);
  ec.surgery.H_neck = cfg.get_double("surgery.H_neck", sp_default.H_neck);
  ec.surgery.H_trig = cfg.get_double("surgery.H_trig", sp_default.H_trig);
  ec.surgery.Gamma = cfg.get_double("surgery.Gamma", sp_default.Gamma);
  ec.surgery.mu = cfg.get_double("surgery.mu", sp_default.mu);
  if (ec.with_surgery) ec.surgery.validate();

  // The waist dimple depth: a number, or "auto" to land the surrounding tube
  // exactly inside the certified neck band when the dimple reaches the
  // trigger curvature.
  std::string dip = cfg.get_string("dumbbell.dip_depth", "0");
  if (dip == "auto") {
    if (!ec.with_surgery)
      throw ConfigError("dumbbell.dip_depth = auto needs surgery.enabled");
    double rn = ec.dumbbell.neck_radius;
    double s_sharp = ec.surgery.s_sharp(ec.n);
    double r_trig = (ec.n - 1) / ec.surgery.H_trig;
    double inside = rn * rn - 1.02 * 1.02 * s_sharp * s_sharp +
                    r_trig * r_trig;
    if (!(inside > 0.0))
      throw ConfigError("dip_depth = auto needs neck_radius above the "
                        "certified neck scale");
    ec.dumbbell.dip_depth = rn - std::sqrt(inside);
  } else {
    std::istringstream in(dip);
    if (!(in >> ec.dumbbell.dip_depth) || !(in >> std::ws).eof())
      throw ConfigError("dumbbell.dip_depth must be a number or 'auto'");
  }

  ec.probes = parse_probes(cfg);
  ec.out_dir = cfg.get_string("output.dir", "");
  ec.svg_frames = cfg.get_bool("output.svg", false);
  return ec;
}

FlowState initial_state(const ExperimentConfig& ec) {
  FlowState state;
  if (ec.preset == "sphere") {
    SphereSolution sol{ec.radius, ec.n};
    state.geometry = sphere_at(sol, 0.0, ec.N);
  } else if (ec.preset == "ellipse") {
    if (ec.n != 1) throw ConfigError("ellipse preset needs n = 1");
    std::vector<Vec2> pts(ec.N);
    for (std::size_t k = 0; k < ec.N; ++k) {
      double th = 2.0 * M_PI * k / ec.N;
      pts[k] = {ec.a * std::cos(th), ec.b * std::sin(th)};
    }
    Geometry g = PolyCurve::make(std::move(pts), true);
    double L = polyline_length(points_of(g), true);
    state.geometry = resample(g, L / ec.N);
  } else if (ec.preset == "grim-reaper") {
    if (ec.n != 1) throw ConfigError("grim-reaper preset needs n = 1");
    std::vector<double> grid(ec.N);
    for (std::size_t k = 0; k < ec.N; ++k)
      grid[k] = -ec.halfwidth +
                2.0 * ec.halfwidth * double(k) / double(ec.N - 1);
    state.geometry = grim_reaper(0.0, grid);
  } else if (ec.preset == "dumbbell") {
    state.geometry = dumbbell(ec.dumbbell, ec.N, ec.n);
  } else if (ec.preset == "plane") {
    if (ec.n != 1) throw ConfigError("plane preset needs n = 1");
    std::vector<Vec2> pts(ec.N);
    for (std::size_t k = 0; k < ec.N; ++k)
      pts[k] = {-ec.halflength +
                    2.0 * ec.halflength * double(k) / double(ec.N - 1),
                0.0};
    state.geometry = PolyCurve::make(std::move(pts), false);
  } else if (ec.preset == "snapshot") {
    Snapshot snap = read_snapshot(ec.snapshot_path);
    state.geometry = std::move(snap.geometry);
    state.time = snap.time;
  } else {
    throw ConfigError("unknown preset '" + ec.preset + "'");
  }
  return state;
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

namespace {

int map_mcflab_error(const McflabError& e) {
  std::cerr << "error: " << e.what() << "\n";
  const std::string what = e.what();
  if (what.rfind("ConfigError", 0) == 0 || what.rfind("InvalidSpec", 0) == 0)
    return exit_config;
  if (what.rfind("UncoveredTime", 0) == 0) return exit_uncovered_time;
  if (what.rfind("SelfIntersection", 0) == 0) return exit_self_intersection;
  if (what.rfind("NoSeparatingNecks", 0) == 0)
    return exit_no_separating_necks;
  return exit_failure;
}

void write_svg_frame(const std::string& path, const Geometry& g) {
  const auto& pts = points_of(g);
  bool axisym = std::holds_alternative<AxisymProfile>(g);
  double xlo = kInf, xhi = -kInf, ylo = kInf, yhi = -kInf;
  for (const auto& p : pts) {
    xlo = std::min(xlo, p.x);
    xhi = std::max(xhi, p.x);
    ylo = std::min(ylo, axisym ? -p.y : p.y);
    yhi = std::max(yhi, p.y);
  }
  double pad = 0.05 * std::max(xhi - xlo, yhi - ylo) + 1e-9;
  xlo -= pad; xhi += pad; ylo -= pad; yhi += pad;
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << "<svg xmlns='http://www.w3.org/2000/svg' width='800' viewBox='" << xlo
    << " " << ylo << " " << (xhi - xlo) << " " << (yhi - ylo) << "'>\n";
  double stroke = 0.004 * std::max(xhi - xlo, yhi - ylo);
  auto emit = [&](bool mirror) {
    f << (is_closed(g) ? "<polygon" : "<polyline") << " fill='none' "
      << "stroke='black' stroke-width='" << stroke << "' points='";
    for (const auto& p : pts)
      f << p.x << "," << (mirror ? -p.y : p.y) << " ";
    f << "'/>\n";
  };
  emit(false);
  if (axisym) emit(true);
  f << "</svg>\n";
}

void write_frames(const std::string& dir, const FlowHistory& history) {
  fs::create_directories(fs::path(dir) / "frames");
  std::size_t total = history.snapshots.size();
  std::size_t stride = std::max<std::size_t>(1, total / 120);
  for (std::size_t i = 0; i < total; i += stride) {
    char name[48];
    std::snprintf(name, sizeof name, "frame_%06zu.svg", i);
    write_svg_frame((fs::path(dir) / "frames" / name).string(),
                    history.snapshots[i].geometry);
  }
}

struct DenseTable {
  std::vector<std::array<double, 7>> rows;
};

DenseTable read_dense_csv(const std::string& dir) {
  std::ifstream f(fs::path(dir) / "dense_scalars.csv");
  if (!f) throw ConfigError("cannot read dense_scalars.csv under " + dir);
  std::string line;
  if (!std::getline(f, line) ||
      line != "time,area,volume,maxH,minH,minL1H,alpha")
    throw ConfigError("unexpected dense_scalars.csv header in " + dir);
  DenseTable table;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::array<double, 7> row{};
    std::size_t pos = 0;
    for (int c = 0; c < 7; ++c) {
      std::size_t next = line.find(',', pos);
      std::string cell = line.substr(
          pos, next == std::string::npos ? std::string::npos : next - pos);
      row[c] = std::strtod(cell.c_str(), nullptr);
      if (next == std::string::npos && c < 6)
        throw ConfigError("short row in dense_scalars.csv under " + dir);
      pos = next + 1;
    }
    table.rows.push_back(row);
  }
  return table;
}

void report_events(const FlowHistory& history) {
  for (const auto& ev : history.events)
    std::cout << "event " << event_kind_name(ev.kind)
              << " t=" << format_double(ev.time)
              << (ev.payload.empty() ? "" : " " + ev.payload) << "\n";
}

}  // namespace

int cmd_run(const std::string& config_path, const std::string& out_override,
            bool frames, long long stride_override) {
  try {
    Config cfg = Config::parse_file(config_path);
    ExperimentConfig ec = parse_experiment(cfg);
    cfg.reject_unconsumed();
    if (stride_override > 0) ec.engine.record_stride = stride_override;

    FlowState state = initial_state(ec);
    std::string out = !out_override.empty()
                          ? out_override
                          : (!ec.out_dir.empty() ? ec.out_dir : "mcflab_out");

    FlowHistory history;
    if (ec.with_surgery) {
      FlowHistory partial;
      try {
        history =
            surgery_flow(state, ec.surgery, ec.horizon, ec.engine, &partial);
      } catch (const NoSeparatingNecks& e) {
        // The halt is genuine, but everything recorded up to it is the
        // evidence; dump the partial history before reporting failure.
        write_history(out, partial);
        report_events(partial);
        std::cerr << "error: " << e.what() << "\n";
        std::cout << "wrote partial history to " << out << "\n";
        return exit_no_separating_necks;
      }
    } else {
      history = evolve(state, ec.stops, ec.engine);
    }

    write_history(out, history);
    if (frames || ec.svg_frames) write_frames(out, history);

    std::cout << "run " << ec.preset << ": steps=" << history.dense_scalars.size()
              << " snapshots=" << history.snapshots.size()
              << " t_final=" << format_double(history.last_time())
              << " max_area_defect=" << format_double(history.max_area_defect)
              << "\n";
    if (ec.with_surgery)
      std::cout << "surgery_cap_constant "
                << format_double(history.surgery_cap_constant) << "\n";
    report_events(history);
    std::cout << "wrote " << out << "\n";
    for (const auto& ev : history.events)
      if (ev.kind == EventKind::self_intersection) return exit_self_intersection;
    return exit_ok;
  } catch (const McflabError& e) {
    return map_mcflab_error(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_failure;
  }
}

int cmd_probe(const std::string& history_dir, const std::string& config_path) {
  try {
    FlowHistory history = read_history(history_dir);
    Config cfg = Config::parse_file(config_path);
    std::vector<DensityProbe> probes = parse_probes(cfg);
    if (probes.empty()) throw ConfigError("no probes configured");
    int n = hypersurface_dim(history.snapshots.front().geometry);

    int idx = 0;
    for (const auto& probe : probes) {
      ++idx;
      std::vector<DensitySample> series;
      double violation = -kInf;
      if (probe.r_grid.size() >= 4) {
        MonotonicityReport rep = monotonicity_report(history, probe);
        series = rep.series;
        violation = rep.max_violation;
      } else {
        series = gaussian_density(history, probe);
      }
      for (const auto& s : series)
        std::cout << "probe " << idx << " r=" << format_double(s.r_requested)
                  << " r_eff=" << format_double(s.r_effective)
                  << " theta=" << format_double(s.theta)
                  << " defect=" << format_double(s.defect) << "\n";
      if (std::isfinite(violation))
        std::cout << "probe " << idx
                  << " max_violation=" << format_double(violation) << "\n";
      TangentClass cls = classify_tangent_flow(series.front().theta, n);
      std::cout << "probe " << idx << " label=" << tangent_label_name(cls.label)
                << " confidence=" << format_double(cls.confidence) << "\n";
    }
    return exit_ok;
  } catch (const McflabError& e) {
    return map_mcflab_error(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_failure;
  }
}

int cmd_oracle(const std::string& name, const std::vector<double>& params,
               const std::string& out_dir) {
  try {
    auto need = [&](std::size_t k) {
      if (params.size() != k)
        throw ConfigError("oracle " + name + " needs " + std::to_string(k) +
                          " parameters");
    };
    std::ostringstream out;
    if (name == "sphere-radius") {
      need(3);
      SphereSolution sol{params[0], static_cast<int>(params[1])};
      out << "radius " << format_double(sol.radius(params[2])) << "\n";
    } else if (name == "sphere-extinction") {
      need(2);
      SphereSolution sol{params[0], static_cast<int>(params[1])};
      out << "extinction_time " << format_double(sol.extinction_time())
          << "\n";
    } else if (name == "cylinder-radius") {
      need(3);
      CylinderSolution sol{params[0], static_cast<int>(params[1]), 1};
      out << "radius " << format_double(sol.radius(params[2])) << "\n";
    } else if (name == "grim-reaper-height") {
      need(2);
      if (std::abs(params[1]) >= M_PI / 2.0)
        throw ConfigError("grim reaper height needs |p| < pi/2");
      out << "height " << format_double(params[0] - std::log(std::cos(params[1])))
          << "\n";
    } else if (name == "reference-densities") {
      need(1);
      for (const auto& ref : reference_densities(static_cast<int>(params[0])))
        out << tangent_label_name(ref.label) << " "
            << format_double(ref.theta) << "\n";
    } else {
      throw ConfigError("unknown oracle '" + name + "'");
    }
    std::cout << out.str();
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      std::ofstream f(fs::path(out_dir) / "oracle.txt");
      if (!f) throw ConfigError("cannot write oracle.txt under " + out_dir);
      f << out.str();
    }
    return exit_ok;
  } catch (const McflabError& e) {
    return map_mcflab_error(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_failure;
  }
}

int cmd_compare(const std::string& history_dir, const std::string& oracle_name,
                const std::vector<double>& params, double tolerance,
                const std::string& oracle_dir) {
  try {
    DenseTable run = read_dense_csv(history_dir);
    if (run.rows.empty()) throw ConfigError("empty dense series");
    double worst = 0.0;

    if (!oracle_dir.empty()) {
      DenseTable ref = read_dense_csv(oracle_dir);
      if (ref.rows.size() != run.rows.size()) {
        std::cerr << "time grids differ in length (" << run.rows.size()
                  << " vs " << ref.rows.size() << ")\n";
        return exit_grid_mismatch;
      }
      for (std::size_t i = 0; i < run.rows.size(); ++i) {
        double ta = run.rows[i][0], tb = ref.rows[i][0];
        if (std::abs(ta - tb) > 1e-9 * std::max(1.0, std::abs(ta))) {
          std::cerr << "time grids mismatch at row " << i << "\n";
          return exit_grid_mismatch;
        }
        double a = run.rows[i][1], b = ref.rows[i][1];
        worst = std::max(worst,
                         std::abs(a - b) / std::max(1e-300, std::abs(b)));
      }
    } else if (oracle_name == "sphere-area" || oracle_name == "sphere-volume") {
      if (params.size() != 2)
        throw ConfigError("oracle " + oracle_name + " needs R0 and n");
      SphereSolution sol{params[0], static_cast<int>(params[1])};
      bool volume = oracle_name == "sphere-volume";
      for (const auto& row : run.rows) {
        double r = sol.radius(row[0]);
        double exact = volume
                           ? unit_ball_volume(sol.n + 1) * std::pow(r, sol.n + 1)
                           : unit_sphere_area(sol.n) * std::pow(r, sol.n);
        double got = volume ? row[2] : row[1];
        worst = std::max(worst, std::abs(got - exact) / exact);
      }
    } else {
      throw ConfigError("unknown comparison oracle '" + oracle_name + "'");
    }
    std::cout << "max_rel_err " << format_double(worst) << "\n";
    return worst <= tolerance ? exit_ok : exit_failure;
  } catch (const McflabError& e) {
    return map_mcflab_error(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_failure;
  }
}

}  // namespace mcflab
