#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcflab/run_driver.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mcflab: mean curvature flow laboratory"};
  app.require_subcommand(1);

  std::string config, out, history, oracle_name, against;
  bool frames = false;
  long long stride = 0;
  std::vector<double> params;
  double tol = 1e-6;

  CLI::App* run = app.add_subcommand("run", "evolve a configured experiment");
  run->add_option("--config", config, "experiment config file")->required();
  run->add_option("--out", out, "output directory (overrides the config)");
  run->add_flag("--frames", frames, "also write SVG frames");
  run->add_option("--stride", stride, "override the snapshot record stride");

  CLI::App* probe =
      app.add_subcommand("probe", "evaluate density probes on a finished run");
  probe->add_option("--history", history, "run directory")->required();
  probe->add_option("--config", config, "config file with [probe.*] sections")
      ->required();

  CLI::App* oracle =
      app.add_subcommand("oracle", "print closed-form reference values");
  oracle->add_option("name", oracle_name, "oracle name")->required();
  oracle->add_option("--params", params, "numeric oracle parameters");
  oracle->add_option("--out", out, "also write the values to this directory");

  CLI::App* compare =
      app.add_subcommand("compare", "compare a run against a reference");
  compare->add_option("--history", history, "run directory")->required();
  compare->add_option("--oracle", oracle_name,
                      "closed-form oracle (e.g. sphere-area)");
  compare->add_option("--against", against,
                      "reference run directory (time grids must match)");
  compare->add_option("--params", params, "oracle parameters");
  compare->add_option("--tol", tol, "relative tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : mcflab::exit_config;
  }

  if (run->parsed()) return mcflab::cmd_run(config, out, frames, stride);
  if (probe->parsed()) return mcflab::cmd_probe(history, config);
  if (oracle->parsed()) return mcflab::cmd_oracle(oracle_name, params, out);
  if (compare->parsed())
    return mcflab::cmd_compare(history, oracle_name, params, tol, against);
  return mcflab::exit_config;
}
