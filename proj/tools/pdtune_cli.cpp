// pdtune: multi-objective PD gain tuning for a simulated planar arm.
//
//   pdtune tune --config cfg.json --out runs/tune --trajectory spiral
//   pdtune popsweep | generic-vs-specific | speed-study | emit-dataset ...
//
// Exit codes: 0 success, 2 configuration/usage error, 1 runtime failure.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pdtune/config.hpp"
#include "pdtune/errors.hpp"
#include "pdtune/experiments.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bool overwrite = false;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "Experiment configuration (JSON)");
  cmd->add_option("--out", f.out, "Output directory (default: output_dir from the config)");
  cmd->add_option("--seed", f.seed, "Base seed; replicate r uses seed + r");
  cmd->add_option("--jobs", f.jobs, "Worker threads (1 = serial, 0 = all cores)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--overwrite", f.overwrite, "Replace existing output files");
  cmd->add_flag("--quiet", f.quiet, "Suppress per-generation progress on stderr");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-objective PD torque-controller tuning workbench"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string trajectory_id;
  auto* tune = app.add_subcommand("tune", "Tune gains on one trajectory");
  add_common(tune, flags);
  tune->add_option("--trajectory", trajectory_id, "Trajectory id (default: first configured)");
  auto* popsweep = app.add_subcommand("popsweep", "Population-size sweep");
  add_common(popsweep, flags);
  auto* gvs = app.add_subcommand("generic-vs-specific", "Generic vs trajectory-specific tuning");
  add_common(gvs, flags);
  auto* speed = app.add_subcommand("speed-study", "Trajectory-duration cross-evaluation");
  add_common(speed, flags);
  auto* emit = app.add_subcommand("emit-dataset", "Write torque/position/velocity rollouts");
  add_common(emit, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const pdtune::ExperimentConfig cfg =
        flags.config.empty() ? pdtune::default_config() : pdtune::load_config(flags.config);
    pdtune::RunOptions opts;
    opts.out_dir = flags.out.empty() ? std::filesystem::path(cfg.output_dir) : std::filesystem::path(flags.out);
    opts.seed = flags.seed;
    opts.jobs = flags.jobs;
    opts.overwrite = flags.overwrite;
    opts.progress = flags.quiet ? nullptr : &std::cerr;

    if (*tune) {
      const std::string id = trajectory_id.empty() ? cfg.trajectories.front().id : trajectory_id;
      const auto s = pdtune::cmd_tune(cfg, id, opts);
      std::cout << "front size " << s.result.front.size() << ", evaluations "
                << s.result.evaluations_used << ", written to " << opts.out_dir.string() << '\n';
    } else if (*popsweep) {
      const auto s = pdtune::cmd_popsweep(cfg, opts);
      std::cout << s.rows.size() << " runs, summary at " << (opts.out_dir / "summary.csv").string() << '\n';
    } else if (*gvs) {
      const auto s = pdtune::cmd_generic_vs_specific(cfg, opts);
      std::cout << s.rows.size() << " seeds, summary at " << (opts.out_dir / "summary.csv").string() << '\n';
    } else if (*speed) {
      const auto s = pdtune::cmd_speed_study(cfg, opts);
      std::cout << s.cells.size() << " cells, matrix at " << (opts.out_dir / "matrix.csv").string() << '\n';
    } else if (*emit) {
      const auto s = pdtune::cmd_emit_dataset(cfg, opts);
      std::cout << s.size() << " rollouts, index at " << (opts.out_dir / "index.csv").string() << '\n';
    }
  } catch (const pdtune::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
