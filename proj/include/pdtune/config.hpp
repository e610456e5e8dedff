#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdtune/moga.hpp"
#include "pdtune/plant.hpp"
#include "pdtune/trajectory.hpp"

namespace pdtune {

struct TrajectorySpec {
  std::string id;
  TrajectoryKind kind = TrajectoryKind::kSpiral;
  ElbowBranch branch = ElbowBranch::kDown;
  double duration = 5.0;
  CartesianPoint center{1.0, 0.3};
  // spiral
  double r0 = 0.05;
  double r1 = 0.4;
  double turns = 2.0;
  // pyramid
  double half_width = 0.5;
  double height = 0.5;
  int n_teeth = 2;
  // random
  std::uint64_t seed = 7;
  int n_waypoints = 6;

  /// Kind-specific parameters, as recorded in rollout manifests.
  [[nodiscard]] nlohmann::json params() const;
};

CartesianTrajectory generate(const TrajectorySpec& spec, const ArmModel& model, double dt,
                             double workspace_margin);

struct ExperimentConfig {
  ArmModel model = ArmModel::default_two_link();
  double dt = 0.002;
  double workspace_margin = 0.05;
  std::vector<TrajectorySpec> trajectories;
  GaConfig ga;
  int replicates = 5;

  std::vector<int> popsweep_sizes{10, 20, 30, 50, 80};
  std::string popsweep_trajectory = "spiral";

  std::string gvs_target = "pyramid";
  std::vector<std::string> gvs_trajectories;  // empty: all configured

  std::string speed_trajectory = "spiral";
  std::vector<double> speed_durations{3.0, 4.0, 5.0, 6.0};

  std::vector<std::string> dataset_trajectories;  // empty: all configured
  int dataset_max_members = 0;                    // 0: whole front

  std::string output_dir = "out";

  [[nodiscard]] const TrajectorySpec& trajectory(const std::string& id) const;
};

/// Defaults: two-link arm, 500 Hz, one spiral, one pyramid and one random
/// trajectory of 5 s each.
ExperimentConfig default_config();

/// Overlays `doc` on the defaults. Unknown keys and type errors raise
/// ConfigError naming the offending field path (e.g. "ga.sbx_eta").
ExperimentConfig parse_config(const nlohmann::json& doc);

ExperimentConfig load_config(const std::filesystem::path& path);

/// Fully resolved configuration, defaults included.
nlohmann::json to_json(const ExperimentConfig& cfg);

}  // namespace pdtune
