#pragma once

// Experiment commands behind the CLI. Each writes its artifacts under
// RunOptions::out_dir together with run_manifest.json (resolved config,
// seed, tool version and command-specific results) and returns a summary.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pdtune/config.hpp"
#include "pdtune/dataset_io.hpp"
#include "pdtune/moga.hpp"
#include "pdtune/pareto.hpp"

namespace pdtune {

struct RunOptions {
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;  // overrides ga.rng_seed
  int jobs = 1;
  bool overwrite = false;
  std::ostream* progress = nullptr;  // per-generation lines; null silences
};

/// GA over PD gains with objectives averaged over `trajectories` (a single
/// trajectory gives the specific controller).
GaResult tune_gains(const ArmModel& model, const std::vector<JointTrajectory>& trajectories,
                    const GaConfig& ga, const ProgressSink& progress = {});

/// Decoded gains of every front member, paired with its objectives.
std::vector<FrontRow> front_rows(const ParetoFront& front, const GainBounds& bounds);

JointTrajectory build_joint_trajectory(const ExperimentConfig& cfg, const TrajectorySpec& spec);

struct TuneSummary {
  GaResult result;
  std::vector<FrontRow> rows;
};

/// front.csv, history.csv, rollouts/member_NNN.csv (+ manifests).
TuneSummary cmd_tune(const ExperimentConfig& cfg, const std::string& trajectory_id,
                     const RunOptions& opts);

struct PopsweepRow {
  int population_size = 0;
  std::uint64_t seed = 0;
  std::size_t evaluations_to_convergence = 0;
  double final_hypervolume = 0.0;
  bool converged = false;
};

struct PopsweepSummary {
  std::vector<PopsweepRow> rows;
  ObjectiveVector reference;
};

/// summary.csv plus pop_<N>/seed_<s>/{front,history}.csv.
PopsweepSummary cmd_popsweep(const ExperimentConfig& cfg, const RunOptions& opts);

struct GenericVsSpecificRow {
  std::uint64_t seed = 0;
  double specific_hypervolume = 0.0;
  double generic_hypervolume = 0.0;
  double specific_best_accuracy = 0.0;
  double generic_best_accuracy = 0.0;
  ObjectiveVector reference;
};

struct GenericVsSpecificSummary {
  std::vector<GenericVsSpecificRow> rows;
  ObjectiveVector reference;
  std::vector<ParetoFront> specific_fronts;  // per seed, on the target
  std::vector<ParetoFront> generic_fronts;   // per seed, re-evaluated on the target
};

/// summary.csv plus seed_<s>/{specific,generic}_front.csv.
GenericVsSpecificSummary cmd_generic_vs_specific(const ExperimentConfig& cfg,
                                                 const RunOptions& opts);

struct SpeedCell {
  std::uint64_t seed = 0;
  double tuned_duration = 0.0;
  double evaluated_duration = 0.0;
  double hypervolume = 0.0;
  double best_accuracy_error = 0.0;
};

struct SpeedStudySummary {
  std::vector<SpeedCell> cells;
  ObjectiveVector reference;
};

/// matrix.csv plus seed_<s>/tuned_<d>s/front.csv.
SpeedStudySummary cmd_speed_study(const ExperimentConfig& cfg, const RunOptions& opts);

struct DatasetEntry {
  std::string trajectory;
  int member = 0;
  Gains gains;
  ObjectiveVector objectives;
  std::string file;  // relative to out_dir
  std::string checksum;
};

/// fronts/<id>/front.csv (tuned when absent), dataset/<id>/member_NNN.csv
/// (+ manifests) and index.csv.
std::vector<DatasetEntry> cmd_emit_dataset(const ExperimentConfig& cfg, const RunOptions& opts);

}  // namespace pdtune
