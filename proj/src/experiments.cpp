#include "pdtune/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <stdexcept>

#include "pdtune/errors.hpp"
#include "pdtune/population_eval.hpp"
#include "pdtune/rollout.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace pdtune {
namespace {

std::mutex progress_mutex;

std::string member_file(int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "member_%03d.csv", k);
  return buf;
}

std::string duration_label(double d) {
  return format_double(d) + "s";
}

std::uint64_t base_seed(const ExperimentConfig& cfg, const RunOptions& opts) {
  return opts.seed.value_or(cfg.ga.rng_seed);
}

ExperimentConfig resolved(const ExperimentConfig& cfg, const RunOptions& opts) {
  ExperimentConfig out = cfg;
  out.ga.rng_seed = base_seed(cfg, opts);
  return out;
}

json objective_json(const ObjectiveVector& v) { return json{{"f_acc", v.f_acc}, {"f_t", v.f_t}}; }

void write_run_manifest(const RunOptions& opts, const ExperimentConfig& cfg,
                        const std::string& command, json results) {
  json doc{{"command", command},
           {"tool_version", std::string(kToolVersion)},
           {"config", to_json(resolved(cfg, opts))},
           {"results", std::move(results)}};
  atomic_write(opts.out_dir / "run_manifest.json", doc.dump(2) + "\n", opts.overwrite);
}

// One GA run with its history captured as CSV text.
struct GaRun {
  GaResult result;
  std::string history_csv;
};

GaRun run_ga(const ArmModel& model, const std::vector<JointTrajectory>& trajs, const GaConfig& ga,
             const std::string& label, std::ostream* progress) {
  CsvWriter history({"generation", "evaluations", "front_size", "hypervolume"});
  auto sink = [&](const GenerationReport& r) {
    history.add_row({std::to_string(r.generation), std::to_string(r.evaluations),
                     std::to_string(r.front_size), format_double(r.hypervolume)});
    if (progress) {
      const std::lock_guard lock(progress_mutex);
      *progress << label << " generation " << r.generation << " evaluations " << r.evaluations
                << " front " << r.front_size << " hypervolume " << r.hypervolume << '\n';
    }
  };
  GaRun run;
  run.result = tune_gains(model, trajs, ga, sink);
  run.history_csv = history.str();
  return run;
}

double best_accuracy(const ParetoFront& front) {
  double best = kPenalty;
  for (const auto& p : front.points) {
    if (!is_penalty(p)) best = std::min(best, p.f_acc);
  }
  return best;
}

// Re-simulates each genome of `front` on `traj` and keeps the non-dominated
// subset.
ParetoFront reevaluate(const ArmModel& model, const JointTrajectory& traj, const ParetoFront& front,
                       const GainBounds& bounds) {
  std::vector<ObjectiveVector> pts;
  for (const auto& g : front.genomes) pts.push_back(evaluate(model, traj, decode_gains(g, bounds)));
  return extract_front(pts, front.genomes);
}

std::size_t evaluations_to_convergence(const GaResult& r, int population) {
  if (r.converged_at_generation) {
    return static_cast<std::size_t>(population) *
           static_cast<std::size_t>(*r.converged_at_generation + 1);
  }
  return r.evaluations_used;
}

}  // namespace

GaResult tune_gains(const ArmModel& model, const std::vector<JointTrajectory>& trajectories,
                    const GaConfig& ga, const ProgressSink& progress) {
  if (trajectories.empty()) throw std::invalid_argument("tune_gains needs a trajectory");
  const GainBounds bounds = ga.gain_bounds;
  const GenomeEvaluator evaluator = [&model, &trajectories, bounds](std::span<const double> genes) {
    const Gains gains = decode_gains(genes, bounds);
    return trajectories.size() == 1 ? evaluate(model, trajectories.front(), gains)
                                    : evaluate_mean(model, trajectories, gains);
  };
  return nsga2_run(evaluator, 2 * static_cast<std::size_t>(model.n_links()), ga, progress);
}

std::vector<FrontRow> front_rows(const ParetoFront& front, const GainBounds& bounds) {
  std::vector<FrontRow> rows;
  for (std::size_t i = 0; i < front.size(); ++i) {
    rows.push_back({front.points[i], decode_gains(front.genomes.at(i), bounds)});
  }
  return rows;
}

JointTrajectory build_joint_trajectory(const ExperimentConfig& cfg, const TrajectorySpec& spec) {
  return to_joint_setpoints(cfg.model, generate(spec, cfg.model, cfg.dt, cfg.workspace_margin),
                            spec.branch);
}

TuneSummary cmd_tune(const ExperimentConfig& cfg, const std::string& trajectory_id,
                     const RunOptions& opts) {
  const TrajectorySpec& spec = cfg.trajectory(trajectory_id);
  const std::uint64_t seed = base_seed(cfg, opts);
  GaConfig ga = cfg.ga;
  ga.rng_seed = seed;
  ga.jobs = opts.jobs;

  const std::vector<JointTrajectory> trajs{build_joint_trajectory(cfg, spec)};
  GaRun run = run_ga(cfg.model, trajs, ga, "[tune " + trajectory_id + "]", opts.progress);
  TuneSummary summary{std::move(run.result), {}};
  summary.rows = front_rows(summary.result.front, ga.gain_bounds);

  const int n = cfg.model.n_links();
  write_front(summary.rows, n, opts.out_dir / "front.csv", opts.overwrite);
  atomic_write(opts.out_dir / "history.csv", run.history_csv, opts.overwrite);

  std::vector<std::optional<RolloutLog>> logs(summary.rows.size());
  parallel_for_index(logs.size(), opts.jobs, [&](std::size_t k) {
    try {
      logs[k] = simulate(cfg.model, trajs.front(), summary.rows[k].gains);
    } catch (const DivergedRollout&) {
      // penalty members have no trajectory worth recording
    }
  });
  for (std::size_t k = 0; k < logs.size(); ++k) {
    if (!logs[k]) continue;
    logs[k]->meta.seed = seed;
    RunManifest m;
    m.model = cfg.model;
    m.trajectory_params = spec.params();
    m.objectives = ObjectiveVector{accuracy_objective(*logs[k]), torque_objective(*logs[k])};
    write_rollout(*logs[k], m, opts.out_dir / "rollouts" / member_file(static_cast<int>(k)),
                  opts.overwrite);
  }

  const auto& r = summary.result;
  write_run_manifest(
      opts, cfg, "tune",
      {{"trajectory", trajectory_id},
       {"seed", seed},
       {"evaluations_used", r.evaluations_used},
       {"generations_run", r.generations_run},
       {"converged_at_generation",
        r.converged_at_generation ? json(*r.converged_at_generation) : json(nullptr)},
       {"hypervolume_reference", objective_json(r.hv_reference)},
       {"final_hypervolume", r.hv_history.back()},
       {"front_size", r.front.size()}});
  return summary;
}

PopsweepSummary cmd_popsweep(const ExperimentConfig& cfg, const RunOptions& opts) {
  const TrajectorySpec& spec = cfg.trajectory(cfg.popsweep_trajectory);
  const std::vector<JointTrajectory> trajs{build_joint_trajectory(cfg, spec)};
  const std::uint64_t seed0 = base_seed(cfg, opts);

  struct Job {
    int population;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const int size : cfg.popsweep_sizes) {
    for (int rep = 0; rep < cfg.replicates; ++rep) jobs.push_back({size, seed0 + static_cast<std::uint64_t>(rep)});
  }

  std::vector<GaRun> runs(jobs.size());
  parallel_for_index(jobs.size(), opts.jobs, [&](std::size_t i) {
    GaConfig ga = cfg.ga;
    ga.population_size = jobs[i].population;
    ga.rng_seed = jobs[i].seed;
    ga.jobs = 1;
    runs[i] = run_ga(cfg.model, trajs, ga,
                     "[popsweep pop " + std::to_string(jobs[i].population) + " seed " +
                         std::to_string(jobs[i].seed) + "]",
                     opts.progress);
  });

  std::vector<ParetoFront> fronts;
  for (const auto& run : runs) fronts.push_back(run.result.front);
  PopsweepSummary summary;
  summary.reference = reference_point(fronts);

  CsvWriter csv({"population_size", "seed", "evaluations_to_convergence", "final_hypervolume",
                 "converged"});
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& r = runs[i].result;
    PopsweepRow row{jobs[i].population, jobs[i].seed,
                    evaluations_to_convergence(r, jobs[i].population),
                    hypervolume_2d(r.front, summary.reference), r.converged_at_generation.has_value()};
    csv.add_row({std::to_string(row.population_size), std::to_string(row.seed),
                 std::to_string(row.evaluations_to_convergence), format_double(row.final_hypervolume),
                 row.converged ? "1" : "0"});
    summary.rows.push_back(row);

    const fs::path dir = opts.out_dir / ("pop_" + std::to_string(jobs[i].population)) /
                         ("seed_" + std::to_string(jobs[i].seed));
    write_front(front_rows(r.front, cfg.ga.gain_bounds), cfg.model.n_links(), dir / "front.csv",
                opts.overwrite);
    atomic_write(dir / "history.csv", runs[i].history_csv, opts.overwrite);
  }
  atomic_write(opts.out_dir / "summary.csv", csv.str(), opts.overwrite);
  write_run_manifest(opts, cfg, "popsweep",
                     {{"trajectory", cfg.popsweep_trajectory},
                      {"reference_point", objective_json(summary.reference)},
                      {"reference_margin", kReferenceMargin}});
  return summary;
}

GenericVsSpecificSummary cmd_generic_vs_specific(const ExperimentConfig& cfg,
                                                 const RunOptions& opts) {
  std::vector<std::string> ids = cfg.gvs_trajectories;
  if (ids.empty()) {
    for (const auto& s : cfg.trajectories) ids.push_back(s.id);
  }
  if (ids.size() < 2) {
    throw ConfigError("generic_vs_specific.trajectories", "needs at least two trajectories");
  }
  const TrajectorySpec& target_spec = cfg.trajectory(cfg.gvs_target);
  std::vector<JointTrajectory> generic_set;
  for (const auto& id : ids) generic_set.push_back(build_joint_trajectory(cfg, cfg.trajectory(id)));
  const std::vector<JointTrajectory> target{build_joint_trajectory(cfg, target_spec)};
  const std::uint64_t seed0 = base_seed(cfg, opts);
  const auto reps = static_cast<std::size_t>(cfg.replicates);

  // Even index: specific run, odd index: generic run.
  std::vector<GaRun> runs(2 * reps);
  parallel_for_index(runs.size(), opts.jobs, [&](std::size_t i) {
    GaConfig ga = cfg.ga;
    ga.rng_seed = seed0 + i / 2;
    ga.jobs = 1;
    const bool specific = i % 2 == 0;
    runs[i] = run_ga(cfg.model, specific ? target : generic_set, ga,
                     std::string(specific ? "[specific" : "[generic") + " seed " +
                         std::to_string(ga.rng_seed) + "]",
                     opts.progress);
  });

  GenericVsSpecificSummary summary;
  summary.generic_fronts.resize(reps);
  parallel_for_index(reps, opts.jobs, [&](std::size_t r) {
    summary.generic_fronts[r] =
        reevaluate(cfg.model, target.front(), runs[2 * r + 1].result.front, cfg.ga.gain_bounds);
  });
  for (std::size_t r = 0; r < reps; ++r) summary.specific_fronts.push_back(runs[2 * r].result.front);

  std::vector<ParetoFront> all = summary.specific_fronts;
  all.insert(all.end(), summary.generic_fronts.begin(), summary.generic_fronts.end());
  summary.reference = reference_point(all);

  CsvWriter csv({"seed", "specific_hypervolume", "generic_hypervolume", "specific_best_accuracy",
                 "generic_best_accuracy", "ref_f_acc", "ref_f_t"});
  for (std::size_t r = 0; r < reps; ++r) {
    const auto& spec_front = summary.specific_fronts[r];
    const auto& gen_front = summary.generic_fronts[r];
    GenericVsSpecificRow row{seed0 + r,
                             hypervolume_2d(spec_front, summary.reference),
                             hypervolume_2d(gen_front, summary.reference),
                             best_accuracy(spec_front),
                             best_accuracy(gen_front),
                             summary.reference};
    csv.add_row({std::to_string(row.seed), format_double(row.specific_hypervolume),
                 format_double(row.generic_hypervolume), format_double(row.specific_best_accuracy),
                 format_double(row.generic_best_accuracy), format_double(row.reference.f_acc),
                 format_double(row.reference.f_t)});
    summary.rows.push_back(row);

    const fs::path dir = opts.out_dir / ("seed_" + std::to_string(row.seed));
    write_front(front_rows(spec_front, cfg.ga.gain_bounds), cfg.model.n_links(),
                dir / "specific_front.csv", opts.overwrite);
    write_front(front_rows(gen_front, cfg.ga.gain_bounds), cfg.model.n_links(),
                dir / "generic_front.csv", opts.overwrite);
  }
  atomic_write(opts.out_dir / "summary.csv", csv.str(), opts.overwrite);
  write_run_manifest(opts, cfg, "generic-vs-specific",
                     {{"target", cfg.gvs_target},
                      {"generic_trajectories", ids},
                      {"reference_point", objective_json(summary.reference)},
                      {"reference_margin", kReferenceMargin}});
  return summary;
}

SpeedStudySummary cmd_speed_study(const ExperimentConfig& cfg, const RunOptions& opts) {
  const TrajectorySpec& base = cfg.trajectory(cfg.speed_trajectory);
  const auto& durations = cfg.speed_durations;
  const std::size_t nd = durations.size();
  std::vector<JointTrajectory> trajs;
  for (const double d : durations) {
    TrajectorySpec spec = base;
    spec.duration = d;
    trajs.push_back(build_joint_trajectory(cfg, spec));
  }
  const std::uint64_t seed0 = base_seed(cfg, opts);
  const auto reps = static_cast<std::size_t>(cfg.replicates);

  // Run index = rep * nd + tuned duration index.
  std::vector<GaRun> runs(reps * nd);
  parallel_for_index(runs.size(), opts.jobs, [&](std::size_t i) {
    GaConfig ga = cfg.ga;
    ga.rng_seed = seed0 + i / nd;
    ga.jobs = 1;
    runs[i] = run_ga(cfg.model, {trajs[i % nd]}, ga,
                     "[speed " + duration_label(durations[i % nd]) + " seed " +
                         std::to_string(ga.rng_seed) + "]",
                     opts.progress);
  });

  // Cell index = run index * nd + evaluated duration index.
  std::vector<ParetoFront> cell_fronts(runs.size() * nd);
  parallel_for_index(cell_fronts.size(), opts.jobs, [&](std::size_t c) {
    cell_fronts[c] = reevaluate(cfg.model, trajs[c % nd], runs[c / nd].result.front,
                                cfg.ga.gain_bounds);
  });

  SpeedStudySummary summary;
  summary.reference = reference_point(cell_fronts);
  CsvWriter csv({"seed", "tuned_duration", "evaluated_duration", "hypervolume",
                 "best_accuracy_error"});
  for (std::size_t c = 0; c < cell_fronts.size(); ++c) {
    const std::size_t run = c / nd;
    SpeedCell cell{seed0 + run / nd, durations[run % nd], durations[c % nd],
                   hypervolume_2d(cell_fronts[c], summary.reference), best_accuracy(cell_fronts[c])};
    csv.add_row({std::to_string(cell.seed), format_double(cell.tuned_duration),
                 format_double(cell.evaluated_duration), format_double(cell.hypervolume),
                 format_double(cell.best_accuracy_error)});
    summary.cells.push_back(cell);
  }
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const fs::path dir = opts.out_dir / ("seed_" + std::to_string(seed0 + i / nd)) /
                         ("tuned_" + duration_label(durations[i % nd]));
    write_front(front_rows(runs[i].result.front, cfg.ga.gain_bounds), cfg.model.n_links(),
                dir / "front.csv", opts.overwrite);
    atomic_write(dir / "history.csv", runs[i].history_csv, opts.overwrite);
  }
  atomic_write(opts.out_dir / "matrix.csv", csv.str(), opts.overwrite);
  write_run_manifest(opts, cfg, "speed-study",
                     {{"trajectory", cfg.speed_trajectory},
                      {"durations", durations},
                      {"reference_point", objective_json(summary.reference)},
                      {"reference_margin", kReferenceMargin}});
  return summary;
}

std::vector<DatasetEntry> cmd_emit_dataset(const ExperimentConfig& cfg, const RunOptions& opts) {
  std::vector<std::string> ids = cfg.dataset_trajectories;
  if (ids.empty()) {
    for (const auto& s : cfg.trajectories) ids.push_back(s.id);
  }
  const std::uint64_t seed = base_seed(cfg, opts);
  const int n = cfg.model.n_links();

  std::vector<DatasetEntry> entries;
  for (const auto& id : ids) {
    const TrajectorySpec& spec = cfg.trajectory(id);
    const JointTrajectory traj = build_joint_trajectory(cfg, spec);

    const fs::path front_dir = opts.out_dir / "fronts" / id;
    if (!fs::exists(front_dir / "front.csv")) {
      GaConfig ga = cfg.ga;
      ga.rng_seed = seed;
      ga.jobs = opts.jobs;
      GaRun run = run_ga(cfg.model, {traj}, ga, "[emit-dataset " + id + "]", opts.progress);
      write_front(front_rows(run.result.front, ga.gain_bounds), n, front_dir / "front.csv", true);
      atomic_write(front_dir / "history.csv", run.history_csv, true);
    }
    const auto rows = read_front(front_dir / "front.csv");

    std::vector<std::size_t> members;
    const auto limit = static_cast<std::size_t>(cfg.dataset_max_members);
    if (limit == 0 || limit >= rows.size()) {
      for (std::size_t k = 0; k < rows.size(); ++k) members.push_back(k);
    } else if (limit == 1) {
      members.push_back(0);
    } else {
      for (std::size_t k = 0; k < limit; ++k) {
        members.push_back(static_cast<std::size_t>(std::llround(
            static_cast<double>(k) * static_cast<double>(rows.size() - 1) / static_cast<double>(limit - 1))));
      }
    }

    std::vector<std::optional<RolloutLog>> logs(members.size());
    parallel_for_index(members.size(), opts.jobs, [&](std::size_t k) {
      try {
        logs[k] = simulate(cfg.model, traj, rows[members[k]].gains);
      } catch (const DivergedRollout&) {
      }
    });
    for (std::size_t k = 0; k < members.size(); ++k) {
      if (!logs[k]) continue;
      logs[k]->meta.seed = seed;
      const ObjectiveVector obj{accuracy_objective(*logs[k]), torque_objective(*logs[k])};
      RunManifest m;
      m.model = cfg.model;
      m.trajectory_params = spec.params();
      m.objectives = obj;
      const fs::path rel = fs::path("dataset") / id / member_file(static_cast<int>(members[k]));
      const RunManifest written = write_rollout(*logs[k], m, opts.out_dir / rel, opts.overwrite);
      entries.push_back({id, static_cast<int>(members[k]), rows[members[k]].gains, obj,
                         rel.generic_string(), written.checksum});
    }
  }

  std::vector<std::string> header{"trajectory", "member"};
  for (const char* prefix : {"kp_", "kd_"}) {
    for (int j = 1; j <= n; ++j) header.push_back(prefix + std::to_string(j));
  }
  for (const char* col : {"f_acc", "f_t", "file", "checksum"}) header.emplace_back(col);
  CsvWriter index(header);
  for (const auto& e : entries) {
    std::vector<std::string> cells{e.trajectory, std::to_string(e.member)};
    for (int j = 0; j < n; ++j) cells.push_back(format_double(e.gains.kp(j)));
    for (int j = 0; j < n; ++j) cells.push_back(format_double(e.gains.kd(j)));
    cells.push_back(format_double(e.objectives.f_acc));
    cells.push_back(format_double(e.objectives.f_t));
    cells.push_back(e.file);
    cells.push_back(e.checksum);
    index.add_row(cells);
  }
  atomic_write(opts.out_dir / "index.csv", index.str(), opts.overwrite);
  write_run_manifest(opts, cfg, "emit-dataset",
                     {{"trajectories", ids}, {"seed", seed}, {"rollouts", entries.size()}});
  return entries;
}

}  // namespace pdtune
