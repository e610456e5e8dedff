// Serial vs OpenMP population evaluation on the default spiral rollout.

#include <benchmark/benchmark.h>

#include <vector>

#include "pdtune/config.hpp"
#include "pdtune/experiments.hpp"
#include "pdtune/population_eval.hpp"
#include "pdtune/random.hpp"
#include "pdtune/rollout.hpp"

using namespace pdtune;

namespace {

struct Fixture {
  ExperimentConfig cfg = default_config();
  JointTrajectory traj;
  GenomeEvaluator evaluator;
  std::vector<Individual> population;

  explicit Fixture(std::size_t size) {
    for (auto& t : cfg.trajectories) t.duration = 1.0;
    traj = build_joint_trajectory(cfg, cfg.trajectory("spiral"));
    evaluator = [this](std::span<const double> g) {
      return evaluate(cfg.model, traj, decode_gains(g, cfg.ga.gain_bounds));
    };
    Rng rng(7);
    population.resize(size);
    for (auto& ind : population) {
      ind.genome.genes.resize(4);
      for (auto& x : ind.genome.genes) x = rng.uniform(0.0, 1.0);
    }
  }

  std::vector<Individual> fresh() const { return population; }
};

void BM_Serial(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto pop = f.fresh();
    evaluate_population_serial(pop, f.evaluator);
    benchmark::DoNotOptimize(pop.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Parallel(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto pop = f.fresh();
    evaluate_population_parallel(pop, f.evaluator, 0);
    benchmark::DoNotOptimize(pop.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = default_thread_count();
}

}  // namespace

BENCHMARK(BM_Serial)->Arg(30)->Arg(80)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Parallel)->Arg(30)->Arg(80)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
