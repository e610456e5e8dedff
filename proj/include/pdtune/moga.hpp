#pragma once

// Real-coded NSGA-II over normalized genomes in [0, 1]^d.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pdtune/control.hpp"
#include "pdtune/objectives.hpp"
#include "pdtune/pareto.hpp"
#include "pdtune/random.hpp"

namespace pdtune {

struct Genome {
  std::vector<double> genes;

  friend bool operator==(const Genome&, const Genome&) = default;
};

struct GainBounds {
  double kp_min = 1.0;
  double kp_max = 1e3;
  double kd_min = 1e-2;
  double kd_max = 1e2;
};

/// Genes [kp_1..kp_n, kd_1..kd_n], each mapped log-linearly onto its bounds.
Gains decode_gains(std::span<const double> genes, const GainBounds& bounds);

/// Inverse of decode_gains (genes clipped to [0, 1]).
Genome encode_gains(const Gains& gains, const GainBounds& bounds);

struct GaConfig {
  int population_size = 30;
  int max_generations = 60;
  double crossover_probability = 0.9;
  double sbx_eta = 15.0;
  std::optional<double> mutation_probability;  // defaults to 1 / num_genes
  double mutation_eta = 20.0;
  GainBounds gain_bounds;
  int convergence_window = 10;
  double convergence_epsilon = 1e-3;
  std::uint64_t rng_seed = 1;
  /// Worker threads for offspring evaluation; 1 selects the serial kernel,
  /// 0 lets OpenMP decide.
  int jobs = 1;

  /// Throws std::invalid_argument.
  void validate() const;
};

struct Individual {
  Genome genome;
  std::optional<ObjectiveVector> objectives;
  int rank = -1;
  double crowding = 0.0;
};

/// Indices grouped by front; rank fields of `population` are written back.
/// Throws ContractViolation if any individual lacks objectives.
std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::vector<Individual>& population);

/// Crowding distance per member, in input order. Boundary members of each
/// objective get +infinity.
std::vector<double> crowding_distance(std::span<const ObjectiveVector> front);

/// Simulated binary crossover. With probability `crossover_probability` each
/// gene pair is recombined, otherwise the parents are copied. Children are
/// clipped to [0, 1].
std::pair<Genome, Genome> sbx_crossover(const Genome& p1, const Genome& p2, double eta,
                                        double crossover_probability, Rng& rng);

/// Unclipped SBX children for a single gene pair given the uniform draw `u`.
std::pair<double, double> sbx_gene(double x1, double x2, double eta, double u);

Genome polynomial_mutation(const Genome& g, double eta, double pm, Rng& rng);

/// True iff the last `window` entries exist and their spread is at most
/// epsilon * max(|last|, 1e-12).
bool convergence_check(std::span<const double> hv_history, int window, double epsilon);

/// (mu + lambda) survivor selection: whole fronts in rank order; the front
/// that overflows is pruned by repeatedly removing its most crowded member. Ranks and crowding are
/// written to `merged` and carried by the survivors.
std::vector<Individual> environmental_selection(std::vector<Individual>& merged,
                                                std::size_t size);

using GenomeEvaluator = std::function<ObjectiveVector(std::span<const double>)>;

struct GenerationReport {
  int generation = 0;
  std::size_t evaluations = 0;
  std::size_t front_size = 0;
  double hypervolume = 0.0;
};

using ProgressSink = std::function<void(const GenerationReport&)>;

struct GaResult {
  ParetoFront front;  // genomes populated
  std::size_t evaluations_used = 0;
  std::vector<double> hv_history;  // entry 0 is the initial population
  std::optional<int> converged_at_generation;
  int generations_run = 0;
  ObjectiveVector hv_reference;
};

/// Reference point for in-run hypervolume: worst non-penalty objectives of
/// the initial population times kReferenceMargin.
ObjectiveVector run_reference_point(std::span<const Individual> initial);

/// Runs NSGA-II until convergence_check fires or max_generations is reached.
/// The evaluator must be safe to call concurrently when config.jobs != 1.
GaResult nsga2_run(const GenomeEvaluator& evaluator, std::size_t num_genes, const GaConfig& config,
                   const ProgressSink& progress = {});

}  // namespace pdtune
