#pragma once

// Offspring evaluation kernels. The serial version is the reference the
// OpenMP version is tested against; both fill objectives by index, so the
// result never depends on completion order.

#include <cstddef>
#include <functional>
#include <span>

#include "pdtune/moga.hpp"

namespace pdtune {

/// Evaluates every individual that has no objectives yet.
void evaluate_population_serial(std::span<Individual> population, const GenomeEvaluator& evaluator);

/// OpenMP variant. `threads` <= 0 uses the OpenMP default. Exceptions thrown
/// by the evaluator are rethrown on the calling thread (lowest index first).
void evaluate_population_parallel(std::span<Individual> population,
                                  const GenomeEvaluator& evaluator, int threads);

/// Runs fn(i) for i in [0, n), in parallel when threads != 1.
void parallel_for_index(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// Number of threads OpenMP would use by default.
int default_thread_count();

}  // namespace pdtune
