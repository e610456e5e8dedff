#include "pdtune/population_eval.hpp"

#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pdtune {

void evaluate_population_serial(std::span<Individual> population, const GenomeEvaluator& evaluator) {
  for (auto& ind : population) {
    if (!ind.objectives) ind.objectives = evaluator(ind.genome.genes);
  }
}

namespace {

void omp_for_index(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long long>(n);
#ifdef _OPENMP
  const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(team)
#endif
  for (long long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

void parallel_for_index(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  omp_for_index(n, threads, fn);
}

void evaluate_population_parallel(std::span<Individual> population,
                                  const GenomeEvaluator& evaluator, int threads) {
  omp_for_index(population.size(), threads, [&](std::size_t i) {
    auto& ind = population[i];
    if (!ind.objectives) ind.objectives = evaluator(ind.genome.genes);
  });
}

int default_thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace pdtune
