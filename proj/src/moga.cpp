#include "pdtune/moga.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "pdtune/errors.hpp"
#include "pdtune/population_eval.hpp"

namespace pdtune {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_decode(double gene, double lo, double hi) {
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  return std::pow(10.0, a + std::clamp(gene, 0.0, 1.0) * (b - a));
}

double log_encode(double value, double lo, double hi) {
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  return std::clamp((std::log10(value) - a) / (b - a), 0.0, 1.0);
}

double clip01(double x) { return std::clamp(x, 0.0, 1.0); }

// Lower rank wins, then larger crowding, then a coin flip.
std::size_t tournament(const std::vector<Individual>& pop, Rng& rng) {
  const std::size_t a = rng.index(pop.size());
  const std::size_t b = rng.index(pop.size());
  const Individual& ia = pop[a];
  const Individual& ib = pop[b];
  if (ia.rank != ib.rank) return ia.rank < ib.rank ? a : b;
  if (ia.crowding != ib.crowding) return ia.crowding > ib.crowding ? a : b;
  return rng.coin() ? a : b;
}

void assign_crowding(std::vector<Individual>& pop, const std::vector<std::size_t>& front) {
  std::vector<ObjectiveVector> objs;
  objs.reserve(front.size());
  for (const auto i : front) objs.push_back(*pop[i].objectives);
  const auto d = crowding_distance(objs);
  for (std::size_t k = 0; k < front.size(); ++k) pop[front[k]].crowding = d[k];
}

std::vector<ObjectiveVector> first_front_points(const std::vector<Individual>& pop) {
  std::vector<ObjectiveVector> pts;
  for (const auto& ind : pop) {
    if (ind.rank == 0) pts.push_back(*ind.objectives);
  }
  return pts;
}

void evaluate(std::vector<Individual>& pop, const GenomeEvaluator& evaluator, int jobs) {
  if (jobs == 1) {
    evaluate_population_serial(pop, evaluator);
  } else {
    evaluate_population_parallel(pop, evaluator, jobs);
  }
}

}  // namespace

Gains decode_gains(std::span<const double> genes, const GainBounds& bounds) {
  if (genes.size() % 2 != 0 || genes.empty()) {
    throw DimensionError("gain genome must hold one kp and one kd gene per joint");
  }
  const auto n = static_cast<Eigen::Index>(genes.size() / 2);
  Gains g{JointVector(n), JointVector(n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    g.kp(j) = log_decode(genes[static_cast<std::size_t>(j)], bounds.kp_min, bounds.kp_max);
    g.kd(j) = log_decode(genes[static_cast<std::size_t>(n + j)], bounds.kd_min, bounds.kd_max);
  }
  return g;
}

Genome encode_gains(const Gains& gains, const GainBounds& bounds) {
  Genome g;
  for (Eigen::Index j = 0; j < gains.kp.size(); ++j) {
    g.genes.push_back(log_encode(gains.kp(j), bounds.kp_min, bounds.kp_max));
  }
  for (Eigen::Index j = 0; j < gains.kd.size(); ++j) {
    g.genes.push_back(log_encode(gains.kd(j), bounds.kd_min, bounds.kd_max));
  }
  return g;
}

void GaConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("ga: " + msg); };
  if (population_size < 4 || population_size % 2 != 0) {
    fail("population_size must be even and >= 4");
  }
  if (max_generations < 0) fail("max_generations must be >= 0");
  auto prob = [&](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) fail(std::string(name) + " must lie in [0, 1]");
  };
  prob(crossover_probability, "crossover_probability");
  if (mutation_probability) prob(*mutation_probability, "mutation_probability");
  if (!(sbx_eta >= 0.0) || !(mutation_eta >= 0.0)) fail("distribution indices must be >= 0");
  if (!(gain_bounds.kp_min > 0.0 && gain_bounds.kp_max > gain_bounds.kp_min)) {
    fail("kp bounds must satisfy 0 < min < max");
  }
  if (!(gain_bounds.kd_min > 0.0 && gain_bounds.kd_max > gain_bounds.kd_min)) {
    fail("kd bounds must satisfy 0 < min < max");
  }
  if (convergence_window < 1) fail("convergence_window must be >= 1");
  if (!(convergence_epsilon >= 0.0)) fail("convergence_epsilon must be >= 0");
  if (jobs < 0) fail("jobs must be >= 0");
}

std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::vector<Individual>& population) {
  const std::size_t n = population.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!population[i].objectives) {
      throw ContractViolation("individual " + std::to_string(i) + " has not been evaluated");
    }
  }

  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<std::size_t> dominated_by(n, 0);
  std::vector<std::vector<std::size_t>> fronts(1);
  for (std::size_t p = 0; p < n; ++p) {
    const auto& op = *population[p].objectives;
    for (std::size_t q = 0; q < n; ++q) {
      const auto& oq = *population[q].objectives;
      if (dominates(op, oq)) {
        dominated[p].push_back(q);
      } else if (dominates(oq, op)) {
        ++dominated_by[p];
      }
    }
    if (dominated_by[p] == 0) {
      population[p].rank = 0;
      fronts[0].push_back(p);
    }
  }

  for (std::size_t k = 0; !fronts[k].empty(); ++k) {
    std::vector<std::size_t> next;
    for (const auto p : fronts[k]) {
      for (const auto q : dominated[p]) {
        if (--dominated_by[q] == 0) {
          population[q].rank = static_cast<int>(k + 1);
          next.push_back(q);
        }
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(next));
  }
  fronts.pop_back();
  return fronts;
}

std::vector<double> crowding_distance(std::span<const ObjectiveVector> front) {
  const std::size_t n = front.size();
  std::vector<double> dist(n, 0.0);
  if (n <= 2) {
    std::fill(dist.begin(), dist.end(), kInf);
    return dist;
  }
  auto accumulate = [&](auto primary, auto secondary) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double pa = primary(front[a]);
      const double pb = primary(front[b]);
      if (pa != pb) return pa < pb;
      return secondary(front[a]) < secondary(front[b]);
    });
    dist[order.front()] = kInf;
    dist[order.back()] = kInf;
    const double range = primary(front[order.back()]) - primary(front[order.front()]);
    if (!(range > 0.0)) return;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      dist[order[k]] += (primary(front[order[k + 1]]) - primary(front[order[k - 1]])) / range;
    }
  };
  const auto acc = [](const ObjectiveVector& v) { return v.f_acc; };
  const auto tor = [](const ObjectiveVector& v) { return v.f_t; };
  accumulate(acc, tor);
  accumulate(tor, acc);
  return dist;
}

std::pair<double, double> sbx_gene(double x1, double x2, double eta, double u) {
  const double exponent = 1.0 / (eta + 1.0);
  const double beta =
      u <= 0.5 ? std::pow(2.0 * u, exponent) : std::pow(1.0 / (2.0 * (1.0 - u)), exponent);
  return {0.5 * ((1.0 + beta) * x1 + (1.0 - beta) * x2),
          0.5 * ((1.0 - beta) * x1 + (1.0 + beta) * x2)};
}

std::pair<Genome, Genome> sbx_crossover(const Genome& p1, const Genome& p2, double eta,
                                        double crossover_probability, Rng& rng) {
  if (p1.genes.size() != p2.genes.size()) throw DimensionError("sbx: parent sizes differ");
  Genome c1 = p1;
  Genome c2 = p2;
  if (rng.uniform() >= crossover_probability) return {c1, c2};
  for (std::size_t i = 0; i < p1.genes.size(); ++i) {
    const auto [a, b] = sbx_gene(p1.genes[i], p2.genes[i], eta, rng.uniform());
    c1.genes[i] = clip01(a);
    c2.genes[i] = clip01(b);
  }
  return {c1, c2};
}

Genome polynomial_mutation(const Genome& g, double eta, double pm, Rng& rng) {
  Genome out = g;
  const double exponent = 1.0 / (eta + 1.0);
  for (double& x : out.genes) {
    if (rng.uniform() >= pm) continue;
    const double u = rng.uniform();
    const double delta = u < 0.5 ? std::pow(2.0 * u, exponent) - 1.0
                                 : 1.0 - std::pow(2.0 * (1.0 - u), exponent);
    x = clip01(x + delta);
  }
  return out;
}

bool convergence_check(std::span<const double> hv_history, int window, double epsilon) {
  if (window < 1 || hv_history.size() < static_cast<std::size_t>(window)) return false;
  const auto tail = hv_history.last(static_cast<std::size_t>(window));
  const auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
  return *hi - *lo <= epsilon * std::max(std::abs(tail.back()), 1e-12);
}

ObjectiveVector run_reference_point(std::span<const Individual> initial) {
  std::vector<ObjectiveVector> pts;
  for (const auto& ind : initial) {
    if (ind.objectives && !is_penalty(*ind.objectives)) pts.push_back(*ind.objectives);
  }
  if (pts.empty()) return {kPenalty * kReferenceMargin, kPenalty * kReferenceMargin};
  return reference_point(pts);
}

std::vector<Individual> environmental_selection(std::vector<Individual>& merged,
                                                std::size_t size) {
  const auto fronts = fast_nondominated_sort(merged);
  std::vector<Individual> survivors;
  survivors.reserve(size);
  for (const auto& front : fronts) {
    assign_crowding(merged, front);
    if (survivors.size() + front.size() <= size) {
      for (const auto i : front) survivors.push_back(merged[i]);
      if (survivors.size() == size) break;
      continue;
    }
    // Drop the most crowded member one at a time, recomputing distances.
    std::vector<std::size_t> kept = front;
    while (survivors.size() + kept.size() > size) {
      assign_crowding(merged, kept);
      const auto worst = std::min_element(kept.begin(), kept.end(), [&](auto a, auto b) {
        return merged[a].crowding < merged[b].crowding;
      });
      kept.erase(worst);
    }
    assign_crowding(merged, kept);
    for (const auto i : kept) survivors.push_back(merged[i]);
    break;
  }
  return survivors;
}

GaResult nsga2_run(const GenomeEvaluator& evaluator, std::size_t num_genes, const GaConfig& config,
                   const ProgressSink& progress) {
  config.validate();
  if (num_genes == 0) throw std::invalid_argument("ga: genome must have at least one gene");
  const auto pop_size = static_cast<std::size_t>(config.population_size);
  const double pm = config.mutation_probability.value_or(1.0 / static_cast<double>(num_genes));

  Rng rng(config.rng_seed);
  std::vector<Individual> population(pop_size);
  for (auto& ind : population) {
    ind.genome.genes.resize(num_genes);
    for (double& g : ind.genome.genes) g = rng.uniform();
  }
  evaluate(population, evaluator, config.jobs);
  for (const auto& front : fast_nondominated_sort(population)) assign_crowding(population, front);

  GaResult result;
  result.hv_reference = run_reference_point(population);
  std::size_t evaluations = pop_size;

  auto record = [&](int generation) {
    const auto pts = first_front_points(population);
    const double hv = hypervolume_2d(pts, result.hv_reference);
    result.hv_history.push_back(hv);
    if (progress) {
      progress({generation, evaluations, extract_front(pts).size(), hv});
    }
  };
  record(0);

  for (int gen = 1; gen <= config.max_generations; ++gen) {
    if (convergence_check(result.hv_history, config.convergence_window,
                          config.convergence_epsilon)) {
      break;
    }
    std::vector<Individual> offspring;
    offspring.reserve(pop_size);
    while (offspring.size() < pop_size) {
      const auto& a = population[tournament(population, rng)].genome;
      const auto& b = population[tournament(population, rng)].genome;
      auto [c1, c2] = sbx_crossover(a, b, config.sbx_eta, config.crossover_probability, rng);
      offspring.push_back({polynomial_mutation(c1, config.mutation_eta, pm, rng), {}, -1, 0.0});
      offspring.push_back({polynomial_mutation(c2, config.mutation_eta, pm, rng), {}, -1, 0.0});
    }
    evaluate(offspring, evaluator, config.jobs);
    evaluations += pop_size;

    std::vector<Individual> merged = std::move(population);
    merged.insert(merged.end(), std::make_move_iterator(offspring.begin()),
                  std::make_move_iterator(offspring.end()));
    population = environmental_selection(merged, pop_size);
    result.generations_run = gen;
    record(gen);
  }
  if (convergence_check(result.hv_history, config.convergence_window,
                        config.convergence_epsilon)) {
    result.converged_at_generation = result.generations_run;
  }

  std::vector<ObjectiveVector> pts;
  std::vector<std::vector<double>> genomes;
  for (const auto& ind : population) {
    if (ind.rank == 0) {
      pts.push_back(*ind.objectives);
      genomes.push_back(ind.genome.genes);
    }
  }
  ParetoFront front = extract_front(pts, genomes);
  std::vector<std::size_t> order(front.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (front.points[a].f_acc != front.points[b].f_acc) {
      return front.points[a].f_acc < front.points[b].f_acc;
    }
    return front.points[a].f_t < front.points[b].f_t;
  });
  for (const auto i : order) {
    result.front.points.push_back(front.points[i]);
    result.front.genomes.push_back(front.genomes[i]);
  }
  result.evaluations_used = evaluations;
  return result;
}

}  // namespace pdtune
