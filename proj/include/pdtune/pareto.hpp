#pragma once

#include <span>
#include <string>
#include <vector>

#include "pdtune/objectives.hpp"

namespace pdtune {

struct ParetoFront {
  std::vector<ObjectiveVector> points;
  std::vector<std::vector<double>> genomes;  // empty, or aligned with points
  std::string label;

  [[nodiscard]] bool empty() const { return points.empty(); }
  [[nodiscard]] std::size_t size() const { return points.size(); }
};

/// Maximal non-dominated subset with duplicates collapsed (first occurrence
/// kept). Output keeps input order.
ParetoFront extract_front(std::span<const ObjectiveVector> points);

/// As above; `genomes` must align with `points` and follow the kept members.
ParetoFront extract_front(std::span<const ObjectiveVector> points,
                          std::span<const std::vector<double>> genomes);

/// Exact two-objective hypervolume against `ref`. Points with any coordinate
/// >= ref are discarded; dominated points contribute nothing.
double hypervolume_2d(std::span<const ObjectiveVector> points, ObjectiveVector ref);

inline double hypervolume_2d(const ParetoFront& front, ObjectiveVector ref) {
  return hypervolume_2d(front.points, ref);
}

inline constexpr double kReferenceMargin = 1.1;

/// Component-wise maximum over every point of every front (penalty points
/// excluded), scaled by kReferenceMargin. Throws std::invalid_argument when
/// no point remains.
ObjectiveVector reference_point(std::span<const ParetoFront> fronts);

ObjectiveVector reference_point(std::span<const ObjectiveVector> points);

}  // namespace pdtune
