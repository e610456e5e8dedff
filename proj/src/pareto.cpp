#include "pdtune/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pdtune {
namespace {

std::vector<std::size_t> front_indices(std::span<const ObjectiveVector> points) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool keep = true;
    for (std::size_t j = 0; j < points.size() && keep; ++j) {
      if (j == i) continue;
      if (dominates(points[j], points[i])) keep = false;
      if (j < i && points[j] == points[i]) keep = false;
    }
    if (keep) kept.push_back(i);
  }
  return kept;
}

}  // namespace

ParetoFront extract_front(std::span<const ObjectiveVector> points) {
  ParetoFront front;
  for (const std::size_t i : front_indices(points)) front.points.push_back(points[i]);
  return front;
}

ParetoFront extract_front(std::span<const ObjectiveVector> points,
                          std::span<const std::vector<double>> genomes) {
  if (genomes.size() != points.size()) {
    throw std::invalid_argument("extract_front: genomes must align with points");
  }
  ParetoFront front;
  for (const std::size_t i : front_indices(points)) {
    front.points.push_back(points[i]);
    front.genomes.push_back(genomes[i]);
  }
  return front;
}

double hypervolume_2d(std::span<const ObjectiveVector> points, ObjectiveVector ref) {
  if (!std::isfinite(ref.f_acc) || !std::isfinite(ref.f_t)) {
    throw std::invalid_argument("hypervolume reference point must be finite");
  }
  std::vector<ObjectiveVector> inside;
  for (const auto& p : points) {
    if (p.f_acc < ref.f_acc && p.f_t < ref.f_t) inside.push_back(p);
  }
  auto front = extract_front(inside).points;
  std::sort(front.begin(), front.end(),
            [](const ObjectiveVector& a, const ObjectiveVector& b) { return a.f_acc < b.f_acc; });
  double area = 0.0;
  for (std::size_t i = 0; i < front.size(); ++i) {
    const double next = i + 1 < front.size() ? front[i + 1].f_acc : ref.f_acc;
    area += (next - front[i].f_acc) * (ref.f_t - front[i].f_t);
  }
  return area;
}

ObjectiveVector reference_point(std::span<const ObjectiveVector> points) {
  bool any = false;
  ObjectiveVector worst{0.0, 0.0};
  for (const auto& p : points) {
    if (is_penalty(p)) continue;
    worst.f_acc = any ? std::max(worst.f_acc, p.f_acc) : p.f_acc;
    worst.f_t = any ? std::max(worst.f_t, p.f_t) : p.f_t;
    any = true;
  }
  if (!any) throw std::invalid_argument("reference_point: no non-penalty points");
  return {worst.f_acc * kReferenceMargin, worst.f_t * kReferenceMargin};
}

ObjectiveVector reference_point(std::span<const ParetoFront> fronts) {
  std::vector<ObjectiveVector> all;
  for (const auto& f : fronts) all.insert(all.end(), f.points.begin(), f.points.end());
  return reference_point(all);
}

}  // namespace pdtune
