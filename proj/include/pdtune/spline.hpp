#pragma once

#include <span>
#include <vector>

namespace pdtune {

/// Natural cubic spline (zero second derivative at both ends) through
/// (knots[i], values[i]). Knots must be strictly increasing.
class NaturalCubicSpline {
public:
  NaturalCubicSpline(std::span<const double> knots, std::span<const double> values);

  /// Evaluates the spline; arguments outside the knot range extrapolate the
  /// end cubic.
  [[nodiscard]] double operator()(double t) const;

private:
  std::vector<double> knots_;
  std::vector<double> values_;
  std::vector<double> second_;  // second derivatives at the knots
};

}  // namespace pdtune
