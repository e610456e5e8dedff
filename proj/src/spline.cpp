#include "pdtune/spline.hpp"

#include <algorithm>
#include <stdexcept>

namespace pdtune {

NaturalCubicSpline::NaturalCubicSpline(std::span<const double> knots,
                                       std::span<const double> values)
    : knots_(knots.begin(), knots.end()), values_(values.begin(), values.end()) {
  const std::size_t n = knots_.size();
  if (n < 2 || values_.size() != n) {
    throw std::invalid_argument("spline needs at least two knots and matching values");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(knots_[i] > knots_[i - 1])) throw std::invalid_argument("knots must increase");
  }

  second_.assign(n, 0.0);
  if (n == 2) return;

  // Tridiagonal system for the interior second derivatives (Thomas algorithm).
  const std::size_t m = n - 2;
  std::vector<double> diag(m), upper(m), rhs(m);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t i = k + 1;
    const double h0 = knots_[i] - knots_[i - 1];
    const double h1 = knots_[i + 1] - knots_[i];
    diag[k] = 2.0 * (h0 + h1);
    upper[k] = h1;
    rhs[k] = 6.0 * ((values_[i + 1] - values_[i]) / h1 - (values_[i] - values_[i - 1]) / h0);
  }
  for (std::size_t k = 1; k < m; ++k) {
    const double lower = knots_[k + 1] - knots_[k];
    const double w = lower / diag[k - 1];
    diag[k] -= w * upper[k - 1];
    rhs[k] -= w * rhs[k - 1];
  }
  second_[m] = rhs[m - 1] / diag[m - 1];
  for (std::size_t k = m - 1; k-- > 0;) {
    second_[k + 1] = (rhs[k] - upper[k] * second_[k + 2]) / diag[k];
  }
}

double NaturalCubicSpline::operator()(double t) const {
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  std::size_t i = it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
  i = std::min(i, knots_.size() - 2);
  const double h = knots_[i + 1] - knots_[i];
  const double a = (knots_[i + 1] - t) / h;
  const double b = (t - knots_[i]) / h;
  return a * values_[i] + b * values_[i + 1] +
         ((a * a * a - a) * second_[i] + (b * b * b - b) * second_[i + 1]) * (h * h) / 6.0;
}

}  // namespace pdtune
