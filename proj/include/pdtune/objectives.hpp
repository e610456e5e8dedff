#pragma once

namespace pdtune {

/// Objective pair, both minimized: mean Cartesian tracking error (m) and
/// mean squared torque increment ((N*m)^2).
struct ObjectiveVector {
  double f_acc = 0.0;
  double f_t = 0.0;

  friend bool operator==(const ObjectiveVector&, const ObjectiveVector&) = default;
};

/// Value assigned to both objectives of a diverged rollout.
inline constexpr double kPenalty = 1e6;

inline constexpr ObjectiveVector penalty_objectives() { return {kPenalty, kPenalty}; }

inline constexpr bool is_penalty(const ObjectiveVector& v) {
  return v.f_acc == kPenalty && v.f_t == kPenalty;
}

/// Minimization dominance: a <= b everywhere and a < b somewhere.
inline constexpr bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
  return a.f_acc <= b.f_acc && a.f_t <= b.f_t && (a.f_acc < b.f_acc || a.f_t < b.f_t);
}

}  // namespace pdtune
