#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pdtune/control.hpp"
#include "pdtune/errors.hpp"
#include "pdtune/objectives.hpp"
#include "pdtune/plant.hpp"
#include "pdtune/trajectory.hpp"

namespace pdtune {

struct RolloutMeta {
  Gains gains;
  TrajectoryKind kind = TrajectoryKind::kSpiral;
  double duration = 0.0;
  std::string model_hash;
  std::uint64_t seed = 0;

  friend bool operator==(const RolloutMeta&, const RolloutMeta&) = default;
};

/// One row per tick. Row 0 is the initial state with zero torque; rows
/// 1..T are controlled ticks.
struct RolloutLog {
  double dt = 0.0;
  std::vector<double> t;
  std::vector<JointVector> q;
  std::vector<JointVector> qd;
  std::vector<JointVector> u;  // post-saturation
  std::vector<CartesianPoint> ee;
  std::vector<CartesianPoint> des;
  RolloutMeta meta;

  [[nodiscard]] std::size_t rows() const { return t.size(); }
  void reserve(std::size_t n);
  void push_row(double time, const JointState& state, const JointVector& torque,
                CartesianPoint end_effector, CartesianPoint desired);

  friend bool operator==(const RolloutLog&, const RolloutLog&) = default;
};

class DivergedRollout : public Error {
public:
  DivergedRollout(std::size_t tick, RolloutLog partial, const std::string& what)
      : Error(what), tick_(tick), partial_(std::move(partial)) {}
  [[nodiscard]] std::size_t tick() const noexcept { return tick_; }
  [[nodiscard]] const RolloutLog& partial_log() const noexcept { return partial_; }

private:
  std::size_t tick_;
  RolloutLog partial_;
};

/// Joint-angle magnitude beyond which a rollout counts as diverged.
inline constexpr double kDivergenceAngle = 1e3;

/// Closed-loop execution of `traj` under `gains`, starting at rest on the
/// first setpoint. Throws DivergedRollout.
RolloutLog simulate(const ArmModel& model, const JointTrajectory& traj, const Gains& gains);

/// Mean end-effector error over ticks 1..T.
double accuracy_objective(const RolloutLog& log);

/// Sum over ticks 1..T of |u_i - u_{i-1}|^2 with u_0 = 0.
double torque_increment_sum(const RolloutLog& log);

/// torque_increment_sum / T.
double torque_objective(const RolloutLog& log);

/// simulate + both objectives; divergence maps to the penalty vector.
ObjectiveVector evaluate(const ArmModel& model, const JointTrajectory& traj, const Gains& gains);

/// Arithmetic mean of evaluate() over a set of trajectories.
ObjectiveVector evaluate_mean(const ArmModel& model, std::span<const JointTrajectory> trajs,
                              const Gains& gains);

std::string model_hash(const ArmModel& model);

}  // namespace pdtune
