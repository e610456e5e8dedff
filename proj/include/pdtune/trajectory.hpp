#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pdtune/plant.hpp"

namespace pdtune {

enum class TrajectoryKind { kSpiral, kPyramid, kRandom };

std::string_view to_string(TrajectoryKind kind);
TrajectoryKind trajectory_kind_from_string(std::string_view name);

/// Reachable annulus around the arm base, shrunk by a relative margin:
/// radii in [inner * (1 + margin), outer * (1 - margin)].
struct Workspace {
  CartesianPoint center;
  double inner_radius = 0.0;
  double outer_radius = 0.0;

  static Workspace of(const ArmModel& model, double margin = 0.05);
  [[nodiscard]] bool contains(CartesianPoint p) const;
};

struct CartesianTrajectory {
  double dt = 0.0;
  double duration = 0.0;
  TrajectoryKind kind = TrajectoryKind::kSpiral;
  std::vector<CartesianPoint> points;  // round(duration / dt) + 1 samples
};

struct JointTrajectory {
  double dt = 0.0;
  std::vector<JointVector> q_des;
  std::vector<JointVector> qd_des;
  CartesianTrajectory source;

  [[nodiscard]] std::size_t ticks() const { return q_des.size(); }
};

/// Number of samples emitted for a duration/dt pair.
std::size_t sample_count(double duration, double dt);

/// Archimedean spiral: radius r0 -> r1 and angle 0 -> 2*pi*turns, both
/// linear in the tick index.
CartesianTrajectory gen_spiral(const Workspace& ws, CartesianPoint center, double r0, double r1,
                               double turns, double duration, double dt);

/// Triangle-wave polyline from (cx - half_width, cy) to (cx + half_width, cy)
/// with n_teeth apexes at height cy + height, traversed at constant speed.
/// Every vertex falls exactly on a tick.
CartesianTrajectory gen_pyramid(const Workspace& ws, CartesianPoint center, double half_width,
                                double height, int n_teeth, double duration, double dt);

/// Waypoints drawn uniformly (by area) from `ws`, joined by a natural cubic
/// spline in time. Resamples waypoints up to 10 times if the spline leaves
/// the workspace.
CartesianTrajectory gen_random(const Workspace& ws, std::uint64_t seed, int n_waypoints,
                               double duration, double dt);

/// Inverse kinematics per sample, angle unwrapping, central-difference
/// velocities (one-sided at the ends).
JointTrajectory to_joint_setpoints(const ArmModel& model, const CartesianTrajectory& traj,
                                   ElbowBranch branch);

}  // namespace pdtune
