#pragma once

// Planar n-link rigid arm made of uniform rods, moving in a vertical plane.
//
// Joint angles are relative (each joint measured from the previous link),
// zero along +x, gravity along -y. The equations of motion are
//
//   u = M(q) qdd + C(q, qd) qd + g(q) + D qd
//
// with C built from Christoffel symbols of M.

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace pdtune {

inline constexpr int kMaxJoints = 8;

using JointVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxJoints, 1>;
using JointMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxJoints, kMaxJoints>;

struct CartesianPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const CartesianPoint&, const CartesianPoint&) = default;
};

double distance(CartesianPoint a, CartesianPoint b);

struct ArmModel {
  std::vector<double> link_lengths;     // m
  std::vector<double> link_masses;      // kg, uniform rods
  std::vector<double> viscous_damping;  // N*m*s/rad
  std::vector<double> torque_limits;    // N*m, symmetric
  double gravity = 9.81;                // m/s^2 along -y
  CartesianPoint base_position{};

  [[nodiscard]] int n_links() const { return static_cast<int>(link_lengths.size()); }

  /// Throws DimensionError / std::invalid_argument on inconsistent fields.
  void validate() const;

  /// Two-link default plant: 1.0/0.8 m, 2.0/1.5 kg, damping 0.1, limit 50 N*m.
  static ArmModel default_two_link();

  friend bool operator==(const ArmModel&, const ArmModel&) = default;
};

struct JointState {
  JointVector q;
  JointVector qd;
};

enum class ElbowBranch { kUp, kDown };

CartesianPoint forward_kinematics(const ArmModel& model, const JointVector& q);

/// Analytic two-link solution. Elbow-down returns q2 >= 0, elbow-up q2 <= 0;
/// both angles wrapped to (-pi, pi]. Throws UnreachableError.
JointVector inverse_kinematics(const ArmModel& model, CartesianPoint p, ElbowBranch branch);

/// Wrap an angle to (-pi, pi].
double wrap_angle(double a);

JointMatrix mass_matrix(const ArmModel& model, const JointVector& q);

/// Christoffel-symbol Coriolis/centrifugal matrix. Satisfies Mdot - 2C skew.
JointMatrix coriolis_matrix(const ArmModel& model, const JointVector& q, const JointVector& qd);

JointVector gravity_torque(const ArmModel& model, const JointVector& q);

/// C(q, qd) qd evaluated directly, without forming C.
JointVector coriolis_torque(const ArmModel& model, const JointVector& q, const JointVector& qd);

JointVector inverse_dynamics(const ArmModel& model, const JointVector& q, const JointVector& qd,
                             const JointVector& qdd);

JointVector forward_dynamics(const ArmModel& model, const JointState& state, const JointVector& u);

/// One RK4 step with u held constant over [t, t + dt]. Throws NumericalBlowup
/// tagged with `step_index` if the result is not finite.
JointState step(const ArmModel& model, const JointState& state, const JointVector& u, double dt,
                std::size_t step_index = 0);

double kinetic_energy(const ArmModel& model, const JointState& state);

/// Gravitational potential energy relative to the base height.
double potential_energy(const ArmModel& model, const JointVector& q);

}  // namespace pdtune
