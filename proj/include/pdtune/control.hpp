#pragma once

#include <span>

#include "pdtune/plant.hpp"

namespace pdtune {

/// Per-joint PD gains: kp in N*m/rad, kd in N*m*s/rad.
struct Gains {
  JointVector kp;
  JointVector kd;

  /// kp > 0 and kd >= 0 element-wise, equal lengths.
  void validate(int n_links) const;

  friend bool operator==(const Gains& a, const Gains& b) { return a.kp == b.kp && a.kd == b.kd; }
};

/// u = clamp(kp .* (q_des - q) + kd .* (qd_des - qd), -limits, limits).
/// No gravity feedforward; saturation applies to the summed command.
JointVector pd_torque(const Gains& gains, const JointVector& q_des, const JointVector& qd_des,
                      const JointState& state, std::span<const double> limits);

}  // namespace pdtune
