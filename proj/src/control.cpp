#include "pdtune/control.hpp"

#include <algorithm>
#include <stdexcept>

#include "pdtune/errors.hpp"

namespace pdtune {

void Gains::validate(int n_links) const {
  if (kp.size() != n_links || kd.size() != n_links) {
    throw DimensionError("gains must have one kp and one kd per joint");
  }
  for (int i = 0; i < n_links; ++i) {
    if (!(kp(i) > 0.0)) throw std::invalid_argument("kp must be > 0");
    if (!(kd(i) >= 0.0)) throw std::invalid_argument("kd must be >= 0");
  }
}

JointVector pd_torque(const Gains& gains, const JointVector& q_des, const JointVector& qd_des,
                      const JointState& state, std::span<const double> limits) {
  const auto n = state.q.size();
  if (gains.kp.size() != n || gains.kd.size() != n || q_des.size() != n || qd_des.size() != n ||
      state.qd.size() != n || static_cast<Eigen::Index>(limits.size()) != n) {
    throw DimensionError("pd_torque: inconsistent joint dimensions");
  }
  JointVector u(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double raw =
        gains.kp(i) * (q_des(i) - state.q(i)) + gains.kd(i) * (qd_des(i) - state.qd(i));
    const auto lim = limits[static_cast<std::size_t>(i)];
    u(i) = std::clamp(raw, -lim, lim);
  }
  return u;
}

}  // namespace pdtune
