#include "pdtune/plant.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "pdtune/errors.hpp"

namespace pdtune {
namespace {

void require_size(const ArmModel& model, const JointVector& v, const char* name) {
  if (v.size() != model.n_links()) {
    throw DimensionError(std::string(name) + " has " + std::to_string(v.size()) +
                         " entries, model has " + std::to_string(model.n_links()) + " joints");
  }
}

// Inertial coefficients of the chain written in absolute link angles
// theta_a = q_1 + ... + q_a. In those coordinates
//   H_ab(theta) = inertia(a, b) * cos(theta_a - theta_b)
//   V(theta)    = g * sum_a gravity_arm(a) * sin(theta_a)
struct ChainCoefficients {
  JointMatrix inertia;
  JointVector gravity_arm;
};

ChainCoefficients chain_coefficients(const ArmModel& model) {
  const int n = model.n_links();
  const auto& l = model.link_lengths;
  const auto& m = model.link_masses;
  // Lever arm of link a's angle on the centre of mass of link i (a <= i).
  auto lever = [&](int a, int i) { return a < i ? l[a] : 0.5 * l[i]; };

  ChainCoefficients out;
  out.inertia = JointMatrix::Zero(n, n);
  out.gravity_arm = JointVector::Zero(n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      double sum = 0.0;
      for (int i = std::max(a, b); i < n; ++i) sum += m[i] * lever(a, i) * lever(b, i);
      out.inertia(a, b) = sum;
    }
    out.inertia(a, a) += m[a] * l[a] * l[a] / 12.0;
    for (int i = a; i < n; ++i) out.gravity_arm(a) += m[i] * lever(a, i);
  }
  return out;
}

JointVector cumulative(const JointVector& v) {
  JointVector out(v.size());
  double acc = 0.0;
  for (int i = 0; i < v.size(); ++i) {
    acc += v(i);
    out(i) = acc;
  }
  return out;
}

// S^T v where S is the lower-triangular matrix of ones: suffix sums.
JointVector suffix_sums(const JointVector& v) {
  JointVector out(v.size());
  double acc = 0.0;
  for (int i = static_cast<int>(v.size()) - 1; i >= 0; --i) {
    acc += v(i);
    out(i) = acc;
  }
  return out;
}

// S^T A S.
JointMatrix congruence_by_ones(const JointMatrix& a) {
  const auto n = a.rows();
  JointMatrix rows = JointMatrix::Zero(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    double acc = 0.0;
    for (Eigen::Index k = n - 1; k >= 0; --k) {
      acc += a(r, k);
      rows(r, k) = acc;
    }
  }
  JointMatrix out = JointMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    double acc = 0.0;
    for (Eigen::Index j = n - 1; j >= 0; --j) {
      acc += rows(j, k);
      out(j, k) = acc;
    }
  }
  return out;
}

// dM/dq_k.
JointMatrix mass_matrix_partial(const ChainCoefficients& cc, const JointVector& theta, int k) {
  const auto n = theta.size();
  JointMatrix dh = JointMatrix::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      const int sel = static_cast<int>(a >= k) - static_cast<int>(b >= k);
      if (sel != 0) dh(a, b) = -cc.inertia(a, b) * std::sin(theta(a) - theta(b)) * sel;
    }
  }
  return congruence_by_ones(dh);
}

bool all_finite(const JointVector& v) { return v.allFinite(); }

}  // namespace

double distance(CartesianPoint a, CartesianPoint b) { return std::hypot(a.x - b.x, a.y - b.y); }

void ArmModel::validate() const {
  const auto n = link_lengths.size();
  if (n == 0 || n > static_cast<std::size_t>(kMaxJoints)) {
    throw DimensionError("arm must have between 1 and " + std::to_string(kMaxJoints) + " links");
  }
  if (link_masses.size() != n || viscous_damping.size() != n || torque_limits.size() != n) {
    throw DimensionError("per-link fields must all have " + std::to_string(n) + " entries");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(link_lengths[i] > 0.0)) throw std::invalid_argument("link lengths must be > 0");
    if (!(link_masses[i] > 0.0)) throw std::invalid_argument("link masses must be > 0");
    if (!(viscous_damping[i] >= 0.0)) throw std::invalid_argument("damping must be >= 0");
    if (!(torque_limits[i] > 0.0)) throw std::invalid_argument("torque limits must be > 0");
  }
  if (!std::isfinite(gravity)) throw std::invalid_argument("gravity must be finite");
  if (!std::isfinite(base_position.x) || !std::isfinite(base_position.y)) {
    throw std::invalid_argument("base position must be finite");
  }
}

ArmModel ArmModel::default_two_link() {
  ArmModel m;
  m.link_lengths = {1.0, 0.8};
  m.link_masses = {2.0, 1.5};
  m.viscous_damping = {0.1, 0.1};
  m.torque_limits = {50.0, 50.0};
  m.gravity = 9.81;
  return m;
}

double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  double w = std::remainder(a, 2.0 * pi);  // [-pi, pi]
  if (w <= -pi) w += 2.0 * pi;
  return w;
}

CartesianPoint forward_kinematics(const ArmModel& model, const JointVector& q) {
  require_size(model, q, "q");
  CartesianPoint p = model.base_position;
  double theta = 0.0;
  for (int i = 0; i < model.n_links(); ++i) {
    theta += q(i);
    p.x += model.link_lengths[i] * std::cos(theta);
    p.y += model.link_lengths[i] * std::sin(theta);
  }
  return p;
}

JointVector inverse_kinematics(const ArmModel& model, CartesianPoint p, ElbowBranch branch) {
  if (model.n_links() != 2) {
    throw DimensionError("analytic inverse kinematics requires a two-link arm");
  }
  const double l1 = model.link_lengths[0];
  const double l2 = model.link_lengths[1];
  const double x = p.x - model.base_position.x;
  const double y = p.y - model.base_position.y;
  const double r = std::hypot(x, y);
  const double slack = 1e-12 * (l1 + l2);
  if (!std::isfinite(r) || r > l1 + l2 + slack || r < std::abs(l1 - l2) - slack) {
    throw UnreachableError("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                           ") is outside the reachable annulus");
  }
  const double c2 = std::clamp((r * r - l1 * l1 - l2 * l2) / (2.0 * l1 * l2), -1.0, 1.0);
  double s2 = std::sqrt(std::max(0.0, 1.0 - c2 * c2));
  if (branch == ElbowBranch::kUp) s2 = -s2;
  const double q2 = std::atan2(s2, c2);
  const double q1 = std::atan2(y, x) - std::atan2(l2 * s2, l1 + l2 * c2);
  JointVector q(2);
  q << wrap_angle(q1), wrap_angle(q2);
  return q;
}

JointMatrix mass_matrix(const ArmModel& model, const JointVector& q) {
  require_size(model, q, "q");
  const auto cc = chain_coefficients(model);
  const JointVector theta = cumulative(q);
  const int n = model.n_links();
  JointMatrix h(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) h(a, b) = cc.inertia(a, b) * std::cos(theta(a) - theta(b));
  }
  return congruence_by_ones(h);
}

JointMatrix coriolis_matrix(const ArmModel& model, const JointVector& q, const JointVector& qd) {
  require_size(model, q, "q");
  require_size(model, qd, "qd");
  const auto cc = chain_coefficients(model);
  const JointVector theta = cumulative(q);
  const int n = model.n_links();
  std::vector<JointMatrix> dm;
  dm.reserve(n);
  for (int k = 0; k < n; ++k) dm.push_back(mass_matrix_partial(cc, theta, k));

  JointMatrix c = JointMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double sum = 0.0;
      for (int k = 0; k < n; ++k) {
        sum += 0.5 * (dm[k](i, j) + dm[j](i, k) - dm[i](j, k)) * qd(k);
      }
      c(i, j) = sum;
    }
  }
  return c;
}

JointVector gravity_torque(const ArmModel& model, const JointVector& q) {
  require_size(model, q, "q");
  const auto cc = chain_coefficients(model);
  const JointVector theta = cumulative(q);
  JointVector g_abs(q.size());
  for (int a = 0; a < q.size(); ++a) {
    g_abs(a) = model.gravity * cc.gravity_arm(a) * std::cos(theta(a));
  }
  return suffix_sums(g_abs);
}

JointVector coriolis_torque(const ArmModel& model, const JointVector& q, const JointVector& qd) {
  require_size(model, q, "q");
  require_size(model, qd, "qd");
  const auto cc = chain_coefficients(model);
  const JointVector theta = cumulative(q);
  const JointVector omega = cumulative(qd);
  const int n = model.n_links();
  JointVector h_abs(n);
  for (int a = 0; a < n; ++a) {
    double sum = 0.0;
    for (int b = 0; b < n; ++b) {
      sum += cc.inertia(a, b) * std::sin(theta(a) - theta(b)) * omega(b) * omega(b);
    }
    h_abs(a) = sum;
  }
  return suffix_sums(h_abs);
}

namespace {

JointVector damping_torque(const ArmModel& model, const JointVector& qd) {
  JointVector d(qd.size());
  for (int i = 0; i < qd.size(); ++i) d(i) = model.viscous_damping[i] * qd(i);
  return d;
}

}  // namespace

JointVector inverse_dynamics(const ArmModel& model, const JointVector& q, const JointVector& qd,
                             const JointVector& qdd) {
  require_size(model, qdd, "qdd");
  return mass_matrix(model, q) * qdd + coriolis_torque(model, q, qd) + gravity_torque(model, q) +
         damping_torque(model, qd);
}

JointVector forward_dynamics(const ArmModel& model, const JointState& state, const JointVector& u) {
  require_size(model, u, "u");
  const JointMatrix m = mass_matrix(model, state.q);
  const JointVector rhs = u - coriolis_torque(model, state.q, state.qd) -
                          gravity_torque(model, state.q) - damping_torque(model, state.qd);
  return m.llt().solve(rhs);
}

JointState step(const ArmModel& model, const JointState& state, const JointVector& u, double dt,
                std::size_t step_index) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  require_size(model, state.q, "q");
  require_size(model, state.qd, "qd");

  auto accel = [&](const JointVector& q, const JointVector& qd) {
    return forward_dynamics(model, JointState{q, qd}, u);
  };
  const JointVector& q0 = state.q;
  const JointVector& v0 = state.qd;

  const JointVector k1q = v0;
  const JointVector k1v = accel(q0, v0);
  const JointVector k2q = v0 + 0.5 * dt * k1v;
  const JointVector k2v = accel(q0 + 0.5 * dt * k1q, k2q);
  const JointVector k3q = v0 + 0.5 * dt * k2v;
  const JointVector k3v = accel(q0 + 0.5 * dt * k2q, k3q);
  const JointVector k4q = v0 + dt * k3v;
  const JointVector k4v = accel(q0 + dt * k3q, k4q);

  JointState next;
  next.q = q0 + (dt / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
  next.qd = v0 + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  if (!all_finite(next.q) || !all_finite(next.qd)) {
    throw NumericalBlowup(step_index,
                          "non-finite state after integration step " + std::to_string(step_index));
  }
  return next;
}

double kinetic_energy(const ArmModel& model, const JointState& state) {
  return 0.5 * state.qd.dot(mass_matrix(model, state.q) * state.qd);
}

double potential_energy(const ArmModel& model, const JointVector& q) {
  require_size(model, q, "q");
  const auto cc = chain_coefficients(model);
  const JointVector theta = cumulative(q);
  double v = 0.0;
  for (int a = 0; a < q.size(); ++a) v += cc.gravity_arm(a) * std::sin(theta(a));
  return model.gravity * v;
}

}  // namespace pdtune
