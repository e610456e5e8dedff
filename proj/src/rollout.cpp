#include "pdtune/rollout.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "pdtune/checksum.hpp"

namespace pdtune {

void RolloutLog::reserve(std::size_t n) {
  t.reserve(n);
  q.reserve(n);
  qd.reserve(n);
  u.reserve(n);
  ee.reserve(n);
  des.reserve(n);
}

void RolloutLog::push_row(double time, const JointState& state, const JointVector& torque,
                          CartesianPoint end_effector, CartesianPoint desired) {
  t.push_back(time);
  q.push_back(state.q);
  qd.push_back(state.qd);
  u.push_back(torque);
  ee.push_back(end_effector);
  des.push_back(desired);
}

RolloutLog simulate(const ArmModel& model, const JointTrajectory& traj, const Gains& gains) {
  const std::size_t ticks = traj.ticks();
  if (ticks == 0) throw std::invalid_argument("cannot simulate an empty trajectory");
  if (traj.qd_des.size() != ticks || traj.source.points.size() != ticks) {
    throw DimensionError("joint trajectory fields have inconsistent tick counts");
  }
  const int n = model.n_links();

  RolloutLog log;
  log.dt = traj.dt;
  log.meta = RolloutMeta{gains, traj.source.kind, traj.source.duration, model_hash(model), 0};
  log.reserve(ticks);

  JointState state{traj.q_des[0], JointVector::Zero(n)};
  log.push_row(0.0, state, JointVector::Zero(n), forward_kinematics(model, state.q),
               traj.source.points[0]);

  for (std::size_t i = 1; i < ticks; ++i) {
    const JointVector u = pd_torque(gains, traj.q_des[i], traj.qd_des[i], state, model.torque_limits);
    try {
      state = step(model, state, u, traj.dt, i);
    } catch (const NumericalBlowup& e) {
      throw DivergedRollout(i, std::move(log), e.what());
    }
    if (state.q.cwiseAbs().maxCoeff() > kDivergenceAngle) {
      throw DivergedRollout(i, std::move(log),
                            "joint angle exceeded divergence bound at tick " + std::to_string(i));
    }
    log.push_row(static_cast<double>(i) * traj.dt, state, u, forward_kinematics(model, state.q),
                 traj.source.points[i]);
  }
  return log;
}

namespace {

std::size_t controlled_ticks(const RolloutLog& log) {
  if (log.rows() < 2) throw std::invalid_argument("rollout log has no controlled ticks");
  return log.rows() - 1;
}

}  // namespace

double accuracy_objective(const RolloutLog& log) {
  const std::size_t ticks = controlled_ticks(log);
  double sum = 0.0;
  for (std::size_t i = 1; i <= ticks; ++i) sum += distance(log.ee[i], log.des[i]);
  return sum / static_cast<double>(ticks);
}

double torque_increment_sum(const RolloutLog& log) {
  const std::size_t ticks = controlled_ticks(log);
  double sum = (log.u[1]).squaredNorm();  // u_0 = 0
  for (std::size_t i = 2; i <= ticks; ++i) sum += (log.u[i] - log.u[i - 1]).squaredNorm();
  return sum;
}

double torque_objective(const RolloutLog& log) {
  return torque_increment_sum(log) / static_cast<double>(controlled_ticks(log));
}

ObjectiveVector evaluate(const ArmModel& model, const JointTrajectory& traj, const Gains& gains) {
  try {
    const RolloutLog log = simulate(model, traj, gains);
    return {accuracy_objective(log), torque_objective(log)};
  } catch (const DivergedRollout&) {
    return penalty_objectives();
  }
}

ObjectiveVector evaluate_mean(const ArmModel& model, std::span<const JointTrajectory> trajs,
                              const Gains& gains) {
  if (trajs.empty()) throw std::invalid_argument("evaluate_mean needs at least one trajectory");
  ObjectiveVector sum;
  for (const auto& traj : trajs) {
    const ObjectiveVector v = evaluate(model, traj, gains);
    if (is_penalty(v)) return v;
    sum.f_acc += v.f_acc;
    sum.f_t += v.f_t;
  }
  const auto k = static_cast<double>(trajs.size());
  return {sum.f_acc / k, sum.f_t / k};
}

std::string model_hash(const ArmModel& model) {
  Fnv1a64 h;
  auto put = [&h](double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xffU);
    h.update(std::string_view(bytes, 8));
  };
  put(static_cast<double>(model.n_links()));
  for (const auto* field : {&model.link_lengths, &model.link_masses, &model.viscous_damping,
                            &model.torque_limits}) {
    for (double v : *field) put(v);
  }
  put(model.gravity);
  put(model.base_position.x);
  put(model.base_position.y);
  return h.hex();
}

}  // namespace pdtune
