#include "doctest.h"

#include <cmath>

#include "pdtune/random.hpp"
#include "pdtune/rollout.hpp"

using namespace pdtune;

namespace {

JointVector vec(std::initializer_list<double> xs) {
  JointVector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Gains gains2(double kp, double kd) { return {vec({kp, kp}), vec({kd, kd})}; }

JointTrajectory spiral(double duration = 1.0) {
  const ArmModel m = ArmModel::default_two_link();
  return to_joint_setpoints(
      m, gen_spiral(Workspace::of(m), {1.0, 0.3}, 0.05, 0.4, 1, duration, 0.002),
      ElbowBranch::kDown);
}

// Log with only the fields the objectives read.
RolloutLog torque_log(const std::vector<JointVector>& u) {
  RolloutLog log;
  log.dt = 0.002;
  const int n = static_cast<int>(u.front().size());
  const JointState s{JointVector::Zero(n), JointVector::Zero(n)};
  log.push_row(0.0, s, JointVector::Zero(n), {}, {});
  for (std::size_t i = 0; i < u.size(); ++i)
    log.push_row(0.002 * static_cast<double>(i + 1), s, u[i], {}, {});
  return log;
}

RolloutLog offset_log(std::size_t ticks, double offset) {
  RolloutLog log;
  const JointState s{JointVector::Zero(2), JointVector::Zero(2)};
  for (std::size_t i = 0; i <= ticks; ++i) {
    const CartesianPoint des{0.3 * static_cast<double>(i), -0.1};
    log.push_row(0.0, s, JointVector::Zero(2), {des.x + offset * 0.6, des.y - offset * 0.8}, des);
  }
  return log;
}

}  // namespace

TEST_CASE("torque objective examples") {
  CHECK(torque_objective(torque_log({vec({0, 0}), vec({0, 0}), vec({0, 0})})) == 0.0);
  CHECK(torque_objective(torque_log({vec({2}), vec({2}), vec({2})})) == 4.0 / 3.0);
  CHECK(torque_objective(torque_log({vec({3, 4})})) == 25.0);
  CHECK(torque_increment_sum(torque_log({vec({1}), vec({-1}), vec({2})})) == 1.0 + 4.0 + 9.0);
}

TEST_CASE("objectives need at least one controlled tick") {
  RolloutLog log;
  log.push_row(0.0, {vec({0}), vec({0})}, vec({0}), {}, {});
  CHECK_THROWS(torque_objective(log));
  CHECK_THROWS(accuracy_objective(log));
}

TEST_CASE("appending a held torque leaves the increment sum unchanged") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<JointVector> u;
    const int ticks = 1 + static_cast<int>(rng.index(20));
    for (int i = 0; i < ticks; ++i) u.push_back(vec({rng.uniform(-50, 50), rng.uniform(-50, 50)}));
    const double before = torque_increment_sum(torque_log(u));
    u.push_back(u.back());
    const auto longer = torque_log(u);
    CHECK(torque_increment_sum(longer) == before);
    CHECK(torque_objective(longer) == doctest::Approx(before / (ticks + 1)));
  }
}

TEST_CASE("accuracy objective examples") {
  RolloutLog perfect = offset_log(10, 0.0);
  CHECK(accuracy_objective(perfect) == 0.0);
  CHECK(accuracy_objective(offset_log(10, 0.05)) == doctest::Approx(0.05).epsilon(1e-12));
  const double single = accuracy_objective(offset_log(7, 0.05));
  const double twice = accuracy_objective(offset_log(7, 0.1));
  CHECK(twice == doctest::Approx(2 * single).epsilon(1e-12));

  RolloutLog log;
  const JointState s{JointVector::Zero(2), JointVector::Zero(2)};
  log.push_row(0.0, s, JointVector::Zero(2), {9.0, 9.0}, {0.0, 0.0});
  log.push_row(0.002, s, JointVector::Zero(2), {0.3, 0.4}, {0.0, 0.0});
  log.push_row(0.004, s, JointVector::Zero(2), {1.0, 1.0}, {1.0, 2.0});
  log.push_row(0.006, s, JointVector::Zero(2), {-1.0, 0.0}, {1.0, 0.0});
  CHECK(accuracy_objective(log) == doctest::Approx((0.5 + 1.0 + 2.0) / 3.0));
}

TEST_CASE("random logs give non-negative objectives matching a direct sum") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    RolloutLog log;
    const std::size_t rows = 2 + rng.index(10);
    double acc = 0.0, tq = 0.0;
    JointVector prev = JointVector::Zero(2);
    for (std::size_t i = 0; i < rows; ++i) {
      const CartesianPoint ee{rng.uniform(-2, 2), rng.uniform(-2, 2)};
      const CartesianPoint des{rng.uniform(-2, 2), rng.uniform(-2, 2)};
      const JointVector u = vec({rng.uniform(-50, 50), rng.uniform(-50, 50)});
      log.push_row(0.0, {JointVector::Zero(2), JointVector::Zero(2)}, u, ee, des);
      if (i == 0) continue;
      acc += std::sqrt((ee.x - des.x) * (ee.x - des.x) + (ee.y - des.y) * (ee.y - des.y));
      const double d0 = u(0) - prev(0), d1 = u(1) - prev(1);
      tq += d0 * d0 + d1 * d1;
      prev = u;
    }
    const double t = static_cast<double>(rows - 1);
    CHECK(accuracy_objective(log) >= 0.0);
    CHECK(torque_objective(log) >= 0.0);
    CHECK(accuracy_objective(log) == doctest::Approx(acc / t).epsilon(1e-12));
    CHECK(torque_objective(log) == doctest::Approx(tq / t).epsilon(1e-12));
  }
}

TEST_CASE("simulated log layout") {
  const ArmModel m = ArmModel::default_two_link();
  const auto traj = spiral();
  const auto log = simulate(m, traj, gains2(200, 20));
  CHECK(log.rows() == traj.ticks());
  CHECK(log.q[0] == traj.q_des[0]);
  CHECK(log.qd[0].cwiseAbs().maxCoeff() == 0.0);
  CHECK(log.u[0].cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t i = 0; i < log.rows(); ++i) {
    REQUIRE(log.t[i] == doctest::Approx(0.002 * static_cast<double>(i)));
    REQUIRE(log.des[i] == traj.source.points[i]);
    REQUIRE(log.u[i].cwiseAbs().maxCoeff() <= 50.0);
    REQUIRE(distance(log.ee[i], forward_kinematics(m, log.q[i])) == 0.0);
  }
  CHECK(log.meta.model_hash == model_hash(m));
  CHECK(log.meta.kind == TrajectoryKind::kSpiral);
}

TEST_CASE("zero gains leave the arm to its free dynamics") {
  const ArmModel m = ArmModel::default_two_link();
  const auto traj = spiral(0.5);
  const Gains zero{JointVector::Zero(2), JointVector::Zero(2)};
  const auto log = simulate(m, traj, zero);
  JointState s{traj.q_des[0], JointVector::Zero(2)};
  for (std::size_t i = 1; i < log.rows(); ++i) {
    REQUIRE(log.u[i].cwiseAbs().maxCoeff() == 0.0);
    s = step(m, s, JointVector::Zero(2), traj.dt, i);
    REQUIRE(log.q[i] == s.q);
  }
}

TEST_CASE("static trajectory at a gravity-free rest stays put") {
  ArmModel m = ArmModel::default_two_link();
  m.gravity = 0.0;
  CartesianTrajectory c;
  c.dt = 0.002;
  c.duration = 1.0;
  c.points.assign(501, CartesianPoint{1.1, 0.4});
  const auto traj = to_joint_setpoints(m, c, ElbowBranch::kDown);
  for (const Gains& g : {gains2(1, 0), gains2(500, 30), gains2(1000, 100)}) {
    const auto log = simulate(m, traj, g);
    for (std::size_t i = 0; i < log.rows(); ++i) {
      REQUIRE((log.q[i] - traj.q_des[0]).cwiseAbs().maxCoeff() < 1e-12);
      REQUIRE(log.u[i].cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("evaluate composes the objectives") {
  const ArmModel m = ArmModel::default_two_link();
  const auto traj = spiral();
  const Gains g = gains2(300, 25);
  const auto log = simulate(m, traj, g);
  const ObjectiveVector v = evaluate(m, traj, g);
  CHECK(v.f_acc == accuracy_objective(log));
  CHECK(v.f_t == torque_objective(log));
  CHECK(evaluate(m, traj, g) == v);
  CHECK(simulate(m, traj, g) == log);
}

TEST_CASE("forced divergence yields the penalty vector") {
  ArmModel m = ArmModel::default_two_link();
  m.torque_limits = {1e300, 1e300};
  const auto traj = spiral();
  const Gains absurd = gains2(1e9, 0);
  CHECK_THROWS_AS(simulate(m, traj, absurd), DivergedRollout);
  CHECK(evaluate(m, traj, absurd) == penalty_objectives());

  const std::vector<JointTrajectory> set{traj, traj};
  CHECK(evaluate_mean(m, set, absurd) == penalty_objectives());
}

TEST_CASE("mean evaluation averages the trajectories") {
  const ArmModel m = ArmModel::default_two_link();
  const std::vector<JointTrajectory> set{spiral(0.5), spiral(1.0)};
  const Gains g = gains2(300, 25);
  const auto a = evaluate(m, set[0], g);
  const auto b = evaluate(m, set[1], g);
  const auto mean = evaluate_mean(m, set, g);
  CHECK(mean.f_acc == doctest::Approx((a.f_acc + b.f_acc) / 2));
  CHECK(mean.f_t == doctest::Approx((a.f_t + b.f_t) / 2));
}

TEST_CASE("model hash tracks every model field") {
  const ArmModel m = ArmModel::default_two_link();
  CHECK(model_hash(m) == model_hash(ArmModel::default_two_link()));
  ArmModel other = m;
  other.viscous_damping[1] = 0.11;
  CHECK(model_hash(other) != model_hash(m));
  other = m;
  other.gravity = 9.8;
  CHECK(model_hash(other) != model_hash(m));
}
