#include "pdtune/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "pdtune/errors.hpp"
#include "pdtune/random.hpp"
#include "pdtune/spline.hpp"

namespace pdtune {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_timing(double duration, double dt) {
  if (!(duration > 0.0) || !(dt > 0.0) || !std::isfinite(duration) || !std::isfinite(dt)) {
    throw std::invalid_argument("duration and dt must be finite and > 0");
  }
}

void check_inside(const Workspace& ws, const CartesianTrajectory& traj) {
  for (std::size_t i = 0; i < traj.points.size(); ++i) {
    if (!ws.contains(traj.points[i])) {
      throw GenerationError(i, std::string(to_string(traj.kind)) + " trajectory leaves the workspace at tick " +
                                   std::to_string(i));
    }
  }
}

}  // namespace

std::string_view to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::kSpiral: return "spiral";
    case TrajectoryKind::kPyramid: return "pyramid";
    case TrajectoryKind::kRandom: return "random";
  }
  return "unknown";
}

TrajectoryKind trajectory_kind_from_string(std::string_view name) {
  if (name == "spiral") return TrajectoryKind::kSpiral;
  if (name == "pyramid") return TrajectoryKind::kPyramid;
  if (name == "random") return TrajectoryKind::kRandom;
  throw std::invalid_argument("unknown trajectory kind '" + std::string(name) + "'");
}

Workspace Workspace::of(const ArmModel& model, double margin) {
  const auto& l = model.link_lengths;
  const double total = std::accumulate(l.begin(), l.end(), 0.0);
  const double longest = *std::max_element(l.begin(), l.end());
  const double inner = std::max(0.0, longest - (total - longest));
  return Workspace{model.base_position, inner * (1.0 + margin), total * (1.0 - margin)};
}

bool Workspace::contains(CartesianPoint p) const {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
  const double r = distance(p, center);
  return r >= inner_radius && r <= outer_radius;
}

std::size_t sample_count(double duration, double dt) {
  check_timing(duration, dt);
  return static_cast<std::size_t>(std::llround(duration / dt)) + 1;
}

CartesianTrajectory gen_spiral(const Workspace& ws, CartesianPoint center, double r0, double r1,
                               double turns, double duration, double dt) {
  if (!(r1 > r0) || !(r0 >= 0.0)) throw std::invalid_argument("spiral needs r1 > r0 >= 0");
  const std::size_t count = sample_count(duration, dt);
  const auto last = static_cast<double>(count - 1);

  CartesianTrajectory traj{dt, duration, TrajectoryKind::kSpiral, {}};
  traj.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double s = static_cast<double>(i) / last;
    const double r = i + 1 == count ? r1 : r0 + (r1 - r0) * s;
    const double phi = kTwoPi * turns * s;
    traj.points.push_back({center.x + r * std::cos(phi), center.y + r * std::sin(phi)});
  }
  check_inside(ws, traj);
  return traj;
}

CartesianTrajectory gen_pyramid(const Workspace& ws, CartesianPoint center, double half_width,
                                double height, int n_teeth, double duration, double dt) {
  if (n_teeth < 1) throw std::invalid_argument("pyramid needs at least one tooth");
  if (!(half_width > 0.0) || !(height != 0.0)) {
    throw std::invalid_argument("pyramid needs half_width > 0 and non-zero height");
  }
  const std::size_t count = sample_count(duration, dt);
  const std::size_t ticks = count - 1;
  const auto n_segments = static_cast<std::size_t>(2 * n_teeth);
  if (ticks < n_segments) throw std::invalid_argument("too few ticks for the pyramid vertices");

  std::vector<CartesianPoint> vertices;
  for (std::size_t k = 0; k <= n_segments; ++k) {
    const double x = center.x - half_width +
                     2.0 * half_width * static_cast<double>(k) / static_cast<double>(n_segments);
    vertices.push_back({x, k % 2 == 1 ? center.y + height : center.y});
  }

  // Largest-remainder apportionment of ticks to segments by length.
  std::vector<double> lengths(n_segments);
  for (std::size_t s = 0; s < n_segments; ++s) lengths[s] = distance(vertices[s], vertices[s + 1]);
  const double total = std::accumulate(lengths.begin(), lengths.end(), 0.0);
  std::vector<std::size_t> share(n_segments);
  std::vector<double> remainder(n_segments);
  std::size_t assigned = 0;
  for (std::size_t s = 0; s < n_segments; ++s) {
    const double quota = static_cast<double>(ticks) * lengths[s] / total;
    share[s] = static_cast<std::size_t>(std::floor(quota));
    remainder[s] = quota - static_cast<double>(share[s]);
    assigned += share[s];
  }
  std::vector<std::size_t> order(n_segments);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < ticks; ++k, ++assigned) ++share[order[k % n_segments]];
  for (std::size_t s = 0; s < n_segments; ++s) {
    if (share[s] == 0) throw std::invalid_argument("pyramid segment received no ticks");
  }

  CartesianTrajectory traj{dt, duration, TrajectoryKind::kPyramid, {}};
  traj.points.reserve(count);
  for (std::size_t s = 0; s < n_segments; ++s) {
    const CartesianPoint a = vertices[s];
    const CartesianPoint b = vertices[s + 1];
    for (std::size_t j = 0; j < share[s]; ++j) {
      const double f = static_cast<double>(j) / static_cast<double>(share[s]);
      traj.points.push_back({a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f});
    }
  }
  traj.points.push_back(vertices.back());
  check_inside(ws, traj);
  return traj;
}

CartesianTrajectory gen_random(const Workspace& ws, std::uint64_t seed, int n_waypoints,
                               double duration, double dt) {
  if (n_waypoints < 2) throw std::invalid_argument("random trajectory needs >= 2 waypoints");
  const std::size_t count = sample_count(duration, dt);
  constexpr int kRetries = 10;

  Rng rng(seed);
  const double r_in2 = ws.inner_radius * ws.inner_radius;
  const double r_out2 = ws.outer_radius * ws.outer_radius;
  std::vector<double> knots(static_cast<std::size_t>(n_waypoints));
  for (int k = 0; k < n_waypoints; ++k) {
    knots[static_cast<std::size_t>(k)] = duration * k / (n_waypoints - 1);
  }

  for (int attempt = 0;; ++attempt) {
    std::vector<double> xs, ys;
    for (int k = 0; k < n_waypoints; ++k) {
      const double r = std::sqrt(rng.uniform(r_in2, r_out2));
      const double phi = rng.uniform(0.0, kTwoPi);
      xs.push_back(ws.center.x + r * std::cos(phi));
      ys.push_back(ws.center.y + r * std::sin(phi));
    }
    const NaturalCubicSpline sx(knots, xs);
    const NaturalCubicSpline sy(knots, ys);

    CartesianTrajectory traj{dt, duration, TrajectoryKind::kRandom, {}};
    traj.points.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      const double t = i + 1 == count ? duration : duration * static_cast<double>(i) /
                                                       static_cast<double>(count - 1);
      traj.points.push_back({sx(t), sy(t)});
    }
    try {
      check_inside(ws, traj);
      return traj;
    } catch (const GenerationError&) {
      if (attempt == kRetries) throw;
    }
  }
}

JointTrajectory to_joint_setpoints(const ArmModel& model, const CartesianTrajectory& traj,
                                   ElbowBranch branch) {
  const std::size_t count = traj.points.size();
  if (count == 0) throw std::invalid_argument("empty trajectory");
  if (!(traj.dt > 0.0)) throw std::invalid_argument("trajectory dt must be > 0");

  JointTrajectory out;
  out.dt = traj.dt;
  out.source = traj;
  out.q_des.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    JointVector q;
    try {
      q = inverse_kinematics(model, traj.points[i], branch);
    } catch (const UnreachableError& e) {
      throw GenerationError(i, "tick " + std::to_string(i) + ": " + e.what());
    }
    if (i > 0) {
      const JointVector& prev = out.q_des.back();
      for (int j = 0; j < q.size(); ++j) {
        q(j) += kTwoPi * std::round((prev(j) - q(j)) / kTwoPi);
      }
    }
    out.q_des.push_back(q);
  }

  out.qd_des.reserve(count);
  const auto n = model.n_links();
  for (std::size_t i = 0; i < count; ++i) {
    if (count == 1) {
      out.qd_des.push_back(JointVector::Zero(n));
    } else if (i == 0) {
      out.qd_des.push_back((out.q_des[1] - out.q_des[0]) / traj.dt);
    } else if (i + 1 == count) {
      out.qd_des.push_back((out.q_des[i] - out.q_des[i - 1]) / traj.dt);
    } else {
      out.qd_des.push_back((out.q_des[i + 1] - out.q_des[i - 1]) / (2.0 * traj.dt));
    }
  }
  return out;
}

}  // namespace pdtune
