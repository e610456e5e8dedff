#include "pdtune/config.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "pdtune/dataset_io.hpp"
#include "pdtune/errors.hpp"

using nlohmann::json;

namespace pdtune {
namespace {

std::string_view branch_name(ElbowBranch b) { return b == ElbowBranch::kUp ? "elbow-up" : "elbow-down"; }

// Walks one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown.
class Reader {
public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(display(), "expected an object");
  }

  [[nodiscard]] bool has(const std::string& key) const { return node_.contains(key); }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!node_.contains(key)) return;
    seen_.insert(key);
    try {
      out = node_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(field(key), std::string("wrong type (") + e.what() + ")");
    }
  }

  Reader child(const std::string& key) {
    seen_.insert(key);
    return Reader(node_.at(key), field(key));
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return node_.at(key);
  }

  [[nodiscard]] std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) throw ConfigError(field(key), "unknown key");
    }
  }

private:
  [[nodiscard]] std::string display() const { return path_.empty() ? "<root>" : path_; }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

TrajectorySpec default_spec(TrajectoryKind kind) {
  TrajectorySpec s;
  s.kind = kind;
  if (kind == TrajectoryKind::kPyramid) s.center = {0.7, -0.6};
  return s;
}

CartesianPoint point_from(const std::vector<double>& v, const std::string& path) {
  if (v.size() != 2) throw ConfigError(path, "expected [x, y]");
  return {v[0], v[1]};
}

TrajectorySpec parse_trajectory(const json& node, const std::string& path) {
  Reader r(node, path);
  std::string kind_name;
  r.get("kind", kind_name);
  if (kind_name.empty()) throw ConfigError(r.field("kind"), "required");
  TrajectorySpec s;
  try {
    s = default_spec(trajectory_kind_from_string(kind_name));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(r.field("kind"), e.what());
  }
  r.get("id", s.id);
  if (s.id.empty()) throw ConfigError(r.field("id"), "required");
  std::string branch = std::string(branch_name(s.branch));
  r.get("branch", branch);
  if (branch == "elbow-up") {
    s.branch = ElbowBranch::kUp;
  } else if (branch == "elbow-down") {
    s.branch = ElbowBranch::kDown;
  } else {
    throw ConfigError(r.field("branch"), "must be elbow-up or elbow-down");
  }
  r.get("duration", s.duration);

  auto get_center = [&] {
    if (r.has("center")) {
      std::vector<double> c;
      r.get("center", c);
      s.center = point_from(c, r.field("center"));
    }
  };
  switch (s.kind) {
    case TrajectoryKind::kSpiral:
      get_center();
      r.get("r0", s.r0);
      r.get("r1", s.r1);
      r.get("turns", s.turns);
      break;
    case TrajectoryKind::kPyramid:
      get_center();
      r.get("half_width", s.half_width);
      r.get("height", s.height);
      r.get("n_teeth", s.n_teeth);
      break;
    case TrajectoryKind::kRandom:
      r.get("seed", s.seed);
      r.get("n_waypoints", s.n_waypoints);
      break;
  }
  r.finish();
  return s;
}

json trajectory_json(const TrajectorySpec& s) {
  json j = s.params();
  j["id"] = s.id;
  j["kind"] = std::string(to_string(s.kind));
  j["branch"] = std::string(branch_name(s.branch));
  j["duration"] = s.duration;
  return j;
}

void parse_ga(Reader r, GaConfig& ga) {
  r.get("population_size", ga.population_size);
  r.get("max_generations", ga.max_generations);
  r.get("crossover_probability", ga.crossover_probability);
  r.get("sbx_eta", ga.sbx_eta);
  if (r.has("mutation_probability")) {
    const json& mp = r.raw("mutation_probability");
    if (mp.is_null()) {
      ga.mutation_probability.reset();
    } else if (mp.is_number()) {
      ga.mutation_probability = mp.get<double>();
    } else {
      throw ConfigError(r.field("mutation_probability"), "expected a number or null");
    }
  }
  r.get("mutation_eta", ga.mutation_eta);
  auto bounds = [&](const char* key, double& lo, double& hi) {
    if (!r.has(key)) return;
    std::vector<double> b;
    r.get(key, b);
    if (b.size() != 2) throw ConfigError(r.field(key), "expected [min, max]");
    lo = b[0];
    hi = b[1];
  };
  bounds("kp_bounds", ga.gain_bounds.kp_min, ga.gain_bounds.kp_max);
  bounds("kd_bounds", ga.gain_bounds.kd_min, ga.gain_bounds.kd_max);
  r.get("convergence_window", ga.convergence_window);
  r.get("convergence_epsilon", ga.convergence_epsilon);
  r.get("rng_seed", ga.rng_seed);
  r.finish();
  try {
    ga.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("ga", e.what());
  }
}

}  // namespace

json TrajectorySpec::params() const {
  switch (kind) {
    case TrajectoryKind::kSpiral:
      return {{"center", {center.x, center.y}}, {"r0", r0}, {"r1", r1}, {"turns", turns}};
    case TrajectoryKind::kPyramid:
      return {{"center", {center.x, center.y}},
              {"half_width", half_width},
              {"height", height},
              {"n_teeth", n_teeth}};
    case TrajectoryKind::kRandom:
      return {{"seed", seed}, {"n_waypoints", n_waypoints}};
  }
  return json::object();
}

CartesianTrajectory generate(const TrajectorySpec& spec, const ArmModel& model, double dt,
                             double workspace_margin) {
  const Workspace ws = Workspace::of(model, workspace_margin);
  switch (spec.kind) {
    case TrajectoryKind::kSpiral:
      return gen_spiral(ws, spec.center, spec.r0, spec.r1, spec.turns, spec.duration, dt);
    case TrajectoryKind::kPyramid:
      return gen_pyramid(ws, spec.center, spec.half_width, spec.height, spec.n_teeth, spec.duration,
                         dt);
    case TrajectoryKind::kRandom:
      return gen_random(ws, spec.seed, spec.n_waypoints, spec.duration, dt);
  }
  throw std::logic_error("unhandled trajectory kind");
}

const TrajectorySpec& ExperimentConfig::trajectory(const std::string& id) const {
  const auto it = std::find_if(trajectories.begin(), trajectories.end(),
                               [&](const TrajectorySpec& s) { return s.id == id; });
  if (it == trajectories.end()) throw ConfigError("trajectories", "no trajectory with id '" + id + "'");
  return *it;
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  TrajectorySpec spiral = default_spec(TrajectoryKind::kSpiral);
  spiral.id = "spiral";
  TrajectorySpec pyramid = default_spec(TrajectoryKind::kPyramid);
  pyramid.id = "pyramid";
  TrajectorySpec random = default_spec(TrajectoryKind::kRandom);
  random.id = "random";
  cfg.trajectories = {spiral, pyramid, random};
  return cfg;
}

ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig cfg = default_config();
  Reader root(doc, "");

  if (root.has("model")) {
    Reader m = root.child("model");
    m.get("link_lengths", cfg.model.link_lengths);
    m.get("link_masses", cfg.model.link_masses);
    m.get("viscous_damping", cfg.model.viscous_damping);
    m.get("torque_limits", cfg.model.torque_limits);
    m.get("gravity", cfg.model.gravity);
    if (m.has("base_position")) {
      std::vector<double> b;
      m.get("base_position", b);
      cfg.model.base_position = point_from(b, "model.base_position");
    }
    m.finish();
    try {
      cfg.model.validate();
    } catch (const std::exception& e) {
      throw ConfigError("model", e.what());
    }
  }
  root.get("dt", cfg.dt);
  if (!(cfg.dt > 0.0)) throw ConfigError("dt", "must be > 0");
  root.get("workspace_margin", cfg.workspace_margin);
  if (!(cfg.workspace_margin >= 0.0 && cfg.workspace_margin < 1.0)) {
    throw ConfigError("workspace_margin", "must lie in [0, 1)");
  }

  if (root.has("trajectories")) {
    const json& list = root.raw("trajectories");
    if (!list.is_array() || list.empty()) throw ConfigError("trajectories", "expected a non-empty array");
    cfg.trajectories.clear();
    std::set<std::string> ids;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "trajectories[" + std::to_string(i) + "]";
      auto spec = parse_trajectory(list[i], path);
      if (!ids.insert(spec.id).second) throw ConfigError(path + ".id", "duplicate id '" + spec.id + "'");
      cfg.trajectories.push_back(std::move(spec));
    }
  }

  if (root.has("ga")) parse_ga(root.child("ga"), cfg.ga);
  root.get("replicates", cfg.replicates);
  if (cfg.replicates < 1) throw ConfigError("replicates", "must be >= 1");

  if (root.has("popsweep")) {
    Reader r = root.child("popsweep");
    r.get("population_sizes", cfg.popsweep_sizes);
    r.get("trajectory", cfg.popsweep_trajectory);
    r.finish();
    if (cfg.popsweep_sizes.empty()) throw ConfigError("popsweep.population_sizes", "must not be empty");
    for (const int n : cfg.popsweep_sizes) {
      if (n < 4 || n % 2 != 0) throw ConfigError("popsweep.population_sizes", "sizes must be even and >= 4");
    }
  }
  if (root.has("generic_vs_specific")) {
    Reader r = root.child("generic_vs_specific");
    r.get("target", cfg.gvs_target);
    r.get("trajectories", cfg.gvs_trajectories);
    r.finish();
  }
  if (root.has("speed_study")) {
    Reader r = root.child("speed_study");
    r.get("trajectory", cfg.speed_trajectory);
    r.get("durations", cfg.speed_durations);
    r.finish();
    if (cfg.speed_durations.empty()) throw ConfigError("speed_study.durations", "must not be empty");
  }
  if (root.has("emit_dataset")) {
    Reader r = root.child("emit_dataset");
    r.get("trajectories", cfg.dataset_trajectories);
    r.get("max_members", cfg.dataset_max_members);
    r.finish();
    if (cfg.dataset_max_members < 0) throw ConfigError("emit_dataset.max_members", "must be >= 0");
  }
  root.get("output_dir", cfg.output_dir);
  root.finish();

  // Cross-references.
  for (const auto& id : cfg.gvs_trajectories) {
    if (std::none_of(cfg.trajectories.begin(), cfg.trajectories.end(),
                     [&](const auto& s) { return s.id == id; })) {
      throw ConfigError("generic_vs_specific.trajectories", "unknown trajectory '" + id + "'");
    }
  }
  for (const auto& id : cfg.dataset_trajectories) {
    if (std::none_of(cfg.trajectories.begin(), cfg.trajectories.end(),
                     [&](const auto& s) { return s.id == id; })) {
      throw ConfigError("emit_dataset.trajectories", "unknown trajectory '" + id + "'");
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  } catch (const IoError& e) {
    throw ConfigError("<root>", e.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& cfg) {
  json traj = json::array();
  for (const auto& s : cfg.trajectories) traj.push_back(trajectory_json(s));
  const auto& ga = cfg.ga;
  return json{
      {"model", model_to_json(cfg.model)},
      {"dt", cfg.dt},
      {"workspace_margin", cfg.workspace_margin},
      {"trajectories", traj},
      {"ga",
       {{"population_size", ga.population_size},
        {"max_generations", ga.max_generations},
        {"crossover_probability", ga.crossover_probability},
        {"sbx_eta", ga.sbx_eta},
        {"mutation_probability",
         ga.mutation_probability ? json(*ga.mutation_probability) : json(nullptr)},
        {"mutation_eta", ga.mutation_eta},
        {"kp_bounds", {ga.gain_bounds.kp_min, ga.gain_bounds.kp_max}},
        {"kd_bounds", {ga.gain_bounds.kd_min, ga.gain_bounds.kd_max}},
        {"convergence_window", ga.convergence_window},
        {"convergence_epsilon", ga.convergence_epsilon},
        {"rng_seed", ga.rng_seed}}},
      {"replicates", cfg.replicates},
      {"popsweep", {{"population_sizes", cfg.popsweep_sizes}, {"trajectory", cfg.popsweep_trajectory}}},
      {"generic_vs_specific", {{"target", cfg.gvs_target}, {"trajectories", cfg.gvs_trajectories}}},
      {"speed_study", {{"trajectory", cfg.speed_trajectory}, {"durations", cfg.speed_durations}}},
      {"emit_dataset",
       {{"trajectories", cfg.dataset_trajectories}, {"max_members", cfg.dataset_max_members}}},
      {"output_dir", cfg.output_dir}};
}

}  // namespace pdtune
