#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "pdtune/checksum.hpp"
#include "pdtune/config.hpp"
#include "pdtune/dataset_io.hpp"
#include "pdtune/experiments.hpp"

using namespace pdtune;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("pdtune_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ExperimentConfig toy_config() {
  ExperimentConfig cfg = default_config();
  for (auto& t : cfg.trajectories) t.duration = 0.4;
  cfg.ga.population_size = 8;
  cfg.ga.max_generations = 5;
  cfg.replicates = 2;
  cfg.popsweep_sizes = {8, 12};
  cfg.speed_durations = {0.3, 0.4, 0.5, 0.6};
  return cfg;
}

RunOptions options(const fs::path& dir) {
  RunOptions o;
  o.out_dir = dir;
  return o;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_file(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

// Relative path -> file contents for every regular file under `root`.
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = read_file(e.path());
  }
  return files;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PDTUNE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("tune writes a front, a history and rollouts") {
  TempDir dir("tune");
  const ExperimentConfig cfg = toy_config();
  const TuneSummary s = cmd_tune(cfg, "spiral", options(dir.path));
  CHECK(s.result.evaluations_used == 8u * (s.result.generations_run + 1u));

  const auto rows = read_front(dir.path / "front.csv");
  REQUIRE(!rows.empty());
  for (const auto& a : rows)
    for (const auto& b : rows) CHECK_FALSE(dominates(a.objectives, b.objectives));

  const auto history = read_csv(dir.path / "history.csv");
  CHECK(history.front() ==
        std::vector<std::string>{"generation", "evaluations", "front_size", "hypervolume"});
  CHECK(history.size() == static_cast<std::size_t>(s.result.generations_run) + 2);

  std::size_t rollouts = 0;
  for (const auto& e : fs::directory_iterator(dir.path / "rollouts")) {
    if (e.path().extension() != ".csv") continue;
    ++rollouts;
    const auto [log, manifest] = read_rollout(e.path());
    REQUIRE(manifest.objectives.has_value());
    const bool on_front = std::any_of(rows.begin(), rows.end(), [&](const FrontRow& r) {
      return r.objectives == *manifest.objectives && r.gains == manifest.gains;
    });
    CHECK(on_front);
    CHECK(log.rows() == sample_count(0.4, cfg.dt));
  }
  CHECK(rollouts >= 1);

  const json manifest = json::parse(read_file(dir.path / "run_manifest.json"));
  CHECK(manifest["command"] == "tune");
  CHECK(manifest["config"] == to_json(cfg));
  CHECK(parse_config(manifest["config"]).trajectories.size() == cfg.trajectories.size());
}

TEST_CASE("tune is reproducible from a fixed seed") {
  TempDir a("tune_a"), b("tune_b");
  const ExperimentConfig cfg = toy_config();
  RunOptions oa = options(a.path), ob = options(b.path);
  oa.seed = ob.seed = 11;
  ob.jobs = 3;
  cmd_tune(cfg, "pyramid", oa);
  cmd_tune(cfg, "pyramid", ob);
  CHECK(snapshot(a.path) == snapshot(b.path));
  CHECK_THROWS_AS(cmd_tune(cfg, "pyramid", oa), IoError);
}

TEST_CASE("popsweep counts runs at generation granularity") {
  TempDir dir("popsweep");
  const ExperimentConfig cfg = toy_config();
  const PopsweepSummary s = cmd_popsweep(cfg, options(dir.path));
  REQUIRE(s.rows.size() == 4);
  for (const auto& r : s.rows) {
    CHECK(r.evaluations_to_convergence % static_cast<std::size_t>(r.population_size) == 0);
    CHECK(r.final_hypervolume >= 0.0);
  }
  const auto csv = read_csv(dir.path / "summary.csv");
  REQUIRE(csv.size() == 5);
  CHECK(csv[0] == std::vector<std::string>{"population_size", "seed", "evaluations_to_convergence",
                                           "final_hypervolume", "converged"});
  for (int pop : {8, 12})
    for (int seed : {1, 2}) {
      const fs::path d = dir.path / ("pop_" + std::to_string(pop)) / ("seed_" + std::to_string(seed));
      CHECK(fs::exists(d / "front.csv"));
      CHECK(fs::exists(d / "history.csv"));
    }

  TempDir again("popsweep_again");
  cmd_popsweep(cfg, options(again.path));
  CHECK(read_file(dir.path / "summary.csv") == read_file(again.path / "summary.csv"));
}

TEST_CASE("generic vs specific writes two fronts per seed under a shared reference") {
  TempDir dir("gvs");
  ExperimentConfig cfg = toy_config();
  cfg.gvs_trajectories = {"spiral", "pyramid"};
  const GenericVsSpecificSummary s = cmd_generic_vs_specific(cfg, options(dir.path));
  REQUIRE(s.rows.size() == 2);
  CHECK(read_csv(dir.path / "summary.csv").size() == 3);
  for (const auto& row : s.rows) {
    const fs::path d = dir.path / ("seed_" + std::to_string(row.seed));
    CHECK(fs::exists(d / "specific_front.csv"));
    CHECK(fs::exists(d / "generic_front.csv"));
  }
  for (const auto* fronts : {&s.specific_fronts, &s.generic_fronts})
    for (const auto& f : *fronts)
      for (const auto& p : f.points) {
        if (is_penalty(p)) continue;
        CHECK(s.reference.f_acc > p.f_acc);
        CHECK(s.reference.f_t > p.f_t);
      }

  ExperimentConfig single = toy_config();
  single.gvs_trajectories = {"pyramid"};
  TempDir other("gvs_single");
  CHECK_THROWS_AS(cmd_generic_vs_specific(single, options(other.path)), ConfigError);
}

TEST_CASE("speed study fills the duration matrix") {
  TempDir dir("speed");
  const ExperimentConfig cfg = toy_config();
  const SpeedStudySummary s = cmd_speed_study(cfg, options(dir.path));
  CHECK(s.cells.size() == 2 * 16);
  const auto csv = read_csv(dir.path / "matrix.csv");
  CHECK(csv.size() == 2 * 16 + 1);

  // Diagonal cells re-simulate the tuned front on its own duration.
  for (const auto& cell : s.cells) {
    if (cell.tuned_duration != cell.evaluated_duration) continue;
    const fs::path f = dir.path / ("seed_" + std::to_string(cell.seed)) /
                       ("tuned_" + format_double(cell.tuned_duration) + "s") / "front.csv";
    const auto rows = read_front(f);
    std::vector<ObjectiveVector> pts;
    for (const auto& r : rows) pts.push_back(r.objectives);
    CHECK(hypervolume_2d(pts, s.reference) == doctest::Approx(cell.hypervolume).epsilon(1e-12));
    double best = 1e300;
    for (const auto& p : pts) best = std::min(best, p.f_acc);
    CHECK(best == cell.best_accuracy_error);
  }
}

TEST_CASE("emit-dataset writes one verified rollout per front member") {
  TempDir dir("dataset");
  const ExperimentConfig cfg = toy_config();
  RunOptions opts = options(dir.path);
  const auto entries = cmd_emit_dataset(cfg, opts);

  std::size_t expected = 0;
  for (const auto& t : cfg.trajectories)
    expected += read_front(dir.path / "fronts" / t.id / "front.csv").size();
  CHECK(entries.size() == expected);

  const auto index = read_csv(dir.path / "index.csv");
  REQUIRE(index.size() == expected + 1);
  const auto& header = index.front();
  const auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
  };
  for (std::size_t i = 1; i < index.size(); ++i) {
    const fs::path csv = dir.path / index[i][col("file")];
    CHECK(verify_rollout(csv));
    CHECK(checksum(read_file(csv)) == index[i][col("checksum")]);
  }

  const auto before = snapshot(dir.path);
  CHECK_THROWS_AS(cmd_emit_dataset(cfg, opts), IoError);
  opts.overwrite = true;
  cmd_emit_dataset(cfg, opts);
  CHECK(snapshot(dir.path) == before);

  ExperimentConfig limited = cfg;
  limited.dataset_trajectories = {"spiral"};
  limited.dataset_max_members = 2;
  TempDir small("dataset_small");
  CHECK(cmd_emit_dataset(limited, options(small.path)).size() <= 2);
}

TEST_CASE("command-line exit codes") {
  TempDir dir("cli");
  std::ofstream(dir.path / "toy.json") << to_json(toy_config()).dump();
  std::ofstream(dir.path / "bad.json") << R"({"ga": {"sbx_etta": 3}})";
  const std::string toy = "--config " + (dir.path / "toy.json").string();
  const std::string out = " --out " + (dir.path / "run").string() + " --quiet";

  CHECK(run_cli("tune " + toy + out) == 0);
  CHECK(fs::exists(dir.path / "run" / "front.csv"));
  CHECK(run_cli("tune " + toy + out) == 1);
  CHECK(run_cli("tune " + toy + out + " --overwrite") == 0);
  CHECK(run_cli("tune --config " + (dir.path / "bad.json").string() + out) == 2);
  CHECK(run_cli("tune " + toy + out + " --trajectory nowhere") == 2);
  CHECK(run_cli("tune --bogus-flag") == 2);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("tune " + toy + out + " --jobs -3") == 2);
}
