#include "doctest.h"

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "pdtune/checksum.hpp"
#include "pdtune/dataset_io.hpp"
#include "pdtune/errors.hpp"
#include "pdtune/random.hpp"

using namespace pdtune;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("pdtune_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

JointVector vec2(double a, double b) {
  JointVector v(2);
  v << a, b;
  return v;
}

RolloutLog sample_log() {
  const ArmModel m = ArmModel::default_two_link();
  const auto traj = to_joint_setpoints(
      m, gen_spiral(Workspace::of(m), {1.0, 0.3}, 0.05, 0.4, 1, 0.2, 0.002), ElbowBranch::kDown);
  RolloutLog log = simulate(m, traj, {vec2(250.0, 120.0), vec2(12.5, 3.25)});
  log.meta.seed = 17;
  return log;
}

RunManifest sample_manifest() {
  RunManifest m;
  m.model = ArmModel::default_two_link();
  m.trajectory_params = {{"r0", 0.05}, {"r1", 0.4}};
  m.objectives = ObjectiveVector{0.0123, 45.6};
  return m;
}

void truncate_to(const fs::path& p, std::size_t bytes) {
  const std::string text = read_file(p);
  std::ofstream(p, std::ios::binary | std::ios::trunc) << text.substr(0, bytes);
}

std::size_t count_lines(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

}  // namespace

TEST_CASE("FNV-1a reference vectors") {
  CHECK(checksum("") == "fnv1a64:cbf29ce484222325");
  CHECK(checksum("a") == "fnv1a64:af63dc4c8601ec8c");
  CHECK(checksum("foobar") == "fnv1a64:85944171f73967e8");
}

TEST_CASE("number formatting round-trips every double") {
  Rng rng(41);
  for (int i = 0; i < 100000; ++i) {
    const double v = std::bit_cast<double>(rng.index(UINT64_MAX));
    if (!std::isfinite(v)) continue;
    REQUIRE(std::bit_cast<std::uint64_t>(parse_double(format_double(v))) ==
            std::bit_cast<std::uint64_t>(v));
  }
  for (double v : {0.0, -0.0, 1.0, 0.1, 1e-300, std::numeric_limits<double>::denorm_min(),
                   std::numeric_limits<double>::max()}) {
    CHECK(std::bit_cast<std::uint64_t>(parse_double(format_double(v))) ==
          std::bit_cast<std::uint64_t>(v));
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK_THROWS(parse_double("1.5x"));
  CHECK_THROWS(parse_double(""));
  CHECK_THROWS(parse_double(" 1"));
}

TEST_CASE("rollout column count") {
  CHECK(rollout_column_count(2) == 11);
  const auto header = rollout_header(2);
  CHECK(header.size() == 11);
  CHECK(header.front() == "t");
  CHECK(header[1] == "q_1");
  CHECK(header.back() == "des_y");

  TempDir dir("columns");
  write_rollout(sample_log(), sample_manifest(), dir.path / "r.csv");
  const std::string text = read_file(dir.path / "r.csv");
  const std::string first = text.substr(0, text.find('\n'));
  CHECK(std::count(first.begin(), first.end(), ',') + 1 == 11);
}

TEST_CASE("rollout round trip") {
  TempDir dir("roundtrip");
  const RolloutLog log = sample_log();
  const RunManifest written = write_rollout(log, sample_manifest(), dir.path / "r.csv");
  CHECK(written.rows == log.rows());
  CHECK(written.csv_file == "r.csv");
  CHECK(fs::exists(dir.path / "r.manifest.json"));
  CHECK(verify_rollout(dir.path / "r.csv"));

  const auto [back, manifest] = read_rollout(dir.path / "r.csv");
  CHECK(back == log);
  CHECK(manifest.checksum == written.checksum);
  CHECK(manifest.model == ArmModel::default_two_link());
  CHECK(manifest.model_hash == model_hash(ArmModel::default_two_link()));
  CHECK(manifest.seed == 17);
  CHECK(manifest.gains == log.meta.gains);
  REQUIRE(manifest.objectives.has_value());
  CHECK(*manifest.objectives == ObjectiveVector{0.0123, 45.6});
  CHECK(manifest.trajectory_params == sample_manifest().trajectory_params);
  CHECK(manifest.tool_version == kToolVersion);
}

TEST_CASE("identical inputs give byte-identical files") {
  TempDir dir("bytes");
  write_rollout(sample_log(), sample_manifest(), dir.path / "a.csv");
  write_rollout(sample_log(), sample_manifest(), dir.path / "b.csv");
  CHECK(read_file(dir.path / "a.csv") == read_file(dir.path / "b.csv"));
  const std::string ma = read_file(dir.path / "a.manifest.json");
  std::string mb = read_file(dir.path / "b.manifest.json");
  mb.replace(mb.find("b.csv"), 5, "a.csv");
  CHECK(ma == mb);
}

TEST_CASE("truncated rollouts are rejected") {
  TempDir dir("truncated");
  const fs::path p = dir.path / "r.csv";
  write_rollout(sample_log(), sample_manifest(), p);
  const std::string text = read_file(p);

  // Cut inside line 5: lines 1-4 are complete.
  std::size_t cut = 0;
  for (int i = 0; i < 4; ++i) cut = text.find('\n', cut) + 1;
  truncate_to(p, cut + 7);
  try {
    (void)read_rollout(p);
    FAIL("expected MalformedFile");
  } catch (const MalformedFile& e) {
    CHECK(e.last_good_line() == 4);
    CHECK(std::string(e.what()).find("last good line: 4") != std::string::npos);
  }
  CHECK_FALSE(verify_rollout(p));

  // Cut at a line boundary: every line parses, the manifest disagrees.
  truncate_to(p, cut);
  CHECK(count_lines(read_file(p)) == 4);
  CHECK_THROWS_AS(read_rollout(p), IntegrityError);
}

TEST_CASE("corrupted rollouts are rejected") {
  TempDir dir("corrupt");
  const fs::path p = dir.path / "r.csv";
  write_rollout(sample_log(), sample_manifest(), p);
  std::string text = read_file(p);
  const auto pos = text.find('\n') + 1;
  text[pos] = text[pos] == '0' ? '1' : '0';
  std::ofstream(p, std::ios::binary | std::ios::trunc) << text;
  CHECK_THROWS_AS(read_rollout(p), IntegrityError);
  CHECK_FALSE(verify_rollout(p));

  write_rollout(sample_log(), sample_manifest(), dir.path / "s.csv");
  std::ofstream(dir.path / "s.manifest.json", std::ios::trunc) << "{ not json";
  CHECK_THROWS_AS(read_rollout(dir.path / "s.csv"), IntegrityError);

  write_rollout(sample_log(), sample_manifest(), dir.path / "u.csv");
  std::string bad = read_file(dir.path / "u.csv");
  bad.replace(bad.find('\n') + 1, 1, "x");
  std::ofstream(dir.path / "u.csv", std::ios::binary | std::ios::trunc) << bad;
  try {
    (void)read_rollout(dir.path / "u.csv");
    FAIL("expected MalformedFile");
  } catch (const MalformedFile& e) {
    CHECK(e.last_good_line() == 1);
  }
}

TEST_CASE("existing files are not overwritten without permission") {
  TempDir dir("collision");
  const fs::path p = dir.path / "r.csv";
  write_rollout(sample_log(), sample_manifest(), p);
  CHECK_THROWS_AS(write_rollout(sample_log(), sample_manifest(), p), IoError);
  CHECK_NOTHROW(write_rollout(sample_log(), sample_manifest(), p, true));
  CHECK_THROWS_AS(atomic_write(p, "x", false), IoError);
  atomic_write(dir.path / "sub" / "f.txt", "hello\n", false);
  CHECK(read_file(dir.path / "sub" / "f.txt") == "hello\n");
  CHECK_FALSE(fs::exists(dir.path / "sub" / "f.txt.tmp"));
}

TEST_CASE("front files") {
  TempDir dir("front");
  write_front({}, 2, dir.path / "empty.csv");
  CHECK(read_file(dir.path / "empty.csv") == "f_acc,f_t,kp_1,kp_2,kd_1,kd_2\n");
  CHECK(read_front(dir.path / "empty.csv").empty());

  Rng rng(42);
  std::vector<FrontRow> rows;
  for (int i = 0; i < 25; ++i) {
    rows.push_back({{rng.uniform(0, 0.1), rng.uniform(0, 1e3)},
                    {vec2(rng.uniform(1, 1e3), rng.uniform(1, 1e3)),
                     vec2(rng.uniform(0.01, 100), rng.uniform(0.01, 100))}});
  }
  write_front(rows, 2, dir.path / "f.csv");
  const auto back = read_front(dir.path / "f.csv");
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 1; i < back.size(); ++i)
    CHECK(back[i - 1].objectives.f_acc <= back[i].objectives.f_acc);
  for (const auto& r : rows) {
    const auto it = std::find_if(back.begin(), back.end(), [&](const FrontRow& b) {
      return b.objectives == r.objectives;
    });
    REQUIRE(it != back.end());
    CHECK(it->gains == r.gains);
  }
  write_front(back, 2, dir.path / "g.csv");
  CHECK(read_file(dir.path / "g.csv") == read_file(dir.path / "f.csv"));
}

TEST_CASE("manifest JSON round trip") {
  RunManifest m = sample_manifest();
  m.gains = {vec2(1, 2), vec2(3, 4)};
  m.csv_file = "x.csv";
  m.checksum = "fnv1a64:0000000000000001";
  m.rows = 3;
  m.trajectory_kind = "pyramid";
  m.duration = 5.0;
  m.dt = 0.002;
  m.seed = 99;
  const RunManifest back = manifest_from_json(to_json(m));
  CHECK(to_json(back) == to_json(m));
  CHECK(back.model == m.model);
  CHECK(back.gains == m.gains);
  CHECK(manifest_path_for("dir/member_001.csv") == fs::path("dir/member_001.manifest.json"));
}
