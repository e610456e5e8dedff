#pragma once

// File formats for rollouts, fronts and summaries.
//
// Rollout CSV: header `t,q_1..q_n,qd_1..qd_n,u_1..u_n,ee_x,ee_y,des_x,des_y`
// (1 + 3n + 4 columns), one row per tick, every line newline-terminated,
// numbers in shortest round-trip form. Each rollout CSV has a JSON sidecar
// manifest `<stem>.manifest.json` holding the CSV's checksum.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pdtune/control.hpp"
#include "pdtune/objectives.hpp"
#include "pdtune/pareto.hpp"
#include "pdtune/plant.hpp"
#include "pdtune/rollout.hpp"

namespace pdtune {

inline constexpr std::string_view kToolVersion = "pdtune 0.1.0";
inline constexpr int kManifestFormatVersion = 1;

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

/// Strict parse of a whole field; throws std::invalid_argument.
double parse_double(std::string_view text);

/// Writes `bytes` to `<path>.tmp` and renames it over `path`. Without
/// `overwrite`, an existing `path` is an IoError.
void atomic_write(const std::filesystem::path& path, std::string_view bytes, bool overwrite);

std::string read_file(const std::filesystem::path& path);

/// Minimal CSV builder with a fixed header.
class CsvWriter {
public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(const std::vector<std::string>& cells);
  [[nodiscard]] const std::string& str() const { return text_; }

private:
  std::size_t columns_;
  std::string text_;
};

std::size_t rollout_column_count(int n_links);
std::vector<std::string> rollout_header(int n_links);

struct RunManifest {
  int format_version = kManifestFormatVersion;
  std::string tool_version{kToolVersion};
  std::string csv_file;  // relative to the manifest's directory
  std::string checksum;
  std::size_t rows = 0;
  std::string trajectory_kind;
  nlohmann::json trajectory_params = nlohmann::json::object();
  double duration = 0.0;
  double dt = 0.0;
  Gains gains;
  ArmModel model;
  std::string model_hash;
  std::uint64_t seed = 0;
  std::optional<ObjectiveVector> objectives;
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const ArmModel& model);
ArmModel model_from_json(const nlohmann::json& j);

std::filesystem::path manifest_path_for(const std::filesystem::path& csv_path);

/// Serializes `log` to `csv_path` and its manifest beside it. Trajectory,
/// gain and seed fields of the manifest are taken from `log.meta`. Returns
/// the manifest as written.
RunManifest write_rollout(const RolloutLog& log, RunManifest manifest,
                          const std::filesystem::path& csv_path, bool overwrite = false);

/// Throws MalformedFile on bad CSV (naming the last good line) and
/// IntegrityError when the checksum or row count disagrees with the manifest.
std::pair<RolloutLog, RunManifest> read_rollout(const std::filesystem::path& csv_path);

/// Verifies a rollout CSV against its manifest without building the log.
bool verify_rollout(const std::filesystem::path& csv_path);

struct FrontRow {
  ObjectiveVector objectives;
  Gains gains;
};

/// Columns f_acc,f_t,kp_1..kp_n,kd_1..kd_n, rows sorted by f_acc.
void write_front(std::span<const FrontRow> rows, int n_links, const std::filesystem::path& path,
                 bool overwrite = false);

std::vector<FrontRow> read_front(const std::filesystem::path& path);

}  // namespace pdtune
