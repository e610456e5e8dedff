#include "pdtune/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "pdtune/checksum.hpp"
#include "pdtune/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace pdtune {
namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  return out;
}

// Newline-terminated lines of a CSV body. An unterminated tail is reported
// as malformed.
std::vector<std::string_view> csv_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto pos = text.find('\n', start);
    if (pos == std::string_view::npos) {
      throw MalformedFile(lines.size(), "line " + std::to_string(lines.size() + 1) +
                                            ": unterminated line (file truncated?)");
    }
    lines.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return lines;
}

std::vector<double> parse_row(std::string_view line, std::size_t expected_columns,
                              std::size_t line_number) {
  const auto cells = split(line, ',');
  if (cells.size() != expected_columns) {
    throw MalformedFile(line_number - 1, "line " + std::to_string(line_number) + ": expected " +
                                             std::to_string(expected_columns) + " columns, found " +
                                             std::to_string(cells.size()));
  }
  std::vector<double> values;
  values.reserve(cells.size());
  for (const auto cell : cells) {
    try {
      values.push_back(parse_double(cell));
    } catch (const std::invalid_argument&) {
      throw MalformedFile(line_number - 1, "line " + std::to_string(line_number) +
                                               ": non-numeric cell '" + std::string(cell) + "'");
    }
  }
  return values;
}

json vector_json(const JointVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

JointVector vector_from_json(const json& a) {
  JointVector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != end) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return v;
}

void atomic_write(const fs::path& path, std::string_view bytes, bool overwrite) {
  if (!overwrite && fs::exists(path)) {
    throw IoError("refusing to overwrite existing file " + path.string());
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  text_ = join(header) + '\n';
}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw std::invalid_argument("CSV row has the wrong column count");
  text_ += join(cells);
  text_ += '\n';
}

std::size_t rollout_column_count(int n_links) { return 1 + 3 * static_cast<std::size_t>(n_links) + 4; }

std::vector<std::string> rollout_header(int n_links) {
  std::vector<std::string> h{"t"};
  for (const char* prefix : {"q_", "qd_", "u_"}) {
    for (int j = 1; j <= n_links; ++j) h.push_back(prefix + std::to_string(j));
  }
  for (const char* name : {"ee_x", "ee_y", "des_x", "des_y"}) h.emplace_back(name);
  return h;
}

json model_to_json(const ArmModel& model) {
  return json{{"link_lengths", model.link_lengths},
              {"link_masses", model.link_masses},
              {"viscous_damping", model.viscous_damping},
              {"torque_limits", model.torque_limits},
              {"gravity", model.gravity},
              {"base_position", {model.base_position.x, model.base_position.y}}};
}

ArmModel model_from_json(const json& j) {
  ArmModel m;
  m.link_lengths = j.at("link_lengths").get<std::vector<double>>();
  m.link_masses = j.at("link_masses").get<std::vector<double>>();
  m.viscous_damping = j.at("viscous_damping").get<std::vector<double>>();
  m.torque_limits = j.at("torque_limits").get<std::vector<double>>();
  m.gravity = j.at("gravity").get<double>();
  const auto base = j.at("base_position").get<std::vector<double>>();
  if (base.size() != 2) throw std::invalid_argument("base_position must have two entries");
  m.base_position = {base[0], base[1]};
  return m;
}

json to_json(const RunManifest& m) {
  json j{{"format_version", m.format_version},
         {"tool_version", m.tool_version},
         {"csv_file", m.csv_file},
         {"checksum", m.checksum},
         {"rows", m.rows},
         {"trajectory",
          {{"kind", m.trajectory_kind},
           {"params", m.trajectory_params},
           {"duration", m.duration},
           {"dt", m.dt}}},
         {"gains", {{"kp", vector_json(m.gains.kp)}, {"kd", vector_json(m.gains.kd)}}},
         {"model", model_to_json(m.model)},
         {"model_hash", m.model_hash},
         {"seed", m.seed}};
  j["objectives"] = m.objectives ? json{{"f_acc", m.objectives->f_acc}, {"f_t", m.objectives->f_t}}
                                 : json(nullptr);
  return j;
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  m.format_version = j.at("format_version").get<int>();
  m.tool_version = j.at("tool_version").get<std::string>();
  m.csv_file = j.at("csv_file").get<std::string>();
  m.checksum = j.at("checksum").get<std::string>();
  m.rows = j.at("rows").get<std::size_t>();
  const auto& traj = j.at("trajectory");
  m.trajectory_kind = traj.at("kind").get<std::string>();
  m.trajectory_params = traj.at("params");
  m.duration = traj.at("duration").get<double>();
  m.dt = traj.at("dt").get<double>();
  m.gains.kp = vector_from_json(j.at("gains").at("kp"));
  m.gains.kd = vector_from_json(j.at("gains").at("kd"));
  m.model = model_from_json(j.at("model"));
  m.model_hash = j.at("model_hash").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  if (const auto& o = j.at("objectives"); !o.is_null()) {
    m.objectives = ObjectiveVector{o.at("f_acc").get<double>(), o.at("f_t").get<double>()};
  }
  return m;
}

fs::path manifest_path_for(const fs::path& csv_path) {
  fs::path p = csv_path;
  p.replace_extension(".manifest.json");
  return p;
}

RunManifest write_rollout(const RolloutLog& log, RunManifest manifest, const fs::path& csv_path,
                          bool overwrite) {
  const int n = log.meta.gains.kp.size() > 0 ? static_cast<int>(log.meta.gains.kp.size())
                                             : (log.rows() ? static_cast<int>(log.q[0].size()) : 0);
  if (n <= 0) throw std::invalid_argument("write_rollout: cannot infer joint count");
  const fs::path manifest_path = manifest_path_for(csv_path);
  if (!overwrite && (fs::exists(csv_path) || fs::exists(manifest_path))) {
    throw IoError("refusing to overwrite existing rollout " + csv_path.string());
  }

  CsvWriter csv(rollout_header(n));
  std::vector<std::string> cells;
  for (std::size_t i = 0; i < log.rows(); ++i) {
    cells.clear();
    cells.push_back(format_double(log.t[i]));
    for (const auto* field : {&log.q, &log.qd, &log.u}) {
      const JointVector& v = (*field)[i];
      if (v.size() != n) throw DimensionError("write_rollout: row has inconsistent joint count");
      for (int j = 0; j < n; ++j) cells.push_back(format_double(v(j)));
    }
    for (const double v : {log.ee[i].x, log.ee[i].y, log.des[i].x, log.des[i].y}) {
      cells.push_back(format_double(v));
    }
    csv.add_row(cells);
  }

  manifest.csv_file = csv_path.filename().string();
  manifest.checksum = checksum(csv.str());
  manifest.rows = log.rows();
  manifest.trajectory_kind = std::string(to_string(log.meta.kind));
  manifest.duration = log.meta.duration;
  manifest.dt = log.dt;
  manifest.gains = log.meta.gains;
  manifest.model_hash = log.meta.model_hash;
  manifest.seed = log.meta.seed;

  atomic_write(csv_path, csv.str(), true);
  atomic_write(manifest_path, to_json(manifest).dump(2) + "\n", true);
  return manifest;
}

std::pair<RolloutLog, RunManifest> read_rollout(const fs::path& csv_path) {
  const fs::path manifest_path = manifest_path_for(csv_path);
  RunManifest manifest;
  try {
    manifest = manifest_from_json(json::parse(read_file(manifest_path)));
  } catch (const json::exception& e) {
    throw IntegrityError("unreadable manifest " + manifest_path.string() + ": " + e.what());
  }
  const std::string text = read_file(csv_path);
  const auto lines = csv_lines(text);
  if (lines.empty()) throw MalformedFile(0, "line 1: missing header");

  const int n = static_cast<int>(manifest.gains.kp.size());
  const auto columns = rollout_column_count(n);
  if (lines[0] != join(rollout_header(n))) {
    throw MalformedFile(0, "line 1: header does not match a " + std::to_string(n) + "-joint rollout");
  }

  RolloutLog log;
  log.dt = manifest.dt;
  log.meta = RolloutMeta{manifest.gains, trajectory_kind_from_string(manifest.trajectory_kind),
                         manifest.duration, manifest.model_hash, manifest.seed};
  log.reserve(lines.size() - 1);
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto v = parse_row(lines[li], columns, li + 1);
    std::size_t c = 0;
    log.t.push_back(v[c++]);
    for (auto* field : {&log.q, &log.qd, &log.u}) {
      JointVector row(n);
      for (int j = 0; j < n; ++j) row(j) = v[c++];
      field->push_back(row);
    }
    log.ee.push_back({v[c], v[c + 1]});
    log.des.push_back({v[c + 2], v[c + 3]});
  }

  if (log.rows() != manifest.rows) {
    throw IntegrityError(csv_path.string() + ": manifest expects " + std::to_string(manifest.rows) +
                         " rows, file has " + std::to_string(log.rows()));
  }
  if (checksum(text) != manifest.checksum) {
    throw IntegrityError(csv_path.string() + ": checksum mismatch with manifest");
  }
  return {std::move(log), std::move(manifest)};
}

bool verify_rollout(const fs::path& csv_path) {
  try {
    const auto manifest = manifest_from_json(json::parse(read_file(manifest_path_for(csv_path))));
    return checksum(read_file(csv_path)) == manifest.checksum;
  } catch (const std::exception&) {
    return false;
  }
}

void write_front(std::span<const FrontRow> rows, int n_links, const fs::path& path, bool overwrite) {
  std::vector<std::string> header{"f_acc", "f_t"};
  for (const char* prefix : {"kp_", "kd_"}) {
    for (int j = 1; j <= n_links; ++j) header.push_back(prefix + std::to_string(j));
  }
  std::vector<const FrontRow*> sorted;
  for (const auto& r : rows) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](const FrontRow* a, const FrontRow* b) {
    if (a->objectives.f_acc != b->objectives.f_acc) return a->objectives.f_acc < b->objectives.f_acc;
    return a->objectives.f_t < b->objectives.f_t;
  });

  CsvWriter csv(header);
  for (const auto* r : sorted) {
    if (r->gains.kp.size() != n_links || r->gains.kd.size() != n_links) {
      throw DimensionError("write_front: gains do not match the joint count");
    }
    std::vector<std::string> cells{format_double(r->objectives.f_acc),
                                   format_double(r->objectives.f_t)};
    for (int j = 0; j < n_links; ++j) cells.push_back(format_double(r->gains.kp(j)));
    for (int j = 0; j < n_links; ++j) cells.push_back(format_double(r->gains.kd(j)));
    csv.add_row(cells);
  }
  atomic_write(path, csv.str(), overwrite);
}

std::vector<FrontRow> read_front(const fs::path& path) {
  const std::string text = read_file(path);
  const auto lines = csv_lines(text);
  if (lines.empty()) throw MalformedFile(0, "line 1: missing header");
  const auto columns = split(lines[0], ',').size();
  if (columns < 4 || columns % 2 != 0) throw MalformedFile(0, "line 1: not a front header");
  const auto n = static_cast<int>((columns - 2) / 2);

  std::vector<FrontRow> rows;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto v = parse_row(lines[li], columns, li + 1);
    FrontRow r{{v[0], v[1]}, {JointVector(n), JointVector(n)}};
    for (int j = 0; j < n; ++j) {
      r.gains.kp(j) = v[2 + static_cast<std::size_t>(j)];
      r.gains.kd(j) = v[2 + static_cast<std::size_t>(n + j)];
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace pdtune
