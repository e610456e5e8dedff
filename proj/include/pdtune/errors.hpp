#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pdtune {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

class UnreachableError : public Error {
public:
  using Error::Error;
};

/// Integration produced a non-finite state.
class NumericalBlowup : public Error {
public:
  NumericalBlowup(std::size_t step_index, const std::string& what)
      : Error(what), step_index_(step_index) {}
  [[nodiscard]] std::size_t step_index() const noexcept { return step_index_; }

private:
  std::size_t step_index_;
};

/// Trajectory generation failed at a given tick (workspace violation etc.).
class GenerationError : public Error {
public:
  GenerationError(std::size_t tick, const std::string& what) : Error(what), tick_(tick) {}
  [[nodiscard]] std::size_t tick() const noexcept { return tick_; }

private:
  std::size_t tick_;
};

class ContractViolation : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  ConfigError(std::string field_path, const std::string& what)
      : Error(field_path + ": " + what), field_path_(std::move(field_path)) {}
  [[nodiscard]] const std::string& field_path() const noexcept { return field_path_; }

private:
  std::string field_path_;
};

class IoError : public Error {
public:
  using Error::Error;
};

class IntegrityError : public Error {
public:
  using Error::Error;
};

class MalformedFile : public Error {
public:
  MalformedFile(std::size_t last_good_line, const std::string& what)
      : Error(what + " (last good line: " + std::to_string(last_good_line) + ")"),
        last_good_line_(last_good_line) {}
  /// 1-based line number of the last line that parsed, 0 if none did.
  [[nodiscard]] std::size_t last_good_line() const noexcept { return last_good_line_; }

private:
  std::size_t last_good_line_;
};

}  // namespace pdtune
