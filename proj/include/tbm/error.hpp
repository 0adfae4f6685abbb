#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tbm {

// Machine-readable error categories. The string form travels over the wire
// and drives CLI exit codes.
enum class ErrorCode {
  invalid_input,
  unsupported_combination,
  infeasible_point,
  no_feasible_point,
  training_diverged,
  mape_undefined,
  parse_error,
  unsupported_version,
  io_error,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string field, const std::string& message)
      : std::runtime_error(message), code_(code), field_(std::move(field)) {}

  ErrorCode code() const noexcept { return code_; }
  // Offending field or column name; empty when the error is not field-specific.
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorCode code_;
  std::string field_;
};

class InvalidInput : public Error {
 public:
  InvalidInput(std::string field, const std::string& message)
      : Error(ErrorCode::invalid_input, std::move(field), message) {}
};

class UnsupportedCombination : public Error {
 public:
  explicit UnsupportedCombination(const std::string& message)
      : Error(ErrorCode::unsupported_combination, "", message) {}
};

class InfeasiblePoint : public Error {
 public:
  explicit InfeasiblePoint(const std::string& message)
      : Error(ErrorCode::infeasible_point, "", message) {}
};

class NoFeasiblePoint : public Error {
 public:
  NoFeasiblePoint()
      : Error(ErrorCode::no_feasible_point, "",
              "no grid point yields positive PR and Ef predictions") {}
  double feasible_fraction() const noexcept { return 0.0; }
};

class TrainingDiverged : public Error {
 public:
  explicit TrainingDiverged(std::size_t iteration)
      : Error(ErrorCode::training_diverged, "",
              "training loss became non-finite at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

class MapeUndefined : public Error {
 public:
  explicit MapeUndefined(std::vector<std::size_t> indices);
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

 private:
  std::vector<std::size_t> indices_;
};

// Row numbers are 1-based and count the header as row 1.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::string column, const std::string& message)
      : Error(ErrorCode::parse_error, std::move(column),
              row > 0 ? "row " + std::to_string(row) + ": " + message : message),
        row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class UnsupportedVersion : public Error {
 public:
  explicit UnsupportedVersion(const std::string& version)
      : Error(ErrorCode::unsupported_version, "schema_version",
              "unsupported schema_version \"" + version + "\"") {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorCode::io_error, "", message) {}
};

}  // namespace tbm
