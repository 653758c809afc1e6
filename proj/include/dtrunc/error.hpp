#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dtrunc {

// Values double as process exit codes for the command-line tool.
enum class ErrorKind : int {
  parse = 2,
  validation = 3,
  convergence = 4,
  degeneracy = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

/// Malformed input: missing column, non-numeric cell, bad config key.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::size_t row = 0)
      : Error(ErrorKind::parse, what), row_(row) {}
  /// 1-based data row, 0 when not tied to a row.
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what, std::vector<std::size_t> rows = {})
      : Error(ErrorKind::validation, what), rows_(std::move(rows)) {}
  /// 0-based record indices that violate the constraint.
  const std::vector<std::size_t>& rows() const noexcept { return rows_; }

 private:
  std::vector<std::size_t> rows_;
};

/// A simulation or run configuration that cannot produce data.
class ConfigError : public ValidationError {
 public:
  explicit ConfigError(const std::string& what) : ValidationError(what) {}
};

class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what) : Error(ErrorKind::convergence, what) {}
};

class DegeneracyError : public Error {
 public:
  explicit DegeneracyError(const std::string& what) : Error(ErrorKind::degeneracy, what) {}
};

/// A competing-risks group whose within-group estimator does not exist.
class GroupFailureError : public DegeneracyError {
 public:
  GroupFailureError(const std::string& what, int label) : DegeneracyError(what), label_(label) {}
  int label() const noexcept { return label_; }

 private:
  int label_;
};

}  // namespace dtrunc
