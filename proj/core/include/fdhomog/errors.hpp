#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fdh {

/// Base class for every error raised by the library.
///
/// Errors split into two families so front ends can map them onto distinct
/// exit codes: validation errors (bad input, bad arguments, violated
/// preconditions) and computation errors (numerical breakdown on otherwise
/// valid input).
class Error : public std::runtime_error {
 public:
  enum class Kind { validation, computation };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(Kind::validation, what) {}
};

class ComputationError : public Error {
 public:
  explicit ComputationError(const std::string& what) : Error(Kind::computation, what) {}
};

// basis
class InvalidBasisError : public ValidationError {
  using ValidationError::ValidationError;
};
class DomainError : public ValidationError {
  using ValidationError::ValidationError;
};
class InvalidArgumentError : public ValidationError {
  using ValidationError::ValidationError;
};

// smooth
class CoverageError : public ValidationError {
 public:
  CoverageError(std::string curve_id, const std::string& what)
      : ValidationError(what), curve_id_(std::move(curve_id)) {}
  [[nodiscard]] const std::string& curve_id() const noexcept { return curve_id_; }

 private:
  std::string curve_id_;
};
class SingularFitError : public ComputationError {
  using ComputationError::ComputationError;
};
class SelectionError : public ComputationError {
  using ComputationError::ComputationError;
};

// fpca
class ConditioningError : public ComputationError {
  using ComputationError::ComputationError;
};
class InsufficientDataError : public ValidationError {
  using ValidationError::ValidationError;
};
class RangeError : public ValidationError {
  using ValidationError::ValidationError;
};

// tests
class InvalidDesignError : public ValidationError {
  using ValidationError::ValidationError;
};
class DegenerateGeometryError : public ComputationError {
  using ComputationError::ComputationError;
};

/// Weiszfeld iteration ran out of iterations; carries the last iterate.
class ConvergenceError : public ComputationError {
 public:
  ConvergenceError(std::vector<double> last_iterate, const std::string& what)
      : ComputationError(what), last_iterate_(std::move(last_iterate)) {}
  [[nodiscard]] const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }

 private:
  std::vector<double> last_iterate_;
};

/// Malformed input file; line is 1-based, 0 when not tied to a line.
class ParseError : public ValidationError {
 public:
  ParseError(std::string source, std::size_t line, const std::string& what)
      : ValidationError(source + (line > 0 ? ":" + std::to_string(line) : std::string{}) + ": " + what),
        line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace fdh
