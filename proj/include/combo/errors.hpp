#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace combo {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A combinatorial variable was declared with an unusable shape (e.g. zero categories).
class InvalidVariableError : public Error {
 public:
  using Error::Error;
};

/// A vertex or category index lies outside its variable's range.
class BoundsError : public Error {
 public:
  using Error::Error;
};

/// An argument violates a mathematical domain (negative scale, non-positive tau, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Factorization or decomposition failed even after regularization.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Brute-force enumeration refused because the space exceeds the configured cap.
class EnumerationLimitError : public Error {
 public:
  using Error::Error;
};

/// Every vertex of the search space has already been evaluated.
class SearchSpaceExhaustedError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration or config file content.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text; carries the 1-based line number of the offending line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// An objective evaluation failed; carries the offending vertex.
class EvaluationError : public Error {
 public:
  EvaluationError(std::string vertex, const std::string& message)
      : Error("evaluating vertex (" + vertex + "): " + message), vertex_(std::move(vertex)) {}

  [[nodiscard]] const std::string& vertex() const noexcept { return vertex_; }

 private:
  std::string vertex_;
};

}  // namespace combo
