#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace warmstart {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition failures on arguments (length mismatch, bad ranges, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Regular-graph request with no solution (n*d odd, d >= n).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Pairing-model sampler exhausted its retry budget.
class GenerationFailure : public Error {
 public:
  using Error::Error;
};

// Instance exceeds an exhaustive-search or statevector cap.
class TooLarge : public Error {
 public:
  using Error::Error;
};

// Errors tied to a line of a text or JSONL input.
class LineError : public Error {
 public:
  LineError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ParseError : public LineError {
 public:
  enum class Kind { malformed_header, malformed_edge, vertex_out_of_range, duplicate_edge, self_loop, edge_count };

  ParseError(Kind kind, const std::string& what, std::size_t line) : LineError(what, line), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class SchemaError : public LineError {
 public:
  using LineError::LineError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace warmstart
