#pragma once

#include <stdexcept>
#include <string>

namespace turnhold {

// Error taxonomy mirrored by the CLI exit codes: usage errors exit 1,
// data/parse/validation errors exit 2, predictor failures exit 3.

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input file; carries the offending line when known.
struct ParseError : DataError {
  explicit ParseError(const std::string& msg) : DataError(msg), line(0) {}
  ParseError(const std::string& path, std::size_t line_no, const std::string& msg)
      : DataError(path + ":" + std::to_string(line_no) + ": " + msg), line(line_no) {}
  std::size_t line;
};

// Structurally valid input that violates a domain invariant.
struct ValidationError : DataError {
  using DataError::DataError;
};

struct PredictorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace turnhold
