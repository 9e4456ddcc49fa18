#pragma once

#include <stdexcept>
#include <string>

namespace recdp {

// Base for all typed errors; the CLI maps subclasses onto exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad configuration or usage (exit code 1).
struct ConfigError : Error {
  using Error::Error;
};

// Malformed or unusable input data (exit code 2).
struct DataError : Error {
  using Error::Error;
};

struct ParseError : DataError {
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : DataError(path + ":" + std::to_string(line) + ": " + what), line(line) {}
  std::size_t line;
};

struct EmptyDatasetError : DataError {
  using DataError::DataError;
};

struct InsufficientDataError : DataError {
  using DataError::DataError;
};

// Model training produced non-finite parameters (exit code 3).
struct TrainingDivergedError : Error {
  explicit TrainingDivergedError(int iteration)
      : Error("training diverged at iteration " + std::to_string(iteration)),
        iteration(iteration) {}
  int iteration;
};

}  // namespace recdp
