#pragma once

#include <stdexcept>
#include <string>

namespace bessrl {

// Shape/dimension mismatch in a numeric operation.
struct ShapeError : std::invalid_argument {
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

// Non-finite values where finite ones are required.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Caller broke a documented precondition.
struct ContractError : std::logic_error {
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

// Bad experiment configuration (CLI exit code 1).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Bad or malformed input data (CLI exit code 2).
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Training diverged or could not proceed (CLI exit code 3).
struct TrainingError : std::runtime_error {
  explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bessrl
