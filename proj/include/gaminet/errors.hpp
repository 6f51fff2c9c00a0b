#pragma once

#include <stdexcept>
#include <string>

namespace gaminet {

/// Bad configuration values, malformed schemas, shape mismatches.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ingestion failures: missing files, unparseable cells, unseen levels.
class DataError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Non-finite losses or gradients encountered during optimization.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gaminet
