#pragma once

#include <stdexcept>
#include <string>

namespace lmnl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor or vector sizes disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A choice row with no available alternative, or a label on an unavailable one.
class InvalidRowError : public Error {
 public:
  using Error::Error;
};

// Missing or malformed input data (columns, cells, files).
class DataError : public Error {
 public:
  using Error::Error;
};

// Model kind / partition / nest / config inconsistencies.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or gradient during optimization.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace lmnl
