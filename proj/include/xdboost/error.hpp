#pragma once

#include <stdexcept>
#include <string>

namespace xdboost {

// Root of every error the library throws. The category lets the CLI map
// failures onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid hyperparameters, unknown enum tags, inconsistent configs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed rows or tensors handed to an operation.
class InputError : public Error {
 public:
  using Error::Error;
};

// API misuse: backward before forward, double placeholder append, ...
class UsageError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or parameters during fitting.
class TrainingError : public Error {
 public:
  using Error::Error;
};

// CSV ingestion, schema and split failures.
class DataError : public Error {
 public:
  using Error::Error;
};

class IngestError : public DataError {
 public:
  using DataError::DataError;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class SplitError : public DataError {
 public:
  using DataError::DataError;
};

class WeightingError : public DataError {
 public:
  using DataError::DataError;
};

class MetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace xdboost
