// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace evoforge {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A requested dimension (input/output count, series length) is invalid.
class DimensionError : public Error {
  public:
    using Error::Error;
};

/// Configuration value outside its valid domain. `key()` names the offending setting.
class ConfigError : public Error {
  public:
    ConfigError(std::string key, const std::string &what)
        : Error(key + ": " + what), key_(std::move(key)) {}

    const std::string &key() const noexcept { return key_; }

  private:
    std::string key_;
};

/// Xavier/Kaiming sampling requested with a fan count that makes the bound undefined.
class DegenerateFanError : public Error {
  public:
    using Error::Error;
};

class EmptyGenomeError : public Error {
  public:
    using Error::Error;
};

/// Crossover was handed a parent that has never been evaluated.
class MissingFitnessError : public Error {
  public:
    using Error::Error;
};

/// Malformed `.gnm` stream. `offset()` is the byte position where decoding failed.
class ParseError : public Error {
  public:
    ParseError(std::size_t offset, const std::string &what)
        : Error("byte " + std::to_string(offset) + ": " + what), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

  private:
    std::size_t offset_;
};

/// NaN or Inf produced during evaluation. `timestep()` is the first offending step.
class NumericalDivergence : public Error {
  public:
    explicit NumericalDivergence(std::size_t timestep)
        : Error("non-finite output at timestep " + std::to_string(timestep)), timestep_(timestep) {}

    std::size_t timestep() const noexcept { return timestep_; }

  private:
    std::size_t timestep_;
};

/// Dataset ingestion failure (unreadable/empty file, unparseable rows).
class DataError : public Error {
  public:
    using Error::Error;
};

/// Dataset does not contain a requested column.
class SchemaError : public DataError {
  public:
    using DataError::DataError;
};

/// Constant column encountered where min-max normalization needs max > min.
class DegenerateColumnError : public DataError {
  public:
    using DataError::DataError;
};

/// The island engine was asked for a child before any genome was inserted.
class NotSeededError : public Error {
  public:
    using Error::Error;
};

} // namespace evoforge
