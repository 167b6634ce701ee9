// hogfda/errors.hpp
#pragma once

#include <stdexcept>
#include <string>

namespace hogfda {

// Error categories map one-to-one onto CLI exit codes:
//   ConfigError -> 2, DataError / ArgumentError -> 3, NumericError -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration; `key()` is the dotted path of the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& message)
      : Error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// A precondition on call arguments was violated.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// An iterative numerical procedure could not produce a valid result.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace hogfda
