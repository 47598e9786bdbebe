#pragma once

#include <stdexcept>
#include <string>

namespace forestore {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (CSV, schema mismatch, bad sizes).
class DataError : public Error {
 public:
  using Error::Error;
};

// Parameter or configuration outside its valid range.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Preselection removed every rule; the message names the binding filter.
class EmptyPreselectionError : public Error {
 public:
  using Error::Error;
};

// Failure reading or writing a file.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace forestore
