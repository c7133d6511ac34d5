#pragma once

#include <stdexcept>
#include <string>

namespace movrp {

// Base of every error raised by the library. The category decides the CLI exit
// code (config 2, data 3, numeric 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// Incompatible tensor shapes for a primitive.
class ShapeError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace movrp
