#pragma once

#include <stdexcept>
#include <string>

namespace upbench {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor shapes or malformed computation graphs.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf where only finite values are allowed.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// Malformed or semantically invalid input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or call arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace upbench
