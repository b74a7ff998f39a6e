#pragma once

#include <stdexcept>
#include <string>

namespace pd36 {

/// Base of every error raised by the library. The CLI maps subclasses of
/// InputError to exit code 1 and everything else to exit code 2.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: shapes, files, configuration values.
class InputError : public Error {
public:
  using Error::Error;
};

class ShapeError : public InputError {
public:
  using InputError::InputError;
};

class ConfigError : public InputError {
public:
  using InputError::InputError;
};

/// Malformed or corrupt serialized data (weights, CSV, JSON, images).
class FormatError : public InputError {
public:
  using InputError::InputError;
};

/// API misuse, e.g. requesting a gradient before the forward pass ran.
class StateError : public Error {
public:
  using Error::Error;
};

} // namespace pd36
