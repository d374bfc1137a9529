#pragma once

#include <stdexcept>
#include <string>

namespace zeno {

/// Base class for every error raised by the library. The CLI maps each
/// subclass to its own exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (DIMACS, CSV, config).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A parameter or index outside the range its owner accepts.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A file that cannot be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Integrator, eigensolver or fixed-point breakdown.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace zeno
