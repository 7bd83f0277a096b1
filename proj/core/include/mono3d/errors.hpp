#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mono3d {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based line number and, when known,
/// the 0-based index of the offending field (-1 otherwise).
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line = 0, int field = -1)
      : Error(format(message, line, field)), line_(line), field_(field) {}

  std::size_t line() const { return line_; }
  int field() const { return field_; }

 private:
  static std::string format(const std::string& message, std::size_t line, int field) {
    std::string out = message;
    if (line > 0) out += " (line " + std::to_string(line);
    if (line > 0 && field >= 0) out += ", field " + std::to_string(field);
    if (line > 0) out += ")";
    return out;
  }

  std::size_t line_;
  int field_;
};

/// Projection or back-projection requested for a point with depth <= 0.
class BehindCamera : public Error {
 public:
  using Error::Error;
};

/// The intrinsic block of the projection matrix is not invertible.
class SingularIntrinsics : public Error {
 public:
  using Error::Error;
};

/// A size component is at or below the degeneracy threshold.
class DegenerateSize : public Error {
 public:
  using Error::Error;
};

/// Non-positive standard deviation / variance passed to an uncertainty loss.
class InvalidSigma : public Error {
 public:
  using Error::Error;
};

/// Argument violates an operation precondition (wrong logit count, bad
/// trial count, mixed substitution directions, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace mono3d
