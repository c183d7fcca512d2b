#pragma once

#include <stdexcept>
#include <string>

namespace ogmc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad caller-supplied value (out-of-range parameter, mismatched volumes).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unsupported file content.
class FormatError : public Error {
 public:
  enum class Kind { malformed_header, unsupported, length_mismatch, invalid_mask_value };

  FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Geometry that cannot be processed (degenerate curves, implausible fits).
class GeometryError : public Error {
 public:
  using Error::Error;
};

}  // namespace ogmc
