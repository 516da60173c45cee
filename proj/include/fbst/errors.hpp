#pragma once

#include <stdexcept>
#include <string>

namespace fbst {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension mismatch or violated shape precondition.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Input that is valid in form but degenerate (e.g. an all-zero image).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// The requested inverse does not exist (Gram operator has a zero eigenvalue).
class SingularOperatorError : public Error {
 public:
  using Error::Error;
};

/// A transform or starting point lies outside the domain of the objective.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

enum class PgmErrorKind { malformed_header, truncated_payload, unsupported_magic };

class PgmParseError : public Error {
 public:
  PgmParseError(PgmErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  PgmErrorKind kind() const noexcept { return kind_; }

 private:
  PgmErrorKind kind_;
};

enum class ModelErrorKind { bad_magic, unsupported_version, truncated, crc_mismatch, invalid_header };

class ModelFormatError : public Error {
 public:
  ModelFormatError(ModelErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  ModelErrorKind kind() const noexcept { return kind_; }

 private:
  ModelErrorKind kind_;
};

}  // namespace fbst
