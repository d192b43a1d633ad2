#pragma once

#include <stdexcept>
#include <string>

namespace evinam {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform for the requested operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Caller-supplied input is malformed (wrong width, bad label, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Dataset could not be read or parsed.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Run configuration is missing, inconsistent or unreadable.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Model file is corrupt, truncated or of an unsupported version.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A regression artifact was handed to a classification consumer or vice versa.
class KindMismatch : public Error {
 public:
  using Error::Error;
};

/// Training produced non-finite values.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace evinam
