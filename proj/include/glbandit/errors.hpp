#pragma once

#include <stdexcept>
#include <string>

namespace glb {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Newton iteration failed to reach the score tolerance.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

/// Cholesky factorization of a matrix that should be SPD failed.
class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class EmptyActionSet : public Error {
 public:
  using Error::Error;
};

class ChosenNotInSet : public Error {
 public:
  using Error::Error;
};

class MalformedCsv : public Error {
 public:
  using Error::Error;
};

class MissingColumns : public Error {
 public:
  using Error::Error;
};

class ZeroVarianceColumn : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace glb
