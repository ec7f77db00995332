#pragma once

#include <stdexcept>
#include <string>

namespace gkdiff {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model or command parameter is outside its admissible domain.
class ParameterError : public Error {
 public:
  ParameterError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// The drift is not Hurwitz, so the linear SDE has no invariant measure.
class ErgodicityError : public Error {
 public:
  using Error::Error;
};

/// Operands have incompatible shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the function space an operation is defined on.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A truncated linear system is too badly conditioned to trust.
class IllPosedError : public Error {
 public:
  using Error::Error;
};

/// A series was requested outside its radius of convergence.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Tail extrapolation of an autocorrelation series failed.
class FitError : public Error {
 public:
  using Error::Error;
};

/// A request would exceed a configured resource cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

}  // namespace gkdiff
