#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace smcmix {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

/// A value violates a structural invariant (probabilities, dimensions, ranges).
class InvariantError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "InvariantError"; }
};

/// An argument lies outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "DomainError"; }
};

/// Problems with external input: files, rows, labels.
class InputError : public Error {
 public:
  InputError(std::string kind, const std::string& what)
      : Error(what), kind_(std::move(kind)) {}
  const char* kind() const noexcept override { return kind_.c_str(); }

 private:
  std::string kind_;
};

/// Numerical failures. The CLI maps these to a dedicated exit code.
class NumericalError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "NumericalError"; }
};

class DegenerateSample : public NumericalError {
 public:
  using NumericalError::NumericalError;
  const char* kind() const noexcept override { return "DegenerateSample"; }
};

class NonConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
  const char* kind() const noexcept override { return "NonConvergence"; }
};

class AllComponentsImpossible : public NumericalError {
 public:
  explicit AllComponentsImpossible(std::size_t subject)
      : NumericalError("every component has zero likelihood for subject " +
                       std::to_string(subject)),
        subject_(subject) {}
  const char* kind() const noexcept override { return "AllComponentsImpossible"; }
  std::size_t subject() const noexcept { return subject_; }

 private:
  std::size_t subject_;
};

}  // namespace smcmix
