#pragma once

/// @file error.hpp
/// Exception types raised by the opa library.

#include <stdexcept>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace opa {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad degree, r >= 1, d = 0, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A weight sequence fails the doubling or ratio conditions, or omega_0 != 1.
class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

/// Polynomial division left a remainder above tolerance.
class InexactDivisionError : public Error {
 public:
  InexactDivisionError(const std::string& what, double remainder_norm)
      : Error(what), remainder_norm_(remainder_norm) {}

  double remainder_norm() const noexcept { return remainder_norm_; }

 private:
  double remainder_norm_;
};

/// Operation only defined for 1 < p < infinity.
class UnsupportedExponentError : public Error {
 public:
  using Error::Error;
};

/// Normal equations numerically singular.
class IllConditionedError : public Error {
 public:
  IllConditionedError(const std::string& what, double condition)
      : Error(what), condition_(condition) {}

  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

/// The requested bound or construction does not apply to this input.
class InapplicableError : public Error {
 public:
  using Error::Error;
};

/// Two computations that must agree did not (a solver returned a wrong answer).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// One or more sweep points failed to converge; carries the failing degrees.
class SweepError : public Error {
 public:
  SweepError(const std::string& what, std::vector<std::size_t> failing)
      : Error(what), failing_(std::move(failing)) {}

  const std::vector<std::size_t>& failing() const noexcept { return failing_; }

 private:
  std::vector<std::size_t> failing_;
};

}  // namespace opa
