#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace finsler {

/// Base of every error raised by the library.
class FinslerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point or parameter lies outside the region where a field or φ-family is defined.
class DomainError : public FinslerError {
 public:
  using FinslerError::FinslerError;
};

/// A matrix that must be positive definite is not (or is numerically singular).
class NonPositiveDefinite : public FinslerError {
 public:
  using FinslerError::FinslerError;
};

/// Division by a vanishing quantity.
class SingularEvaluation : public FinslerError {
 public:
  using FinslerError::FinslerError;
};

/// Least-squares basis is zero or rank deficient.
class DegenerateFit : public FinslerError {
 public:
  using FinslerError::FinslerError;
};

class EmptyTrace : public FinslerError {
 public:
  using FinslerError::FinslerError;
};

/// Malformed metric specification document or run configuration.
class SpecError : public FinslerError {
 public:
  using FinslerError::FinslerError;
};

// Throws SingularEvaluation when |den| is below 1e-14 relative to `magnitude`.
inline void require_nonsingular(double den, double magnitude, const char* what) {
  const double scale = magnitude > 1.0 ? magnitude : 1.0;
  if (!(std::abs(den) > 1e-14 * scale)) {
    throw SingularEvaluation(std::string("vanishing denominator in ") + what);
  }
}

}  // namespace finsler
