#pragma once

#include <stdexcept>
#include <string>

namespace oplift {

/// Malformed or non-finite input data.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dimension or shape mismatch between operands.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A mathematical precondition failed (e.g. a matrix that must be PSD is not).
class DomainError : public std::domain_error {
 public:
  DomainError(const std::string& what, double min_eig)
      : std::domain_error(what), min_eig_(min_eig) {}
  double min_eig() const noexcept { return min_eig_; }

 private:
  double min_eig_;
};

/// A map whose Choi matrix is not PSD.
class NotCompletelyPositive : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Request exceeds what the toolkit supports (dimension caps, unsupported variants).
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A constructive step could not be carried out on the given data.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A factorization lacks an alpha or beta entry for some generator.
class IncompleteFactorization : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace oplift
