#pragma once

#include <stdexcept>
#include <string>

namespace regge {

/// Base class for every error raised by the library.
class ReggeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed combinatorial input (bad simplex lists, bad permutations, ...).
class ComplexError : public ReggeError {
 public:
  using ReggeError::ReggeError;
};

/// A simplex whose Gram matrix is not positive definite.
class NotRealizableError : public ReggeError {
 public:
  using ReggeError::ReggeError;
};

/// Sampling could not find (enough) points inside the cutoff region.
class FeasibilityError : public ReggeError {
 public:
  using ReggeError::ReggeError;
};

/// An estimator was called with arguments outside its contract.
class EstimatorError : public ReggeError {
 public:
  using ReggeError::ReggeError;
};

/// File could not be read, written or parsed.
class IoError : public ReggeError {
 public:
  using ReggeError::ReggeError;
};

}  // namespace regge
