#pragma once

#include <stdexcept>
#include <string>

namespace mfou {

/// Invalid input or configuration, detected before any numerical work.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed (factorization, conditioning, integrator drift).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The sample carries no information about the drift (e.g. a constant path).
class DegenerateSampleError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mfou
