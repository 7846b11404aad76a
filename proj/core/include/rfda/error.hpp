#pragma once

#include <stdexcept>
#include <string>

namespace rfda {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed files, invalid points, inconsistent arguments.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A computation could not be carried out (singular design, no convergence,
/// geodesic guard violated inside an algorithm).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Two points are outside the region where exp/log/transport are unique
/// (antipodal pair on the sphere, velocity beyond the injectivity radius).
class GuardError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace rfda
