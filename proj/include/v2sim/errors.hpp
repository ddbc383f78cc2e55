#pragma once

#include <stdexcept>
#include <string>

namespace v2sim {

/// A computation that cannot produce a result for otherwise valid input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Applied field below the demagnetizing field; the stripe is not saturated.
class UnsaturatedStateError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace v2sim
