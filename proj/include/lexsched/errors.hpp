#pragma once

#include <stdexcept>
#include <string>

namespace lexsched {

/// Input violates a documented invariant (bad instance, schedule, scenario...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vectors of different lengths were compared.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Problem is too large for an exhaustive routine or exceeds a numeric ceiling.
class SizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Perturbed instance cannot be scheduled (jobs but no machines).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lexsched
