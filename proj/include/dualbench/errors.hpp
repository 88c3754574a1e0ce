#pragma once

#include <stdexcept>
#include <string>

namespace dualbench {

/// Bad configuration: unknown mode or port, missing preset, malformed input file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A constructed object violates its invariants (non-unitary matrix, bad density matrix).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The requested labeling cannot split the two photons (both share a label value).
class NotReducibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown: non-convergence, negative eigenvalues beyond tolerance, singular systems.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dualbench
