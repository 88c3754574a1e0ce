#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

#include "dualbench/detection.hpp"
#include "dualbench/quantum_core.hpp"

namespace dualbench::metrics {

/// (|01> + |10>)/sqrt(2): the entangled target in either labeling's basis order.
Eigen::Vector4cd bell_target();

/// <target| rho |target>. Throws ValidationError for non-Hermitian rho.
double fidelity(const core::DensityMatrix& rho, const Eigen::Vector4cd& target);

/// Wootters concurrence. PSD inputs go through the Hermitian form sqrt(rho) rho~ sqrt(rho);
/// others fall back to the eigenvalues of rho rho~, tolerating -1e-9.
double concurrence(const core::DensityMatrix& rho);

struct VisibilityFit {
  double visibility = 0.0;
  double offset = 0.0;     // a
  double amplitude = 0.0;  // |b|
  double phase = 0.0;      // phi0
  double residual = 0.0;   // rms of fit residuals
};

/// Least-squares fit of y = a + b cos(4 theta + phi0); V = |b| / a clipped to [0, 1].
/// Needs >= 8 points spanning at least 90 degrees.
VisibilityFit visibility(std::span<const double> thetas_deg, std::span<const double> values);

/// Fits the sampled counts, or the expected probabilities when `use_expected`.
VisibilityFit visibility(const detection::ScanTable& scan, bool use_expected = false);

/// Scan curve implied by a two-qubit state (same projectors as correlation_scan).
std::vector<double> predicted_scan(const core::DensityMatrix& rho, detection::ScanBasis basis,
                                   std::span<const double> thetas_deg);

struct ErrorBar {
  double mean = 0.0;
  double std = 0.0;
  int used = 0;
  int failures = 0;
};

struct MetricsReport {
  double fidelity = 0.0;
  double concurrence = 0.0;
  double visibility_z = 0.0;
  double visibility_x = 0.0;
  std::optional<ErrorBar> fidelity_error;
  std::optional<ErrorBar> concurrence_error;

  /// Range checks on every field.
  void validate() const;
};

}  // namespace dualbench::metrics
