#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dualbench/detection.hpp"
#include "dualbench/metrics.hpp"
#include "dualbench/quantum_core.hpp"

namespace dualbench::tomography {

/// One of the 16 two-qubit tomography settings (index 1..16).
struct TomographySetting {
  int index = 0;
  std::string label;  ///< e.g. "HV": first letter for qubit 1
  detection::ProjectorSetting projector;
};

/// Fixed order: HH HV VH VV RH RV DV DH DR DD RD HD VD VL HL RL, with
/// D = (H+V)/sqrt2, R = (H-iV)/sqrt2, L = (H+iV)/sqrt2 (H = |0>, V = |1>).
const std::vector<TomographySetting>& projector_catalog();

/// Real 16x16 map from Pauli-basis coordinates of rho to the catalog probabilities.
const Eigen::Matrix<double, 16, 16>& measurement_matrix();
double catalog_condition_number();

/// Counts observed for one setting. `counts` may be fractional (exact-probability mode).
struct Observation {
  int setting_index = 0;
  double counts = 0.0;
  double pairs = 0.0;
};

/// Sampled counts, or the expected value when `exact`.
std::vector<Observation> observations(std::span<const detection::CountRecord> records, bool exact);

/// Throws ConfigError naming the first missing (or duplicated) setting.
void check_coverage(std::span<const Observation> obs);

struct LinearInversion {
  core::DensityMatrix rho;
  bool psd = true;
  double min_eigenvalue = 0.0;
};

/// Normalizes by the HH+HV+VH+VV counts and solves the 16x16 system. Result is
/// Hermitian with unit trace; PSD is not guaranteed (reported in `psd`).
LinearInversion linear_inversion(std::span<const Observation> obs, core::Labeling labeling = core::Labeling::by_path);

enum class Normalization {
  from_records,  ///< expected counts are pairs x probability
  fitted,        ///< overall efficiency profiled out of the likelihood
};

struct MLEOptions {
  int max_iterations = 2000;
  double tolerance = 1e-10;  ///< on the relative log-likelihood change
  Normalization normalization = Normalization::from_records;
};

struct MLEResult {
  core::DensityMatrix rho;
  double log_likelihood = 0.0;
  double initial_log_likelihood = 0.0;
  int iterations = 0;
  std::vector<double> likelihood_trace;  ///< log-likelihood after each accepted step
  double efficiency = 1.0;               ///< fitted overall efficiency (1 when from_records)
};

/// Non-convergence; carries the best iterate reached.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, MLEResult best) : NumericalError(what), best_(std::move(best)) {}
  const MLEResult& best() const { return best_; }

 private:
  MLEResult best_;
};

/// Poisson log-likelihood sum_k [n_k log(N_k p_k) - N_k p_k] (N_k scaled by the fitted
/// efficiency under Normalization::fitted).
double log_likelihood(const core::DensityMatrix& rho, std::span<const Observation> obs,
                      Normalization normalization = Normalization::from_records);

/// Maximum-likelihood state with rho = T^dagger T / tr(T^dagger T), T a general complex 4x4.
/// Starts from the square root of the eigenvalue-clipped linear inversion (mixed with 1e-3
/// of I/4 so the start has full rank) and runs BFGS with a backtracking line search,
/// followed by Levenberg-damped Newton steps if it has not converged after 100 iterations.
/// Every accepted step increases the likelihood.
MLEResult mle_reconstruct(std::span<const Observation> obs, const MLEOptions& options = {},
                          core::Labeling labeling = core::Labeling::by_path);

enum class Derived { fidelity, concurrence, x_visibility };
const char* to_string(Derived d);

/// Parametric bootstrap: every count is redrawn as Poisson(observed), the MLE rerun and
/// each derived quantity evaluated. Resample r uses substream_seed(seed, r). Failing
/// resamples are excluded and counted.
std::map<Derived, metrics::ErrorBar> mc_error_bars(std::span<const Observation> obs, int n_resamples,
                                                   std::uint64_t seed, std::span<const Derived> derived,
                                                   const MLEOptions& options = {},
                                                   const Eigen::Vector4cd& target = metrics::bell_target());

metrics::ErrorBar mc_error_bars(std::span<const Observation> obs, int n_resamples, std::uint64_t seed,
                                Derived derived, const MLEOptions& options = {},
                                const Eigen::Vector4cd& target = metrics::bell_target());

}  // namespace dualbench::tomography
