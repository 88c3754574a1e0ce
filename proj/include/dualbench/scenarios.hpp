#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dualbench/detection.hpp"
#include "dualbench/metrics.hpp"
#include "dualbench/quantum_core.hpp"
#include "dualbench/scenario_config.hpp"
#include "dualbench/tomography.hpp"

namespace dualbench::scenarios {

/// Tomography, scans and metrics for one labeling of the pair.
struct LabelingResult {
  core::Labeling labeling = core::Labeling::by_path;
  std::uint64_t seed = 0;
  std::vector<tomography::Observation> observations;
  tomography::LinearInversion linear;
  tomography::MLEResult mle;
  std::optional<detection::ScanTable> scan_z;
  std::optional<detection::ScanTable> scan_x;
  metrics::MetricsReport report;
  /// Fidelity and concurrence of the source state reduced by partial trace
  /// (absent for ingested data).
  std::optional<double> model_fidelity;
  std::optional<double> model_concurrence;
};

struct SweepRow {
  double gamma = 0.0;
  double c_path = 0.0;
  double c_pol = 0.0;
  double f_path = 0.0;
  double f_pol = 0.0;
  double v_x_path = 0.0;
  std::uint64_t seed = 0;
};

enum class Status { passed, failed };

struct RunBundle {
  ScenarioConfig config;
  core::Complex gamma{1.0, 0.0};
  std::vector<LabelingResult> results;  ///< by_path first, then by_polarization
  std::vector<SweepRow> sweep;
  std::vector<std::string> warnings;
  std::vector<std::string> failures;  ///< violated scenario assertions
  Status status = Status::passed;
  double elapsed_seconds = 0.0;

  const LabelingResult* find(core::Labeling labeling) const;
};

/// Bench preset names for a labeling: `<preset>_polarization` measures the
/// polarization qubits (labeled by path), `<preset>_path` the path qubits.
std::string preset_for(const std::string& bench_preset, core::Labeling labeling);

/// Seed of the tomography pipeline for one labeling under a master seed.
std::uint64_t labeling_seed(std::uint64_t master, core::Labeling labeling);

/// MLE normalization used for a labeling. Path tomography postselects on one photon
/// per arm, so its overall rate is fitted rather than taken from the pair count.
tomography::MLEOptions mle_options_for(core::Labeling labeling);

RunBundle run_duality(const ScenarioConfig& config);
RunBundle run_breakdown(const ScenarioConfig& config);
RunBundle run_gamma_sweep(const ScenarioConfig& config);
/// Reconstruction and metrics from count files named in `config.ingest`.
RunBundle ingest(const ScenarioConfig& config);

/// Dispatches on `config.scenario`.
RunBundle run_scenario(const ScenarioConfig& config);

}  // namespace dualbench::scenarios
