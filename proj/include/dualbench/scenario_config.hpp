#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dualbench/detection.hpp"
#include "dualbench/quantum_core.hpp"
#include "dualbench/source.hpp"

namespace dualbench::scenarios {

inline constexpr int kConfigSchemaVersion = 1;

enum class ScenarioKind { duality, breakdown_frequency, breakdown_time, gamma_sweep, ingest };

const char* to_string(ScenarioKind k);
ScenarioKind scenario_from_string(const std::string& s);

struct Thresholds {
  double duality_min_concurrence = 0.8;
  double distinguishability_max_overlap = 0.01;
  double breakdown_max_path_concurrence = 0.05;
  double breakdown_max_visibility = 0.02;
};

struct ScanSpec {
  double start_deg = 0.0;
  double stop_deg = 180.0;
  double step_deg = 10.0;

  std::vector<double> grid() const;
};

/// Values swept by gamma_sweep; exactly one list is used (gamma, then detuning, then delay).
struct SweepSpec {
  std::vector<double> gamma;
  std::vector<double> delta_lambda_nm;
  std::vector<double> delay_ps;
};

struct IngestInput {
  std::string path;
  core::Labeling labeling = core::Labeling::by_path;
};

struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::duality;
  source::SpectralModel spectral;
  std::string noise_profile;  ///< name of a shipped profile, empty for none
  source::NoiseModel noise;   ///< resolved (profile merged with explicit fields)
  source::DistinguishabilityKnob knob;
  std::int64_t pairs_per_setting = 10000;
  int mc_resamples = 200;
  std::uint64_t seed = 2014;
  bool exact = false;
  std::string bench_preset = "fig2";
  std::string output_dir = "dualbench_out";
  bool emit_plots = false;
  ScanSpec scan;
  SweepSpec sweep;
  Thresholds thresholds;
  detection::DetectionOptions detection;
  std::vector<IngestInput> ingest;

  /// Range and consistency checks. Throws ConfigError.
  void validate() const;
};

/// Parses a config document. Angles in degrees, temperatures in C, delays in ps,
/// wavelengths in nm. Unknown top-level keys are rejected.
ScenarioConfig config_from_json(const std::string& text);
ScenarioConfig load_config(const std::string& path);
/// Canonical JSON form (fully resolved, including the noise values of the profile).
std::string config_to_json(const ScenarioConfig& config);

/// A named calibration: noise values plus the pairs per setting the error bars were
/// calibrated at (used when the config does not set pairs_per_setting).
struct NoiseProfile {
  source::NoiseModel noise;
  std::optional<std::int64_t> pairs_per_setting;
};

/// Loads `<data dir>/profiles/<name>.json`.
NoiseProfile load_noise_profile(const std::string& name);

}  // namespace dualbench::scenarios
