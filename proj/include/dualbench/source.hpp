#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dualbench/quantum_core.hpp"

namespace dualbench::source {

using core::Complex;

/// Gaussian spectral/temporal description of the down-converted photons.
struct SpectralModel {
  double center_wavelength_nm = 808.0;
  double fwhm_nm = 0.78;
  double coherence_time_ps = 2.8;

  /// Throws ConfigError on non-positive widths. Returns warnings, e.g. when the
  /// bandwidth and coherence time are not a transform-limited Gaussian pair within 20%.
  std::vector<std::string> validate() const;
};

enum class KnobMode { none, frequency, arrival_time };

const char* to_string(KnobMode m);
KnobMode knob_mode_from_string(const std::string& s);

/// Crystal temperature to signal/idler detuning: delta_lambda = slope * (T - reference).
struct TemperatureTuning {
  double reference_c = 53.7;        // degenerate phase matching
  double slope_nm_per_c = -1.3;     // placeholder magnitude, configurable
  double min_c = 20.0;
  double max_c = 90.0;
};

struct DistinguishabilityKnob {
  KnobMode mode = KnobMode::none;
  double delta_lambda_nm = 0.0;
  double delay_ps = 0.0;
  std::optional<double> crystal_temperature_c;
  TemperatureTuning tuning;

  void validate() const;
  /// Detuning in effect for the frequency mode (temperature takes precedence when set).
  double detuning_nm() const;
};

/// Imperfections of the source and bench.
///  - amplitude_imbalance e in [-1, 1]: the two terms get cos/sin of pi/4 (1 + e).
///  - dephasing q in [0, 1]: coherence between the two terms scaled by (1 - q).
///  - white_noise w in [0, 1]: admixture w of the four product terms (I/4 in polarization).
///  - mode_overlap k in [0, 1]: residual internal-mode mismatch, multiplies the overlap.
///  - compensation_error: phase error (radians) left by the birefringent compensator of
///    the path-measurement bench; it is applied to the bench, not to the state.
struct NoiseModel {
  double amplitude_imbalance = 0.0;
  double dephasing = 0.0;
  double white_noise = 0.0;
  double mode_overlap = 1.0;
  double compensation_error = 0.0;

  void validate() const;
};

/// Overlap gamma = <phi_S | phi_I> of the signal and idler wavepackets.
/// Frequency detuning gives exp(-ln2 (dl / fwhm)^2); an arrival-time delay gives
/// exp(-ln2 (tau / T_c)^2) times the carrier phase e^{i w0 tau}.
Complex overlap(const SpectralModel& model, const DistinguishabilityKnob& knob);

/// Throws ConfigError if `temperature_c` is outside the tuning range.
double temperature_to_detuning(double temperature_c, const TemperatureTuning& tuning = {});

/// The entangled pair (|H>_S|V>_I + |V>_S|H>_I)/sqrt(2) with the idler internal state
/// set by `gamma` (signal = e0, idler = gamma e0 + sqrt(1-|gamma|^2) e1), plus noise.
core::Ensemble make_pair_with_overlap(Complex gamma, const NoiseModel& noise);

core::Ensemble make_pair(const SpectralModel& model, const DistinguishabilityKnob& knob, const NoiseModel& noise);

}  // namespace dualbench::source
