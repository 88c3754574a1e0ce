#include "dualbench/source.hpp"

#include <cmath>
#include <numbers>

namespace dualbench::source {

namespace {

constexpr double kSpeedOfLightNmPerPs = 299792.458;

void check_unit_interval(double v, double lo, double hi, const char* what) {
  if (!(v >= lo && v <= hi)) throw ConfigError(std::string(what) + " outside its allowed range");
}

}  // namespace

std::vector<std::string> SpectralModel::validate() const {
  if (!(center_wavelength_nm > 0.0)) throw ConfigError("center wavelength must be positive");
  if (!(fwhm_nm > 0.0)) throw ConfigError("spectral FWHM must be positive");
  if (!(coherence_time_ps > 0.0)) throw ConfigError("coherence time must be positive");
  std::vector<std::string> warnings;
  // Transform-limited Gaussian: dnu * dt = 2 ln2 / pi for intensity FWHMs.
  const double dnu_per_ps = kSpeedOfLightNmPerPs * fwhm_nm / (center_wavelength_nm * center_wavelength_nm);
  const double dt_expected = 2.0 * std::numbers::ln2 / std::numbers::pi / dnu_per_ps;
  const double mismatch = std::abs(coherence_time_ps - dt_expected) / dt_expected;
  if (mismatch > 0.2) {
    warnings.push_back("coherence time " + std::to_string(coherence_time_ps) +
                       " ps differs from the transform limit " + std::to_string(dt_expected) +
                       " ps of the quoted bandwidth; frequency and time overlaps use independent widths");
  }
  return warnings;
}

const char* to_string(KnobMode m) {
  switch (m) {
    case KnobMode::none: return "none";
    case KnobMode::frequency: return "frequency";
    case KnobMode::arrival_time: return "arrival_time";
  }
  return "?";
}

KnobMode knob_mode_from_string(const std::string& s) {
  if (s == "none") return KnobMode::none;
  if (s == "frequency") return KnobMode::frequency;
  if (s == "arrival_time") return KnobMode::arrival_time;
  throw ConfigError("unknown knob mode '" + s + "'");
}

void DistinguishabilityKnob::validate() const {
  if (!(delay_ps >= 0.0)) throw ConfigError("delay must be non-negative");
  if (mode == KnobMode::frequency && crystal_temperature_c && delta_lambda_nm != 0.0)
    throw ConfigError("frequency knob takes either a detuning or a crystal temperature, not both");
  if (crystal_temperature_c) temperature_to_detuning(*crystal_temperature_c, tuning);
}

double DistinguishabilityKnob::detuning_nm() const {
  if (crystal_temperature_c) return temperature_to_detuning(*crystal_temperature_c, tuning);
  return delta_lambda_nm;
}

void NoiseModel::validate() const {
  check_unit_interval(amplitude_imbalance, -1.0, 1.0, "amplitude imbalance");
  check_unit_interval(dephasing, 0.0, 1.0, "dephasing");
  check_unit_interval(white_noise, 0.0, 1.0, "white noise");
  check_unit_interval(mode_overlap, 0.0, 1.0, "mode overlap");
  if (!std::isfinite(compensation_error)) throw ConfigError("compensation error must be finite");
}

double temperature_to_detuning(double temperature_c, const TemperatureTuning& tuning) {
  if (!(temperature_c >= tuning.min_c && temperature_c <= tuning.max_c))
    throw ConfigError("crystal temperature " + std::to_string(temperature_c) + " C outside the tuning range [" +
                      std::to_string(tuning.min_c) + ", " + std::to_string(tuning.max_c) + "]");
  return tuning.slope_nm_per_c * (temperature_c - tuning.reference_c);
}

Complex overlap(const SpectralModel& model, const DistinguishabilityKnob& knob) {
  model.validate();
  knob.validate();
  switch (knob.mode) {
    case KnobMode::none: return 1.0;
    case KnobMode::frequency: {
      const double x = knob.detuning_nm() / model.fwhm_nm;
      return std::exp(-std::numbers::ln2 * x * x);
    }
    case KnobMode::arrival_time: {
      const double x = knob.delay_ps / model.coherence_time_ps;
      const double omega0 = 2.0 * std::numbers::pi * kSpeedOfLightNmPerPs / model.center_wavelength_nm;
      const double phase = std::fmod(omega0 * knob.delay_ps, 2.0 * std::numbers::pi);
      return std::polar(std::exp(-std::numbers::ln2 * x * x), phase);
    }
  }
  return 1.0;
}

namespace {

using core::Mode;
using core::Pol;

// a†(S, ps, phi_S) a†(I, pi, phi_I) with phi_S = e0 and phi_I given by its two components.
void add_product(core::TwoPhotonState& s, Pol ps, Pol pi, const std::array<Complex, 2>& idler, Complex amp) {
  for (int k = 0; k < 2; ++k) {
    if (idler[static_cast<std::size_t>(k)] == Complex{}) continue;
    s.add(Mode{core::kSignalPort, ps, 0}, Mode{core::kIdlerPort, pi, k}, amp * idler[static_cast<std::size_t>(k)]);
  }
}

}  // namespace

core::Ensemble make_pair_with_overlap(Complex gamma, const NoiseModel& noise) {
  noise.validate();
  gamma *= noise.mode_overlap;
  if (std::abs(gamma) > 1.0 + 1e-12) throw ConfigError("overlap magnitude exceeds one");
  const double mag = std::min(1.0, std::abs(gamma));
  const std::array<Complex, 2> idler{gamma, std::sqrt(std::max(0.0, 1.0 - mag * mag))};

  const double tilt = std::numbers::pi / 4.0 * (1.0 + noise.amplitude_imbalance);
  const double w = noise.white_noise, q = noise.dephasing;

  core::Ensemble out;
  for (double sign : {1.0, -1.0}) {
    const double weight = (1.0 - w) * (sign > 0 ? 1.0 - q / 2.0 : q / 2.0);
    if (weight <= 0.0) continue;
    core::TwoPhotonState s(weight);
    add_product(s, Pol::H, Pol::V, idler, std::cos(tilt));
    add_product(s, Pol::V, Pol::H, idler, sign * std::sin(tilt));
    s.prune();
    out.push_back(std::move(s));
  }
  if (w > 0.0) {
    for (Pol ps : {Pol::H, Pol::V})
      for (Pol pi : {Pol::H, Pol::V}) {
        core::TwoPhotonState s(w / 4.0);
        add_product(s, ps, pi, idler, 1.0);
        s.prune();
        out.push_back(std::move(s));
      }
  }
  core::validate(out);
  const auto rho = core::reduce_to_qubits(out, core::Labeling::by_path);
  if (rho.min_eigenvalue() < -1e-9) throw ValidationError("noise model produced a non-PSD polarization state");
  return out;
}

core::Ensemble make_pair(const SpectralModel& model, const DistinguishabilityKnob& knob, const NoiseModel& noise) {
  return make_pair_with_overlap(overlap(model, knob), noise);
}

}  // namespace dualbench::source
