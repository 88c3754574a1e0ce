#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

#include "dualbench/metrics.hpp"
#include "dualbench/source.hpp"

using namespace dualbench;
using core::Complex;

namespace {

// Overlap of two Gaussian amplitude spectra whose intensity FWHM is `fwhm`, centers `d` apart.
double overlap_quadrature(double d, double fwhm) {
  const double c = 4.0 * std::log(2.0) / (fwhm * fwhm);
  auto amp = [&](double x, double x0) { return std::exp(-0.5 * c * (x - x0) * (x - x0)); };
  using boost::math::quadrature::gauss_kronrod;
  const double lim = 10.0 * fwhm + std::abs(d);
  const double cross = gauss_kronrod<double, 61>::integrate([&](double x) { return amp(x, 0.0) * amp(x, d); }, -lim, lim, 12);
  const double norm = gauss_kronrod<double, 61>::integrate([&](double x) { return amp(x, 0.0) * amp(x, 0.0); }, -lim, lim, 12);
  return cross / norm;
}

}  // namespace

TEST_SUITE("spdc_source") {
  TEST_CASE("frequency overlap matches numerical quadrature of Gaussian spectra") {
    const source::SpectralModel m;
    for (double d : {0.0, 0.1, 0.39, 0.78, 1.5, 3.0}) {
      source::DistinguishabilityKnob k;
      k.mode = source::KnobMode::frequency;
      k.delta_lambda_nm = d;
      CHECK(std::abs(source::overlap(m, k)) == doctest::Approx(overlap_quadrature(d, m.fwhm_nm)).epsilon(1e-9));
    }
  }

  TEST_CASE("overlap is one half at one FWHM of detuning or one coherence time of delay") {
    const source::SpectralModel m;
    source::DistinguishabilityKnob k;
    k.mode = source::KnobMode::frequency;
    k.delta_lambda_nm = m.fwhm_nm;
    CHECK(std::abs(source::overlap(m, k)) == doctest::Approx(0.5));
    k.mode = source::KnobMode::arrival_time;
    k.delay_ps = m.coherence_time_ps;
    CHECK(std::abs(source::overlap(m, k)) == doctest::Approx(0.5));
    k.mode = source::KnobMode::none;
    CHECK(source::overlap(m, k) == Complex(1.0));
  }

  TEST_CASE("arrival-time overlap carries the carrier phase") {
    const source::SpectralModel m;
    source::DistinguishabilityKnob k;
    k.mode = source::KnobMode::arrival_time;
    k.delay_ps = 0.001;
    const double omega = 2.0 * std::numbers::pi * 299792.458 / m.center_wavelength_nm;  // rad/ps
    const Complex g = source::overlap(m, k);
    CHECK(std::remainder(std::arg(g) - omega * k.delay_ps, 2.0 * std::numbers::pi) == doctest::Approx(0.0).epsilon(1e-9));
  }

  TEST_CASE("crystal temperature maps to detuning and 50 C makes the photons distinguishable") {
    CHECK(source::temperature_to_detuning(53.7) == doctest::Approx(0.0));
    CHECK(source::temperature_to_detuning(50.0) == doctest::Approx(-1.3 * (50.0 - 53.7)));
    CHECK_THROWS_AS(source::temperature_to_detuning(95.0), ConfigError);
    source::DistinguishabilityKnob k;
    k.mode = source::KnobMode::frequency;
    k.crystal_temperature_c = 50.0;
    CHECK(std::abs(source::overlap({}, k)) < 0.01);
    k.delay_ps = 20.0;
    k.crystal_temperature_c.reset();
    k.mode = source::KnobMode::arrival_time;
    CHECK(std::abs(source::overlap({}, k)) < 0.01);
  }

  TEST_CASE("spectral model warns when bandwidth and coherence time are not a transform pair") {
    CHECK(source::SpectralModel{}.validate().size() == 1);
    source::SpectralModel tl;
    tl.coherence_time_ps = 0.441 * tl.center_wavelength_nm * tl.center_wavelength_nm / (299792.458 * tl.fwhm_nm);
    CHECK(tl.validate().empty());
    source::SpectralModel bad;
    bad.fwhm_nm = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
  }

  TEST_CASE("noise parameters are range checked") {
    source::NoiseModel n;
    n.white_noise = 1.5;
    CHECK_THROWS_AS(n.validate(), ConfigError);
    n = {};
    n.amplitude_imbalance = -2.0;
    CHECK_THROWS_AS(n.validate(), ConfigError);
    n = {};
    n.mode_overlap = -0.1;
    CHECK_THROWS_AS(n.validate(), ConfigError);
  }

  TEST_CASE("ideal pair is the polarization Bell state in either labeling") {
    const auto e = source::make_pair_with_overlap(1.0, {});
    core::validate(e);
    for (auto lab : {core::Labeling::by_path, core::Labeling::by_polarization}) {
      const auto rho = core::reduce_to_qubits(e, lab);
      CHECK(metrics::fidelity(rho, metrics::bell_target()) == doctest::Approx(1.0).epsilon(1e-14));
    }
  }

  TEST_CASE("noise closed forms") {
    source::NoiseModel n;
    n.white_noise = 0.1;
    n.dephasing = 0.2;
    n.amplitude_imbalance = 0.1;
    n.mode_overlap = 0.9;
    const double g = 0.8;
    const auto e = source::make_pair_with_overlap(g, n);
    core::validate(e);
    const double s2 = std::sin(std::numbers::pi / 2.0 * (1.0 + n.amplitude_imbalance));
    const double cpol = (1.0 - n.white_noise) * (1.0 - n.dephasing) * s2 - n.white_noise / 2.0;
    CHECK(metrics::concurrence(core::reduce_to_qubits(e, core::Labeling::by_path, true)) == doctest::Approx(cpol));
    // white-noise members with both photons in one polarization are lost to postselection
    const double keep = 1.0 - n.white_noise / 2.0;
    const double kg2 = std::pow(n.mode_overlap * g, 2);
    const double cpath = (1.0 - n.white_noise) * (1.0 - n.dephasing) * s2 * kg2 / keep;
    CHECK(metrics::concurrence(core::reduce_to_qubits(e, core::Labeling::by_polarization, true)) ==
          doctest::Approx(cpath));
  }

  TEST_CASE("knob validation") {
    source::DistinguishabilityKnob k;
    k.mode = source::KnobMode::frequency;
    k.crystal_temperature_c = 10.0;
    CHECK_THROWS_AS(k.validate(), ConfigError);
    CHECK_THROWS_AS(source::knob_mode_from_string("phase"), ConfigError);
  }
}
