#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dualbench/optics.hpp"
#include "dualbench/quantum_core.hpp"

namespace dualbench::detection {

using core::Complex;

/// Target single-qubit kets, one per analyzer arm, in the qubit basis of the bench's
/// labeling (arm order = qubit order).
struct ProjectorSetting {
  std::array<Eigen::Vector2cd, 2> kets;
  std::string label;
};

/// Wave-plate angles (radians) keyed by element id.
using AnalyzerAngles = std::map<std::string, double>;

/// Solves the QWP/HWP angles of every analyzer arm so that the arm transmits exactly
/// the requested qubit ket. The qubit-to-polarization encoding in front of the
/// analyzer and the polarization selected behind it are both read off `calibration`
/// by propagating single photons, so all fixed phases of the bench are accounted for.
AnalyzerAngles realize(const optics::Bench& calibration, const ProjectorSetting& setting);

optics::Bench with_angles(optics::Bench bench, const AnalyzerAngles& angles);

struct DetectionOptions {
  double efficiency = 1.0;  ///< joint detection efficiency (multiplicative)
  double background = 0.0;  ///< additive coincidence probability per pair
};

/// Probability that one photon reaches each of the two analyzer-arm detectors,
/// summed over polarizations, internal indices and ensemble members. Amplitude
/// in loss ports is not renormalized away.
double coincidence_probability(const core::Ensemble& state, const optics::Bench& bench,
                               const AnalyzerAngles& angles, const DetectionOptions& options = {});

/// Convenience: realizes `setting` on the same bench it is measured with.
double coincidence_probability(const core::Ensemble& state, const optics::Bench& bench,
                               const ProjectorSetting& setting, const DetectionOptions& options = {});

struct CountRecord {
  int setting_index = 0;
  std::string label;
  double probability = 0.0;
  double expected = 0.0;  ///< probability x pairs
  std::int64_t counts = 0;
  std::int64_t pairs_emitted = 0;
  std::uint64_t seed = 0;
};

/// Counts ~ Poisson(prob * pairs) from a mt19937_64 stream seeded with `seed`.
CountRecord sample_counts(double prob, std::int64_t pairs_emitted, std::uint64_t seed);

/// Independent per-index seed derived from a master seed (SplitMix64 finalizer).
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

enum class ScanBasis { Z, X };
const char* to_string(ScanBasis b);

struct ScanRow {
  double theta_deg = 0.0;
  double expected_prob = 0.0;
  std::int64_t counts = 0;
  std::int64_t pairs = 0;
  std::uint64_t seed = 0;
};

struct ScanTable {
  ScanBasis basis = ScanBasis::Z;
  std::vector<ScanRow> rows;
};

/// 0 to 180 degrees in 10 degree steps.
std::vector<double> default_scan_grid();

/// Arm 0 projected on cos(2t)|0> + sin(2t)|1>; arm 1 fixed on |0> (Z) or
/// |+> = (-|0> + |1>)/sqrt(2) (X). Angles are resolved on `calibration` and the
/// counts are taken on `physical`.
ScanTable correlation_scan(const core::Ensemble& state, const optics::Bench& calibration,
                           const optics::Bench& physical, ScanBasis basis, std::span<const double> thetas_deg,
                           std::int64_t pairs_per_point, std::uint64_t seed, const DetectionOptions& options = {});

}  // namespace dualbench::detection
