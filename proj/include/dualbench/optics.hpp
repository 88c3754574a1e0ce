#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dualbench/quantum_core.hpp"

namespace dualbench::optics {

using core::Complex;
using core::Pol;

/// Half-wave plate with fast axis at `angle` (radians): [[cos2a, sin2a], [sin2a, -cos2a]].
Eigen::Matrix2cd hwp_matrix(double angle);

/// Quarter-wave plate with fast axis at `angle` (radians), global phase fixed as
/// e^{i pi/4} [[cos^2 + i sin^2, (1-i) sin cos], [(1-i) sin cos, sin^2 + i cos^2]].
/// At 45 degrees it sends |H> to (|H> - i|V>)/sqrt(2) (times i).
Eigen::Matrix2cd qwp_matrix(double angle);

/// Projector onto linear polarization at `angle`.
Eigen::Matrix2cd polarizer_matrix(double angle);

enum class ElementKind { HWP, QWP, PBS, PHASE, POLARIZER, MIRROR };

const char* to_string(ElementKind k);
ElementKind element_kind_from_string(const std::string& s);

/// One optical element acting on named spatial ports.
///
/// Port conventions:
///  - HWP, QWP, PHASE, POLARIZER act in place on `ports[0]`.
///  - PBS takes {in_a, in_b, out_c, out_d}: H transmits (a->c, b->d), V reflects
///    with phase i (a->d, b->c).
///  - MIRROR exchanges the contents of `ports[0]` and `ports[1]`.
struct Element {
  ElementKind kind = ElementKind::HWP;
  std::string id;
  std::vector<std::string> ports;
  double angle = 0.0;  ///< radians (wave plates, polarizer)
  double phase = 0.0;  ///< radians (PHASE)
  /// PHASE only: restrict the phase to one polarization (a birefringent retarder).
  std::optional<Pol> phase_pol;
};

struct DetectorSpec {
  std::string port;
  /// Polarizer in front of the detector; rejected light goes to a loss port.
  std::optional<double> polarizer_angle;
};

/// A tunable polarization analyzer (QWP followed by HWP on one port) feeding one
/// detector, and the two source modes that play the roles of qubit |0> and |1> for it.
struct AnalyzerArm {
  std::string detector;
  std::string qwp_id;
  std::string hwp_id;
  std::array<core::Mode, 2> basis;
};

struct Bench {
  std::string name;
  std::vector<std::string> ports;
  std::vector<Element> elements;
  std::map<std::string, DetectorSpec> detector_map;
  /// Qubit labeling the analyzers measure; arms are listed in qubit order.
  std::optional<core::Labeling> labeling;
  std::vector<AnalyzerArm> arms;

  const Element& element(const std::string& id) const;
  Element& element(const std::string& id);
  /// Checks port references, arities and analyzer references. Throws ConfigError.
  void validate() const;
};

/// Name of the loss port created for the polarizer of element `index` (or detector `det`).
std::string loss_port_for(const std::string& owner);

/// Product of the per-element mode matrices in list order, followed by the detector
/// polarizers. Internal-blind (identity on the internal index). Polarizers route the
/// rejected polarization into dedicated loss ports, so the full matrix stays unitary
/// and is flagged isometry_with_loss.
core::ModeUnitary compile(const Bench& bench, int internal_dim = 2);

/// Compiles only elements [first, last) of the list (no detector polarizers unless
/// `with_detectors`). Used to propagate single photons through part of a bench.
core::ModeUnitary compile_range(const Bench& bench, std::size_t first, std::size_t last, bool with_detectors,
                                int internal_dim = 1);

Bench bench_from_json(const std::string& text);
std::string bench_to_json(const Bench& bench);
Bench load_bench_file(const std::string& path);
/// Looks up `<data dir>/benches/<name>.json`.
Bench load_preset(const std::string& name);

/// Directory holding shipped data files (presets, profiles, schemas). Honors the
/// DUALBENCH_DATA_DIR environment variable.
std::string data_dir();

}  // namespace dualbench::optics
