#include "dualbench/detection.hpp"

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/poisson_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dualbench::detection {

namespace {

std::size_t element_index(const optics::Bench& bench, const std::string& id) {
  for (std::size_t i = 0; i < bench.elements.size(); ++i)
    if (bench.elements[i].id == id) return i;
  throw ConfigError("bench has no element '" + id + "'");
}

double wrap_pi(double a) {
  a = std::fmod(a, std::numbers::pi);
  return a < 0 ? a + std::numbers::pi : a;
}

// Rotates away the global phase so the largest component is real and positive.
Eigen::Vector2cd dephase(const Eigen::Vector2cd& v) {
  const Eigen::Index k = std::abs(v(0)) >= std::abs(v(1)) ? 0 : 1;
  return v * std::polar(1.0, -std::arg(v(k)));
}

struct ArmGeometry {
  Eigen::Matrix2cd encoding;  // columns: qubit |0>, |1> as polarization at the analyzer input
  Eigen::Vector2cd selected;  // polarization transmitted to the detector after the analyzer
};

ArmGeometry arm_geometry(const optics::Bench& bench, const optics::AnalyzerArm& arm) {
  const std::size_t iq = element_index(bench, arm.qwp_id);
  const std::size_t ih = element_index(bench, arm.hwp_id);
  if (iq >= ih) throw ConfigError("analyzer QWP must precede its HWP (" + arm.detector + ")");
  const std::string& port = bench.elements[iq].ports[0];
  for (std::size_t i = iq + 1; i < ih; ++i)
    for (const auto& p : bench.elements[i].ports)
      if (p == port) throw ConfigError("element between analyzer plates on port " + port);

  ArmGeometry g;
  const auto prefix = optics::compile_range(bench, 0, iq, false, 1);
  for (int k = 0; k < 2; ++k) {
    const auto col = static_cast<Eigen::Index>(prefix.space.index(arm.basis[static_cast<std::size_t>(k)]));
    for (int p = 0; p < 2; ++p)
      g.encoding(p, k) =
          prefix.matrix(static_cast<Eigen::Index>(prefix.space.index(core::Mode{port, static_cast<core::Pol>(p), 0})), col);
  }
  if (!(g.encoding.adjoint() * g.encoding).isIdentity(1e-9))
    throw ConfigError("qubit basis of arm " + arm.detector + " does not map one-to-one onto the analyzer port");

  const auto suffix = optics::compile_range(bench, ih + 1, bench.elements.size(), true, 1);
  const std::string& det_port = bench.detector_map.at(arm.detector).port;
  Eigen::Matrix2cd t;
  for (int out = 0; out < 2; ++out)
    for (int in = 0; in < 2; ++in)
      t(out, in) = suffix.matrix(
          static_cast<Eigen::Index>(suffix.space.index(core::Mode{det_port, static_cast<core::Pol>(out), 0})),
          static_cast<Eigen::Index>(suffix.space.index(core::Mode{port, static_cast<core::Pol>(in), 0})));
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(t.adjoint() * t);
  if (std::abs(es.eigenvalues()(0)) > 1e-9 || std::abs(es.eigenvalues()(1) - 1.0) > 1e-9)
    throw ConfigError("arm " + arm.detector + " does not end in a lossless polarization selector");
  g.selected = dephase(es.eigenvectors().col(1));
  return g;
}

}  // namespace

AnalyzerAngles realize(const optics::Bench& calibration, const ProjectorSetting& setting) {
  if (calibration.arms.size() != 2) throw ConfigError("bench '" + calibration.name + "' has no analyzer arms");
  AnalyzerAngles angles;
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& arm = calibration.arms[k];
    const auto g = arm_geometry(calibration, arm);
    Eigen::Vector2cd ket = setting.kets[k];
    if (ket.norm() == 0.0) throw ConfigError("projector ket is zero");
    ket.normalize();
    const Eigen::Vector2cd phi = g.encoding * ket;

    if (g.selected.imag().norm() > 1e-9) throw ConfigError("arm " + arm.detector + " selects a non-linear polarization");
    const double beta = std::atan2(g.selected(1).real(), g.selected(0).real());

    // QWP fast axis along the ellipse major axis turns phi into linear polarization.
    const double s1 = std::norm(phi(0)) - std::norm(phi(1));
    const double s2 = 2.0 * std::real(std::conj(phi(0)) * phi(1));
    const double q = 0.5 * std::atan2(s2, s1);
    const Eigen::Vector2cd lin = dephase(optics::qwp_matrix(q) * phi);
    if (lin.imag().norm() > 1e-9) throw NumericalError("analyzer QWP solution is not linear");
    const double alpha = std::atan2(lin(1).real(), lin(0).real());
    // HWP at h maps linear angle alpha to 2h - alpha.
    const double h = 0.5 * (alpha + beta);

    const Complex overlap = g.selected.dot(optics::hwp_matrix(h) * optics::qwp_matrix(q) * phi);
    if (std::abs(std::abs(overlap) - 1.0) > 1e-9) throw NumericalError("analyzer angle solution failed");
    angles[arm.qwp_id] = wrap_pi(q);
    angles[arm.hwp_id] = wrap_pi(h);
  }
  return angles;
}

optics::Bench with_angles(optics::Bench bench, const AnalyzerAngles& angles) {
  for (const auto& [id, a] : angles) bench.element(id).angle = a;
  return bench;
}

namespace {

std::pair<std::string, std::string> detector_ports(const optics::Bench& bench) {
  std::vector<std::string> dets;
  if (bench.arms.size() == 2) {
    dets = {bench.arms[0].detector, bench.arms[1].detector};
  } else {
    for (const auto& [d, spec] : bench.detector_map) dets.push_back(d);
  }
  if (dets.size() != 2) throw ConfigError("coincidence counting needs exactly two detectors");
  auto port = [&](const std::string& d) {
    auto it = bench.detector_map.find(d);
    if (it == bench.detector_map.end()) throw ConfigError("undeclared detector " + d);
    return it->second.port;
  };
  return {port(dets[0]), port(dets[1])};
}

int internal_extent(const core::Ensemble& e) {
  int d = 1;
  for (const auto& s : e)
    for (const auto& [pair, amp] : s.terms()) d = std::max({d, pair.first.internal + 1, pair.second.internal + 1});
  return d;
}

}  // namespace

double coincidence_probability(const core::Ensemble& state, const optics::Bench& bench,
                               const AnalyzerAngles& angles, const DetectionOptions& options) {
  const auto measured = with_angles(bench, angles);
  const auto [p1, p2] = detector_ports(measured);
  const auto u = optics::compile(measured, internal_extent(state));
  double prob = 0.0;
  for (const auto& member : state) {
    const auto out = core::apply_unitary(member, u);
    double member_prob = 0.0;
    for (const auto& [pair, amp] : out.terms()) {
      const auto& a = pair.first.spatial;
      const auto& b = pair.second.spatial;
      if ((a == p1 && b == p2) || (a == p2 && b == p1)) member_prob += std::norm(amp);
    }
    prob += member.weight() * member_prob;
  }
  prob = options.efficiency * prob + options.background;
  return std::clamp(prob, 0.0, 1.0);
}

double coincidence_probability(const core::Ensemble& state, const optics::Bench& bench,
                               const ProjectorSetting& setting, const DetectionOptions& options) {
  return coincidence_probability(state, bench, realize(bench, setting), options);
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CountRecord sample_counts(double prob, std::int64_t pairs_emitted, std::uint64_t seed) {
  if (!(prob >= 0.0 && prob <= 1.0)) throw ConfigError("probability outside [0, 1]");
  if (pairs_emitted <= 0) throw ConfigError("pairs emitted must be positive");
  CountRecord r;
  r.probability = prob;
  r.pairs_emitted = pairs_emitted;
  r.expected = prob * static_cast<double>(pairs_emitted);
  r.seed = seed;
  if (r.expected > 0.0) {
    boost::random::mt19937_64 gen(seed);
    boost::random::poisson_distribution<std::int64_t, double> dist(r.expected);
    r.counts = dist(gen);
  }
  return r;
}

const char* to_string(ScanBasis b) { return b == ScanBasis::Z ? "Z" : "X"; }

std::vector<double> default_scan_grid() {
  std::vector<double> g;
  for (int t = 0; t <= 180; t += 10) g.push_back(t);
  return g;
}

ScanTable correlation_scan(const core::Ensemble& state, const optics::Bench& calibration,
                           const optics::Bench& physical, ScanBasis basis, std::span<const double> thetas_deg,
                           std::int64_t pairs_per_point, std::uint64_t seed, const DetectionOptions& options) {
  if (thetas_deg.empty()) throw ConfigError("scan grid is empty");
  ScanTable table;
  table.basis = basis;
  const double r = 1.0 / std::sqrt(2.0);
  const Eigen::Vector2cd fixed = basis == ScanBasis::Z ? Eigen::Vector2cd(1.0, 0.0) : Eigen::Vector2cd(-r, r);
  for (std::size_t i = 0; i < thetas_deg.size(); ++i) {
    const double t = thetas_deg[i] * std::numbers::pi / 180.0;
    ProjectorSetting setting{{Eigen::Vector2cd(std::cos(2 * t), std::sin(2 * t)), fixed}, ""};
    const double p = coincidence_probability(state, physical, realize(calibration, setting), options);
    const auto rec = sample_counts(p, pairs_per_point, substream_seed(seed, i));
    table.rows.push_back(ScanRow{thetas_deg[i], p, rec.counts, pairs_per_point, rec.seed});
  }
  return table;
}

}  // namespace dualbench::detection
