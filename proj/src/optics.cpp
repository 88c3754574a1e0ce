#include "dualbench/optics.hpp"

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace dualbench::optics {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
const Complex kI{0.0, 1.0};

}  // namespace

Eigen::Matrix2cd hwp_matrix(double angle) {
  const double c = std::cos(2.0 * angle), s = std::sin(2.0 * angle);
  Eigen::Matrix2cd m;
  m << c, s, s, -c;
  return m;
}

Eigen::Matrix2cd qwp_matrix(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  const Complex g = std::polar(1.0, std::numbers::pi / 4.0);
  Eigen::Matrix2cd m;
  m << c * c + kI * s * s, (1.0 - kI) * s * c, (1.0 - kI) * s * c, s * s + kI * c * c;
  return g * m;
}

Eigen::Matrix2cd polarizer_matrix(double angle) {
  Eigen::Vector2cd e(std::cos(angle), std::sin(angle));
  return e * e.adjoint();
}

const char* to_string(ElementKind k) {
  switch (k) {
    case ElementKind::HWP: return "HWP";
    case ElementKind::QWP: return "QWP";
    case ElementKind::PBS: return "PBS";
    case ElementKind::PHASE: return "PHASE";
    case ElementKind::POLARIZER: return "POLARIZER";
    case ElementKind::MIRROR: return "MIRROR";
  }
  return "?";
}

ElementKind element_kind_from_string(const std::string& s) {
  for (auto k : {ElementKind::HWP, ElementKind::QWP, ElementKind::PBS, ElementKind::PHASE, ElementKind::POLARIZER,
                 ElementKind::MIRROR})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown element kind '" + s + "'");
}

const Element& Bench::element(const std::string& id) const {
  for (const auto& e : elements)
    if (e.id == id) return e;
  throw ConfigError("bench '" + name + "' has no element '" + id + "'");
}

Element& Bench::element(const std::string& id) {
  return const_cast<Element&>(static_cast<const Bench&>(*this).element(id));
}

namespace {

std::size_t arity(ElementKind k) {
  switch (k) {
    case ElementKind::PBS: return 4;
    case ElementKind::MIRROR: return 2;
    default: return 1;
  }
}

std::string owner_name(const Element& e, std::size_t index) {
  return e.id.empty() ? "#" + std::to_string(index) : e.id;
}

}  // namespace

void Bench::validate() const {
  std::set<std::string> declared(ports.begin(), ports.end());
  if (declared.size() != ports.size()) throw ConfigError("bench '" + name + "' declares a port twice");
  for (const auto& p : ports)
    if (p.rfind("LOSS:", 0) == 0) throw ConfigError("port names starting with LOSS: are reserved");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const auto& e = elements[i];
    if (e.ports.size() != arity(e.kind))
      throw ConfigError(std::string(to_string(e.kind)) + " " + owner_name(e, i) + " needs " +
                        std::to_string(arity(e.kind)) + " port(s)");
    std::set<std::string> distinct(e.ports.begin(), e.ports.end());
    if (distinct.size() != e.ports.size()) throw ConfigError("element " + owner_name(e, i) + " repeats a port");
    for (const auto& p : e.ports)
      if (!declared.count(p)) throw ConfigError("element " + owner_name(e, i) + " references undeclared port " + p);
    if (!e.id.empty() && !ids.insert(e.id).second) throw ConfigError("duplicate element id " + e.id);
  }
  for (const auto& [det, spec] : detector_map)
    if (!declared.count(spec.port)) throw ConfigError("detector " + det + " sits on undeclared port " + spec.port);
  for (const auto& arm : arms) {
    if (!detector_map.count(arm.detector)) throw ConfigError("analyzer arm names unknown detector " + arm.detector);
    const auto& q = element(arm.qwp_id);
    const auto& h = element(arm.hwp_id);
    if (q.kind != ElementKind::QWP || h.kind != ElementKind::HWP)
      throw ConfigError("analyzer arm for " + arm.detector + " must reference a QWP and an HWP");
    if (q.ports[0] != h.ports[0]) throw ConfigError("analyzer plates for " + arm.detector + " sit on different ports");
    for (const auto& m : arm.basis)
      if (!declared.count(m.spatial)) throw ConfigError("analyzer basis mode on undeclared port " + m.spatial);
  }
  if (!arms.empty() && arms.size() != 2) throw ConfigError("a two-qubit bench needs exactly two analyzer arms");
}

std::string loss_port_for(const std::string& owner) { return "LOSS:" + owner; }

namespace {

std::vector<std::string> all_ports(const Bench& bench, std::vector<std::string>& loss) {
  std::vector<std::string> ports = bench.ports;
  for (std::size_t i = 0; i < bench.elements.size(); ++i)
    if (bench.elements[i].kind == ElementKind::POLARIZER)
      loss.push_back(loss_port_for(owner_name(bench.elements[i], i)));
  for (const auto& [det, spec] : bench.detector_map)
    if (spec.polarizer_angle) loss.push_back(loss_port_for("det:" + det));
  ports.insert(ports.end(), loss.begin(), loss.end());
  return ports;
}

// Left-multiplies U by a local matrix acting on `ports` x {H, V} at every internal index.
void apply_local(Eigen::MatrixXcd& u, const core::ModeSpace& space, const std::vector<std::string>& ports,
                 const Eigen::MatrixXcd& local) {
  const auto k = static_cast<Eigen::Index>(ports.size() * 2);
  for (int internal = 0; internal < space.internal_dim(); ++internal) {
    std::vector<Eigen::Index> rows;
    rows.reserve(static_cast<std::size_t>(k));
    for (const auto& p : ports)
      for (Pol pol : {Pol::H, Pol::V})
        rows.push_back(static_cast<Eigen::Index>(space.index(core::Mode{p, pol, internal})));
    Eigen::MatrixXcd block(k, u.cols());
    for (Eigen::Index r = 0; r < k; ++r) block.row(r) = u.row(rows[static_cast<std::size_t>(r)]);
    const Eigen::MatrixXcd updated = local * block;
    for (Eigen::Index r = 0; r < k; ++r) u.row(rows[static_cast<std::size_t>(r)]) = updated.row(r);
  }
}

Eigen::MatrixXcd polarizer_with_loss(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Eigen::Vector4cd perp_p(-s, c, 0, 0), perp_l(0, 0, -s, c);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(4, 4);
  m -= perp_p * perp_p.adjoint() + perp_l * perp_l.adjoint();
  m += perp_l * perp_p.adjoint() + perp_p * perp_l.adjoint();
  return m;
}

Eigen::MatrixXcd pbs_local() {
  // Local order: a_H a_V b_H b_V c_H c_V d_H d_V.
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(8, 8);
  enum { aH, aV, bH, bV, cH, cV, dH, dV };
  m(cH, aH) = 1.0;
  m(aH, cH) = 1.0;
  m(dH, bH) = 1.0;
  m(bH, dH) = 1.0;
  m(dV, aV) = kI;
  m(aV, dV) = kI;
  m(cV, bV) = kI;
  m(bV, cV) = kI;
  return m;
}

void apply_element(Eigen::MatrixXcd& u, const core::ModeSpace& space, const Element& e, const std::string& owner) {
  switch (e.kind) {
    case ElementKind::HWP: apply_local(u, space, e.ports, hwp_matrix(e.angle)); break;
    case ElementKind::QWP: apply_local(u, space, e.ports, qwp_matrix(e.angle)); break;
    case ElementKind::PHASE: {
      Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(2, 2);
      const Complex ph = std::polar(1.0, e.phase);
      if (!e.phase_pol || *e.phase_pol == Pol::H) m(0, 0) = ph;
      if (!e.phase_pol || *e.phase_pol == Pol::V) m(1, 1) = ph;
      apply_local(u, space, e.ports, m);
      break;
    }
    case ElementKind::POLARIZER:
      apply_local(u, space, {e.ports[0], loss_port_for(owner)}, polarizer_with_loss(e.angle));
      break;
    case ElementKind::PBS: apply_local(u, space, e.ports, pbs_local()); break;
    case ElementKind::MIRROR: {
      Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
      m(2, 0) = m(0, 2) = m(3, 1) = m(1, 3) = 1.0;
      apply_local(u, space, e.ports, m);
      break;
    }
  }
}

}  // namespace

core::ModeUnitary compile_range(const Bench& bench, std::size_t first, std::size_t last, bool with_detectors,
                                int internal_dim) {
  bench.validate();
  std::vector<std::string> loss;
  auto ports = all_ports(bench, loss);
  core::ModeUnitary u = core::ModeUnitary::identity(core::ModeSpace(ports, internal_dim));
  u.loss_ports = loss;
  bool lossy = false;
  last = std::min(last, bench.elements.size());
  for (std::size_t i = first; i < last; ++i) {
    const auto& e = bench.elements[i];
    apply_element(u.matrix, u.space, e, owner_name(e, i));
    lossy = lossy || e.kind == ElementKind::POLARIZER;
  }
  if (with_detectors) {
    for (const auto& [det, spec] : bench.detector_map) {
      if (!spec.polarizer_angle) continue;
      apply_local(u.matrix, u.space, {spec.port, loss_port_for("det:" + det)}, polarizer_with_loss(*spec.polarizer_angle));
      lossy = true;
    }
  }
  u.kind = lossy ? core::UnitaryKind::isometry_with_loss : core::UnitaryKind::unitary;
  u.validate();
  return u;
}

core::ModeUnitary compile(const Bench& bench, int internal_dim) {
  return compile_range(bench, 0, bench.elements.size(), true, internal_dim);
}

namespace {

using nlohmann::json;

Pol pol_from_json(const json& j) {
  const auto s = j.get<std::string>();
  if (s == "H") return Pol::H;
  if (s == "V") return Pol::V;
  throw ConfigError("polarization must be H or V, got " + s);
}

}  // namespace

Bench bench_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("bench file is not valid JSON: ") + ex.what());
  }
  try {
    Bench b;
    b.name = j.value("name", "");
    b.ports = j.at("ports").get<std::vector<std::string>>();
    for (const auto& je : j.at("elements")) {
      Element e;
      e.kind = element_kind_from_string(je.at("kind").get<std::string>());
      e.id = je.value("id", "");
      e.ports = je.at("ports").get<std::vector<std::string>>();
      e.angle = je.value("angle_deg", 0.0) * kDeg;
      e.phase = je.value("phase_rad", 0.0);
      if (je.contains("pol")) e.phase_pol = pol_from_json(je.at("pol"));
      b.elements.push_back(std::move(e));
    }
    for (const auto& [det, jd] : j.at("detector_map").items()) {
      DetectorSpec spec;
      spec.port = jd.at("port").get<std::string>();
      if (jd.contains("polarizer_deg") && !jd.at("polarizer_deg").is_null())
        spec.polarizer_angle = jd.at("polarizer_deg").get<double>() * kDeg;
      b.detector_map.emplace(det, spec);
    }
    if (j.contains("labeling")) b.labeling = core::labeling_from_string(j.at("labeling").get<std::string>());
    if (j.contains("analyzers")) {
      for (const auto& ja : j.at("analyzers")) {
        AnalyzerArm arm;
        arm.detector = ja.at("detector").get<std::string>();
        arm.qwp_id = ja.at("qwp").get<std::string>();
        arm.hwp_id = ja.at("hwp").get<std::string>();
        const auto& basis = ja.at("basis");
        if (basis.size() != 2) throw ConfigError("analyzer basis needs two modes");
        for (std::size_t k = 0; k < 2; ++k)
          arm.basis[k] = core::Mode{basis[k].at(0).get<std::string>(), pol_from_json(basis[k].at(1)), 0};
        b.arms.push_back(arm);
      }
    }
    b.validate();
    return b;
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("malformed bench description: ") + ex.what());
  }
}

std::string bench_to_json(const Bench& b) {
  json j;
  j["name"] = b.name;
  j["ports"] = b.ports;
  j["elements"] = json::array();
  for (const auto& e : b.elements) {
    json je{{"kind", to_string(e.kind)}, {"ports", e.ports}};
    if (!e.id.empty()) je["id"] = e.id;
    if (e.kind == ElementKind::HWP || e.kind == ElementKind::QWP || e.kind == ElementKind::POLARIZER)
      je["angle_deg"] = e.angle / kDeg;
    if (e.kind == ElementKind::PHASE) {
      je["phase_rad"] = e.phase;
      if (e.phase_pol) je["pol"] = core::to_string(*e.phase_pol);
    }
    j["elements"].push_back(je);
  }
  j["detector_map"] = json::object();
  for (const auto& [det, spec] : b.detector_map) {
    json jd{{"port", spec.port}};
    if (spec.polarizer_angle) jd["polarizer_deg"] = *spec.polarizer_angle / kDeg;
    j["detector_map"][det] = jd;
  }
  if (b.labeling) j["labeling"] = core::to_string(*b.labeling);
  if (!b.arms.empty()) {
    j["analyzers"] = json::array();
    for (const auto& arm : b.arms) {
      json basis = json::array();
      for (const auto& m : arm.basis) basis.push_back({m.spatial, core::to_string(m.pol)});
      j["analyzers"].push_back({{"detector", arm.detector}, {"qwp", arm.qwp_id}, {"hwp", arm.hwp_id}, {"basis", basis}});
    }
  }
  return j.dump(2);
}

Bench load_bench_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open bench file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return bench_from_json(ss.str());
}

std::string data_dir() {
  if (const char* env = std::getenv("DUALBENCH_DATA_DIR"); env && *env) return env;
  return DUALBENCH_DATA_DIR;
}

Bench load_preset(const std::string& name) {
  for (char c : name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
      throw ConfigError("invalid preset name '" + name + "'");
  const std::string path = data_dir() + "/benches/" + name + ".json";
  std::ifstream probe(path);
  if (!probe) throw ConfigError("unknown bench preset '" + name + "'");
  return load_bench_file(path);
}

}  // namespace dualbench::optics
