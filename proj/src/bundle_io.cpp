#include "dualbench/bundle_io.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <json.hpp>

#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace dualbench::scenarios {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ordered_json matrix_part(const Eigen::Matrix4cd& m, bool imag) {
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < 4; ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < 4; ++j) row.push_back(imag ? m(i, j).imag() : m(i, j).real());
    rows.push_back(row);
  }
  return rows;
}

ordered_json error_bar(const std::optional<metrics::ErrorBar>& e) {
  if (!e) return nullptr;
  return ordered_json{{"mean", e->mean}, {"std", e->std}, {"used", e->used}, {"failures", e->failures}};
}

ordered_json optional_number(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

ordered_json rho_object(const LabelingResult& r, std::uint64_t seed) {
  const auto& opts = mle_options_for(r.labeling);
  ordered_json j;
  j["schema_version"] = kBundleSchemaVersion;
  j["labeling"] = core::to_string(r.labeling);
  j["basis_labels"] = r.mle.rho.basis_labels;
  j["re"] = matrix_part(r.mle.rho.rho, false);
  j["im"] = matrix_part(r.mle.rho.rho, true);
  j["psd"] = r.mle.rho.min_eigenvalue() >= -1e-12;
  j["min_eigenvalue"] = r.mle.rho.min_eigenvalue();
  j["log_likelihood"] = r.mle.log_likelihood;
  j["iterations"] = r.mle.iterations;
  j["normalization"] = opts.normalization == tomography::Normalization::fitted ? "fitted" : "from_records";
  j["efficiency"] = r.mle.efficiency;
  j["seed"] = seed;
  j["labeling_seed"] = r.seed;
  j["linear_inversion"] = {{"re", matrix_part(r.linear.rho.rho, false)},
                           {"im", matrix_part(r.linear.rho.rho, true)},
                           {"psd", r.linear.psd},
                           {"min_eigenvalue", r.linear.min_eigenvalue}};
  return j;
}

ordered_json metrics_object(const RunBundle& b) {
  ordered_json j;
  j["schema_version"] = kBundleSchemaVersion;
  j["scenario"] = to_string(b.config.scenario);
  j["seed"] = b.config.seed;
  j["exact"] = b.config.exact;
  j["pairs_per_setting"] = b.config.pairs_per_setting;
  j["gamma"] = std::isnan(b.gamma.real()) ? ordered_json(nullptr) : ordered_json(std::abs(b.gamma));
  j["status"] = b.status == Status::passed ? "passed" : "failed";
  j["failures"] = b.failures;
  j["warnings"] = b.warnings;
  ordered_json labelings = ordered_json::object();
  for (const auto& r : b.results) {
    ordered_json m;
    m["fidelity"] = r.report.fidelity;
    m["concurrence"] = r.report.concurrence;
    m["visibility_z"] = r.scan_z ? ordered_json(r.report.visibility_z) : ordered_json(nullptr);
    m["visibility_x"] = r.scan_x ? ordered_json(r.report.visibility_x) : ordered_json(nullptr);
    m["fidelity_error"] = error_bar(r.report.fidelity_error);
    m["concurrence_error"] = error_bar(r.report.concurrence_error);
    m["model_fidelity"] = optional_number(r.model_fidelity);
    m["model_concurrence"] = optional_number(r.model_concurrence);
    labelings[core::to_string(r.labeling)] = m;
  }
  j["labelings"] = labelings;
  ordered_json sweep = ordered_json::array();
  for (const auto& s : b.sweep)
    sweep.push_back({{"gamma", s.gamma},
                     {"c_path", s.c_path},
                     {"c_pol", s.c_pol},
                     {"f_path", s.f_path},
                     {"f_pol", s.f_pol},
                     {"v_x_path", s.v_x_path},
                     {"seed", s.seed}});
  j["sweep"] = sweep;
  return j;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return s.substr(i);
}

double parse_double(const std::string& field, const std::string& where) {
  const std::string f = trim(field);
  if (f.empty()) throw ConfigError("malformed count file " + where + ": empty field");
  char* end = nullptr;
  const double v = std::strtod(f.c_str(), &end);
  if (end != f.c_str() + f.size() || !std::isfinite(v))
    throw ConfigError("malformed count file " + where + ": '" + f + "' is not a number");
  return v;
}

void plot_files(const RunBundle& b, std::map<std::string, std::string>& files) {
  std::ostringstream gp;
  bool any_scan = false;
  for (const auto& r : b.results) {
    if (!r.scan_z || !r.scan_x) continue;
    any_scan = true;
    const std::string lab = core::to_string(r.labeling);
    std::ostringstream dat;
    dat << "# theta_deg z_counts x_counts z_expected x_expected seed=" << b.config.seed << "\n";
    for (std::size_t i = 0; i < r.scan_z->rows.size(); ++i) {
      const auto& z = r.scan_z->rows[i];
      const auto& x = r.scan_x->rows[i];
      dat << g17(z.theta_deg) << ' ' << z.counts << ' ' << x.counts << ' '
          << g17(z.expected_prob * static_cast<double>(z.pairs)) << ' '
          << g17(x.expected_prob * static_cast<double>(x.pairs)) << "\n";
    }
    files["curve_scan_" + lab + ".dat"] = dat.str();
    gp << "set terminal pngcairo size 800,500\n"
       << "set output 'scan_" << lab << ".png'\n"
       << "set xlabel 'analyzer angle (deg)'\nset ylabel 'coincidences'\n"
       << "plot 'curve_scan_" << lab << ".dat' using 1:2 with points title 'Z', \\\n"
       << "     '' using 1:3 with points title 'X', \\\n"
       << "     '' using 1:4 with lines title 'Z expected', \\\n"
       << "     '' using 1:5 with lines title 'X expected'\n";
  }
  if (any_scan) files["plot_scans.gp"] = gp.str();
  if (!b.sweep.empty()) {
    std::ostringstream dat;
    dat << "# gamma c_path c_pol gamma_squared v_x_path seed=" << b.config.seed << "\n";
    for (const auto& s : b.sweep)
      dat << g17(s.gamma) << ' ' << g17(s.c_path) << ' ' << g17(s.c_pol) << ' ' << g17(s.gamma * s.gamma) << ' '
          << g17(s.v_x_path) << "\n";
    files["curve_sweep.dat"] = dat.str();
    files["plot_sweep.gp"] =
        "set terminal pngcairo size 800,500\n"
        "set output 'sweep.png'\n"
        "set xlabel 'overlap gamma'\nset ylabel 'concurrence'\n"
        "plot 'curve_sweep.dat' using 1:2 with points title 'C path', \\\n"
        "     '' using 1:3 with points title 'C polarization', \\\n"
        "     '' using 1:4 with lines title 'gamma^2'\n";
  }
}

}  // namespace

std::string counts_csv(const LabelingResult& r, std::uint64_t seed) {
  std::ostringstream os;
  os << "# seed=" << seed << " labeling=" << core::to_string(r.labeling) << "\n";
  os << "setting_index,n_counts,pairs\n";
  auto obs = r.observations;
  std::sort(obs.begin(), obs.end(), [](const auto& a, const auto& b) { return a.setting_index < b.setting_index; });
  for (const auto& o : obs) os << o.setting_index << ',' << g17(o.counts) << ',' << g17(o.pairs) << "\n";
  return os.str();
}

std::vector<tomography::Observation> parse_counts_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool header = false;
  std::vector<tomography::Observation> out;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const std::string where = origin + " line " + std::to_string(line_no);
    if (!header) {
      if (line != "setting_index,n_counts,pairs")
        throw ConfigError("malformed count file " + where + ": expected header setting_index,n_counts,pairs");
      header = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (fields.size() != 3) throw ConfigError("malformed count file " + where + ": expected 3 fields");
    tomography::Observation o;
    const std::string idx = trim(fields[0]);
    const auto [ptr, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), o.setting_index);
    if (ec != std::errc() || ptr != idx.data() + idx.size())
      throw ConfigError("malformed count file " + where + ": bad setting index '" + idx + "'");
    o.counts = parse_double(fields[1], where);
    o.pairs = parse_double(fields[2], where);
    out.push_back(o);
  }
  if (!header) throw ConfigError("malformed count file " + origin + ": no header");
  return out;
}

std::vector<tomography::Observation> load_counts_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open count file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_counts_csv(ss.str(), path);
}

std::string scan_csv(const LabelingResult& r) {
  std::ostringstream os;
  os << "basis,theta_deg,expected_prob,counts,pairs,seed\n";
  for (const auto* scan : {&r.scan_z, &r.scan_x}) {
    if (!*scan) continue;
    for (const auto& row : (*scan)->rows)
      os << detection::to_string((*scan)->basis) << ',' << g17(row.theta_deg) << ',' << g17(row.expected_prob) << ','
         << row.counts << ',' << row.pairs << ',' << row.seed << "\n";
  }
  return os.str();
}

std::string rho_json(const LabelingResult& r, std::uint64_t seed) { return rho_object(r, seed).dump(2) + "\n"; }

std::string metrics_json(const RunBundle& b) { return metrics_object(b).dump(2) + "\n"; }

std::string sweep_csv(const RunBundle& b) {
  std::ostringstream os;
  os << "gamma,c_path,c_pol,f_path,f_pol,v_x_path,gamma_squared,seed\n";
  for (const auto& s : b.sweep)
    os << g17(s.gamma) << ',' << g17(s.c_path) << ',' << g17(s.c_pol) << ',' << g17(s.f_path) << ','
       << g17(s.f_pol) << ',' << g17(s.v_x_path) << ',' << g17(s.gamma * s.gamma) << ',' << s.seed << "\n";
  return os.str();
}

std::map<std::string, std::string> bundle_files(const RunBundle& b) {
  std::map<std::string, std::string> files;
  files["config.json"] = config_to_json(b.config);
  for (const auto& r : b.results) {
    const std::string lab = core::to_string(r.labeling);
    files["counts_" + lab + ".csv"] = counts_csv(r, b.config.seed);
    files["rho_" + lab + ".json"] = rho_json(r, b.config.seed);
    if (r.scan_z || r.scan_x) files["scan_" + lab + ".csv"] = scan_csv(r);
  }
  files["metrics.json"] = metrics_json(b);
  if (!b.sweep.empty()) files["sweep.csv"] = sweep_csv(b);
  if (b.config.emit_plots) plot_files(b, files);

  ordered_json manifest;
  manifest["schema_version"] = kBundleSchemaVersion;
  manifest["generator"] = {{"name", "dualbench"}, {"version", kVersion}};
  manifest["scenario"] = to_string(b.config.scenario);
  manifest["seed"] = b.config.seed;
  manifest["status"] = b.status == Status::passed ? "passed" : "failed";
  ordered_json listing = ordered_json::array();
  for (const auto& [name, content] : files) listing.push_back({{"name", name}, {"bytes", content.size()}});
  listing.push_back({{"name", "run.log"}, {"bytes", nullptr}});
  manifest["files"] = listing;
  manifest["config"] = ordered_json::parse(files["config.json"]);
  manifest["metrics"] = metrics_object(b);
  ordered_json rhos = ordered_json::object();
  for (const auto& r : b.results) rhos[core::to_string(r.labeling)] = rho_object(r, b.config.seed);
  manifest["density_matrices"] = rhos;
  files["bundle.json"] = manifest.dump(2) + "\n";
  return files;
}

std::string run_log(const RunBundle& b) {
  std::ostringstream os;
  os << "dualbench " << kVersion << "\n";
#if defined(__VERSION__)
  os << "compiler " << __VERSION__ << "\n";
#endif
  os << "eigen " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << "\n";
  os << "boost " << BOOST_VERSION / 100000 << '.' << BOOST_VERSION / 100 % 1000 << '.' << BOOST_VERSION % 100 << "\n";
  os << "scenario " << to_string(b.config.scenario) << "\n";
  os << "seed " << b.config.seed << "\n";
  os << "mode " << (b.config.exact ? "exact" : "sampled") << "\n";
  os << "pairs_per_setting " << b.config.pairs_per_setting << "\n";
  for (const auto& r : b.results) {
    os << "mle " << core::to_string(r.labeling) << " iterations=" << r.mle.iterations
       << " log_likelihood=" << g17(r.mle.log_likelihood) << "\n";
  }
  for (const auto& w : b.warnings) os << "warning " << w << "\n";
  for (const auto& f : b.failures) os << "failure " << f << "\n";
  os << "status " << (b.status == Status::passed ? "passed" : "failed") << "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", b.elapsed_seconds);
  os << "elapsed_seconds " << buf << "\n";
  return os.str();
}

void write_bundle(const RunBundle& b, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir);
  auto files = bundle_files(b);
  files["run.log"] = run_log(b);
  for (const auto& [name, content] : files) {
    const auto path = fs::path(dir) / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw ConfigError("cannot write " + path.string());
  }
}

}  // namespace dualbench::scenarios
