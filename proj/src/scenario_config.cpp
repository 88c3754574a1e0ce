#include "dualbench/scenario_config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "dualbench/optics.hpp"

namespace dualbench::scenarios {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(std::string("cannot open ") + what + " " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

void apply_noise_fields(const json& j, source::NoiseModel& n) {
  reject_unknown(j, {"amplitude_imbalance", "dephasing", "white_noise", "mode_overlap", "compensation_error_deg"},
                 "noise");
  n.amplitude_imbalance = j.value("amplitude_imbalance", n.amplitude_imbalance);
  n.dephasing = j.value("dephasing", n.dephasing);
  n.white_noise = j.value("white_noise", n.white_noise);
  n.mode_overlap = j.value("mode_overlap", n.mode_overlap);
  if (j.contains("compensation_error_deg")) n.compensation_error = j.at("compensation_error_deg").get<double>() * kDeg;
}

}  // namespace

const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::duality: return "duality";
    case ScenarioKind::breakdown_frequency: return "breakdown_frequency";
    case ScenarioKind::breakdown_time: return "breakdown_time";
    case ScenarioKind::gamma_sweep: return "gamma_sweep";
    case ScenarioKind::ingest: return "ingest";
  }
  return "?";
}

ScenarioKind scenario_from_string(const std::string& s) {
  for (auto k : {ScenarioKind::duality, ScenarioKind::breakdown_frequency, ScenarioKind::breakdown_time,
                 ScenarioKind::gamma_sweep, ScenarioKind::ingest})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown scenario '" + s + "'");
}

std::vector<double> ScanSpec::grid() const {
  if (!(step_deg > 0.0) || stop_deg < start_deg) throw ConfigError("invalid scan grid");
  std::vector<double> g;
  const auto n = static_cast<int>(std::floor((stop_deg - start_deg) / step_deg + 1e-9));
  for (int i = 0; i <= n; ++i) g.push_back(start_deg + i * step_deg);
  return g;
}

NoiseProfile load_noise_profile(const std::string& name) {
  for (char c : name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
      throw ConfigError("invalid noise profile name '" + name + "'");
  const std::string path = optics::data_dir() + "/profiles/" + name + ".json";
  std::ifstream probe(path);
  if (!probe) throw ConfigError("unknown noise profile '" + name + "'");
  json j;
  try {
    j = json::parse(read_file(path, "noise profile"));
    NoiseProfile p;
    apply_noise_fields(j.at("noise"), p.noise);
    p.noise.validate();
    if (j.contains("pairs_per_setting")) p.pairs_per_setting = j.at("pairs_per_setting").get<std::int64_t>();
    return p;
  } catch (const json::exception& ex) {
    throw ConfigError("malformed noise profile " + name + ": " + ex.what());
  }
}

void ScenarioConfig::validate() const {
  for (const auto& w : spectral.validate()) (void)w;
  noise.validate();
  knob.validate();
  if (pairs_per_setting <= 0) throw ConfigError("pairs_per_setting must be positive");
  if (mc_resamples != 0 && mc_resamples < 100) throw ConfigError("mc_resamples must be 0 (off) or at least 100");
  if (bench_preset.empty()) throw ConfigError("bench_preset is empty");
  if (output_dir.empty()) throw ConfigError("output_dir is empty");
  if (!(detection.efficiency > 0.0 && detection.efficiency <= 1.0)) throw ConfigError("efficiency outside (0, 1]");
  if (!(detection.background >= 0.0 && detection.background < 1.0)) throw ConfigError("background outside [0, 1)");
  scan.grid();
  for (double g : sweep.gamma)
    if (!(g >= 0.0 && g <= 1.0)) throw ConfigError("sweep gamma values must lie in [0, 1]");
  if (scenario == ScenarioKind::ingest && ingest.empty()) throw ConfigError("ingest needs at least one count file");
}

ScenarioConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("config is not valid JSON: ") + ex.what());
  }
  ScenarioConfig c;
  try {
    reject_unknown(j,
                   {"schema_version", "scenario", "source", "knob", "pairs_per_setting", "mc_resamples", "seed",
                    "exact", "bench_preset", "output_dir", "emit_plots", "scan", "sweep", "thresholds", "detection",
                    "ingest"},
                   "config");
    if (j.value("schema_version", kConfigSchemaVersion) != kConfigSchemaVersion)
      throw ConfigError("unsupported config schema_version");
    if (j.contains("scenario")) c.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    if (j.contains("source")) {
      const auto& js = j.at("source");
      reject_unknown(js, {"spectral", "noise_profile", "noise"}, "source");
      if (js.contains("spectral")) {
        const auto& sp = js.at("spectral");
        reject_unknown(sp, {"center_wavelength_nm", "fwhm_nm", "coherence_time_ps"}, "source.spectral");
        c.spectral.center_wavelength_nm = sp.value("center_wavelength_nm", c.spectral.center_wavelength_nm);
        c.spectral.fwhm_nm = sp.value("fwhm_nm", c.spectral.fwhm_nm);
        c.spectral.coherence_time_ps = sp.value("coherence_time_ps", c.spectral.coherence_time_ps);
      }
      if (js.contains("noise_profile") && !js.at("noise_profile").is_null()) {
        c.noise_profile = js.at("noise_profile").get<std::string>();
        if (!c.noise_profile.empty()) {
          const auto profile = load_noise_profile(c.noise_profile);
          c.noise = profile.noise;
          if (profile.pairs_per_setting) c.pairs_per_setting = *profile.pairs_per_setting;
        }
      }
      if (js.contains("noise")) apply_noise_fields(js.at("noise"), c.noise);
    }
    if (j.contains("knob")) {
      const auto& jk = j.at("knob");
      reject_unknown(jk,
                     {"mode", "delta_lambda_nm", "delay_ps", "crystal_temperature_c", "temperature_slope_nm_per_c",
                      "temperature_reference_c", "temperature_range_c"},
                     "knob");
      c.knob.mode = source::knob_mode_from_string(jk.value("mode", "none"));
      c.knob.delta_lambda_nm = jk.value("delta_lambda_nm", 0.0);
      c.knob.delay_ps = jk.value("delay_ps", 0.0);
      if (jk.contains("crystal_temperature_c") && !jk.at("crystal_temperature_c").is_null())
        c.knob.crystal_temperature_c = jk.at("crystal_temperature_c").get<double>();
      c.knob.tuning.slope_nm_per_c = jk.value("temperature_slope_nm_per_c", c.knob.tuning.slope_nm_per_c);
      c.knob.tuning.reference_c = jk.value("temperature_reference_c", c.knob.tuning.reference_c);
      if (jk.contains("temperature_range_c")) {
        const auto r = jk.at("temperature_range_c").get<std::vector<double>>();
        if (r.size() != 2) throw ConfigError("temperature_range_c needs [min, max]");
        c.knob.tuning.min_c = r[0];
        c.knob.tuning.max_c = r[1];
      }
    }
    c.pairs_per_setting = j.value("pairs_per_setting", c.pairs_per_setting);
    c.mc_resamples = j.value("mc_resamples", c.mc_resamples);
    c.seed = j.value("seed", c.seed);
    c.exact = j.value("exact", c.exact);
    c.bench_preset = j.value("bench_preset", c.bench_preset);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.emit_plots = j.value("emit_plots", c.emit_plots);
    if (j.contains("scan")) {
      const auto& js = j.at("scan");
      reject_unknown(js, {"start_deg", "stop_deg", "step_deg"}, "scan");
      c.scan.start_deg = js.value("start_deg", c.scan.start_deg);
      c.scan.stop_deg = js.value("stop_deg", c.scan.stop_deg);
      c.scan.step_deg = js.value("step_deg", c.scan.step_deg);
    }
    if (j.contains("sweep")) {
      const auto& js = j.at("sweep");
      reject_unknown(js, {"gamma", "delta_lambda_nm", "delay_ps"}, "sweep");
      c.sweep.gamma = js.value("gamma", std::vector<double>{});
      c.sweep.delta_lambda_nm = js.value("delta_lambda_nm", std::vector<double>{});
      c.sweep.delay_ps = js.value("delay_ps", std::vector<double>{});
    }
    if (j.contains("thresholds")) {
      const auto& jt = j.at("thresholds");
      reject_unknown(jt,
                     {"duality_min_concurrence", "distinguishability_max_overlap", "breakdown_max_path_concurrence",
                      "breakdown_max_visibility"},
                     "thresholds");
      auto& t = c.thresholds;
      t.duality_min_concurrence = jt.value("duality_min_concurrence", t.duality_min_concurrence);
      t.distinguishability_max_overlap = jt.value("distinguishability_max_overlap", t.distinguishability_max_overlap);
      t.breakdown_max_path_concurrence = jt.value("breakdown_max_path_concurrence", t.breakdown_max_path_concurrence);
      t.breakdown_max_visibility = jt.value("breakdown_max_visibility", t.breakdown_max_visibility);
    }
    if (j.contains("detection")) {
      const auto& jd = j.at("detection");
      reject_unknown(jd, {"efficiency", "background"}, "detection");
      c.detection.efficiency = jd.value("efficiency", c.detection.efficiency);
      c.detection.background = jd.value("background", c.detection.background);
    }
    if (j.contains("ingest")) {
      for (const auto& ji : j.at("ingest")) {
        reject_unknown(ji, {"path", "labeling"}, "ingest");
        c.ingest.push_back(
            IngestInput{ji.at("path").get<std::string>(), core::labeling_from_string(ji.at("labeling").get<std::string>())});
      }
    }
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("malformed config: ") + ex.what());
  }
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path) { return config_from_json(read_file(path, "config file")); }

std::string config_to_json(const ScenarioConfig& c) {
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["scenario"] = to_string(c.scenario);
  j["source"] = {
      {"spectral",
       {{"center_wavelength_nm", c.spectral.center_wavelength_nm},
        {"fwhm_nm", c.spectral.fwhm_nm},
        {"coherence_time_ps", c.spectral.coherence_time_ps}}},
      {"noise_profile", c.noise_profile.empty() ? json(nullptr) : json(c.noise_profile)},
      {"noise",
       {{"amplitude_imbalance", c.noise.amplitude_imbalance},
        {"dephasing", c.noise.dephasing},
        {"white_noise", c.noise.white_noise},
        {"mode_overlap", c.noise.mode_overlap},
        {"compensation_error_deg", c.noise.compensation_error / kDeg}}},
  };
  json knob{{"mode", source::to_string(c.knob.mode)},
            {"delta_lambda_nm", c.knob.delta_lambda_nm},
            {"delay_ps", c.knob.delay_ps},
            {"temperature_slope_nm_per_c", c.knob.tuning.slope_nm_per_c},
            {"temperature_reference_c", c.knob.tuning.reference_c},
            {"temperature_range_c", {c.knob.tuning.min_c, c.knob.tuning.max_c}}};
  knob["crystal_temperature_c"] = c.knob.crystal_temperature_c ? json(*c.knob.crystal_temperature_c) : json(nullptr);
  j["knob"] = knob;
  j["pairs_per_setting"] = c.pairs_per_setting;
  j["mc_resamples"] = c.mc_resamples;
  j["seed"] = c.seed;
  j["exact"] = c.exact;
  j["bench_preset"] = c.bench_preset;
  j["output_dir"] = c.output_dir;
  j["emit_plots"] = c.emit_plots;
  j["scan"] = {{"start_deg", c.scan.start_deg}, {"stop_deg", c.scan.stop_deg}, {"step_deg", c.scan.step_deg}};
  j["sweep"] = {{"gamma", c.sweep.gamma}, {"delta_lambda_nm", c.sweep.delta_lambda_nm}, {"delay_ps", c.sweep.delay_ps}};
  j["thresholds"] = {{"duality_min_concurrence", c.thresholds.duality_min_concurrence},
                     {"distinguishability_max_overlap", c.thresholds.distinguishability_max_overlap},
                     {"breakdown_max_path_concurrence", c.thresholds.breakdown_max_path_concurrence},
                     {"breakdown_max_visibility", c.thresholds.breakdown_max_visibility}};
  j["detection"] = {{"efficiency", c.detection.efficiency}, {"background", c.detection.background}};
  j["ingest"] = json::array();
  for (const auto& in : c.ingest) j["ingest"].push_back({{"path", in.path}, {"labeling", core::to_string(in.labeling)}});
  return j.dump(2) + "\n";
}

}  // namespace dualbench::scenarios
