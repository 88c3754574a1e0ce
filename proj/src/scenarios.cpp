#include "dualbench/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "dualbench/bundle_io.hpp"
#include "dualbench/optics.hpp"
#include "dualbench/source.hpp"

namespace dualbench::scenarios {

namespace {

using core::Labeling;
using tomography::Derived;

constexpr std::uint64_t kScanStream = 100;
constexpr std::uint64_t kErrorStream = 200;
constexpr std::uint64_t kSweepStream = 1000;

optics::Bench physical_bench(optics::Bench bench, const source::NoiseModel& noise, Labeling labeling) {
  if (labeling != Labeling::by_polarization || noise.compensation_error == 0.0) return bench;
  for (auto& e : bench.elements)
    if (e.kind == optics::ElementKind::PHASE && e.id == "COMP") e.phase += noise.compensation_error;
  return bench;
}

struct Stage {
  bool scans = true;
  bool error_bars = true;
};

void add_model(LabelingResult& r, const core::Ensemble& state) {
  const auto reduced = core::reduce_to_qubits(state, r.labeling, true);
  r.model_fidelity = metrics::fidelity(reduced, metrics::bell_target());
  r.model_concurrence = metrics::concurrence(reduced);
}

void reconstruct(LabelingResult& r, const ScenarioConfig& config, bool error_bars) {
  const auto options = mle_options_for(r.labeling);
  r.linear = tomography::linear_inversion(r.observations, r.labeling);
  r.mle = tomography::mle_reconstruct(r.observations, options, r.labeling);
  r.report.fidelity = metrics::fidelity(r.mle.rho, metrics::bell_target());
  r.report.concurrence = metrics::concurrence(r.mle.rho);
  if (error_bars && !config.exact && config.mc_resamples > 0) {
    const Derived wanted[] = {Derived::fidelity, Derived::concurrence};
    auto bars = tomography::mc_error_bars(r.observations, config.mc_resamples,
                                          detection::substream_seed(r.seed, kErrorStream), wanted, options);
    r.report.fidelity_error = bars.at(Derived::fidelity);
    r.report.concurrence_error = bars.at(Derived::concurrence);
  }
}

LabelingResult run_labeling(const core::Ensemble& state, const ScenarioConfig& config, Labeling labeling,
                            std::uint64_t master_seed, Stage stage) {
  LabelingResult r;
  r.labeling = labeling;
  r.seed = labeling_seed(master_seed, labeling);
  const auto nominal = optics::load_preset(preset_for(config.bench_preset, labeling));
  const auto physical = physical_bench(nominal, config.noise, labeling);

  std::vector<detection::CountRecord> records;
  for (const auto& setting : tomography::projector_catalog()) {
    const auto angles = detection::realize(nominal, setting.projector);
    const double p = detection::coincidence_probability(state, physical, angles, config.detection);
    auto rec = detection::sample_counts(std::clamp(p, 0.0, 1.0), config.pairs_per_setting,
                                        detection::substream_seed(r.seed, static_cast<std::uint64_t>(setting.index)));
    rec.setting_index = setting.index;
    rec.label = setting.label;
    records.push_back(rec);
  }
  r.observations = tomography::observations(records, config.exact);
  reconstruct(r, config, stage.error_bars);

  if (stage.scans) {
    const auto grid = config.scan.grid();
    r.scan_z = detection::correlation_scan(state, nominal, physical, detection::ScanBasis::Z, grid,
                                           config.pairs_per_setting,
                                           detection::substream_seed(r.seed, kScanStream), config.detection);
    r.scan_x = detection::correlation_scan(state, nominal, physical, detection::ScanBasis::X, grid,
                                           config.pairs_per_setting,
                                           detection::substream_seed(r.seed, kScanStream + 1), config.detection);
    r.report.visibility_z = metrics::visibility(*r.scan_z, config.exact).visibility;
    r.report.visibility_x = metrics::visibility(*r.scan_x, config.exact).visibility;
  }
  add_model(r, state);
  r.report.validate();
  return r;
}

RunBundle start(const ScenarioConfig& config) {
  config.validate();
  RunBundle b;
  b.config = config;
  b.warnings = config.spectral.validate();
  return b;
}

void fail_if(RunBundle& b, bool violated, const std::string& message) {
  if (!violated) return;
  b.failures.push_back(message);
  b.status = Status::failed;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void run_both(RunBundle& b, const core::Ensemble& state, Stage stage) {
  b.results.push_back(run_labeling(state, b.config, Labeling::by_path, b.config.seed, stage));
  b.results.push_back(run_labeling(state, b.config, Labeling::by_polarization, b.config.seed, stage));
}

class Timer {
 public:
  Timer() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

}  // namespace

const LabelingResult* RunBundle::find(core::Labeling labeling) const {
  for (const auto& r : results)
    if (r.labeling == labeling) return &r;
  return nullptr;
}

std::string preset_for(const std::string& bench_preset, core::Labeling labeling) {
  return bench_preset + (labeling == Labeling::by_path ? "_polarization" : "_path");
}

std::uint64_t labeling_seed(std::uint64_t master, core::Labeling labeling) {
  return detection::substream_seed(master, labeling == Labeling::by_path ? 0 : 1);
}

tomography::MLEOptions mle_options_for(core::Labeling labeling) {
  tomography::MLEOptions o;
  o.normalization = labeling == Labeling::by_path ? tomography::Normalization::from_records
                                                  : tomography::Normalization::fitted;
  return o;
}

RunBundle run_duality(const ScenarioConfig& config) {
  const Timer timer;
  RunBundle b = start(config);
  b.gamma = source::overlap(config.spectral, config.knob);
  if (config.knob.mode != source::KnobMode::none && std::abs(std::abs(b.gamma) - 1.0) > 1e-12)
    throw ConfigError("duality needs indistinguishable photons (knob mode none or |gamma| = 1), got |gamma| = " +
                      fmt(std::abs(b.gamma)));
  const auto state = source::make_pair_with_overlap(b.gamma, config.noise);
  run_both(b, state, {});
  const double thr = config.thresholds.duality_min_concurrence;
  for (const auto& r : b.results)
    fail_if(b, r.report.concurrence < thr,
            std::string("concurrence ") + core::to_string(r.labeling) + " = " + fmt(r.report.concurrence) +
                " below threshold " + fmt(thr));
  b.elapsed_seconds = timer.seconds();
  return b;
}

RunBundle run_breakdown(const ScenarioConfig& config) {
  const Timer timer;
  RunBundle b = start(config);
  const auto wanted = config.scenario == ScenarioKind::breakdown_time ? source::KnobMode::arrival_time
                                                                      : source::KnobMode::frequency;
  if (config.knob.mode != wanted)
    throw ConfigError(std::string("scenario ") + to_string(config.scenario) + " needs knob mode " +
                      source::to_string(wanted));
  b.gamma = source::overlap(config.spectral, config.knob);
  if (!(std::abs(b.gamma) < config.thresholds.distinguishability_max_overlap))
    throw ConfigError("photons are not distinguishable enough: |gamma| = " + fmt(std::abs(b.gamma)) +
                      " is not below " + fmt(config.thresholds.distinguishability_max_overlap));
  const auto state = source::make_pair_with_overlap(b.gamma, config.noise);
  run_both(b, state, {});
  const auto& t = config.thresholds;
  const auto* pol = b.find(Labeling::by_path);
  const auto* path = b.find(Labeling::by_polarization);
  fail_if(b, pol->report.concurrence < t.duality_min_concurrence,
          "polarization concurrence " + fmt(pol->report.concurrence) + " below threshold " +
              fmt(t.duality_min_concurrence));
  fail_if(b, path->report.concurrence > t.breakdown_max_path_concurrence,
          "path concurrence " + fmt(path->report.concurrence) + " above " + fmt(t.breakdown_max_path_concurrence));
  fail_if(b, path->report.visibility_x > t.breakdown_max_visibility,
          "path X visibility " + fmt(path->report.visibility_x) + " above " + fmt(t.breakdown_max_visibility));
  b.elapsed_seconds = timer.seconds();
  return b;
}

RunBundle run_gamma_sweep(const ScenarioConfig& config) {
  const Timer timer;
  RunBundle b = start(config);
  std::vector<core::Complex> gammas;
  if (!config.sweep.gamma.empty()) {
    for (double g : config.sweep.gamma) gammas.emplace_back(g, 0.0);
  } else if (!config.sweep.delta_lambda_nm.empty()) {
    for (double dl : config.sweep.delta_lambda_nm) {
      source::DistinguishabilityKnob k;
      k.mode = source::KnobMode::frequency;
      k.delta_lambda_nm = dl;
      gammas.push_back(source::overlap(config.spectral, k));
    }
  } else if (!config.sweep.delay_ps.empty()) {
    for (double tau : config.sweep.delay_ps) {
      source::DistinguishabilityKnob k;
      k.mode = source::KnobMode::arrival_time;
      k.delay_ps = tau;
      gammas.push_back(source::overlap(config.spectral, k));
    }
  } else {
    for (int i = 0; i <= 10; ++i) gammas.emplace_back(i / 10.0, 0.0);
  }

  for (std::size_t i = 0; i < gammas.size(); ++i) {
    const auto seed = detection::substream_seed(config.seed, kSweepStream + i);
    const auto state = source::make_pair_with_overlap(gammas[i], config.noise);
    const Stage stage{true, false};
    const auto pol = run_labeling(state, config, Labeling::by_path, seed, stage);
    const auto path = run_labeling(state, config, Labeling::by_polarization, seed, stage);
    b.sweep.push_back(SweepRow{std::abs(gammas[i]), path.report.concurrence, pol.report.concurrence,
                               path.report.fidelity, pol.report.fidelity, path.report.visibility_x, seed});
  }

  auto rows = b.sweep;
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& c) { return a.gamma < c.gamma; });
  const double tol = config.exact ? 1e-6 : 0.05;
  for (std::size_t i = 1; i < rows.size(); ++i)
    fail_if(b, rows[i].c_path < rows[i - 1].c_path - tol,
            "path concurrence decreases between gamma " + fmt(rows[i - 1].gamma) + " and " + fmt(rows[i].gamma));
  if (!rows.empty()) {
    const auto [lo, hi] = std::minmax_element(rows.begin(), rows.end(),
                                              [](const SweepRow& a, const SweepRow& c) { return a.c_pol < c.c_pol; });
    fail_if(b, hi->c_pol - lo->c_pol > tol, "polarization concurrence varies across the sweep by " +
                                                fmt(hi->c_pol - lo->c_pol));
  }
  b.gamma = gammas.empty() ? core::Complex{} : gammas.back();
  b.elapsed_seconds = timer.seconds();
  return b;
}

RunBundle ingest(const ScenarioConfig& config) {
  const Timer timer;
  RunBundle b = start(config);
  b.gamma = {std::nan(""), 0.0};
  for (const auto& input : config.ingest) {
    if (b.find(input.labeling))
      throw ConfigError(std::string("two count files for labeling ") + core::to_string(input.labeling));
    LabelingResult r;
    r.labeling = input.labeling;
    r.seed = labeling_seed(config.seed, input.labeling);
    r.observations = load_counts_csv(input.path);
    tomography::check_coverage(r.observations);
    reconstruct(r, config, true);
    r.report.validate();
    b.results.push_back(std::move(r));
  }
  std::stable_sort(b.results.begin(), b.results.end(), [](const LabelingResult& a, const LabelingResult& c) {
    return a.labeling == Labeling::by_path && c.labeling != Labeling::by_path;
  });
  b.elapsed_seconds = timer.seconds();
  return b;
}

RunBundle run_scenario(const ScenarioConfig& config) {
  switch (config.scenario) {
    case ScenarioKind::duality: return run_duality(config);
    case ScenarioKind::breakdown_frequency:
    case ScenarioKind::breakdown_time: return run_breakdown(config);
    case ScenarioKind::gamma_sweep: return run_gamma_sweep(config);
    case ScenarioKind::ingest: return ingest(config);
  }
  throw ConfigError("unknown scenario");
}

}  // namespace dualbench::scenarios
