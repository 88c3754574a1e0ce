#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include "dualbench/bundle_io.hpp"
#include "dualbench/errors.hpp"
#include "dualbench/scenarios.hpp"

namespace {

constexpr int kExitScenarioFailure = 2;
constexpr int kExitInputError = 3;
constexpr int kExitNumericalFailure = 4;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool exact = false;
  std::optional<std::int64_t> pairs;
  std::optional<std::string> out;
  bool emit_plots = false;
  std::optional<std::string> counts_path_labeling;
  std::optional<std::string> counts_polarization_labeling;
};

void add_common(CLI::App* cmd, Options& o, bool config_required) {
  auto* c = cmd->add_option("--config", o.config_path, "scenario config JSON");
  if (config_required) c->required();
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_flag("--exact", o.exact, "use expected counts instead of Poisson samples");
  cmd->add_option("--pairs", o.pairs, "pairs emitted per tomography setting");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_flag("--emit-plots", o.emit_plots, "write gnuplot scripts and curve data");
}

dualbench::scenarios::ScenarioConfig resolve(const std::string& scenario, const Options& o) {
  using namespace dualbench::scenarios;
  ScenarioConfig c;
  if (!o.config_path.empty()) c = load_config(o.config_path);
  c.scenario = scenario_from_string(scenario);
  if (o.seed) c.seed = *o.seed;
  if (o.exact) c.exact = true;
  if (o.pairs) c.pairs_per_setting = *o.pairs;
  if (o.out) c.output_dir = *o.out;
  if (o.emit_plots) c.emit_plots = true;
  if (o.counts_polarization_labeling)
    c.ingest.push_back({*o.counts_polarization_labeling, dualbench::core::Labeling::by_path});
  if (o.counts_path_labeling)
    c.ingest.push_back({*o.counts_path_labeling, dualbench::core::Labeling::by_polarization});
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-photon entanglement duality bench simulator"};
  app.require_subcommand(1);
  Options opts;
  const std::pair<const char*, const char*> scenarios[] = {
      {"duality", "tomography of both labelings of indistinguishable photons"},
      {"breakdown_frequency", "path entanglement lost by detuning the crystal temperature"},
      {"breakdown_time", "path entanglement lost by an arrival-time delay"},
      {"gamma_sweep", "concurrences over a grid of photon overlaps"},
  };
  for (const auto& [name, description] : scenarios) {
    auto* cmd = app.add_subcommand(name, description);
    add_common(cmd, opts, true);
  }
  auto* ing = app.add_subcommand("ingest", "reconstruct states from external count files");
  add_common(ing, opts, false);
  ing->add_option("--counts-by-path", opts.counts_polarization_labeling,
                  "count CSV of the polarization qubits (photons labeled by path)");
  ing->add_option("--counts-by-polarization", opts.counts_path_labeling,
                  "count CSV of the path qubits (photons labeled by polarization)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInputError;
  }

  const std::string scenario = app.get_subcommands().front()->get_name();
  try {
    const auto config = resolve(scenario, opts);
    const auto bundle = dualbench::scenarios::run_scenario(config);
    dualbench::scenarios::write_bundle(bundle, config.output_dir);
    for (const auto& w : bundle.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& r : bundle.results) {
      std::cout << dualbench::core::to_string(r.labeling) << ": F = " << r.report.fidelity
                << "  C = " << r.report.concurrence;
      if (r.report.concurrence_error) std::cout << " +- " << r.report.concurrence_error->std;
      std::cout << "\n";
    }
    for (const auto& s : bundle.sweep)
      std::cout << "gamma " << s.gamma << ": C_path = " << s.c_path << "  C_pol = " << s.c_pol << "\n";
    std::cout << "bundle written to " << config.output_dir << "\n";
    if (bundle.status == dualbench::scenarios::Status::failed) {
      for (const auto& f : bundle.failures) std::cerr << "assertion failed: " << f << "\n";
      return kExitScenarioFailure;
    }
    return 0;
  } catch (const dualbench::ConfigError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const dualbench::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumericalFailure;
  }
}
