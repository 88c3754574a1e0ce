#pragma once

#include <map>
#include <string>
#include <vector>

#include "dualbench/scenarios.hpp"
#include "dualbench/tomography.hpp"

namespace dualbench::scenarios {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kBundleSchemaVersion = 1;

/// Count CSV: a `# seed=... labeling=...` comment line, then the header
/// `setting_index,n_counts,pairs` and one row per setting. Values use %.17g so
/// fractional expected counts survive a round trip exactly.
std::string counts_csv(const LabelingResult& result, std::uint64_t seed);

/// Parses the count CSV format above. Comment lines (#) and blank lines are skipped.
/// Throws ConfigError for a missing header or malformed row.
std::vector<tomography::Observation> parse_counts_csv(const std::string& text, const std::string& origin = "<string>");
std::vector<tomography::Observation> load_counts_csv(const std::string& path);

/// Scan CSV with columns basis,theta_deg,expected_prob,counts,pairs,seed.
std::string scan_csv(const LabelingResult& result);

std::string rho_json(const LabelingResult& result, std::uint64_t seed);
std::string metrics_json(const RunBundle& bundle);
std::string sweep_csv(const RunBundle& bundle);

/// Every deterministic payload of the bundle keyed by file name, including the
/// `bundle.json` manifest (and plot data when `config.emit_plots`).
std::map<std::string, std::string> bundle_files(const RunBundle& bundle);

/// Human-readable log with versions and timing (not deterministic).
std::string run_log(const RunBundle& bundle);

/// Writes bundle_files() and run.log into `dir`, creating it if needed.
/// Throws ConfigError if the directory cannot be written.
void write_bundle(const RunBundle& bundle, const std::string& dir);

}  // namespace dualbench::scenarios
