#pragma once

// Scenario runner behind the qmeas command-line tool: flat key=value
// configuration, the registered scenarios, and JSON/CSV report emission.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmeas::harness {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProbeConfig {
  std::string shape = "gaussian";  // gaussian | uniform | two-peak
  double width = 1.0;
  double separation = 3.0;
};

struct ScenarioConfig {
  std::string scenario;
  std::size_t n_points = 256;
  double length = 20.0;
  double hbar = 1.0;
  double lambda = 1.0;
  ProbeConfig probe;
  std::vector<double> epsilons;
  std::uint64_t seed = 20240601;
  /// Empty: nothing is written.
  std::string output_dir;
};

/// Scenario defaults: n = 256, L = 20, hbar = 1 unless the scenario overrides.
ScenarioConfig default_config(const std::string& scenario);

/// Sets one dotted key (grid.n_points, grid.length, hbar, coupling.lambda, probe.shape,
/// probe.width, probe.separation, epsilons, seed, output_dir, scenario).
void apply_setting(ScenarioConfig& cfg, const std::string& key, const std::string& value);
/// key=value lines; '#' starts a comment; blank lines are skipped.
void apply_config_text(ScenarioConfig& cfg, const std::string& text);
void apply_config_file(ScenarioConfig& cfg, const std::filesystem::path& path);
/// Throws ConfigError on an unknown scenario or out-of-range values.
void validate(const ScenarioConfig& cfg);

struct ReportRow {
  std::string scenario;
  std::string params;
  std::string metric;
  double value = 0.0;
  std::optional<double> bound;
  /// Positive when the check passes by that much.
  std::optional<double> margin;
  std::optional<bool> pass;
  std::string note;
};

/// Two-column (or wider) numeric table written as a whitespace-separated .dat file.
struct DataTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ScenarioResult {
  std::vector<ReportRow> rows;
  std::vector<DataTable> data;

  bool all_pass() const;
};

struct ScenarioInfo {
  std::string name;
  std::string description;
};

/// Registered scenarios in a fixed order.
const std::vector<ScenarioInfo>& list_scenarios();
bool is_registered(const std::string& name);

/// Runs one scenario. Throws ConfigError for invalid configurations and
/// std::invalid_argument for probes the grid cannot represent.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

/// Writes report.json, report.csv, the data tables and a manifest under
/// cfg.output_dir / cfg.scenario. Returns the directory.
std::filesystem::path write_outputs(const ScenarioConfig& cfg, const ScenarioResult& result, const std::string& timestamp);

enum class Format { Json, Csv };
Format parse_format(const std::string& name);

/// 12 significant digits; "inf", "-inf", "nan" for non-finite values.
std::string format_number(double v);

void emit_report(const std::vector<ReportRow>& rows, Format format, std::ostream& os, const std::string& timestamp = "");
std::vector<ReportRow> parse_json_report(const std::string& text);
std::vector<ReportRow> parse_csv_report(const std::string& text);

/// Collects the rows of every report.json under `root`, in path order.
std::vector<ReportRow> collect_reports(const std::filesystem::path& root);

/// UTC, ISO 8601.
std::string utc_timestamp();

}  // namespace qmeas::harness
