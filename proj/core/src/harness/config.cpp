#include "qmeas/harness.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qmeas::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

std::uint64_t to_unsigned(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

}  // namespace

ScenarioConfig default_config(const std::string& scenario) {
  ScenarioConfig c;
  c.scenario = scenario;
  if (scenario == "werner-constant") {
    c.n_points = 512;
    c.length = 40.0;
  } else if (scenario == "ozawa-sharp") {
    c.n_points = 64;
    c.probe.shape = "uniform";
    c.probe.width = 1.5;
  } else if (scenario == "way-momentum") {
    c.n_points = 128;
  } else if (scenario == "repeatability-ladder") {
    // The fixed-output unsharp instrument carries one Kraus operator per (reading, cell) pair.
    c.n_points = 64;
  } else if (scenario == "sequential-qp" || scenario == "error-bars" || scenario == "noise-ur") {
    // L = sqrt(2 pi hbar n) makes the position and momentum cells equal, so both
    // marginal kernels are resolved over the whole probe family.
    c.length = 40.0;
  }
  if (scenario == "error-bars") c.epsilons = {0.1, 0.1};
  if (scenario == "wigner-spin") c.epsilons = {1.0, 0.5, 0.1, 0.01};
  if (scenario == "repeatability-ladder") c.epsilons = {0.05};
  return c;
}

void apply_setting(ScenarioConfig& cfg, const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in);
  const std::string value = trim(value_in);
  if (key == "scenario") {
    cfg.scenario = value;
  } else if (key == "grid.n_points") {
    cfg.n_points = static_cast<std::size_t>(to_unsigned(key, value));
  } else if (key == "grid.length") {
    cfg.length = to_double(key, value);
  } else if (key == "hbar") {
    cfg.hbar = to_double(key, value);
  } else if (key == "coupling.lambda") {
    cfg.lambda = to_double(key, value);
  } else if (key == "probe.shape") {
    cfg.probe.shape = value;
  } else if (key == "probe.width") {
    cfg.probe.width = to_double(key, value);
  } else if (key == "probe.separation") {
    cfg.probe.separation = to_double(key, value);
  } else if (key == "epsilons") {
    cfg.epsilons.clear();
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!trim(item).empty()) cfg.epsilons.push_back(to_double(key, trim(item)));
  } else if (key == "seed" || key == "seeds") {
    cfg.seed = to_unsigned(key, value);
  } else if (key == "output_dir") {
    cfg.output_dir = value;
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

void apply_config_text(ScenarioConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected key=value");
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
}

void apply_config_file(ScenarioConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_config_text(cfg, ss.str());
}

void validate(const ScenarioConfig& cfg) {
  if (!is_registered(cfg.scenario)) throw ConfigError("unknown scenario '" + cfg.scenario + "'");
  if (cfg.n_points < 16 || cfg.n_points > 4096) throw ConfigError("grid.n_points must lie in [16, 4096]");
  if (cfg.n_points % 2 != 0) throw ConfigError("grid.n_points must be even");
  if (!(cfg.length > 0.0)) throw ConfigError("grid.length must be positive");
  if (!(cfg.hbar > 0.0)) throw ConfigError("hbar must be positive");
  if (!(cfg.lambda > 0.0)) throw ConfigError("coupling.lambda must be positive");
  if (!(cfg.probe.width > 0.0)) throw ConfigError("probe.width must be positive");
  if (cfg.probe.shape != "gaussian" && cfg.probe.shape != "uniform" && cfg.probe.shape != "two-peak")
    throw ConfigError("probe.shape must be gaussian, uniform or two-peak");
  if (cfg.probe.shape == "two-peak" && !(cfg.probe.separation > 0.0)) throw ConfigError("probe.separation must be positive");
  for (double e : cfg.epsilons)
    if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("epsilons must lie in [0, 1]");
}

}  // namespace qmeas::harness
