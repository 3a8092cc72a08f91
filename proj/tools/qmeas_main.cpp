#include "qmeas/harness.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>

namespace h = qmeas::harness;

namespace {

constexpr int kAllPass = 0;
constexpr int kAnyFail = 1;
constexpr int kConfigError = 2;

std::string output_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("QMEAS_OUTPUT_ROOT"); env && *env) return env;
  return "qmeas-out";
}

void print_rows(const std::vector<h::ReportRow>& rows) {
  for (const auto& r : rows) {
    std::cout << (r.pass ? (*r.pass ? "PASS " : "FAIL ") : "     ") << std::left << std::setw(48) << r.metric << ' '
              << h::format_number(r.value);
    if (r.bound) std::cout << "  bound " << h::format_number(*r.bound) << "  margin " << h::format_number(*r.margin);
    if (!r.params.empty()) std::cout << "  [" << r.params << ']';
    if (!r.note.empty()) std::cout << "  " << r.note;
    std::cout << '\n';
  }
}

// Remaining "--key=value" or "--key value" tokens become configuration settings.
void apply_overrides(h::ScenarioConfig& cfg, std::vector<std::string> extras) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    std::string tok = extras[i];
    if (tok.rfind("--", 0) != 0) throw h::ConfigError("unexpected argument '" + tok + "'");
    tok = tok.substr(2);
    if (const auto eq = tok.find('='); eq != std::string::npos) {
      h::apply_setting(cfg, tok.substr(0, eq), tok.substr(eq + 1));
    } else {
      if (i + 1 >= extras.size()) throw h::ConfigError("missing value for --" + tok);
      h::apply_setting(cfg, tok, extras[++i]);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qmeas: quantum measurement scenarios"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run one scenario");
  std::string scenario, config_file, out_dir;
  bool quiet = false;
  run->add_option("scenario", scenario, "scenario name (see list-scenarios)")->required();
  run->add_option("--config", config_file, "key=value configuration file");
  run->add_option("--output-root", out_dir, "directory for reports (default $QMEAS_OUTPUT_ROOT or ./qmeas-out)");
  run->add_flag("--quiet", quiet, "do not print the rows");
  run->allow_extras();

  auto* list = app.add_subcommand("list-scenarios", "list registered scenarios");

  auto* report = app.add_subcommand("report", "combine the reports written by earlier runs");
  std::string format = "json", report_out, report_root;
  report->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  report->add_option("--out", report_out, "output file (default stdout)");
  report->add_option("--root", report_root, "directory holding the run outputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kAllPass : kConfigError;
  }

  try {
    if (list->parsed()) {
      for (const auto& s : h::list_scenarios()) std::cout << std::left << std::setw(30) << s.name << s.description << '\n';
      return kAllPass;
    }
    if (run->parsed()) {
      h::ScenarioConfig cfg = h::default_config(scenario);
      if (!config_file.empty()) h::apply_config_file(cfg, config_file);
      apply_overrides(cfg, run->remaining());
      if (cfg.output_dir.empty()) cfg.output_dir = output_root(out_dir);
      h::validate(cfg);
      const h::ScenarioResult result = h::run_scenario(cfg);
      const auto dir = h::write_outputs(cfg, result, h::utc_timestamp());
      if (!quiet) print_rows(result.rows);
      std::cout << (result.all_pass() ? "all checks passed" : "some checks failed") << "; report in " << dir.string() << '\n';
      return result.all_pass() ? kAllPass : kAnyFail;
    }
    if (report->parsed()) {
      const auto rows = h::collect_reports(output_root(report_root));
      const h::Format fmt = h::parse_format(format);
      if (report_out.empty()) {
        h::emit_report(rows, fmt, std::cout, h::utc_timestamp());
      } else {
        std::ofstream out(report_out);
        if (!out) throw h::ConfigError("cannot write " + report_out);
        h::emit_report(rows, fmt, out, h::utc_timestamp());
      }
      const bool ok = std::all_of(rows.begin(), rows.end(), [](const h::ReportRow& r) { return r.pass.value_or(true); });
      return ok ? kAllPass : kAnyFail;
    }
  } catch (const h::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kConfigError;
  }
  return kAllPass;
}
