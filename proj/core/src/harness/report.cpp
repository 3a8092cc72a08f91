#include "qmeas/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

namespace qmeas::harness {

using ordered_json = nlohmann::ordered_json;

bool ScenarioResult::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.pass.value_or(true); });
}

Format parse_format(const std::string& name) {
  if (name == "json") return Format::Json;
  if (name == "csv") return Format::Csv;
  throw ConfigError("unknown report format '" + name + "' (json or csv)");
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

double parse_number(const std::string& s) {
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  if (s == "nan") return NAN;
  return std::stod(s);
}

ordered_json number_json(double v) {
  if (!std::isfinite(v)) return format_number(v);
  return std::stod(format_number(v));
}

double json_number(const ordered_json& j) { return j.is_string() ? parse_number(j.get<std::string>()) : j.get<double>(); }

ordered_json row_json(const ReportRow& r) {
  ordered_json j;
  j["scenario"] = r.scenario;
  j["params"] = r.params;
  j["metric"] = r.metric;
  j["value"] = number_json(r.value);
  j["bound"] = r.bound ? number_json(*r.bound) : ordered_json(nullptr);
  j["margin"] = r.margin ? number_json(*r.margin) : ordered_json(nullptr);
  j["pass"] = r.pass ? ordered_json(*r.pass) : ordered_json(nullptr);
  j["note"] = r.note;
  return j;
}

ReportRow row_from_json(const ordered_json& j) {
  ReportRow r;
  r.scenario = j.at("scenario").get<std::string>();
  r.params = j.at("params").get<std::string>();
  r.metric = j.at("metric").get<std::string>();
  r.value = json_number(j.at("value"));
  if (!j.at("bound").is_null()) r.bound = json_number(j.at("bound"));
  if (!j.at("margin").is_null()) r.margin = json_number(j.at("margin"));
  if (!j.at("pass").is_null()) r.pass = j.at("pass").get<bool>();
  if (j.contains("note")) r.note = j.at("note").get<std::string>();
  return r;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

constexpr const char* kCsvHeader = "scenario,params,metric,value,bound,margin,pass";

}  // namespace

void emit_report(const std::vector<ReportRow>& rows, Format format, std::ostream& os, const std::string& timestamp) {
  if (format == Format::Csv) {
    os << kCsvHeader << '\n';
    for (const ReportRow& r : rows) {
      os << csv_field(r.scenario) << ',' << csv_field(r.params) << ',' << csv_field(r.metric) << ',' << format_number(r.value) << ','
         << (r.bound ? format_number(*r.bound) : "") << ',' << (r.margin ? format_number(*r.margin) : "") << ','
         << (r.pass ? (*r.pass ? "true" : "false") : "") << '\n';
    }
    return;
  }
  ordered_json doc;
  doc["timestamp"] = timestamp;
  doc["rows"] = ordered_json::array();
  for (const ReportRow& r : rows) doc["rows"].push_back(row_json(r));
  os << doc.dump(2) << '\n';
}

std::vector<ReportRow> parse_json_report(const std::string& text) {
  const ordered_json doc = ordered_json::parse(text);
  std::vector<ReportRow> rows;
  for (const auto& j : doc.at("rows")) rows.push_back(row_from_json(j));
  return rows;
}

std::vector<ReportRow> parse_csv_report(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::invalid_argument("parse_csv_report: missing header");
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) throw std::invalid_argument("parse_csv_report: expected 7 fields");
    ReportRow r;
    r.scenario = f[0];
    r.params = f[1];
    r.metric = f[2];
    r.value = parse_number(f[3]);
    if (!f[4].empty()) r.bound = parse_number(f[4]);
    if (!f[5].empty()) r.margin = parse_number(f[5]);
    if (!f[6].empty()) r.pass = f[6] == "true";
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ReportRow> collect_reports(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::exists(root))
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root))
      if (entry.is_regular_file() && entry.path().filename() == "report.json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<ReportRow> rows;
  for (const auto& f : files) {
    std::ifstream in(f);
    std::ostringstream ss;
    ss << in.rdbuf();
    auto part = parse_json_report(ss.str());
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

std::filesystem::path write_outputs(const ScenarioConfig& cfg, const ScenarioResult& result, const std::string& timestamp) {
  const std::filesystem::path dir = std::filesystem::path(cfg.output_dir) / cfg.scenario;
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "report.json");
    emit_report(result.rows, Format::Json, out, timestamp);
  }
  {
    std::ofstream out(dir / "report.csv");
    emit_report(result.rows, Format::Csv, out);
  }
  std::ofstream manifest(dir / "manifest.txt");
  manifest << "# file columns\n";
  for (const DataTable& t : result.data) {
    const std::string file = t.name + ".dat";
    std::ofstream out(dir / file);
    out << '#';
    for (const auto& c : t.columns) out << ' ' << c;
    out << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << format_number(row[i]);
      out << '\n';
    }
    manifest << file;
    for (const auto& c : t.columns) manifest << ' ' << c;
    manifest << '\n';
  }
  return dir;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace qmeas::harness
