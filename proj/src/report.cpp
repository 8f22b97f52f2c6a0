#include "varcvx/report.hpp"

#include <cmath>
#include <fstream>

namespace varcvx::report {

nlohmann::json json_double(double v) {
  if (std::isnan(v)) return "nan";
  if (!std::isfinite(v)) return v > 0.0 ? "inf" : "-inf";
  return v;
}

namespace {

nlohmann::json json_vector(const std::vector<double>& xs) {
  nlohmann::json a = nlohmann::json::array();
  for (double v : xs) a.push_back(json_double(v));
  return a;
}

}  // namespace

nlohmann::json verdict_to_json(const Verdict& v) {
  nlohmann::json j;
  j["status"] = to_string(v.status);
  j["theorem_tag"] = v.theorem_tag;
  j["note"] = v.note;
  j["samples_used"] = v.samples_used;
  nlohmann::json tol = nlohmann::json::object();
  for (const auto& [k, val] : v.tolerances) tol[k] = json_double(val);
  j["tolerances"] = std::move(tol);
  nlohmann::json met = nlohmann::json::object();
  for (const auto& [k, val] : v.metrics) met[k] = json_double(val);
  j["metrics"] = std::move(met);
  nlohmann::json wit = nlohmann::json::array();
  for (const auto& [name, values] : v.witness.items)
    wit.push_back({{"name", name}, {"values", json_vector(values)}});
  j["witness"] = std::move(wit);
  nlohmann::json det = nlohmann::json::array();
  for (const auto& [label, sub] : v.details)
    det.push_back({{"label", label}, {"verdict", verdict_to_json(sub)}});
  j["details"] = std::move(det);
  return j;
}

nlohmann::json report_to_json(const RunReport& r) {
  nlohmann::json j;
  j["command"] = r.command;
  j["config"] = r.config;
  j["versions"] = {{"schema", 1}, {"varcvx", "0.1.0"}};
  nlohmann::json vs = nlohmann::json::array();
  for (const auto& [label, v] : r.verdicts)
    vs.push_back({{"label", label}, {"verdict", verdict_to_json(v)}});
  j["verdicts"] = std::move(vs);
  if (!r.extra.is_null())
    for (auto it = r.extra.begin(); it != r.extra.end(); ++it) j[it.key()] = it.value();
  j["wall_time_seconds"] = r.wall_time_seconds;
  return j;
}

std::string report_to_string(const RunReport& r) { return report_to_json(r).dump(2) + "\n"; }

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise_error("IoError", "cannot open " + path + " for writing");
  out << content;
  if (!out) raise_error("IoError", "short write to " + path);
}

std::string csv_from_rows(const std::vector<std::string>& header,
                          const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      // shortest round-trip form, same writer the JSON layer uses
      out += nlohmann::json(row[i]).dump();
    }
    out += '\n';
  }
  return out;
}

}  // namespace varcvx::report
