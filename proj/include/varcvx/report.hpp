#pragma once

// JSON and CSV serialization of verdicts and run reports. Object keys are
// sorted and doubles use the shortest round-trip form, so a repeated run with
// the same seed is byte-identical; wall time sits in one top-level field the
// comparison can drop.

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "varcvx/core.hpp"

namespace varcvx::report {

// Non-finite doubles become the strings "inf" / "-inf" / "nan"; JSON has no
// spelling for them and null would erase the sign.
nlohmann::json json_double(double v);

nlohmann::json verdict_to_json(const Verdict& v);

struct RunReport {
  std::string command;
  nlohmann::json config;  // resolved spec echo
  std::vector<std::pair<std::string, Verdict>> verdicts;
  nlohmann::json extra;   // command-specific fields (kkt point, sigma, ...)
  double wall_time_seconds = 0.0;
};

nlohmann::json report_to_json(const RunReport& r);
std::string report_to_string(const RunReport& r);  // dump(2) + newline

// Errors: IoError.
void write_text_file(const std::string& path, const std::string& content);

// Fixed header, rows of shortest round-trip doubles.
std::string csv_from_rows(const std::vector<std::string>& header,
                          const std::vector<std::vector<double>>& rows);

}  // namespace varcvx::report
