#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace foldseq {

using Json = nlohmann::ordered_json;

struct Assertion {
  std::string name;
  std::string anchor;   // the claim under test, by name
  bool pass = false;
  Json details = Json::object();
};

/// Experiment output: {experiment, params, rows, assertions, versions, timestamp}.
struct Report {
  std::string experiment;
  Json params = Json::object();
  std::vector<Json> rows;  // flat objects, one per index
  std::vector<Assertion> assertions;
  std::string timestamp;   // excluded from comparisons

  bool passed() const;
  void add(std::string name, std::string anchor, bool pass, Json details = Json::object());

  Json to_json() const;
  /// Pretty JSON with a trailing newline; `with_timestamp = false` drops the field.
  std::string json_text(bool with_timestamp = true) const;
  /// Header from the keys of the first row; arrays and objects are written as compact JSON.
  std::string csv() const;
  /// FormatError when the document lacks the report fields.
  static Report from_json(const Json& j);
};

/// Library version recorded in reports.
std::string version();

/// Field-by-field comparison ignoring "timestamp" and "versions"; differing paths go to `differences`.
bool diff_reports(const Json& a, const Json& b, std::vector<std::string>* differences = nullptr);
/// Reads both files; FormatError if either is not a report.
bool diff_golden(const std::string& report_path, const std::string& golden_path,
                 std::vector<std::string>* differences = nullptr);

}  // namespace foldseq
