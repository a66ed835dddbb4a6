#include "foldseq/report.hpp"

#include <fstream>
#include <sstream>

#include "foldseq/errors.hpp"

namespace foldseq {

std::string version() { return "0.1.0"; }

bool Report::passed() const {
  for (const Assertion& a : assertions) {
    if (!a.pass) return false;
  }
  return true;
}

void Report::add(std::string name, std::string anchor, bool pass, Json details) {
  assertions.push_back(Assertion{std::move(name), std::move(anchor), pass, std::move(details)});
}

Json Report::to_json() const {
  Json j;
  j["experiment"] = experiment;
  j["params"] = params;
  j["rows"] = Json::array();
  for (const Json& r : rows) j["rows"].push_back(r);
  j["assertions"] = Json::array();
  for (const Assertion& a : assertions) {
    j["assertions"].push_back(Json{{"name", a.name}, {"anchor", a.anchor}, {"pass", a.pass}, {"details", a.details}});
  }
  j["passed"] = passed();
  j["versions"] = Json{{"foldseq", version()}};
  if (!timestamp.empty()) j["timestamp"] = timestamp;
  return j;
}

std::string Report::json_text(bool with_timestamp) const {
  Json j = to_json();
  if (!with_timestamp) j.erase("timestamp");
  return j.dump(2) + "\n";
}

namespace {

std::string csv_cell(const Json& v) {
  std::string s;
  if (v.is_string()) {
    s = v.get<std::string>();
  } else if (v.is_null()) {
    return "";
  } else {
    s = v.dump();
  }
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

}  // namespace

std::string Report::csv() const {
  if (rows.empty()) return "";
  std::vector<std::string> keys;
  for (const auto& [k, v] : rows.front().items()) keys.push_back(k);
  std::ostringstream out;
  for (std::size_t k = 0; k < keys.size(); ++k) out << (k ? "," : "") << csv_cell(keys[k]);
  out << '\n';
  for (const Json& r : rows) {
    for (std::size_t k = 0; k < keys.size(); ++k) {
      out << (k ? "," : "");
      if (r.contains(keys[k])) out << csv_cell(r.at(keys[k]));
    }
    out << '\n';
  }
  return out.str();
}

Report Report::from_json(const Json& j) {
  if (!j.is_object()) throw FormatError("report is not a JSON object");
  for (const char* key : {"experiment", "params", "rows", "assertions"}) {
    if (!j.contains(key)) throw FormatError(std::string("report lacks field '") + key + "'");
  }
  if (!j["experiment"].is_string() || !j["rows"].is_array() || !j["assertions"].is_array() || !j["params"].is_object()) {
    throw FormatError("report fields have the wrong types");
  }
  Report r;
  r.experiment = j["experiment"].get<std::string>();
  r.params = j["params"];
  for (const Json& row : j["rows"]) r.rows.push_back(row);
  for (const Json& a : j["assertions"]) {
    if (!a.is_object() || !a.contains("name") || !a.contains("pass")) throw FormatError("malformed assertion");
    r.assertions.push_back(Assertion{a["name"].get<std::string>(), a.value("anchor", ""), a["pass"].get<bool>(),
                                     a.value("details", Json::object())});
  }
  if (j.contains("timestamp")) r.timestamp = j["timestamp"].get<std::string>();
  return r;
}

namespace {

void diff_into(const Json& a, const Json& b, const std::string& path, std::vector<std::string>& out) {
  if (a.type() != b.type()) {
    out.push_back(path.empty() ? "/" : path);
    return;
  }
  if (a.is_object()) {
    for (const auto& [k, v] : a.items()) {
      if (path.empty() && (k == "timestamp" || k == "versions")) continue;
      if (!b.contains(k)) {
        out.push_back(path + "/" + k);
      } else {
        diff_into(v, b.at(k), path + "/" + k, out);
      }
    }
    for (const auto& [k, v] : b.items()) {
      if (path.empty() && (k == "timestamp" || k == "versions")) continue;
      if (!a.contains(k)) out.push_back(path + "/" + k);
    }
  } else if (a.is_array()) {
    if (a.size() != b.size()) out.push_back(path + " (length)");
    for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) diff_into(a[k], b[k], path + "/" + std::to_string(k), out);
  } else if (a != b) {
    out.push_back(path);
  }
}

Json read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
  Report::from_json(j);
  return j;
}

}  // namespace

bool diff_reports(const Json& a, const Json& b, std::vector<std::string>* differences) {
  std::vector<std::string> out;
  diff_into(a, b, "", out);
  if (differences) *differences = out;
  return out.empty();
}

bool diff_golden(const std::string& report_path, const std::string& golden_path, std::vector<std::string>* differences) {
  return diff_reports(read_report(report_path), read_report(golden_path), differences);
}

}  // namespace foldseq
