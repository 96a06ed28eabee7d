#include "fermitele/report.hpp"

#include <cmath>
#include <cstdio>

namespace fermitele {

namespace {

Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json assertion_json(const AssertionOutcome& a) {
  Json j;
  j["line"] = a.line;
  j["kind"] = a.kind;
  j["branch"] = a.branch;
  j["expected"] = number_or_null(a.expected);
  j["actual"] = number_or_null(a.actual);
  j["tol"] = number_or_null(a.tol);
  j["pass"] = a.pass;
  j["diagnostic"] = a.diagnostic;
  return j;
}

std::string scalar_text(const Json& v) {
  if (v.is_null()) return "null";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) {
    double x = v.get<double>();
    if (!std::isfinite(x)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  }
  return v.dump();
}

void emit(const Json& v, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  if (v.is_object()) {
    if (v.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (!first) out += ",\n";
      first = false;
      out += pad + Json(it.key()).dump() + ": ";
      emit(it.value(), depth + 1, out);
    }
    out += "\n" + close + "}";
  } else if (v.is_array()) {
    if (v.empty()) {
      out += "[]";
      return;
    }
    out += "[\n";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ",\n";
      out += pad;
      emit(v[i], depth + 1, out);
    }
    out += "\n" + close + "]";
  } else {
    out += scalar_text(v);
  }
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

void flatten(const Json& v, const std::string& path, std::string& out) {
  if (v.is_object()) {
    if (v.empty()) out += csv_field(path) + ",{}\n";
    for (auto it = v.begin(); it != v.end(); ++it) flatten(it.value(), path.empty() ? it.key() : path + "/" + it.key(), out);
  } else if (v.is_array()) {
    if (v.empty()) out += csv_field(path) + ",[]\n";
    for (std::size_t i = 0; i < v.size(); ++i) flatten(v[i], path + "/" + std::to_string(i), out);
  } else {
    out += csv_field(path) + "," + csv_field(v.is_string() ? v.get<std::string>() : scalar_text(v)) + "\n";
  }
}

}  // namespace

Json report_json(const RunReport& r) {
  Json j;
  j["scenario"] = r.scenario;
  j["seed"] = r.seed;
  Json stages = Json::array();
  for (const auto& s : r.statements) {
    Json e;
    e["line"] = s.line;
    e["statement"] = s.text;
    e["branch"] = s.branch;
    e["ok"] = s.ok;
    e["diagnostic"] = s.diagnostic;
    stages.push_back(std::move(e));
  }
  j["stages"] = std::move(stages);
  Json branches = Json::array();
  for (const auto& b : r.branches) {
    Json e;
    e["path"] = b.path;
    e["label"] = b.label;
    e["probability"] = number_or_null(b.probability);
    e["cumulative"] = number_or_null(b.cumulative);
    branches.push_back(std::move(e));
  }
  j["branches"] = std::move(branches);
  Json assertions = Json::array();
  for (const auto& a : r.assertions) assertions.push_back(assertion_json(a));
  j["assertions"] = std::move(assertions);
  j["success_probability"] = r.success_probability ? number_or_null(*r.success_probability) : Json(nullptr);
  j["violations"] = r.violations;
  j["timing_ms"] = r.timing_ms ? Json(*r.timing_ms) : Json(nullptr);
  return j;
}

Json report_json(const ProtocolReport& r, std::uint64_t seed, const std::vector<AssertionOutcome>& checks,
                 std::optional<double> timing_ms) {
  Json j;
  j["scenario"] = r.name;
  j["seed"] = seed;
  Json stages = Json::array();
  for (const auto& s : r.stages) {
    Json e;
    e["label"] = s.label;
    e["particle_entropy"] = number_or_null(s.particle_entropy);
    e["geometric"] = number_or_null(s.geometric);
    e["geometric_converged"] = s.geometric_converged;
    Json modes = Json::object();
    for (const auto& [name, value] : s.mode_entropies) modes[name] = number_or_null(value);
    e["mode_entropies"] = std::move(modes);
    stages.push_back(std::move(e));
  }
  j["stages"] = std::move(stages);
  Json branches = Json::array();
  for (const auto& b : r.branches) {
    Json e;
    e["label"] = b.label;
    e["probability"] = number_or_null(b.probability);
    e["correction"] = b.correction;
    e["fidelity"] = number_or_null(b.fidelity);
    e["diagnostic"] = b.diagnostic;
    branches.push_back(std::move(e));
  }
  j["branches"] = std::move(branches);
  Json assertions = Json::array();
  int violations = 0;
  for (const auto& a : checks) {
    assertions.push_back(assertion_json(a));
    if (!a.pass) ++violations;
  }
  j["assertions"] = std::move(assertions);
  j["success_probability"] = number_or_null(r.success_probability);
  j["violations"] = violations;
  j["timing_ms"] = timing_ms ? Json(*timing_ms) : Json(nullptr);
  return j;
}

std::string dump_json(const Json& value) {
  std::string out;
  emit(value, 0, out);
  out += "\n";
  return out;
}

std::string dump_csv(const Json& value) {
  std::string out = "path,value\n";
  flatten(value, "", out);
  return out;
}

}  // namespace fermitele
