#pragma once

#include "proofcheck.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace mahlerlab::report {

using ordered_json = nlohmann::ordered_json;

enum class Format { JsonLines, Csv };

inline Format parse_format(const std::string& s) {
  if (s == "json-lines" || s == "jsonl") return Format::JsonLines;
  if (s == "csv") return Format::Csv;
  throw Error(ErrorCode::InvalidArgument, "unknown format '" + s + "' (expected json-lines or csv)");
}

/// Shortest decimal that round-trips, so identical doubles print identically.
inline std::string number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline ordered_json to_json(const proofcheck::VerificationReport& r) {
  ordered_json j;
  j["check_id"] = r.check_id;
  j["kind"] = proofcheck::to_string(r.kind);
  j["body"] = r.body;
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["margin"] = r.margin;
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  j["error_budget"] = r.error_budget;
  j["seed"] = r.seed;
  if (r.samples > 0) j["samples"] = r.samples;
  if (!r.extra.empty()) {
    ordered_json e = ordered_json::object();
    for (const auto& [k, v] : r.extra) e[k] = v;
    j["extra"] = e;
  }
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline void write_reports(std::ostream& os, const std::vector<proofcheck::VerificationReport>& reps, Format f) {
  if (f == Format::JsonLines) {
    for (const auto& r : reps) os << to_json(r).dump() << '\n';
    return;
  }
  os << "check_id,body,lhs,rhs,margin,pass\n";
  for (const auto& r : reps)
    os << csv_field(r.check_id) << ',' << csv_field(r.body) << ',' << number(r.lhs) << ',' << number(r.rhs) << ','
       << number(r.margin) << ',' << (r.pass ? "true" : "false") << '\n';
}

inline std::string summary_line(const proofcheck::Summary& s) {
  return "checks run " + std::to_string(s.run) + " / passed " + std::to_string(s.passed) + " / sampled-passed " +
         std::to_string(s.sampled_passed) + " / findings " + std::to_string(s.findings) + " / failed " +
         std::to_string(s.failed) + " (hard " + std::to_string(s.hard_failures) + ")";
}

/// One computed functional: value, error estimate and wall time.
struct Record {
  std::string functional;
  std::string body;
  double value = 0.0;
  double error = 0.0;
  double wall_time = 0.0;
  std::string route;
  bool converged = true;
  ordered_json extra = ordered_json::object();
};

inline ordered_json to_json(const Record& r) {
  ordered_json j;
  j["functional"] = r.functional;
  j["body"] = r.body;
  j["value"] = r.value;
  j["error"] = r.error;
  j["wall_time_s"] = r.wall_time;
  j["route"] = r.route;
  j["converged"] = r.converged;
  if (!r.extra.empty()) j["extra"] = r.extra;
  return j;
}

inline void write_records(std::ostream& os, const std::vector<Record>& recs, Format f) {
  if (f == Format::JsonLines) {
    for (const auto& r : recs) os << to_json(r).dump() << '\n';
    return;
  }
  os << "functional,body,value,error,wall_time_s,converged\n";
  for (const auto& r : recs)
    os << csv_field(r.functional) << ',' << csv_field(r.body) << ',' << number(r.value) << ',' << number(r.error) << ','
       << number(r.wall_time) << ',' << (r.converged ? "true" : "false") << '\n';
}

inline void write_catalog(std::ostream& os, Format f) {
  const auto entries = catalog::listing();
  if (f == Format::JsonLines) {
    for (const auto& e : entries) {
      ordered_json j;
      j["name"] = e.name;
      j["dims"] = e.dims;
      j["params"] = e.params;
      j["description"] = e.description;
      os << j.dump() << '\n';
    }
    return;
  }
  os << "name,dims,params,description\n";
  for (const auto& e : entries)
    os << csv_field(e.name) << ',' << csv_field(e.dims) << ',' << csv_field(e.params) << ',' << csv_field(e.description) << '\n';
}

}  // namespace mahlerlab::report
