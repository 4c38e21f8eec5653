#ifndef TVOA_REPORT_IO_HPP
#define TVOA_REPORT_IO_HPP

#include "tvoa/driver.hpp"

#include <json.hpp>

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace tvoa {

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kCsvHeader = "k,eps,J,it_P,it_Q,tv_eps,tv_lb,err,eoc";

namespace detail {

inline std::string format_double(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace detail

/// One row per outer iteration, eps in scientific notation, other reals with
/// six significant digits, empty err/eoc cells when unavailable.
inline std::string serialize_csv(const RunReport& report) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : report.records) {
    out += std::to_string(r.k);
    out += "," + detail::format_double("%.5e", r.eps);
    out += "," + detail::format_double("%.6g", r.objective);
    out += "," + std::to_string(r.it_master);
    out += "," + std::to_string(r.it_oracle);
    out += "," + detail::format_double("%.6g", r.tv_eps);
    out += "," + detail::format_double("%.6g", r.tv_lower_bound);
    out += "," + (r.rel_error ? detail::format_double("%.6g", *r.rel_error) : std::string());
    out += "," + (r.eoc ? detail::format_double("%.6g", *r.eoc) : std::string());
    out += "\n";
  }
  return out;
}

/// Everything needed to reproduce a run, echoed next to the records.
struct RunDescription {
  std::string instance;
  SolverConfig config;
  std::uint64_t seed = 0;
};

inline nlohmann::ordered_json to_json(const IterationRecord& r) {
  nlohmann::ordered_json j;
  j["k"] = r.k;
  j["eps"] = r.eps;
  j["objective"] = r.objective;
  j["it_master"] = r.it_master;
  j["it_oracle"] = r.it_oracle;
  j["tv_eps"] = r.tv_eps;
  j["tv_lower_bound"] = r.tv_lower_bound;
  j["rel_error"] = r.rel_error ? nlohmann::ordered_json(*r.rel_error) : nlohmann::ordered_json(nullptr);
  j["eoc"] = r.eoc ? nlohmann::ordered_json(*r.eoc) : nlohmann::ordered_json(nullptr);
  return j;
}

inline std::string serialize_json(const RunReport& report, const RunDescription& run) {
  nlohmann::ordered_json j;
  const SolverConfig& c = run.config;
  j["config"] = {{"instance", run.instance},    {"n", c.n},
                 {"alpha", c.alpha},            {"eps_start", c.eps_start},
                 {"eps_factor", c.eps_factor},  {"eps_min", c.eps_min},
                 {"tol", c.tol},                {"max_outer", c.max_outer},
                 {"depth", c.subdivision_depth}, {"warm_start", c.warm_start},
                 {"seed", run.seed}};
  nlohmann::ordered_json records = nlohmann::ordered_json::array();
  for (const auto& r : report.records) records.push_back(to_json(r));
  j["records"] = std::move(records);
  j["termination_reason"] = to_string(report.terminated);
  j["message"] = report.message;
  j["verified_tv_eps"] = report.verified_tv_eps ? nlohmann::ordered_json(*report.verified_tv_eps) : nlohmann::ordered_json(nullptr);
  return j.dump(2) + "\n";
}

enum class ReportFormat { csv, json };

inline std::string serialize_report(const RunReport& report, ReportFormat format, const RunDescription& run = {}) {
  return format == ReportFormat::csv ? serialize_csv(report) : serialize_json(report, run);
}

// ---------------------------------------------------------------------------
// Plain-text field dumps: a header line "p0 <ncells>" or
// "p1 <nnodes> <components>", then one value (or pair) per line.

struct FieldDump {
  std::string kind;  // "p0" or "p1"
  int entities = 0;
  int components = 1;
  Vector values;
};

namespace detail {

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing: " + std::strerror(errno));
  os << text;
  os.flush();
  if (!os) throw IoError("write to '" + path + "' failed");
}

inline std::string dump_text(const char* kind, int entities, int components, const Vector& v) {
  std::string s = std::string(kind) + " " + std::to_string(entities);
  if (std::string(kind) == "p1") s += " " + std::to_string(components);
  s += "\n";
  for (int i = 0; i < entities; ++i) {
    for (int c = 0; c < components; ++c) {
      if (c) s += " ";
      s += format_double("%.17g", v[i * components + c]);
    }
    s += "\n";
  }
  return s;
}

}  // namespace detail

inline void dump_field(const P0Field& f, const std::string& path) {
  detail::write_text(path, detail::dump_text("p0", static_cast<int>(f.size()), 1, f.values));
}

inline void dump_field(const P1ScalarField& f, const std::string& path) {
  detail::write_text(path, detail::dump_text("p1", static_cast<int>(f.size()), 1, f.values));
}

inline void dump_field(const P1VectorField& f, const std::string& path) {
  detail::write_text(path, detail::dump_text("p1", static_cast<int>(f.size() / 2), 2, f.values));
}

inline FieldDump load_field(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "' for reading");
  FieldDump d;
  std::string header;
  if (!std::getline(is, header)) throw IoError("'" + path + "': missing header");
  std::istringstream hs(header);
  hs >> d.kind >> d.entities;
  if (d.kind == "p1") hs >> d.components;
  if (!hs || (d.kind != "p0" && d.kind != "p1") || d.entities < 0 || d.components < 1 || d.components > 2)
    throw IoError("'" + path + "': malformed header");
  d.values.resize(static_cast<Eigen::Index>(d.entities) * d.components);
  std::string tok;
  for (Eigen::Index i = 0; i < d.values.size(); ++i) {
    if (!(is >> tok)) throw IoError("'" + path + "': truncated data");
    char* end = nullptr;
    d.values[i] = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw IoError("'" + path + "': bad number '" + tok + "'");
  }
  if (is >> tok) throw IoError("'" + path + "': trailing data");
  return d;
}

}  // namespace tvoa

#endif  // TVOA_REPORT_IO_HPP
