#pragma once

// Run reports: JSON summary with gates and timings, plus named CSV tables.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <locale>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "psido/errors.hpp"
#include "psido/grid.hpp"

#ifndef PSIDO_ARTIFACT_VERSION
#define PSIDO_ARTIFACT_VERSION "0.1.0-unknown"
#endif

namespace psido {

using ordered_json = nlohmann::ordered_json;

inline const char* artifact_version() { return PSIDO_ARTIFACT_VERSION; }

namespace csv_schema {
inline const std::vector<std::string> resolvent = {"lambda_modulus", "residual_norm", "resolvent_norm", "product",
                                                    "slope_estimate"};
inline const std::vector<std::string> funcalc_convergence = {"nodes_per_ray", "nodes_on_circle", "relative_error"};
inline const std::vector<std::string> heat = {"t",         "operator_trace",      "symbol_leading",
                                              "symbol_corrected", "discrepancy_leading", "discrepancy_corrected"};
inline const std::vector<std::string> zeta = {"z_re", "z_im", "operator_zeta", "contour_zeta", "symbol_zeta"};
inline const std::vector<std::string> szego = {"depth", "symbol_re", "symbol_im", "operator_re", "operator_im",
                                               "discrepancy"};
}  // namespace csv_schema

// Doubles print with 17 significant digits in the C locale; non-finite values as nan/inf.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream o;
  o.imbue(std::locale::classic());
  o.precision(17);
  o << v;
  return o.str();
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  explicit CsvTable(std::vector<std::string> h = {}) : header(std::move(h)) {}

  void add(std::vector<double> row) {
    if (row.size() != header.size())
      throw ShapeError("csv row has " + std::to_string(row.size()) + " fields, header has " +
                       std::to_string(header.size()));
    rows.push_back(std::move(row));
  }

  std::string str() const {
    std::string s;
    for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + header[i];
    s += "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + format_number(r[i]);
      s += "\n";
    }
    return s;
  }
};

// JSON numbers cannot be nan/inf: those become null.
inline ordered_json json_number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }
inline ordered_json json_cplx(cplx z) { return ordered_json{{"re", json_number(z.real())}, {"im", json_number(z.imag())}}; }

class RunReport {
 public:
  explicit RunReport(std::string command) {
    j_["command"] = std::move(command);
    j_["version"] = artifact_version();
  }

  ordered_json& json() { return j_; }
  const ordered_json& json() const { return j_; }
  ordered_json& results() { return j_["results"]; }

  // One pass/fail line: value compared against bound with the stated relation.
  bool gate(const std::string& name, double value, const std::string& relation, double bound) {
    bool pass = false;
    if (relation == "<=") pass = value <= bound;
    else if (relation == "<") pass = value < bound;
    else if (relation == ">=") pass = value >= bound;
    else throw DomainError("unknown gate relation " + relation);
    j_["gates"].push_back(
        {{"name", name}, {"value", json_number(value)}, {"relation", relation}, {"bound", bound}, {"pass", pass}});
    ok_ = ok_ && pass;
    return pass;
  }

  bool gate_finite(const std::string& name, double value) {
    const bool pass = std::isfinite(value);
    j_["gates"].push_back({{"name", name}, {"value", json_number(value)}, {"relation", "finite"}, {"pass", pass}});
    ok_ = ok_ && pass;
    return pass;
  }

  void fail(const std::string& name, const std::string& why) {
    j_["gates"].push_back({{"name", name}, {"pass", false}, {"error", why}});
    ok_ = false;
  }

  void timing(const std::string& name, double seconds) { j_["timings"][name] = seconds; }

  CsvTable& table(const std::string& name, const std::vector<std::string>& header) {
    auto [it, inserted] = tables_.try_emplace(name, header);
    return it->second;
  }
  const std::map<std::string, CsvTable>& tables() const { return tables_; }

  bool ok() const { return ok_; }

  std::string json_text() const {
    ordered_json j = j_;
    j["ok"] = ok_;
    return j.dump(2) + "\n";
  }

  // report.json and NAME.csv into dir, per the requested formats.
  void write(const std::filesystem::path& dir, bool csv, bool json) const {
    std::filesystem::create_directories(dir);
    if (csv)
      for (const auto& [name, t] : tables_) write_file(dir / (name + ".csv"), t.str());
    if (json) write_file(dir / "report.json", json_text());
  }

 private:
  static void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write '" + p.string() + "'");
    out << text;
  }

  ordered_json j_;
  std::map<std::string, CsvTable> tables_;
  bool ok_ = true;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace psido
