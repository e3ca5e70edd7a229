#pragma once

// Run configuration: INI (sections + key = value) or the JSON equivalent, strict schema.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "psido/calculus.hpp"
#include "psido/contour.hpp"
#include "psido/errors.hpp"
#include "psido/funcalc.hpp"
#include "psido/holo_function.hpp"
#include "psido/stats.hpp"
#include "psido/symbol.hpp"

namespace psido {

using ordered_json = nlohmann::ordered_json;

// Every gate used by the CLI, with the defaults the acceptance suite runs at.
struct Tolerances {
  double tail = 1e-12;              // contour truncation target
  double funcalc_cross = 1e-7;      // contour vs spectral, relative Frobenius
  double semigroup = 1e-7;          // e^{-A} e^{-A} vs e^{-2A}
  double group_law = 1e-6;          // A^s A^t vs A^{s+t}
  double slope_max = -1.0;          // residual decay slope
  double growth_bound = 4.0;        // sup r ||(A + r)^{-1}||
  double positive_real = 1e-10;     // min Re eigenvalue >= -this
  double trace_identity = 1e-12;    // symbol trace vs matrix trace
  double heat_order_gain = 1.0;     // fitted order improvement
  double zeta_agreement = 1e-6;     // pairwise zeta paths
  double szego_control = 1e-10;     // x-independent log-det
  double adjoint = 1e-12;           // op_tau1(a)^* vs op_tau0(conj a)
  double tau_growth = 2.0;          // max/min ratio of the tau-difference norm over N
};

struct RunConfig {
  struct Grid {
    int dim = 1;
    int N = 32;
  } grid;
  struct Symbol {
    std::string family = "perturbed_elliptic";
    FamilyParams params;
  } symbol;
  struct Sector {
    double theta0 = 0.75 * kPi;
    double epsilon = 0.1;
  } sector;
  struct Contour {
    std::string kind = "auto";  // auto picks the contour matching f
    double epsilon = 0.0;       // <= 0: automatic
    std::optional<double> R;    // unset: automatic
    double angle = 0.25 * kPi;
    QuadratureSpec quadrature;
  } contour;
  struct Expansion {
    int K = 2;
    int J = 2;
  } expansion;
  std::string function = "power:z=-1";
  struct Sweep {
    std::vector<double> lambda_moduli = default_lambda_moduli();
    std::vector<double> t_list = logspace(0.05, 0.4, 8);
    std::vector<cplx> z_list = {2.0};
  } sweep;
  struct Output {
    std::string directory = "psido_out";
    std::vector<std::string> formats = {"csv", "json"};
    bool wants(const std::string& f) const {
      for (const auto& x : formats)
        if (x == f) return true;
      return false;
    }
  } output;
  Tolerances tol;
  std::uint64_t seed = 20240601;

  TorusGrid make_grid() const { return TorusGrid(grid.dim, grid.N); }
  SymbolField make_symbol() const { return builtin_family(symbol.family, symbol.params, make_grid()); }
  HoloFunction make_function() const { return HoloFunction::parse(function); }
  SectorSpec make_sector() const { return SectorSpec::keyhole(sector.theta0, sector.epsilon); }

  ContourSpec make_contour(const HoloFunction& f) const {
    ContourSpec c;
    if (contour.kind == "auto") {
      c = default_contour_for(f);
    } else {
      switch (ContourSpec::parse_kind(contour.kind)) {
        case ContourSpec::Kind::keyhole: c = ContourSpec::keyhole(); break;
        case ContourSpec::Kind::exponential: c = ContourSpec::exponential(contour.angle); break;
        case ContourSpec::Kind::finite_loop: c = ContourSpec::auto_loop(); break;
      }
    }
    if (c.kind != ContourSpec::Kind::finite_loop) {
      c.epsilon = contour.epsilon;
      c.R = contour.R;
      if (c.kind == ContourSpec::Kind::exponential) c.angle = contour.angle;
    }
    return c;
  }

  // Cross-field constraints of the modules, each reported with its key.
  void validate() const {
    auto fail = [](const std::string& key, const std::string& msg) { throw ConfigError(key + ": " + msg); };
    if (grid.dim != 1 && grid.dim != 2) fail("grid.dim", "must be 1 or 2");
    if (grid.N < 4 || grid.N % 2 != 0) fail("grid.N", "must be even and >= 4");
    if (grid.N > (grid.dim == 1 ? 64 : 32)) fail("grid.N", "dense matrices are limited to N <= 64 on T^1, N <= 32 on T^2");
    bool known = false;
    for (const auto& n : builtin_family_names()) known = known || n == symbol.family;
    if (!known) fail("symbol.family", "unknown family '" + symbol.family + "'");
    const auto& p = symbol.params;
    if (!(0 <= p.delta && p.delta < p.rho && p.rho <= 1)) fail("symbol.rho/delta", "need 0 <= delta < rho <= 1");
    if (!(std::abs(p.eps0) <= 0.25)) fail("symbol.eps0", "|eps0| must be <= 1/4 (positivity margin)");
    if (symbol.family == "negative_order" && !(p.m < 0)) fail("symbol.m", "negative_order needs m < 0");
    if (!(sector.theta0 > kPi / 2 && sector.theta0 < kPi)) fail("sector.theta0", "must lie in (pi/2, pi)");
    if (!(sector.epsilon > 0)) fail("sector.epsilon", "must be > 0");
    if (contour.kind != "auto") {
      try {
        ContourSpec::parse_kind(contour.kind);
      } catch (const ConfigError& e) {
        fail("contour.kind", e.what());
      }
    }
    if (contour.R && contour.epsilon > 0 && !(contour.epsilon < *contour.R)) fail("contour.R", "need epsilon < R");
    if (contour.R && !(*contour.R > 0)) fail("contour.R", "must be > 0");
    if (!(contour.angle > 0 && contour.angle < kPi / 2)) fail("contour.angle", "must lie in (0, pi/2)");
    try {
      contour.quadrature.validate();
    } catch (const Error& e) {
      fail("contour.nodes", e.what());
    }
    if (expansion.K < 0 || expansion.K > 3) fail("expansion.K", "must lie in 0..3");
    if (expansion.J < 0 || expansion.J > 3) fail("expansion.J", "must lie in 0..3");
    try {
      make_function();
    } catch (const Error& e) {
      fail("function.tag", e.what());
    }
    for (double r : sweep.lambda_moduli)
      if (!(r > 0)) fail("sweep.lambda_moduli", "moduli must be positive");
    for (double t : sweep.t_list)
      if (!(t > 0 && t <= 1)) fail("sweep.t_list", "times must lie in (0, 1]");
    if (sweep.lambda_moduli.size() < 2) fail("sweep.lambda_moduli", "need at least two moduli for a slope");
    for (const auto& f : output.formats)
      if (f != "csv" && f != "json") fail("output.formats", "unknown format '" + f + "' (csv, json)");
  }
};

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  const auto e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (trim(v.substr(used)).empty()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a number, got '" + v + "'");
}

inline int parse_int(const std::string& key, const std::string& v) {
  const double d = parse_double(key, v);
  if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return int(d);
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  if (!v.empty() && v.find_first_not_of("0123456789") == std::string::npos) {
    try {
      return std::stoull(v);
    } catch (const std::out_of_range&) {
    }
  }
  throw ConfigError(key + ": expected an unsigned 64-bit integer, got '" + v + "'");
}

inline cplx parse_cplx(const std::string& key, const std::string& v) {
  try {
    return HoloFunction::parse("power:z=" + v).exponent();
  } catch (const Error&) {
    throw ConfigError(key + ": expected a complex number, got '" + v + "'");
  }
}

// Flat (section, key) -> string view of either input format.
using FlatConfig = std::map<std::string, std::map<std::string, std::string>>;

inline std::string json_scalar(const std::string& key, const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number() || v.is_boolean()) return v.dump();
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) {
      if (e.is_array() || e.is_object()) throw ConfigError(key + ": nested lists are not allowed");
      s += (s.empty() ? "" : ",") + json_scalar(key, e);
    }
    return s;
  }
  throw ConfigError(key + ": unsupported JSON value");
}

inline FlatConfig flatten_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object of sections");
  FlatConfig out;
  for (const auto& [sec, body] : j.items()) {
    if (!body.is_object()) {
      if (sec == "seed" || sec == "function") {
        out[""][sec] = json_scalar(sec, body);
        continue;
      }
      throw ConfigError(sec + ": expected a section object");
    }
    for (const auto& [k, v] : body.items()) out[sec][k] = json_scalar(sec + "." + k, v);
  }
  return out;
}

inline FlatConfig flatten_ini(const std::string& text) {
  boost::property_tree::ptree pt;
  std::istringstream is(text);
  try {
    boost::property_tree::ini_parser::read_ini(is, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config: " + e.message() + " at line " + std::to_string(e.line()));
  }
  FlatConfig out;
  for (const auto& [sec, body] : pt) {
    if (body.empty()) {
      out[""][sec] = trim(body.data());
      continue;
    }
    for (const auto& [k, v] : body) out[sec][k] = trim(v.data());
  }
  return out;
}

}  // namespace detail

inline RunConfig config_from_flat(const detail::FlatConfig& flat) {
  using detail::parse_double;
  using detail::parse_int;
  RunConfig c;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, std::map<std::string, Setter>> schema = {
      {"",
       {{"seed", [&](auto& k, auto& v) { c.seed = detail::parse_u64(k, v); }},
        {"function", [&](auto&, auto& v) { c.function = v; }}}},
      {"grid",
       {{"dim", [&](auto& k, auto& v) { c.grid.dim = parse_int(k, v); }},
        {"N", [&](auto& k, auto& v) { c.grid.N = parse_int(k, v); }}}},
      {"symbol",
       {{"family", [&](auto&, auto& v) { c.symbol.family = v; }},
        {"c", [&](auto& k, auto& v) { c.symbol.params.c = parse_double(k, v); }},
        {"m", [&](auto& k, auto& v) { c.symbol.params.m = parse_double(k, v); }},
        {"rho", [&](auto& k, auto& v) { c.symbol.params.rho = parse_double(k, v); }},
        {"delta", [&](auto& k, auto& v) { c.symbol.params.delta = parse_double(k, v); }},
        {"eps0", [&](auto& k, auto& v) { c.symbol.params.eps0 = parse_double(k, v); }}}},
      {"sector",
       {{"theta0", [&](auto& k, auto& v) { c.sector.theta0 = parse_double(k, v); }},
        {"epsilon", [&](auto& k, auto& v) { c.sector.epsilon = parse_double(k, v); }}}},
      {"contour",
       {{"kind", [&](auto&, auto& v) { c.contour.kind = v; }},
        {"epsilon",
         [&](auto& k, auto& v) { c.contour.epsilon = v == "auto" ? 0.0 : parse_double(k, v); }},
        {"R",
         [&](auto& k, auto& v) {
           if (v == "auto") c.contour.R.reset();
           else c.contour.R = parse_double(k, v);
         }},
        {"angle", [&](auto& k, auto& v) { c.contour.angle = parse_double(k, v); }},
        {"nodes_per_ray", [&](auto& k, auto& v) { c.contour.quadrature.nodes_per_ray = parse_int(k, v); }},
        {"nodes_on_circle", [&](auto& k, auto& v) { c.contour.quadrature.nodes_on_circle = parse_int(k, v); }},
        {"panel_size", [&](auto& k, auto& v) { c.contour.quadrature.panel_size = parse_int(k, v); }}}},
      {"expansion",
       {{"K", [&](auto& k, auto& v) { c.expansion.K = parse_int(k, v); }},
        {"J", [&](auto& k, auto& v) { c.expansion.J = parse_int(k, v); }}}},
      {"function", {{"tag", [&](auto&, auto& v) { c.function = v; }}}},
      {"sweep",
       {{"lambda_moduli",
         [&](auto& k, auto& v) {
           c.sweep.lambda_moduli.clear();
           for (const auto& s : detail::split_list(v)) c.sweep.lambda_moduli.push_back(parse_double(k, s));
         }},
        {"t_list",
         [&](auto& k, auto& v) {
           c.sweep.t_list.clear();
           for (const auto& s : detail::split_list(v)) c.sweep.t_list.push_back(parse_double(k, s));
         }},
        {"z_list",
         [&](auto& k, auto& v) {
           c.sweep.z_list.clear();
           for (const auto& s : detail::split_list(v)) c.sweep.z_list.push_back(detail::parse_cplx(k, s));
         }}}},
      {"output",
       {{"directory", [&](auto&, auto& v) { c.output.directory = v; }},
        {"formats", [&](auto&, auto& v) { c.output.formats = detail::split_list(v); }}}},
      {"tolerances",
       {{"tail", [&](auto& k, auto& v) { c.tol.tail = parse_double(k, v); }},
        {"funcalc_cross", [&](auto& k, auto& v) { c.tol.funcalc_cross = parse_double(k, v); }},
        {"semigroup", [&](auto& k, auto& v) { c.tol.semigroup = parse_double(k, v); }},
        {"group_law", [&](auto& k, auto& v) { c.tol.group_law = parse_double(k, v); }},
        {"slope_max", [&](auto& k, auto& v) { c.tol.slope_max = parse_double(k, v); }},
        {"growth_bound", [&](auto& k, auto& v) { c.tol.growth_bound = parse_double(k, v); }},
        {"positive_real", [&](auto& k, auto& v) { c.tol.positive_real = parse_double(k, v); }},
        {"trace_identity", [&](auto& k, auto& v) { c.tol.trace_identity = parse_double(k, v); }},
        {"heat_order_gain", [&](auto& k, auto& v) { c.tol.heat_order_gain = parse_double(k, v); }},
        {"zeta_agreement", [&](auto& k, auto& v) { c.tol.zeta_agreement = parse_double(k, v); }},
        {"szego_control", [&](auto& k, auto& v) { c.tol.szego_control = parse_double(k, v); }},
        {"adjoint", [&](auto& k, auto& v) { c.tol.adjoint = parse_double(k, v); }},
        {"tau_growth", [&](auto& k, auto& v) { c.tol.tau_growth = parse_double(k, v); }}}},
  };
  for (const auto& [sec, kv] : flat) {
    const auto s = schema.find(sec);
    if (s == schema.end()) throw ConfigError(sec + ": unknown section");
    for (const auto& [k, v] : kv) {
      const std::string key = sec.empty() ? k : sec + "." + k;
      const auto f = s->second.find(k);
      if (f == s->second.end()) throw ConfigError(key + ": unknown key");
      f->second(key, v);
    }
  }
  if (flat.count("symbol") && !flat.at("symbol").count("family"))
    throw ConfigError("symbol.family: required key is missing");
  c.validate();
  return c;
}

inline RunConfig parse_config_ini(const std::string& text) { return config_from_flat(detail::flatten_ini(text)); }

inline RunConfig parse_config_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return config_from_flat(detail::flatten_json(j));
}

// .json files are JSON, anything else INI.
inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return path.extension() == ".json" ? parse_config_json(ss.str()) : parse_config_ini(ss.str());
}

inline ordered_json cplx_json(cplx z) { return ordered_json{{"re", z.real()}, {"im", z.imag()}}; }

// Config echo; feeding it back through parse_config_json gives the same config.
inline ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  j["function"] = c.function;
  j["grid"] = {{"dim", c.grid.dim}, {"N", c.grid.N}};
  const auto& p = c.symbol.params;
  j["symbol"] = {{"family", c.symbol.family}, {"c", p.c},       {"m", p.m},
                 {"rho", p.rho},              {"delta", p.delta}, {"eps0", p.eps0}};
  j["sector"] = {{"theta0", c.sector.theta0}, {"epsilon", c.sector.epsilon}};
  ordered_json ct;
  ct["kind"] = c.contour.kind;
  ct["epsilon"] = c.contour.epsilon;
  if (c.contour.R) ct["R"] = *c.contour.R;
  else ct["R"] = "auto";
  ct["angle"] = c.contour.angle;
  ct["nodes_per_ray"] = c.contour.quadrature.nodes_per_ray;
  ct["nodes_on_circle"] = c.contour.quadrature.nodes_on_circle;
  ct["panel_size"] = c.contour.quadrature.panel_size;
  j["contour"] = ct;
  j["expansion"] = {{"K", c.expansion.K}, {"J", c.expansion.J}};
  std::vector<std::string> zs;
  for (const cplx z : c.sweep.z_list) zs.push_back(HoloFunction::power(z).tag().substr(8));
  j["sweep"] = {{"lambda_moduli", c.sweep.lambda_moduli}, {"t_list", c.sweep.t_list}, {"z_list", zs}};
  j["output"] = {{"directory", c.output.directory}, {"formats", c.output.formats}};
  const auto& t = c.tol;
  j["tolerances"] = {{"tail", t.tail},
                     {"funcalc_cross", t.funcalc_cross},
                     {"semigroup", t.semigroup},
                     {"group_law", t.group_law},
                     {"slope_max", t.slope_max},
                     {"growth_bound", t.growth_bound},
                     {"positive_real", t.positive_real},
                     {"trace_identity", t.trace_identity},
                     {"heat_order_gain", t.heat_order_gain},
                     {"zeta_agreement", t.zeta_agreement},
                     {"szego_control", t.szego_control},
                     {"adjoint", t.adjoint},
                     {"tau_growth", t.tau_growth}};
  return j;
}

}  // namespace psido
