#pragma once

// The CLI subcommands as library calls: each takes a validated config and returns a RunReport.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "psido/calculus.hpp"
#include "psido/config.hpp"
#include "psido/funcalc.hpp"
#include "psido/report.hpp"
#include "psido/symbol.hpp"
#include "psido/traces.hpp"

namespace psido {

// Residuals at or below this are treated as an exact parametrix (x-independent symbols).
inline constexpr double kExactResidual = 1e-13;

namespace detail {

inline RunReport start_report(const std::string& command, const RunConfig& cfg) {
  RunReport r(command);
  r.json()["seed"] = cfg.seed;
  r.json()["config"] = to_json(cfg);
  return r;
}

inline ordered_json symbol_json(const SymbolField& s) {
  const auto& c = s.class_spec();
  return {{"family", s.name()},
          {"dim", s.grid().dim()},
          {"N", s.grid().points()},
          {"m", c.m},
          {"rho", c.rho},
          {"delta", c.delta},
          {"x_independent", s.x_independent()}};
}

inline ordered_json contour_json(const ContourSpec& c) {
  ordered_json j;
  j["kind"] = ContourSpec::kind_name(c.kind);
  if (c.kind == ContourSpec::Kind::finite_loop) {
    j["center"] = json_cplx(c.center);
    j["radius"] = c.radius;
  } else {
    j["epsilon"] = c.epsilon;
    j["R"] = c.R ? json_number(*c.R) : ordered_json(nullptr);
    if (c.kind == ContourSpec::Kind::exponential) j["angle"] = c.angle;
  }
  return j;
}

}  // namespace detail

// Seminorm constants for |alpha| + |q| <= 3, the parameter-ellipticity certificate and positivity.
inline RunReport cmd_check_symbol(const RunConfig& cfg) {
  Stopwatch sw;
  RunReport rep = detail::start_report("check-symbol", cfg);
  const SymbolField a = cfg.make_symbol();
  const TorusGrid& g = a.grid();
  auto& res = rep.results();
  res["symbol"] = detail::symbol_json(a);
  double worst = 0.0;
  for (const auto& alpha : multi_indices_up_to(g.dim(), 3))
    for (const auto& q : multi_indices_up_to(g.dim(), 3 - total_order(alpha))) {
      const double c = seminorm_estimate(a, alpha, q);
      res["seminorms"].push_back({{"alpha", {alpha[0], alpha[1]}}, {"q", {q[0], q[1]}}, {"constant", json_number(c)}});
      worst = std::max(worst, c);
    }
  rep.gate_finite("seminorm_constants", worst);
  if (a.class_spec().m >= 0) {
    const SectorSpec sector = cfg.make_sector();
    const EllipticityReport er = parameter_ellipticity_check(a, sector);
    res["ellipticity"] = {{"sector", SectorSpec::variant_name(sector.variant)},
                          {"theta0", sector.theta0},
                          {"epsilon", sector.epsilon},
                          {"constant", json_number(er.constant)},
                          {"worst_lambda", json_cplx(er.worst_lambda)},
                          {"worst_x", {er.worst_x[0], er.worst_x[1]}},
                          {"worst_eta", {er.worst_eta[0], er.worst_eta[1]}},
                          {"samples", er.samples}};
    rep.gate_finite("ellipticity_constant", er.constant);
  } else {
    res["ellipticity"] = "not applicable: order < 0";
  }
  const PositiveRealReport pr = positive_real_check(op_tau0(a));
  res["positive_real"] = {{"positive_real", pr.positive_real}, {"margin", pr.margin}};
  rep.timing("total", sw.seconds());
  return rep;
}

// Residual decay of the (K, J) parametrix and r ||(A + r)^{-1}|| along the negative axis.
inline RunReport cmd_resolvent_sweep(const RunConfig& cfg) {
  Stopwatch sw;
  RunReport rep = detail::start_report("resolvent-sweep", cfg);
  const SymbolField a = cfg.make_symbol();
  const auto px = build_parametrix(a, cfg.make_sector(), cfg.expansion.K, cfg.expansion.J);
  const ResidualSweep s = residual_decay_sweep(px, cfg.sweep.lambda_moduli);
  double max_res = 0.0, max_prod = 0.0;
  for (const auto& r : s.rows) {
    max_res = std::max(max_res, r.residual_norm);
    max_prod = std::max(max_prod, r.product);
  }
  const bool exact = max_res <= kExactResidual;
  auto& t = rep.table("resolvent", csv_schema::resolvent);
  for (const auto& r : s.rows)
    t.add({r.lambda_modulus, r.residual_norm, r.resolvent_norm, r.product, exact ? NAN : s.slope});
  auto& res = rep.results();
  res["symbol"] = detail::symbol_json(a);
  res["expansion"] = {{"K", px.K}, {"J", px.J}, {"certificate", json_number(px.certificate.constant)}};
  res["slope"] = exact ? ordered_json(nullptr) : json_number(s.slope);
  res["exact_parametrix"] = exact;
  res["max_residual"] = max_res;
  res["max_product"] = max_prod;
  rep.gate_finite("parametrix_certificate", px.certificate.constant);
  if (exact) rep.gate("residual_exact", max_res, "<=", kExactResidual);
  else rep.gate("residual_slope", s.slope, "<=", cfg.tol.slope_max);
  rep.gate("minimal_growth_product", max_prod, "<=", cfg.tol.growth_bound);
  rep.timing("total", sw.seconds());
  return rep;
}

// f(A) by contour and by eigendecomposition, a node-count ladder, and the symbol expansion gap.
inline RunReport cmd_funcalc(const RunConfig& cfg) {
  Stopwatch sw;
  RunReport rep = detail::start_report("funcalc", cfg);
  const SymbolField a = cfg.make_symbol();
  const OperatorMatrix op = op_tau0(a);
  const HoloFunction f = cfg.make_function();
  const ContourSpec c = cfg.make_contour(f);
  const FuncalcOptions opt{cfg.tol.tail};
  const ContourRun run = f_of_A_contour_run(op, f, c, cfg.contour.quadrature, opt);
  const OperatorMatrix spec = f_of_A_spectral(op, f);
  const double cross = relative_frobenius(run.value, spec);
  auto& res = rep.results();
  res["symbol"] = detail::symbol_json(a);
  res["function"] = f.tag();
  res["contour"] = detail::contour_json(run.contour);
  res["nodes"] = run.nodes;
  res["resolvent_solves"] = run.solves;
  res["split_power"] = run.split_power;
  res["cross_method_error"] = cross;
  res["eigenvector_condition"] = json_number(op.spectrum().condition);
  rep.gate("contour_vs_spectral", cross, "<=", cfg.tol.funcalc_cross);

  auto& t = rep.table("funcalc_convergence", csv_schema::funcalc_convergence);
  const std::vector<std::pair<int, int>> ladder = {{40, 16}, {80, 24}, {120, 32}, {160, 48}, {200, 64}, {300, 96}};
  for (const auto& [nr, nc] : ladder) {
    QuadratureSpec q = cfg.contour.quadrature;
    q.nodes_per_ray = nr;
    q.nodes_on_circle = nc;
    const ContourRun r = f_of_A_contour_run(op, f, c, q, opt);
    t.add({double(nr), double(r.quadrature.nodes_on_circle), relative_frobenius(r.value, spec)});
  }

  if (f.kind() == HoloFunction::Kind::exp_scaled) {
    const double tt = f.time();
    const OperatorMatrix e1 = run.value;
    const OperatorMatrix e2 = heat_operator(op, 2 * tt, c, cfg.contour.quadrature, opt);
    const double semi = relative_frobenius(e1 * e1, e2);
    res["semigroup_residual"] = semi;
    rep.gate("semigroup", semi, "<=", cfg.tol.semigroup);
  }

  const SectorSpec sector = a.class_spec().m > 0 ? cfg.make_sector() : enclosing_disk_sector(a);
  const auto px = build_parametrix(a, sector, cfg.expansion.K, cfg.expansion.J);
  for (int d = 0; d <= px.J; ++d) {
    const OperatorMatrix e = op_tau0(f_of_symbol_expansion(px, f, d));
    res["expansion_gap"].push_back(
        {{"depth", d}, {"operator_norm", operator_norm(e.matrix() - spec.matrix())}, {"relative_frobenius", relative_frobenius(e, spec)}});
  }
  rep.timing("total", sw.seconds());
  return rep;
}

inline RunReport cmd_traces(const RunConfig& cfg, const std::string& which) {
  Stopwatch sw;
  RunReport rep = detail::start_report("traces:" + which, cfg);
  const SymbolField a = cfg.make_symbol();
  const int k = cfg.expansion.K, j = cfg.expansion.J;
  auto& res = rep.results();
  res["symbol"] = detail::symbol_json(a);
  if (which == "szego") {
    const TraceReport tr = szego_logdet(a, k, j);
    auto& t = rep.table("szego", csv_schema::szego);
    for (std::size_t d = 0; d < tr.by_depth.size(); ++d)
      t.add({double(d), tr.by_depth[d].real(), tr.by_depth[d].imag(), tr.operator_side.real(),
             tr.operator_side.imag(), std::abs(tr.by_depth[d] - tr.operator_side)});
    const cplx lu = logdet_lu(CMatrix::Identity(a.grid().size(), a.grid().size()) + op_tau0(a).matrix());
    // LU gives the log-determinant modulo 2 pi i.
    const cplx dlu = lu - tr.operator_side;
    const double lu_gap = std::abs(cplx(dlu.real(), std::remainder(dlu.imag(), 2 * kPi)));
    res["operator_side"] = json_cplx(tr.operator_side);
    res["lu_logdet"] = json_cplx(lu);
    res["symbol_leading"] = json_cplx(tr.symbol_leading);
    res["symbol_corrected"] = json_cplx(tr.symbol_side);
    res["discrepancy_leading"] = tr.discrepancy_leading();
    res["discrepancy_corrected"] = tr.discrepancy();
    rep.gate("eigenvalue_sum_vs_lu", lu_gap, "<=", 1e-8);
    if (a.x_independent()) rep.gate("x_independent_match", tr.discrepancy(), "<=", cfg.tol.szego_control);
    else rep.gate("correction_improves", tr.discrepancy(), "<", tr.discrepancy_leading());
  } else if (which == "heat") {
    const HeatSweep hs = heat_trace_sweep(a, cfg.sweep.t_list, k, j);
    auto& t = rep.table("heat", csv_schema::heat);
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < hs.t.size(); ++i) {
      const auto& r = hs.rows[i];
      t.add({hs.t[i], r.operator_side.real(), r.symbol_leading.real(), r.symbol_side.real(), r.discrepancy_leading(),
             r.discrepancy()});
      worst = std::max(worst, r.discrepancy_leading());
      scale = std::max(scale, std::abs(r.operator_side));
    }
    res["order_leading"] = json_number(hs.order_leading);
    res["order_corrected"] = json_number(hs.order_corrected);
    if (a.x_independent()) {
      rep.gate("x_independent_leading_term", worst / scale, "<=", 1e-13);
    } else {
      res["order_gain"] = json_number(hs.order_corrected - hs.order_leading);
      rep.gate("order_gain", hs.order_corrected - hs.order_leading, ">=", cfg.tol.heat_order_gain);
    }
  } else if (which == "zeta") {
    auto& t = rep.table("zeta", csv_schema::zeta);
    const HoloFunction probe = HoloFunction::power(-1.0);
    for (const cplx z : cfg.sweep.z_list) {
      const ZetaReport zr = zeta_value(a, z, k, j, cfg.make_contour(probe), cfg.contour.quadrature);
      const cplx op = zr.trace.operator_side, ct = *zr.trace.contour_side, sy = zr.trace.symbol_side;
      t.add({z.real(), z.imag(), op.real(), ct.real(), sy.real()});
      const double oc = std::abs(op - ct) / std::abs(op), os = std::abs(op - sy) / std::abs(op);
      res["values"].push_back({{"z", json_cplx(z)},
                               {"operator_zeta", json_cplx(op)},
                               {"contour_zeta", json_cplx(ct)},
                               {"symbol_zeta", json_cplx(sy)},
                               {"symbol_leading", json_cplx(zr.trace.symbol_leading)},
                               {"symbol_without_prefactor", json_cplx(zr.symbol_without_prefactor)},
                               {"prefactor_ratio", zr.prefactor_ratio},
                               {"operator_vs_contour", oc},
                               {"operator_vs_symbol", os}});
      rep.gate("operator_vs_contour", oc, "<=", cfg.tol.zeta_agreement);
      if (a.x_independent()) rep.gate("operator_vs_symbol", os, "<=", cfg.tol.zeta_agreement);
    }
  } else {
    throw ConfigError("traces: --which must be szego, heat or zeta, got '" + which + "'");
  }
  rep.timing("total", sw.seconds());
  return rep;
}

}  // namespace psido
