#pragma once

// Acceptance criteria 1-10. Tolerances are fixed here, not read from a config.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "psido/calculus.hpp"
#include "psido/funcalc.hpp"
#include "psido/operator.hpp"
#include "psido/report.hpp"
#include "psido/symbol.hpp"
#include "psido/traces.hpp"

namespace psido::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

inline std::string fix(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

inline const std::vector<double>& r_grid() {
  static const std::vector<double> r = {10.0, 1e2, 1e3, 1e4};
  return r;
}

inline SymbolField perturbed(int n) { return families::perturbed_elliptic(TorusGrid(1, n), 2.0, 0.5, 0.0, 0.25); }

}  // namespace detail

// trace_symbol vs the matrix trace on random trig-polynomial symbols. The error is scaled by
// N^{-n} sum |a|, the size of the summands: without a k = 0 mode the trace cancels to ~0.
inline CriterionResult trace_identity(std::uint64_t seed = 17) {
  Stopwatch sw;
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (const auto& [dim, n] : {std::pair{1, 32}, std::pair{2, 16}}) {
    const TorusGrid g(dim, n);
    for (int i = 0; i < 20; ++i) {
      const SymbolField a = random_trig_symbol(g, rng);
      const cplx ts = trace_symbol(a), tm = op_tau0(a).matrix().trace();
      double scale = 0.0;
      for (const cplx v : a.samples()) scale += std::abs(v);
      scale /= double(g.size());
      worst = std::max(worst, std::abs(ts - tm) / std::max(std::abs(tm), scale));
    }
  }
  const double t = sw.seconds();
  return {1, "discrete trace identity", worst <= 1e-12 && t < 5.0,
          "max rel err " + detail::sci(worst) + " (<= 1e-12), " + detail::fix(t) + " s (< 5 s)", t};
}

inline CriterionResult funcalc_oracle() {
  Stopwatch sw;
  const OperatorMatrix a = op_tau0(detail::perturbed(32));
  double worst = 0.0;
  std::string d;
  for (const auto& [f, c] : {std::pair{HoloFunction::power(-1.0), ContourSpec::keyhole()},
                             std::pair{HoloFunction::power(-0.5), ContourSpec::keyhole()},
                             std::pair{HoloFunction::exp_scaled(1.0), ContourSpec::exponential()}}) {
    const double e = relative_frobenius(f_of_A_contour(a, f, c), f_of_A_spectral(a, f));
    worst = std::max(worst, e);
    d += f.tag() + " " + detail::sci(e) + "; ";
  }
  const double t = sw.seconds();
  return {2, "functional calculus oracle", worst <= 1e-6 && t < 60.0, d + "(<= 1e-6), " + detail::fix(t) + " s", t};
}

inline CriterionResult power_group() {
  Stopwatch sw;
  const OperatorMatrix a = op_tau0(detail::perturbed(32));
  const CMatrix h = complex_power(a, 0.5).matrix();
  const double e1 = operator_norm(h * h - a.matrix()) / operator_norm(a);
  const cplx s(0.3, 0.2);
  const CMatrix p = complex_power(a, s).matrix() * complex_power(a, -s).matrix();
  const double e2 = operator_norm(p - CMatrix::Identity(p.rows(), p.cols()));
  return {3, "power group law", e1 <= 1e-6 && e2 <= 1e-6,
          "|A^.5 A^.5 - A|/|A| " + detail::sci(e1) + ", |A^s A^-s - I| " + detail::sci(e2) + " (<= 1e-6)",
          sw.seconds()};
}

// r ||(A + r)^{-1}|| on every built-in positive-real elliptic family; x-independent ones also
// against the diagonal value max_eta r / |a(eta) + r|.
inline CriterionResult minimal_growth() {
  Stopwatch sw;
  bool pass = true;
  double worst = 0.0, worst_diag = 0.0;
  int checked = 0;
  for (const auto& [dim, n] : {std::pair{1, 32}, std::pair{2, 16}}) {
    const TorusGrid g(dim, n);
    for (const SymbolField& s : {families::constant(g, 1.0), families::bessel_power(g, 2.0),
                                 families::bessel_power(g, 1.0), families::laplace_plus_one(g),
                                 families::perturbed_elliptic(g, 2.0, 0.5, 0.0, 0.25), families::zero_order(g, 0.25)}) {
      const OperatorMatrix a = op_tau0(s);
      if (!positive_real_check(a).positive_real) continue;
      ++checked;
      const MinimalGrowthReport rep = ray_minimal_growth_check(a, detail::r_grid());
      worst = std::max(worst, rep.max_product);
      pass = pass && rep.bounded(4.0);
      if (s.x_independent()) {
        double diag = 0.0;
        for (double r : detail::r_grid())
          for (const cplx v : s.samples()) diag = std::max(diag, r / std::abs(v + r));
        worst_diag = std::max(worst_diag, std::abs(rep.max_product - diag));
        pass = pass && rep.max_product <= 1.0 && std::abs(rep.max_product - diag) <= 1e-10;
      }
    }
  }
  return {4, "ray of minimal growth", pass && checked > 0,
          std::to_string(checked) + " operators, max product " + detail::fix(worst) +
              " (<= 4), x-independent vs diagonal " + detail::sci(worst_diag),
          sw.seconds()};
}

inline CriterionResult residual_decay() {
  Stopwatch sw;
  const SymbolField a = detail::perturbed(32);
  const double s22 = residual_decay_sweep(build_parametrix(a, SectorSpec::keyhole(), 2, 2), detail::r_grid()).slope;
  const double s11 = residual_decay_sweep(build_parametrix(a, SectorSpec::keyhole(), 1, 1), detail::r_grid()).slope;
  return {5, "parametrix residual decay", s22 <= -1.0 && s22 <= s11,
          "slope (2,2) " + detail::fix(s22) + " (<= -1), (1,1) " + detail::fix(s11), sw.seconds()};
}

// Leading term f(a) against the default (2, 2) expansion, for f = lambda^{-1}.
inline CriterionResult expansion_improvement() {
  Stopwatch sw;
  bool pass = true;
  std::string d;
  for (int n : {16, 32}) {
    const SymbolField a = detail::perturbed(n);
    const OperatorMatrix op = op_tau0(a);
    const HoloFunction f = HoloFunction::power(-1.0);
    const OperatorMatrix ref = f_of_A_spectral(op, f);
    const auto px = build_parametrix(a, SectorSpec::keyhole(), 2, 2);
    const double lead = operator_norm(op_tau0(f_of_symbol_expansion(px, f, 0)).matrix() - ref.matrix());
    const double corr = operator_norm(op_tau0(f_of_symbol_expansion(px, f)).matrix() - ref.matrix());
    pass = pass && corr < lead;
    d += "N=" + std::to_string(n) + " leading " + detail::sci(lead) + " corrected " + detail::sci(corr) + "; ";
  }
  return {6, "expansion improvement", pass, d + "(corrected < leading)", sw.seconds()};
}

inline CriterionResult heat_trace() {
  Stopwatch sw;
  // (a) lattice sum e^{-1} (1 + 2e^{-1} + 2e^{-4} + 2e^{-9} + e^{-16}) for eta in {-4..3}.
  const double lattice = std::exp(-1.0) * (1 + 2 * std::exp(-1.0) + 2 * std::exp(-4.0) + 2 * std::exp(-9.0) + std::exp(-16.0));
  const HeatSweep h8 = heat_trace_sweep(families::laplace_plus_one(TorusGrid(1, 8)), {1.0});
  const double ea = std::abs(h8.rows[0].operator_side - lattice);
  const double el = std::abs(h8.rows[0].symbol_leading - h8.rows[0].operator_side) / lattice;
  const bool pa = ea <= 1e-9 && el <= 1e-14;
  // (b) fitted order in t, leading vs corrected.
  const HeatSweep hs = heat_trace_sweep(detail::perturbed(32), logspace(0.05, 0.4, 8));
  const double gain = hs.order_corrected - hs.order_leading;
  const bool pb = gain >= 1.0;
  return {7, "heat trace", pa && pb,
          "(a) |op - lattice| " + detail::sci(ea) + " (<= 1e-9), leading rel " + detail::sci(el) + "; (b) orders " +
              detail::fix(hs.order_leading) + " -> " + detail::fix(hs.order_corrected) + ", gain " + detail::fix(gain) +
              " (>= 1)",
          sw.seconds()};
}

inline CriterionResult zeta() {
  Stopwatch sw;
  const SymbolField a = families::laplace_plus_one(TorusGrid(1, 32));
  const ZetaReport z = zeta_value(a, 2.0);
  const cplx op = z.trace.operator_side, ct = *z.trace.contour_side, sy = z.trace.symbol_side;
  auto rel = [](cplx x, cplx y) { return std::abs(x - y) / std::abs(y); };
  const double e = std::max({rel(ct, op), rel(sy, op), rel(sy, ct)});
  // Without the (2 pi)^{-n} normalization the symbol integral is off by exactly (2 pi)^n.
  const double ratio = std::abs(z.symbol_without_prefactor / op);
  const bool prefactor = std::abs(ratio - 2 * kPi) <= 1e-6 * 2 * kPi;
  return {8, "spectral zeta", e <= 1e-6 && prefactor,
          "zeta(2) = " + detail::fix(op.real()) + ", max pairwise rel " + detail::sci(e) +
              " (<= 1e-6), displayed-formula ratio " + detail::fix(ratio) + " = (2 pi)^n",
          sw.seconds()};
}

inline CriterionResult szego() {
  Stopwatch sw;
  const TorusGrid g(1, 32);
  const TraceReport r = szego_logdet(families::negative_order(g, -2.0, 0.25));
  const TraceReport c = szego_logdet(families::negative_order(g, -2.0, 0.0));
  const bool closer = r.discrepancy() < r.discrepancy_leading();
  const bool control = c.discrepancy() <= 1e-10;
  return {9, "Szego log-determinant", closer && control,
          "leading " + detail::sci(r.discrepancy_leading()) + " corrected " + detail::sci(r.discrepancy()) +
              " (corrected < leading); control " + detail::sci(c.discrepancy()) + " (<= 1e-10)",
          sw.seconds()};
}

// Adjoint relation on random symbols, and ||op_tau0(a) - op_tau1(a)||_{H^s -> H^{s-m+1}} at
// N = 8, 16, 32: bounded means the largest is within 2x of the smallest, or all vanish.
inline CriterionResult quantization_contracts(std::uint64_t seed = 29) {
  Stopwatch sw;
  std::mt19937_64 rng(seed);
  double adj = 0.0, worst_ratio = 0.0;
  for (int n : {8, 16, 32}) {
    const TorusGrid g(1, n);
    for (int i = 0; i < 20; ++i) {
      const SymbolField a = random_trig_symbol(g, rng);
      const CMatrix d = op_tau1(a).matrix().adjoint() - op_tau0(a.conj()).matrix();
      adj = std::max(adj, d.cwiseAbs().maxCoeff());
    }
  }
  using Make = std::function<SymbolField(const TorusGrid&)>;
  const std::vector<Make> fams = {
      [](const TorusGrid& g) { return families::bessel_power(g, 2.0); },
      [](const TorusGrid& g) { return families::perturbed_elliptic(g, 2.0, 0.5, 0.0, 0.25); },
      [](const TorusGrid& g) { return families::zero_order(g, 0.25); },
      [](const TorusGrid& g) { return families::negative_order(g, -2.0, 0.25); }};
  bool bounded = true;
  for (const auto& make : fams) {
    double lo = INFINITY, hi = 0.0;
    for (int n : {8, 16, 32}) {
      const SymbolField a = make(TorusGrid(1, n));
      const double m = a.class_spec().m;
      const double v = sobolev_operator_norm(op_tau0(a) - op_tau1(a), 0.0, -m + 1.0);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi <= 1e-10) continue;
    worst_ratio = std::max(worst_ratio, hi / lo);
    bounded = bounded && hi / lo <= 2.0;
  }
  return {10, "adjoint and quantization contracts", adj <= 1e-12 && bounded,
          "adjoint " + detail::sci(adj) + " (<= 1e-12), tau-difference growth over N " + detail::fix(worst_ratio) +
              " (<= 2)",
          sw.seconds()};
}

// Runs one criterion; an exception is a failure carrying its message.
inline CriterionResult guarded(int id, const std::string& name, const std::function<CriterionResult()>& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return {id, name, false, std::string("error: ") + e.what(), 0.0};
  }
}

inline std::vector<CriterionResult> run_all() {
  std::vector<CriterionResult> out;
  out.push_back(guarded(1, "discrete trace identity", [] { return trace_identity(); }));
  out.push_back(guarded(2, "functional calculus oracle", funcalc_oracle));
  out.push_back(guarded(3, "power group law", power_group));
  out.push_back(guarded(4, "ray of minimal growth", minimal_growth));
  out.push_back(guarded(5, "parametrix residual decay", residual_decay));
  out.push_back(guarded(6, "expansion improvement", expansion_improvement));
  out.push_back(guarded(7, "heat trace", heat_trace));
  out.push_back(guarded(8, "spectral zeta", zeta));
  out.push_back(guarded(9, "Szego log-determinant", szego));
  out.push_back(guarded(10, "adjoint and quantization contracts", [] { return quantization_contracts(); }));
  return out;
}

inline std::string format_line(const CriterionResult& r) {
  return std::string(r.pass ? "PASS" : "FAIL") + " criterion " + std::to_string(r.id) + " " + r.name + ": " + r.detail;
}

inline RunReport to_report(const std::vector<CriterionResult>& results) {
  RunReport rep("all");
  for (const auto& r : results) {
    rep.results()["criteria"].push_back(
        {{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}, {"seconds", r.seconds}});
    rep.gate("criterion_" + std::to_string(r.id), r.pass ? 1.0 : 0.0, ">=", 1.0);
    rep.timing("criterion_" + std::to_string(r.id), r.seconds);
  }
  return rep;
}

}  // namespace psido::acceptance
