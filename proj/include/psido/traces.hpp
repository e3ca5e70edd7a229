#pragma once

// Trace functional on lattice symbols and its three applications: log-determinants of I + A,
// heat traces and spectral zeta values, each evaluated from the symbol and from the spectrum.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "psido/calculus.hpp"
#include "psido/errors.hpp"
#include "psido/funcalc.hpp"
#include "psido/operator.hpp"
#include "psido/stats.hpp"
#include "psido/symbol.hpp"

namespace psido {

// N^{-n} sum_j sum_eta a(x_j, eta).
inline cplx trace_symbol(const TorusGrid& g, const std::vector<cplx>& samples) {
  if (samples.size() != g.size() * g.size()) throw ShapeError("trace_symbol: wrong number of samples");
  cplx s = 0.0;
  for (const cplx v : samples) s += v;
  return s / double(g.size());
}
inline cplx trace_symbol(const SymbolField& s) { return trace_symbol(s.grid(), s.samples()); }

// x_j -> N^{-n} sum_eta a(x_j, eta), the diagonal of op_tau0(a).
inline std::vector<cplx> kernel_diagonal(const SymbolField& s) {
  const std::size_t m = s.grid().size();
  std::vector<cplx> d(m, 0.0);
  for (std::size_t xi = 0; xi < m; ++xi) {
    for (std::size_t ei = 0; ei < m; ++ei) d[xi] += s.sample(xi, ei);
    d[xi] /= double(m);
  }
  return d;
}

struct TraceReport {
  std::string kind;
  cplx operator_side = 0.0;
  cplx symbol_leading = 0.0;          // depth 0: f(a)
  cplx symbol_side = 0.0;             // full expansion
  std::vector<cplx> by_depth;         // trace of the expansion truncated at each Neumann depth
  std::optional<cplx> contour_side;   // zeta only
  double discrepancy() const { return std::abs(symbol_side - operator_side); }
  double discrepancy_leading() const { return std::abs(symbol_leading - operator_side); }
};

namespace detail {

inline TraceReport expansion_traces(const ParametrixExpansion& px, const HoloFunction& f, std::string kind) {
  TraceReport r;
  r.kind = std::move(kind);
  for (int d = 0; d <= px.J; ++d) r.by_depth.push_back(trace_symbol(f_of_symbol_expansion(px, f, d)));
  r.symbol_leading = r.by_depth.front();
  r.symbol_side = r.by_depth.back();
  return r;
}

inline double fitted_order(const std::vector<double>& t, const std::vector<double>& err) {
  for (double e : err)
    if (!(e > 0)) return std::numeric_limits<double>::quiet_NaN();
  return loglog_slope(t, err);
}

}  // namespace detail

// log det via LU: sum log U_ii plus i pi per row swap. Imaginary part defined modulo 2 pi.
inline cplx logdet_lu(const CMatrix& m) {
  Eigen::PartialPivLU<CMatrix> lu(m);
  cplx s = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) s += std::log(lu.matrixLU()(i, i));
  if (lu.permutationP().determinant() < 0) s += cplx(0.0, kPi);
  return s;
}

// Disk sector enclosing the lattice values of a zero-order symbol with a 50% margin.
inline SectorSpec enclosing_disk_sector(const SymbolField& s) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, ilo = lo, ihi = -lo;
  for (const cplx v : s.samples()) {
    lo = std::min(lo, v.real());
    hi = std::max(hi, v.real());
    ilo = std::min(ilo, v.imag());
    ihi = std::max(ihi, v.imag());
  }
  const cplx c(0.5 * (lo + hi), 0.5 * (ilo + ihi));
  double r = 0.0;
  for (const cplx v : s.samples()) r = std::max(r, std::abs(v - c));
  return SectorSpec::finite_disk(c, 1.5 * r + 1e-3);
}

// log det(I + Op(a)) from the eigenvalues and from the symbol of log(1 + a).
inline TraceReport szego_logdet(const SymbolField& a, int k = 2, int j = 2) {
  const TorusGrid& g = a.grid();
  const double order = a.class_spec().m;
  if (!(order < -g.dim()))
    throw PreconditionError("log-determinant needs order < -n: got order " + std::to_string(order) +
                            ", n = " + std::to_string(g.dim()));
  const OperatorMatrix op = op_tau0(a);
  cplx opside = 0.0;
  for (const cplx mu : op.eigenvalues().reshaped()) {
    const cplx w = 1.0 + mu;
    if (std::abs(w) < 1e-12) throw SpectrumCollisionError("eigenvalue at -1: det(I + A) = 0");
    if (w.real() <= 0 && std::abs(w.imag()) <= 1e-12)
      throw BranchCutError("eigenvalue " + detail::fmt_cplx(mu) + " puts 1 + mu on the branch cut of log");
    opside += std::log(w);
  }
  const SymbolField b = families::constant(g, 1.0) + a;
  const ParametrixExpansion px = build_parametrix(b, enclosing_disk_sector(b), k, j);
  TraceReport r = detail::expansion_traces(px, HoloFunction::log(), "szego");
  r.operator_side = opside;
  return r;
}

struct HeatSweep {
  std::vector<double> t;
  std::vector<TraceReport> rows;
  double order_leading = 0.0;    // log-log slope of discrepancy_leading against t
  double order_corrected = 0.0;  // same for the full expansion
};

// tr e^{-tA} from the eigenvalues against the trace of the heat expansion.
inline HeatSweep heat_trace_sweep(const SymbolField& a, const std::vector<double>& ts, int k = 2, int j = 2) {
  const OperatorMatrix op = op_tau0(a);
  const auto pr = positive_real_check(op);
  if (!(pr.margin > 0))
    throw PreconditionError("heat trace needs spectrum in Re > 0 with a positive margin; min Re = " +
                            std::to_string(pr.margin));
  for (double t : ts)
    if (!(t > 0 && t <= 1)) throw DomainError("heat trace times must lie in (0, 1], got " + std::to_string(t));
  const ParametrixExpansion px = build_parametrix(a, SectorSpec::keyhole(), k, j);
  HeatSweep out;
  out.t = ts;
  std::vector<double> el, ec;
  for (double t : ts) {
    TraceReport r = detail::expansion_traces(px, HoloFunction::exp_scaled(t), "heat");
    for (const cplx mu : op.eigenvalues().reshaped()) r.operator_side += std::exp(-t * mu);
    el.push_back(r.discrepancy_leading());
    ec.push_back(r.discrepancy());
    out.rows.push_back(std::move(r));
  }
  if (ts.size() >= 2) {
    out.order_leading = detail::fitted_order(ts, el);
    out.order_corrected = detail::fitted_order(ts, ec);
  }
  return out;
}

struct ZetaReport {
  cplx z;
  TraceReport trace;
  // The same symbol integral without the (2 pi)^{-n} normalization, and the factor between them.
  cplx symbol_without_prefactor = 0.0;
  double prefactor_ratio = 1.0;
};

// zeta(A, -z) = tr A^{-z}: eigenvalue sum, trace of the contour power and symbol expansion.
inline ZetaReport zeta_value(const SymbolField& a, cplx z, int k = 2, int j = 2,
                             const ContourSpec& c = ContourSpec::keyhole(), const QuadratureSpec& q = {}) {
  const TorusGrid& g = a.grid();
  const double m = a.class_spec().m;
  if (!(z.real() * m > g.dim()))
    throw PreconditionError("zeta needs Re(z) m > n: Re(z) m = " + std::to_string(z.real() * m) +
                            ", n = " + std::to_string(g.dim()));
  const OperatorMatrix op = op_tau0(a);
  cplx opside = 0.0;
  for (const cplx mu : op.eigenvalues().reshaped()) {
    if (mu.real() <= 0 && std::abs(mu.imag()) <= 1e-12 * std::max(1.0, std::abs(mu)))
      throw BranchCutError("eigenvalue " + detail::fmt_cplx(mu) + " lies on the branch cut of lambda^{-z}");
    opside += std::exp(-z * std::log(mu));
  }
  const ParametrixExpansion px = build_parametrix(a, SectorSpec::keyhole(), k, j);
  ZetaReport out;
  out.z = z;
  out.trace = detail::expansion_traces(px, HoloFunction::power(-z), "zeta");
  out.trace.operator_side = opside;
  out.trace.contour_side = complex_power(op, -z, c, q).trace();
  out.prefactor_ratio = std::pow(2 * kPi, g.dim());
  out.symbol_without_prefactor = out.prefactor_ratio * out.trace.symbol_side;
  return out;
}

}  // namespace psido
