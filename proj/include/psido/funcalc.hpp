#pragma once

// Three routes to f(A): Dunford-Riesz quadrature with dense resolvent solves, the dense
// eigendecomposition oracle, and the termwise Cauchy integral of the parametrix expansion.

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/LU>

#include "psido/calculus.hpp"
#include "psido/contour.hpp"
#include "psido/errors.hpp"
#include "psido/holo_function.hpp"
#include "psido/laurent.hpp"
#include "psido/operator.hpp"

namespace psido {

struct FuncalcOptions {
  double tail_tolerance = 1e-12;  // truncation_bound target for automatic R
};

struct ContourRun {
  OperatorMatrix value;
  ContourSpec contour;      // resolved (epsilon, R, loop geometry)
  QuadratureSpec quadrature;
  std::size_t nodes = 0;
  std::size_t solves = 0;   // distinct resolvents
  int split_power = 0;      // k of f = (f lambda^{-k}) lambda^k
};

namespace detail {

inline std::string fmt_cplx(cplx z) {
  return std::to_string(z.real()) + (z.imag() < 0 ? "" : "+") + std::to_string(z.imag()) + "i";
}

inline double dist_to_cut(cplx c) { return c.real() > 0 ? std::abs(c) : std::abs(c.imag()); }

// (1/2 pi i) sum w f(lambda) (A - lambda)^{-1}; nodes sharing a point share one solve.
inline std::pair<CMatrix, std::size_t> contour_sum(const OperatorMatrix& a, const HoloFunction& f,
                                                   const std::vector<ContourNode>& nodes) {
  std::map<std::pair<double, double>, cplx> coef;
  for (const auto& n : nodes) coef[{n.lambda.real(), n.lambda.imag()}] += n.weight * f(n.lambda, n.log_lambda);
  const auto m = a.matrix().rows();
  CMatrix acc = CMatrix::Zero(m, m);
  const CMatrix id = CMatrix::Identity(m, m);
  for (const auto& [p, c] : coef) {
    if (c == 0.0) continue;
    const cplx lam(p.first, p.second);
    Eigen::PartialPivLU<CMatrix> lu(a.shifted(lam).matrix());
    acc += c * lu.solve(id);
  }
  acc /= 2 * kPi * kI;
  return {acc, coef.size()};
}

inline CMatrix matrix_power_int(const CMatrix& a, int k) {
  CMatrix r = CMatrix::Identity(a.rows(), a.cols());
  for (int i = 0; i < k; ++i) r = r * a;
  return r;
}

}  // namespace detail

// Fills automatic epsilon / R / loop geometry and runs the spectral pre-check.
inline ContourSpec resolve_contour(const OperatorMatrix& a, const HoloFunction& f, ContourSpec c, double tail_tol) {
  const auto& eig = a.eigenvalues();
  if (c.kind == ContourSpec::Kind::finite_loop) {
    if (c.auto_loop_geometry()) c = auto_finite_loop(eig);
    if (f.has_branch_cut() && detail::dist_to_cut(c.center) <= c.radius)
      throw BranchCutError("loop |lambda - " + detail::fmt_cplx(c.center) + "| = " + std::to_string(c.radius) +
                           " meets the branch cut (-inf, 0] of " + f.tag());
    c.validate();
    check_spectrum_against_contour(eig, c);
    return c;
  }
  if (f.kind() == HoloFunction::Kind::log)
    throw BranchCutError("log is evaluated over a finite loop; the keyhole runs along its branch cut");
  if (c.auto_epsilon()) c.epsilon = auto_epsilon(eig);
  if (!c.R) {
    const Growth& g = f.growth();
    TailDecay d;
    if (g.kind == Growth::Kind::exponential_decay) {
      if (c.kind != ContourSpec::Kind::exponential)
        throw DomainError(f.tag() + " grows along the keyhole rays; use the exponential contour");
      d = TailDecay::exponential(g.rate);
    } else if (g.kind == Growth::Kind::power_bound) {
      d = TailDecay::power(g.s);
    } else {
      throw DomainError("no truncation rule for the growth of " + f.tag());
    }
    if (d.kind == TailDecay::Kind::power && c.kind == ContourSpec::Kind::exponential)
      c.R = std::pow(tail_tol * std::abs(d.value), 1.0 / d.value);
    else
      c.R = truncation_bound(c, d, tail_tol);
    c.R = std::max(*c.R, 4.0 * c.epsilon);
  }
  c.validate();
  check_spectrum_against_contour(eig, c);
  return c;
}

inline ContourRun f_of_A_contour_run(const OperatorMatrix& a, const HoloFunction& f, const ContourSpec& c,
                                     const QuadratureSpec& q = {}, const FuncalcOptions& opt = {}) {
  HoloFunction g = f;
  int k = 0;
  if (c.kind == ContourSpec::Kind::keyhole && f.growth().kind == Growth::Kind::power_bound && f.growth().s >= 0) {
    k = int(std::ceil(f.growth().s)) + 1;
    g = f.times_power(-k);
  }
  ContourSpec rc = resolve_contour(a, g, c, opt.tail_tolerance);
  QuadratureSpec rq = q;
  if (rc.kind == ContourSpec::Kind::finite_loop)
    rq.nodes_on_circle = std::max(q.nodes_on_circle, loop_node_count(a.eigenvalues(), rc));
  const auto nodes = nodes_and_weights(rc, rq);
  auto [m, solves] = detail::contour_sum(a, g, nodes);
  if (k > 0) m = detail::matrix_power_int(a.matrix(), k) * m;
  return {OperatorMatrix(a.grid(), m, f.tag() + "(" + a.provenance() + ")"), rc, rq, nodes.size(), solves, k};
}

inline OperatorMatrix f_of_A_contour(const OperatorMatrix& a, const HoloFunction& f, const ContourSpec& c,
                                     const QuadratureSpec& q = {}, const FuncalcOptions& opt = {}) {
  return f_of_A_contour_run(a, f, c, q, opt).value;
}

// Contour matching the decay of f: exponential for e^{-t lambda}, finite loop for log, keyhole otherwise.
inline ContourSpec default_contour_for(const HoloFunction& f) {
  if (f.growth().kind == Growth::Kind::exponential_decay) return ContourSpec::exponential();
  if (f.kind() == HoloFunction::Kind::log) return ContourSpec::auto_loop();
  return ContourSpec::keyhole();
}

// V f(D) V^{-1}.
inline OperatorMatrix f_of_A_spectral(const OperatorMatrix& a, const HoloFunction& f) {
  const SpectralData& sd = a.spectrum();
  CVector fd(sd.eigenvalues.size());
  for (Eigen::Index i = 0; i < fd.size(); ++i) {
    const cplx mu = sd.eigenvalues(i);
    if (f.has_branch_cut() && mu.real() <= 0 && std::abs(mu.imag()) <= 1e-12 * std::max(1.0, std::abs(mu)))
      throw BranchCutError("eigenvalue " + detail::fmt_cplx(mu) + " lies on the branch cut of " + f.tag());
    fd(i) = f(mu);
    if (!std::isfinite(fd(i).real()) || !std::isfinite(fd(i).imag()))
      throw DomainError(f.tag() + " is not finite at eigenvalue " + detail::fmt_cplx(mu));
  }
  CMatrix m = sd.vectors * fd.asDiagonal() * sd.vectors_inverse;
  return OperatorMatrix(a.grid(), m, f.tag() + "_spectral(" + a.provenance() + ")");
}

inline double relative_frobenius(const OperatorMatrix& x, const OperatorMatrix& ref) {
  return (x.matrix() - ref.matrix()).norm() / ref.matrix().norm();
}

// Symbol of f(A) from the Cauchy integral of the expansion truncated at Neumann depth `depth`
// (default: all J terms). Order m Re(s) for power-bounded f, 0 otherwise.
inline SymbolField f_of_symbol_expansion(const ParametrixExpansion& px, const HoloFunction& f, int depth = -1) {
  const ResolventPolynomial& terms = depth < 0 ? px.terms : px.depth(depth);
  GridField v = cauchy_apply(terms, f);
  std::vector<cplx> samples(v.points());
  for (std::size_t p = 0; p < samples.size(); ++p) samples[p] = v.value(p);
  const auto& cs = px.base.class_spec();
  const double order = f.growth().kind == Growth::Kind::power_bound ? cs.m * f.growth().s : 0.0;
  return SymbolField::from_samples(px.base.grid(), SymbolClassSpec::make(order, cs.rho, cs.delta),
                                   f.tag() + "[" + px.base.name() + "]", std::move(samples));
}

// A^z; for Re z >= 0 the keyhole route applies A^k A^{z-k}.
inline OperatorMatrix complex_power(const OperatorMatrix& a, cplx z, const ContourSpec& c = ContourSpec::keyhole(),
                                    const QuadratureSpec& q = {}, const FuncalcOptions& opt = {}) {
  return f_of_A_contour(a, HoloFunction::power(z), c, q, opt);
}

// e^{-tA} over the exponential contour.
inline OperatorMatrix heat_operator(const OperatorMatrix& a, double t,
                                    const ContourSpec& c = ContourSpec::exponential(), const QuadratureSpec& q = {},
                                    const FuncalcOptions& opt = {}) {
  if (c.kind != ContourSpec::Kind::exponential) throw DomainError("heat_operator needs the exponential contour");
  const auto pr = positive_real_check(a);
  if (!(pr.margin > 0))
    throw PreconditionError("heat_operator needs spectrum in Re > 0 with a positive margin; min Re = " +
                            std::to_string(pr.margin));
  return f_of_A_contour(a, HoloFunction::exp_scaled(t), c, q, opt);
}

// log A over a finite loop avoiding (-inf, 0].
inline OperatorMatrix log_operator(const OperatorMatrix& a, const ContourSpec& loop = ContourSpec::auto_loop(),
                                   const QuadratureSpec& q = {}) {
  if (loop.kind != ContourSpec::Kind::finite_loop) throw DomainError("log_operator needs a finite loop");
  return f_of_A_contour(a, HoloFunction::log(), loop, q);
}

struct PowerGroupReport {
  double group_residual = 0.0;    // ||A^s A^t - A^{s+t}||_F / ||A^{s+t}||_F
  double inverse_residual = 0.0;  // ||A^s A^{-s} - I||_F / ||I||_F
};

inline PowerGroupReport power_group_check(const OperatorMatrix& a, cplx s, cplx t,
                                          const ContourSpec& c = ContourSpec::keyhole(), const QuadratureSpec& q = {}) {
  const OperatorMatrix as = complex_power(a, s, c, q), at = complex_power(a, t, c, q);
  const OperatorMatrix ast = complex_power(a, s + t, c, q), ams = complex_power(a, -s, c, q);
  const OperatorMatrix id = OperatorMatrix::identity(a.grid());
  return {relative_frobenius(as * at, ast), relative_frobenius(as * ams, id)};
}

// lambda^z log(lambda), derivatives by the Leibniz rule.
inline HoloFunction power_times_log(cplx z) {
  const HoloFunction pw = HoloFunction::power(z), lg = HoloFunction::log();
  auto fn = [pw, lg](int p, cplx lam, cplx loglam) {
    cplx acc = 0.0;
    double binom = 1.0;
    for (int i = 0; i <= p; ++i) {
      acc += binom * pw.derivative(i, lam, loglam) * lg.derivative(p - i, lam, loglam);
      binom = binom * (p - i) / (i + 1);
    }
    return acc;
  };
  // The log factor is covered by a small margin on the exponent.
  return HoloFunction::custom("power_log:z=" + HoloFunction::power(z).tag().substr(8), fn,
                              {Growth::Kind::power_bound, z.real() + 0.05, 0.0}, true);
}

struct AnalyticityReport {
  double relative_error = 0.0;  // central difference of z -> A^z vs contour of lambda^z log lambda
  double step = 0.0;
};

inline AnalyticityReport analyticity_check(const OperatorMatrix& a, cplx z0 = -1.0, double h = 1e-4,
                                           const QuadratureSpec& q = {}) {
  const OperatorMatrix plus = complex_power(a, z0 + h, ContourSpec::keyhole(), q);
  const OperatorMatrix minus = complex_power(a, z0 - h, ContourSpec::keyhole(), q);
  const CMatrix fd = (plus.matrix() - minus.matrix()) / (2 * h);
  const OperatorMatrix exact = f_of_A_contour(a, power_times_log(z0), ContourSpec::keyhole(), q);
  return {(fd - exact.matrix()).norm() / exact.matrix().norm(), h};
}

}  // namespace psido
