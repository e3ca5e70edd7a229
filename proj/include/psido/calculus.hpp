#pragma once

// Symbolic calculus on the flat torus: truncated composition, the parameter-dependent
// parametrix of a - lambda, and the numerical checks of its estimates.

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "psido/errors.hpp"
#include "psido/laurent.hpp"
#include "psido/operator.hpp"
#include "psido/stats.hpp"
#include "psido/symbol.hpp"

namespace psido {

namespace detail {

inline double binom(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

// All q' <= q componentwise.
inline std::vector<MultiIndex> sub_indices(const MultiIndex& q) {
  std::vector<MultiIndex> v;
  for (int i = 0; i <= q[0]; ++i)
    for (int j = 0; j <= q[1]; ++j) v.push_back({i, j});
  return v;
}

}  // namespace detail

// sigma ~ sum_{|alpha| <= K} (1/alpha!) d_eta^alpha a . D_x^alpha b, carried with exact jets.
inline SymbolField compose_symbols(const SymbolField& a, const SymbolField& b, int k) {
  if (k < 0 || k > 3) throw UnsupportedOrderError("compose_symbols supports 0 <= K <= 3, got " + std::to_string(k));
  if (a.grid() != b.grid()) throw ShapeError("compose_symbols: grids differ");
  const TorusGrid& g = a.grid();
  const int dim = g.dim();
  const auto alphas = multi_indices_up_to(dim, k);
  SymbolField::JetFn jf = [a, b, alphas, dim](const Point& x, const Point& eta, int order, const MultiIndex& q) {
    Jet acc(dim, order);
    for (const MultiIndex& al : alphas) {
      const cplx w = std::pow(-kI, total_order(al)) / multi_factorial(al);
      for (const MultiIndex& qp : detail::sub_indices(q)) {
        const MultiIndex qb{q[0] - qp[0] + al[0], q[1] - qp[1] + al[1]};
        Jet db = b.eta_jet(x, eta, order, qb);
        if (db.value() == 0.0 && order == 0) continue;
        const double c = detail::binom(q[0], qp[0]) * detail::binom(q[1], qp[1]);
        Jet da = a.eta_jet(x, eta, order + total_order(al), qp).derivative(al);
        acc += (w * c) * (da * db);
      }
    }
    return acc;
  };
  SymbolField::Evaluator ev = [jf](const Point& x, const Point& eta) { return jf(x, eta, 0, {0, 0}).value(); };
  const auto& ca = a.class_spec();
  const auto& cb = b.class_spec();
  auto spec = SymbolClassSpec::make(ca.m + cb.m, std::min(ca.rho, cb.rho), std::max(ca.delta, cb.delta));
  return SymbolField(g, spec, "(" + a.name() + ")#" + std::to_string(k) + "(" + b.name() + ")", ev, jf,
                     a.x_independent() && b.x_independent());
}

// Orthogonal projector onto the Fourier modes with |eta_i| <= band.
inline CMatrix band_projector(const TorusGrid& g, int band) {
  CVector mask = CVector::Zero(Eigen::Index(g.size()));
  for (std::size_t e = 0; e < g.size(); ++e) {
    const MultiIndex eta = g.eta_lattice(e);
    mask(Eigen::Index(e)) = (std::abs(eta[0]) <= band && std::abs(eta[1]) <= band) ? 1.0 : 0.0;
  }
  return g.idft_matrix() * mask.asDiagonal() * g.dft_matrix();
}

struct RemainderOptions {
  double s = 0.0;
  std::optional<double> t;  // default -(m1 + m2)
  // Inputs restricted to |eta_i| <= band, default N/4. The discrete product wraps frequencies
  // at the edge of the lattice; the continuum expansion has no such effect.
  std::optional<int> input_band;
};

// H^s -> H^t norm of Op(a #_K b) - Op(a) Op(b) on band-limited inputs.
inline double composition_remainder_norm(const SymbolField& a, const SymbolField& b, int k, RemainderOptions opt = {}) {
  const TorusGrid& g = a.grid();
  SymbolField c = compose_symbols(a, b, k);
  OperatorMatrix diff = op_tau0(c) - op_tau0(a) * op_tau0(b);
  const int band = opt.input_band.value_or(g.points() / 4);
  OperatorMatrix restricted(g, diff.matrix() * band_projector(g, band), diff.provenance());
  const double t = opt.t.value_or(-(a.class_spec().m + b.class_spec().m));
  return sobolev_operator_norm(restricted, opt.s, t);
}

struct ParametrixExpansion {
  SymbolField base;
  SectorSpec sector;
  int K = 2;
  int J = 2;
  std::shared_ptr<const LaurentContext> context;
  ResolventPolynomial r;                      // sigma(b0 (a - lambda)) - 1
  ResolventPolynomial terms;                  // accumulated a^sharp
  ResolventPolynomial residual;               // terms # (a - lambda) - 1
  std::vector<ResolventPolynomial> partial;   // partial[j] = sum_{i <= j} T_i
  EllipticityReport certificate;

  // Expansion truncated at depth j <= J.
  const ResolventPolynomial& depth(int j) const {
    if (j < 0 || j > J) throw DomainError("ParametrixExpansion::depth out of range");
    return partial[std::size_t(j)];
  }
};

// b0 = (a - lambda)^{-1}, r = b0 #_K (a - lambda) - 1, T_j = (-r) #_K T_{j-1}, terms = sum_{j <= J} T_j.
// The jet order 3K + extra_jet_order leaves extra_jet_order eta-derivatives on the terms after
// all compositions, for the symbol estimates.
inline ParametrixExpansion build_parametrix(const SymbolField& a, const SectorSpec& sector, int k, int j,
                                            int extra_jet_order = 2) {
  if (k < 0 || k > 3 || j < 0 || j > 3)
    throw UnsupportedOrderError("build_parametrix supports K, J in 0..3, got K=" + std::to_string(k) +
                                " J=" + std::to_string(j));
  EllipticityReport cert;
  try {
    cert = parameter_ellipticity_check(a, sector);
  } catch (const DegenerateSampleError& e) {
    throw PreconditionError(std::string("parameter-ellipticity certificate failed: ") + e.what());
  }
  if (!cert.finite()) throw PreconditionError("parameter-ellipticity certificate is not finite");
  auto ctx = make_laurent_context(a, 3 * k + extra_jet_order);
  const auto b0 = ResolventPolynomial::from_resolvent(ctx);
  const auto am = ResolventPolynomial::shifted_base(ctx);
  const auto unit = ResolventPolynomial::unit(ctx);
  ResolventPolynomial r = compose_truncated(b0, am, k) - unit;
  ResolventPolynomial neg_r = cplx(-1.0) * r;
  std::vector<ResolventPolynomial> partial{b0};
  ResolventPolynomial t = b0, sum = b0;
  for (int d = 1; d <= j; ++d) {
    t = compose_truncated(neg_r, t, k);
    sum += t;
    partial.push_back(sum);
  }
  ResolventPolynomial residual = compose_truncated(sum, am, k) - unit;
  return {a, sector, k, j, ctx, r, sum, residual, partial, cert};
}

struct SymbolEstimateReport {
  double constant_k0 = 0.0;  // lambda-derivative order 0
  double constant_k1 = 0.0;  // lambda-derivative order 1
  bool finite() const { return std::isfinite(constant_k0) && std::isfinite(constant_k1); }
};

// sup |d_lambda^k d_eta^alpha d_x^q a^sharp| (|lambda|^{1/m} + <eta>)^{m(k+1)} <eta>^{-delta|q| + rho|alpha|}.
inline SymbolEstimateReport parametrix_symbol_estimates(const ParametrixExpansion& px, const std::vector<cplx>& lambdas,
                                                        const MultiIndex& alpha, const MultiIndex& q) {
  if (total_order(alpha) + total_order(q) > 2)
    throw UnsupportedOrderError("parametrix_symbol_estimates supports |alpha| + |q| <= 2");
  if (px.terms.jet_order() < total_order(alpha))
    throw UnsupportedOrderError("expansion carries only " + std::to_string(px.terms.jet_order()) +
                                " further eta-derivatives");
  const auto& c = px.base.class_spec();
  const TorusGrid& g = px.base.grid();
  const ResolventPolynomial d0 = px.terms.deriv_eta(alpha).deriv_x(q);
  const ResolventPolynomial d1 = d0.deriv_lambda();
  SymbolEstimateReport rep;
  const std::size_t m = g.size();
  for (const cplx lam : lambdas) {
    const double al = std::abs(lam);
    const auto v0 = d0.eval(lam);
    const auto v1 = d1.eval(lam);
    for (std::size_t xi = 0; xi < m; ++xi)
      for (std::size_t ei = 0; ei < m; ++ei) {
        const double br = bracket(g.eta_point(ei));
        const double base = c.m > 0 ? std::pow(std::pow(al, 1.0 / c.m) + br, c.m) : 1.0 + al;
        const double w = std::pow(br, -c.delta * total_order(q) + c.rho * total_order(alpha));
        const std::size_t p = xi * m + ei;
        rep.constant_k0 = std::max(rep.constant_k0, std::abs(v0[p]) * base * w);
        rep.constant_k1 = std::max(rep.constant_k1, std::abs(v1[p]) * base * base * w);
      }
  }
  return rep;
}

struct SweepRow {
  double lambda_modulus = 0.0;
  double residual_norm = 0.0;
  double resolvent_norm = 0.0;
  double product = 0.0;
};

struct ResidualSweep {
  std::vector<SweepRow> rows;
  double slope = 0.0;  // least-squares slope of log residual_norm against log |lambda|
};

inline std::vector<double> default_lambda_moduli() { return logspace(10.0, 1e4, 13); }

// Smallest singular value of A - lambda I; throws when lambda hits the spectrum.
inline double resolvent_norm(const OperatorMatrix& a, cplx lambda) {
  Eigen::BDCSVD<CMatrix> svd(a.shifted(lambda).matrix());
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (!(smin > 1e-14 * std::max(1.0, sv(0))))
    throw SpectrumCollisionError("lambda = " + std::to_string(lambda.real()) + "+" + std::to_string(lambda.imag()) +
                                 "i lies on the spectrum");
  return 1.0 / smin;
}

struct SweepOptions {
  int depth = -1;  // Neumann depth, default J
  // Inputs restricted to |eta_i| <= band, default N/4; band >= N/2 keeps the whole lattice.
  // At eta = -N/2 the product Op(a) e^{i x eta} leaves the lattice and wraps to the opposite
  // edge, which no truncation of the expansion can follow.
  std::optional<int> input_band;
};

// ||(Op(a^sharp(lambda)) (Op(a) - lambda) - I) P|| along lambda = -r, P the band projector.
inline ResidualSweep residual_decay_sweep(const ParametrixExpansion& px, const std::vector<double>& moduli,
                                          SweepOptions opt = {}) {
  const TorusGrid& g = px.base.grid();
  const ResolventPolynomial& terms = opt.depth < 0 ? px.terms : px.depth(opt.depth);
  const int band = opt.input_band.value_or(g.points() / 4);
  const bool restrict_band = band < g.points() / 2;
  const CMatrix proj = restrict_band ? band_projector(g, band) : CMatrix();
  OperatorMatrix a = op_tau0(px.base);
  ResidualSweep out;
  std::vector<double> xs, ys;
  for (double r : moduli) {
    const cplx lam = -r;
    const auto sym = terms.eval(lam);
    OperatorMatrix b = op_tau0(g, sym, "Op(a#)");
    CMatrix res = b.matrix() * a.shifted(lam).matrix();
    res.diagonal().array() -= 1.0;
    if (restrict_band) res = res * proj;
    SweepRow row;
    row.lambda_modulus = r;
    row.residual_norm = operator_norm(res);
    row.resolvent_norm = resolvent_norm(a, lam);
    row.product = r * row.resolvent_norm;
    out.rows.push_back(row);
    xs.push_back(r);
    ys.push_back(std::max(row.residual_norm, std::numeric_limits<double>::min()));
  }
  out.slope = xs.size() >= 2 ? loglog_slope(xs, ys) : 0.0;
  return out;
}

struct MinimalGrowthReport {
  std::vector<SweepRow> rows;  // residual_norm unused
  double max_product = 0.0;
  bool bounded(double bound) const { return max_product <= bound; }
};

// |lambda| ||(A - lambda)^{-1}|| along lambda = -r.
inline MinimalGrowthReport ray_minimal_growth_check(const OperatorMatrix& a, const std::vector<double>& moduli) {
  MinimalGrowthReport rep;
  for (double r : moduli) {
    if (!(r > 0)) throw DomainError("ray_minimal_growth_check: moduli must be positive");
    SweepRow row;
    row.lambda_modulus = r;
    row.resolvent_norm = resolvent_norm(a, -r);
    row.product = r * row.resolvent_norm;
    rep.max_product = std::max(rep.max_product, row.product);
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace psido
