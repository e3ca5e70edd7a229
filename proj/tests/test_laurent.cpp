#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "psido/calculus.hpp"
#include "psido/laurent.hpp"
#include "psido/operator.hpp"
#include "test_util.hpp"

using namespace psido;
using RP = ResolventPolynomial;

namespace {

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<cplx> times(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  std::vector<cplx> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * b[i];
  return r;
}

std::vector<cplx> plus(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  std::vector<cplx> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

GridField random_field(const TorusGrid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  GridField f(g, 0);
  for (std::size_t p = 0; p < f.points(); ++p) f.value_ref(p) = {d(rng), d(rng)};
  return f;
}

// 1 / (a(x, eta) - lambda) by direct evaluation.
cplx direct_resolvent(const SymbolField& a, const Point& x, const Point& eta, cplx lam) { return 1.0 / (a(x, eta) - lam); }

}  // namespace

TEST(Laurent, FromResolventConstantBases) {
  TorusGrid g(1, 8);
  auto one = make_laurent_context(families::constant(g, 1.0), 2);
  for (cplx v : RP::from_resolvent(one).eval(-1.0)) EXPECT_NEAR(std::abs(v - 0.5), 0, 1e-15);
  auto zero = make_laurent_context(families::constant(g, 0.0), 2);
  for (cplx v : RP::from_resolvent(zero).eval(cplx(0, 2))) EXPECT_NEAR(std::abs(v - cplx(0, 0.5)), 0, 1e-15);
}

TEST(Laurent, FromResolventMatchesPointwise) {
  TorusGrid g(1, 16);
  auto a = families::perturbed_elliptic(g, 2, 0.5, 0, 0.25);
  auto ctx = make_laurent_context(a, 2);
  auto p = RP::from_resolvent(ctx);
  EXPECT_EQ(p.max_pole_order(), 1);
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> pick(0, g.size() - 1);
  std::uniform_real_distribution<double> mod(0.5, 100), ang(0.8 * kPi, kPi);
  for (int i = 0; i < 20; ++i) {
    const std::size_t xi = pick(rng), ei = pick(rng);
    const cplx lam = std::polar(mod(rng), ang(rng) * (i % 2 ? 1 : -1));
    const auto v = p.eval(lam);
    EXPECT_LE(std::abs(v[xi * g.size() + ei] - direct_resolvent(a, g.x_point(xi), g.eta_point(ei), lam)), 1e-12);
  }
}

TEST(Laurent, MultiplyExamples) {
  TorusGrid g(1, 8);
  auto ctx = make_laurent_context(families::perturbed_elliptic(g, 1, 1, 0, 0.2), 2);
  auto p = RP::from_resolvent(ctx);
  auto sq = multiply(p, p);
  ASSERT_EQ(sq.coeffs().size(), 1u);
  EXPECT_EQ(sq.max_pole_order(), 2);
  for (cplx v : sq.coeff(2)->values()) EXPECT_EQ(v, cplx(1.0));
  auto u = multiply(p, RP::unit(ctx));
  EXPECT_LE(max_diff(u.eval(-3.0), p.eval(-3.0)), 0.0);
  auto other = make_laurent_context(families::bessel_power(g, 2), 2);
  EXPECT_THROW(multiply(p, RP::from_resolvent(other)), DomainError);
}

TEST(Laurent, RingAxiomsUnderEval) {
  std::mt19937_64 rng(12);
  TorusGrid g(1, 8);
  auto ctx = make_laurent_context(families::perturbed_elliptic(g, 2, 0.5, 0, 0.25), 0);
  for (int trial = 0; trial < 5; ++trial) {
    RP p = RP::from_field(ctx, 1, random_field(g, rng)) + RP::from_field(ctx, 0, random_field(g, rng));
    RP q = RP::from_field(ctx, 2, random_field(g, rng)) + RP::from_field(ctx, -1, random_field(g, rng));
    RP r = RP::from_field(ctx, 3, random_field(g, rng));
    const cplx lam = std::polar(5.0 + trial, 0.9 * kPi);
    const auto pq = multiply(p, q).eval(lam), qp = multiply(q, p).eval(lam);
    EXPECT_LE(max_diff(pq, qp), 1e-10);
    EXPECT_LE(max_diff(pq, times(p.eval(lam), q.eval(lam))), 1e-10);
    EXPECT_LE(max_diff(multiply(multiply(p, q), r).eval(lam), multiply(p, multiply(q, r)).eval(lam)), 1e-10);
  }
}

TEST(Laurent, DerivEtaChainRule) {
  TorusGrid g(1, 8);
  auto a = families::laplace_plus_one(g);
  auto ctx = make_laurent_context(a, 3);
  auto d = RP::from_resolvent(ctx).deriv_eta(0);
  ASSERT_EQ(d.coeffs().size(), 1u);
  ASSERT_NE(d.coeff(2), nullptr);
  for (std::size_t ei = 0; ei < g.size(); ++ei)
    EXPECT_NEAR(std::abs(d.coeff(2)->value(0, ei) + 2.0 * g.eta_point(ei)[0]), 0, 1e-13);
  // Central difference in eta of 1 / (1 + eta^2 - lambda).
  const cplx lam = -4.0;
  const auto v = d.eval(lam);
  const double h = 1e-4;
  for (std::size_t ei = 0; ei < g.size(); ++ei) {
    const double eta = g.eta_point(ei)[0];
    auto f = [&](double e) { return 1.0 / (1.0 + e * e - lam); };
    EXPECT_NEAR(std::abs(v[ei] - (f(eta + h) - f(eta - h)) / (2 * h)), 0, 1e-8);
  }
}

TEST(Laurent, DerivativesOfConstantBase) {
  TorusGrid g(1, 8);
  auto ctx = make_laurent_context(families::constant(g, 3.0), 2);
  auto p = RP::from_resolvent(ctx);
  EXPECT_TRUE(p.deriv_eta(0).empty());
  EXPECT_TRUE(p.deriv_x(0).empty());
  auto d2 = p.deriv_lambda().deriv_lambda();
  const cplx lam(-1.0, 2.0);
  for (cplx v : d2.eval(lam)) EXPECT_NEAR(std::abs(v - 2.0 / std::pow(3.0 - lam, 3)), 0, 1e-14);
}

TEST(Laurent, DerivXMatchesFiniteDifference) {
  TorusGrid g(1, 16);
  auto a = families::perturbed_elliptic(g, 2, 0.5, 0, 0.25);
  auto ctx = make_laurent_context(a, 2);
  auto d = RP::from_resolvent(ctx).deriv_x(0);
  const cplx lam = -7.0;
  const auto v = d.eval(lam);
  const double h = 1e-5;
  for (std::size_t xi = 0; xi < g.size(); ++xi)
    for (std::size_t ei = 0; ei < g.size(); ++ei) {
      const Point x = g.x_point(xi), eta = g.eta_point(ei);
      const cplx fd = (direct_resolvent(a, {x[0] + h, 0}, eta, lam) - direct_resolvent(a, {x[0] - h, 0}, eta, lam)) / (2 * h);
      ASSERT_LE(std::abs(v[xi * g.size() + ei] - fd), 1e-6);
    }
  auto flat = make_laurent_context(families::bessel_power(g, 2), 2);
  EXPECT_TRUE(RP::from_resolvent(flat).deriv_x(0).empty());
}

TEST(Laurent, MixedPartialsCommute) {
  for (int dim : {1, 2}) {
    TorusGrid g(dim, 8);
    auto ctx = make_laurent_context(families::perturbed_elliptic(g, 2, 0.5, 0, 0.25), 3);
    auto p = RP::from_resolvent(ctx);
    for (int ax = 0; ax < dim; ++ax) {
      const cplx lam = std::polar(20.0, 0.9 * kPi);
      EXPECT_LE(max_diff(p.deriv_x(0).deriv_eta(ax).eval(lam), p.deriv_eta(ax).deriv_x(0).eval(lam)), 1e-8);
    }
  }
}

TEST(Laurent, LeibnizRule) {
  std::mt19937_64 rng(13);
  TorusGrid g(1, 8);
  auto ctx = make_laurent_context(families::perturbed_elliptic(g, 2, 0.5, 0, 0.25), 3);
  auto s1 = random_trig_symbol(g, rng), s2 = random_trig_symbol(g, rng);
  RP p = RP::from_field(ctx, 1, s1.field(3)) + RP::from_resolvent(ctx);
  RP q = RP::from_field(ctx, 2, s2.field(3)) + RP::from_field(ctx, 0, s1.field(3));
  const cplx lam = -9.0;
  const auto lhs = multiply(p, q).deriv_eta(0).eval(lam);
  const auto rhs = plus(times(p.deriv_eta(0).eval(lam), q.eval(lam)), times(p.eval(lam), q.deriv_eta(0).eval(lam)));
  EXPECT_LE(max_diff(lhs, rhs), 1e-6);
  const auto lx = multiply(p, q).deriv_x(0).eval(lam);
  const auto rx = plus(times(p.deriv_x(0).eval(lam), q.eval(lam)), times(p.eval(lam), q.deriv_x(0).eval(lam)));
  EXPECT_LE(max_diff(lx, rx), 1e-6);
}

TEST(Laurent, ComposeTruncatedXIndependentRightFactor) {
  std::mt19937_64 rng(14);
  TorusGrid g(1, 8);
  auto ctx = make_laurent_context(families::bessel_power(g, 2), 4);
  RP p = RP::from_field(ctx, 1, random_trig_symbol(g, rng).field(4));
  RP q = RP::from_resolvent(ctx) + RP::from_field(ctx, 0, families::bessel_power(g, -1).field(4));
  const cplx lam = -2.5;
  for (int k = 0; k <= 3; ++k) EXPECT_LE(max_diff(compose_truncated(p, q, k).eval(lam), multiply(p, q).eval(lam)), 1e-12);
  EXPECT_THROW(compose_truncated(p, q, 4), UnsupportedOrderError);
}

TEST(Laurent, ComposeTruncatedKZeroIsProduct) {
  TorusGrid g(1, 8);
  auto ctx = make_laurent_context(families::perturbed_elliptic(g, 2, 0.5, 0, 0.25), 2);
  RP p = RP::from_resolvent(ctx), q = RP::shifted_base(ctx);
  EXPECT_LE(max_diff(compose_truncated(p, q, 0).eval(-3.0), multiply(p, q).eval(-3.0)), 1e-14);
}

TEST(Laurent, ComposeTruncatedDerivativeTimesMultiplication) {
  const int n = 16;
  TorusGrid g(1, n);
  auto ctx = make_laurent_context(families::constant(g, 1.0), 2);
  RP p = RP::from_field(ctx, 0, testkit::i_eta(g).field(2));
  RP q = RP::from_field(ctx, 0, testkit::exp_ix(g).field(2));
  auto c = compose_truncated(p, q, 1);
  const auto v = c.eval(0.0);
  for (std::size_t xi = 0; xi < g.size(); ++xi)
    for (std::size_t ei = 0; ei < g.size(); ++ei) {
      const cplx want = kI * (g.eta_point(ei)[0] + 1.0) * std::exp(kI * g.x_point(xi)[0]);
      ASSERT_LE(std::abs(v[xi * g.size() + ei] - want), 1e-12);
    }
  // Operator-product oracle on inputs away from the lattice edge.
  const CMatrix proj = band_projector(g, n / 4);
  CMatrix lhs = op_tau0(g, v, "c").matrix() * proj;
  CMatrix rhs = (op_tau0(testkit::i_eta(g)) * op_tau0(testkit::exp_ix(g))).matrix() * proj;
  EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Laurent, CauchyApplyExamples) {
  TorusGrid g(1, 8);
  auto a = families::perturbed_elliptic(g, 1, 1, 0, 0.25);
  auto ctx = make_laurent_context(a, 2);
  auto e = cauchy_apply(RP::from_resolvent(ctx), HoloFunction::exp_scaled(1.0));
  for (std::size_t p = 0; p < e.points(); ++p) EXPECT_NEAR(std::abs(e.value(p) - std::exp(-a.samples()[p])), 0, 1e-14);
  // Clockwise around the values of a: the double pole picks up -f'(a).
  std::mt19937_64 rng(15);
  auto c = random_trig_symbol(g, rng).field(2);
  auto id = HoloFunction::rational({0.0, 1.0}, {1.0});
  auto r = cauchy_apply(RP::from_field(ctx, 2, c), id);
  for (std::size_t p = 0; p < r.points(); ++p) EXPECT_NEAR(std::abs(r.value(p) + c.value(p)), 0, 1e-14);
  // The lambda-free part integrates to zero.
  auto z = cauchy_apply(RP::unit(ctx) + RP::shifted_base(ctx), id);
  EXPECT_EQ(z.value_sup_norm(), 0.0);
}

TEST(Laurent, CauchyApplyPolynomials) {
  TorusGrid g(2, 8);
  auto a = families::perturbed_elliptic(g, 2, 0.5, 0, 0.25);
  auto ctx = make_laurent_context(a, 1);
  auto f = HoloFunction::rational({1.0, -2.0, 0.5, cplx(0, 0.25)}, {1.0});
  auto v = cauchy_apply(RP::from_resolvent(ctx), f);
  for (std::size_t p = 0; p < v.points(); ++p) {
    const cplx x = a.samples()[p];
    EXPECT_LE(std::abs(v.value(p) - f(x)), 1e-9 * std::max(1.0, std::abs(f(x))));
  }
}

TEST(Laurent, CauchyApplyArity) {
  TorusGrid g(1, 8);
  auto ctx = make_laurent_context(families::bessel_power(g, 2), 1);
  std::vector<std::function<cplx(cplx)>> only_f{[](cplx z) { return z; }};
  EXPECT_NO_THROW(cauchy_apply(RP::from_resolvent(ctx), only_f));
  EXPECT_THROW(cauchy_apply(RP::monomial(ctx, 3), only_f), ArityError);
}

TEST(Laurent, ResidualPowersHaveNoLambdaFreePart) {
  TorusGrid g(1, 8);
  auto px = build_parametrix(families::perturbed_elliptic(g, 2, 0.5, 0, 0.25), SectorSpec::keyhole(), 2, 1, 6);
  const int kk = px.K;
  EXPECT_LT(px.r.lambda_free_sup(), 1e-12);
  RP power = px.r;
  for (int k = 1; k <= 2; ++k) {
    if (k > 1) power = compose_truncated(px.r, power, kk);
    EXPECT_LT(power.lambda_free_sup(), 1e-12) << "k=" << k;
    EXPECT_GE(power.min_pole_order(), k + 1) << "k=" << k;
    // r has poles up to K + 1; each further composition adds at most |alpha| from d_eta and |alpha| from D_x.
    EXPECT_LE(power.max_pole_order(), k * (kk + 1) + 2 * kk * (k - 1)) << "k=" << k;
  }
}
