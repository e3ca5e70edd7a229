#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "psido/traces.hpp"
#include "test_util.hpp"

using namespace psido;

namespace {

// Constant symbol declared in the class of order m. Nonzero constants lie in S^m for m >= 0, zero in every class;
// the negative-order tags below only exercise the gates.
SymbolField constant_of_order(const TorusGrid& g, cplx c, double m) {
  return separable_symbol(g, SymbolClassSpec::make(m, 1, 0), "constant", {{TrigPolynomial::one(), profiles::constant(c)}});
}

double lattice_sum(int n, const std::function<double(double)>& f) {
  double s = 0;
  for (int eta = -n / 2; eta < n / 2; ++eta) s += f(eta);
  return s;
}

}  // namespace

TEST(TraceSymbol, Examples) {
  TorusGrid g(1, 8);
  EXPECT_NEAR(std::abs(trace_symbol(families::constant(g, 1.0)) - 8.0), 0, 1e-13);
  const double want = 1.0 / 17 + 0.1 + 0.2 + 0.5 + 1 + 0.5 + 0.2 + 0.1;
  EXPECT_NEAR(want, 2.6588235, 1e-7);
  EXPECT_NEAR(std::abs(trace_symbol(families::bessel_power(g, -2)) - want), 0, 1e-14);
  EXPECT_THROW(trace_symbol(g, std::vector<cplx>(5)), ShapeError);
}

TEST(TraceSymbol, EqualsMatrixTrace) {
  std::mt19937_64 rng(31);
  for (int dim : {1, 2}) {
    TorusGrid g(dim, 8);
    for (int i = 0; i < 20; ++i) {
      auto a = random_trig_symbol(g, rng);
      const cplx tr = op_tau0(a).trace();
      double scale = 0;
      for (cplx v : a.samples()) scale += std::abs(v);
      scale /= double(g.size());
      EXPECT_LE(std::abs(trace_symbol(a) - tr), 1e-12 * scale);
    }
  }
  FamilyParams p;
  p.m = -2;
  p.rho = 0.5;
  TorusGrid g(1, 16);
  for (const auto& name : builtin_family_names()) {
    auto a = builtin_family(name, p, g);
    const cplx tr = op_tau0(a).trace();
    EXPECT_LE(std::abs(trace_symbol(a) - tr), 1e-12 * std::max(1.0, std::abs(tr))) << name;
  }
}

TEST(KernelDiagonal, MatchesMatrixDiagonal) {
  std::mt19937_64 rng(32);
  TorusGrid g(1, 16);
  for (auto a : {families::constant(g, 1.0), random_trig_symbol(g, rng), random_trig_symbol(g, rng),
                 testkit::exp_ix_bracket(g, -2)}) {
    const auto d = kernel_diagonal(a);
    const CVector md = op_tau0(a).matrix().diagonal();
    for (std::size_t j = 0; j < g.size(); ++j) EXPECT_LE(std::abs(d[j] - md(Eigen::Index(j))), 1e-12);
  }
  for (cplx v : kernel_diagonal(families::constant(g, 1.0))) EXPECT_NEAR(std::abs(v - 1.0), 0, 1e-15);
  const auto d = kernel_diagonal(testkit::exp_ix_bracket(g, -2));
  const double mean = lattice_sum(16, [](double e) { return 1 / (1 + e * e); }) / 16;
  for (std::size_t j = 0; j < g.size(); ++j)
    EXPECT_NEAR(std::abs(d[j] - std::exp(kI * g.x_point(j)[0]) * mean), 0, 1e-15);
}

TEST(Szego, ZeroSymbol) {
  TorusGrid g(1, 8);
  auto r = szego_logdet(constant_of_order(g, 0.0, -2.0));
  EXPECT_NEAR(std::abs(r.operator_side), 0, 1e-14);
  EXPECT_NEAR(std::abs(r.symbol_side), 0, 1e-14);
}

TEST(Szego, XIndependentMatchesDiagonalOracle) {
  TorusGrid g(1, 32);
  auto r = szego_logdet(families::bessel_power(g, -2));
  const double want = lattice_sum(32, [](double e) { return std::log(1 + 1 / (1 + e * e)); });
  EXPECT_NEAR(std::abs(r.operator_side - want), 0, 1e-10);
  EXPECT_NEAR(std::abs(r.symbol_side - want), 0, 1e-10);
  EXPECT_NEAR(std::abs(r.symbol_leading - want), 0, 1e-10);
  EXPECT_NEAR(r.discrepancy(), std::abs(r.symbol_side - r.operator_side), 0);
}

TEST(Szego, AgreesWithLuDeterminant) {
  TorusGrid g(1, 16);
  auto a = families::negative_order(g, -2, 0.25);
  auto r = szego_logdet(a);
  const OperatorMatrix op = op_tau0(a);
  const cplx lu = logdet_lu((OperatorMatrix::identity(g) + op).matrix());
  EXPECT_NEAR(r.operator_side.real(), lu.real(), 1e-8);
  const double dphi = std::remainder(r.operator_side.imag() - lu.imag(), 2 * kPi);
  EXPECT_NEAR(dphi, 0, 1e-8);
  EXPECT_EQ(int(r.by_depth.size()), 3);
}

TEST(Szego, Gates) {
  TorusGrid g(1, 8);
  EXPECT_THROW(szego_logdet(families::bessel_power(g, -1)), PreconditionError);
  EXPECT_THROW(szego_logdet(families::bessel_power(g, 2)), PreconditionError);
  TorusGrid g2(2, 8);
  EXPECT_THROW(szego_logdet(families::bessel_power(g2, -2)), PreconditionError);
  EXPECT_THROW(szego_logdet(constant_of_order(g, -1.0, -3.0)), SpectrumCollisionError);
}

TEST(Heat, LatticeReference) {
  TorusGrid g(1, 8);
  auto s = heat_trace_sweep(families::laplace_plus_one(g), {1.0});
  const double e = std::exp(-1.0);
  const double want = e * (1 + 2 * std::exp(-1.0) + 2 * std::exp(-4.0) + 2 * std::exp(-9.0) + std::exp(-16.0));
  EXPECT_NEAR(want, 0.6521167, 1e-7);
  EXPECT_NEAR(std::abs(s.rows[0].operator_side - want), 0, 1e-14);
  EXPECT_NEAR(std::abs(s.rows[0].symbol_leading - want), 0, 1e-14);
}

TEST(Heat, XIndependentHasNoDiscrepancy) {
  TorusGrid g(1, 16);
  auto s = heat_trace_sweep(families::bessel_power(g, 2), logspace(0.05, 1.0, 6));
  for (const auto& r : s.rows) {
    EXPECT_LT(r.discrepancy(), 1e-12 * std::abs(r.operator_side));
    EXPECT_LT(r.discrepancy_leading(), 1e-12 * std::abs(r.operator_side));
  }
}

TEST(Heat, OperatorSideDecreasesInTime) {
  TorusGrid g(1, 16);
  for (auto a : {families::laplace_plus_one(g), families::bessel_power(g, 1), families::perturbed_elliptic(g, 2, 1, 0, 0.25)}) {
    const OperatorMatrix op = op_tau0(a);
    bool real_spectrum = true;
    for (cplx mu : op.eigenvalues().reshaped()) real_spectrum = real_spectrum && std::abs(mu.imag()) < 1e-10;
    if (!real_spectrum) continue;
    auto s = heat_trace_sweep(a, logspace(0.05, 1.0, 8), 1, 1);
    for (std::size_t i = 1; i < s.rows.size(); ++i)
      EXPECT_LT(s.rows[i].operator_side.real(), s.rows[i - 1].operator_side.real()) << a.name();
  }
}

TEST(Heat, RejectsBadTimesAndMargins) {
  TorusGrid g(1, 8);
  EXPECT_THROW(heat_trace_sweep(families::laplace_plus_one(g), {0.0}), DomainError);
  EXPECT_THROW(heat_trace_sweep(families::laplace_plus_one(g), {1.5}), DomainError);
  EXPECT_THROW(heat_trace_sweep(families::constant(g, -1.0), {0.5}), PreconditionError);
}

TEST(Zeta, LatticeReferenceAtTwo) {
  TorusGrid g(1, 32);
  auto z = zeta_value(families::laplace_plus_one(g), 2.0);
  const double want = lattice_sum(32, [](double e) { return std::pow(1 + e * e, -2); });
  EXPECT_NEAR(want, 1.6135113, 1e-7);
  // Over all of Z: (pi/2)(coth pi + pi csch^2 pi).
  const double full = 0.5 * kPi * (1 / std::tanh(kPi) + kPi / std::pow(std::sinh(kPi), 2));
  EXPECT_NEAR(want, full, 1e-3);
  EXPECT_NEAR(std::abs(z.trace.operator_side - want), 0, 1e-12);
  EXPECT_NEAR(std::abs(z.trace.symbol_side - want), 0, 1e-12);
  EXPECT_NEAR(std::abs(*z.trace.contour_side - want), 0, 1e-6 * want);
  EXPECT_NEAR(z.prefactor_ratio, 2 * kPi, 1e-15);
  EXPECT_NEAR(std::abs(z.symbol_without_prefactor - 2 * kPi * z.trace.symbol_side), 0, 1e-12);
}

TEST(Zeta, ScalarOperator) {
  TorusGrid g(1, 8);
  // Order 0 fails the trace-class gate Re(z) m > n.
  EXPECT_THROW(zeta_value(families::constant(g, 3.0), 2.0), PreconditionError);
  const cplx c = 3.0, z(1.5, 0.5);
  auto r = zeta_value(constant_of_order(g, c, 2.0), z);
  const cplx want = 8.0 * std::pow(c, -z);
  EXPECT_NEAR(std::abs(r.trace.operator_side - want), 0, 1e-12);
  EXPECT_NEAR(std::abs(r.trace.symbol_side - want), 0, 1e-12);
  EXPECT_NEAR(std::abs(*r.trace.contour_side - want), 0, 1e-6 * std::abs(want));
}

TEST(Zeta, CrossMethodAgreement) {
  TorusGrid g(1, 32);
  auto p = zeta_value(families::perturbed_elliptic(g, 2, 0.5, 0, 0.25), 2.0);
  EXPECT_LE(std::abs(*p.trace.contour_side - p.trace.operator_side), 1e-6 * std::abs(p.trace.operator_side));
  TorusGrid g16(1, 16);
  for (cplx z : {cplx(2.0), cplx(1.5), cplx(2.0, 0.5)}) {
    auto r = zeta_value(families::bessel_power(g16, 2), z);
    const cplx o = r.trace.operator_side, c = *r.trace.contour_side, s = r.trace.symbol_leading;
    EXPECT_LE(std::abs(o - c), 1e-6 * std::abs(o));
    EXPECT_LE(std::abs(o - s), 1e-6 * std::abs(o));
    EXPECT_LE(std::abs(c - s), 1e-6 * std::abs(o));
  }
}

TEST(Zeta, Gate) {
  TorusGrid g(1, 8);
  EXPECT_THROW(zeta_value(families::laplace_plus_one(g), 0.5), PreconditionError);
  EXPECT_NO_THROW(zeta_value(families::laplace_plus_one(g), 0.6));
  TorusGrid g2(2, 8);
  EXPECT_THROW(zeta_value(families::laplace_plus_one(g2), 1.0), PreconditionError);
}
