#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "psido/funcalc.hpp"
#include "psido/stats.hpp"
#include "test_util.hpp"

using namespace psido;

namespace {

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

SymbolField perturbed(const TorusGrid& g) { return families::perturbed_elliptic(g, 2, 0.5, 0, 0.25); }

// Fourier multiplier built from a function of <eta>.
OperatorMatrix profile_operator(const TorusGrid& g, const std::function<cplx(double)>& f) {
  CVector m(Eigen::Index(g.size()));
  for (std::size_t e = 0; e < g.size(); ++e) m(Eigen::Index(e)) = f(bracket(g.eta_point(e)));
  return multiplier_operator(g, m, "profile");
}

// Norm of (X - Y) applied to the plane wave of lattice index e.
double column_error(const OperatorMatrix& x, const OperatorMatrix& y, std::size_t e) {
  const TorusGrid& g = x.grid();
  CMatrix d = (x.matrix() - y.matrix()) * g.idft_matrix();
  return d.col(Eigen::Index(e)).norm();
}

}  // namespace

TEST(HoloFunction, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> re(0.3, 4.0), im(-2.0, 2.0);
  const std::vector<HoloFunction> fs = {HoloFunction::power(-0.5), HoloFunction::power(cplx(0.3, 0.2)),
                                        HoloFunction::exp_scaled(0.7), HoloFunction::log(),
                                        HoloFunction::rational({1.0, 2.0}, {3.0, 0.0, 1.0}), power_times_log(-1.0)};
  const double h = 1e-5;
  for (const auto& f : fs)
    for (int i = 0; i < 10; ++i) {
      const cplx z(re(rng), im(rng));
      for (int p = 0; p < 3; ++p) {
        const cplx fd = (f.derivative(p, z + h) - f.derivative(p, z - h)) / (2 * h);
        EXPECT_LE(std::abs(fd - f.derivative(p + 1, z)), 1e-6 * std::max(1.0, std::abs(fd))) << f.tag() << " p=" << p;
      }
    }
}

TEST(HoloFunction, PrincipalBranch) {
  const auto sq = HoloFunction::power(0.5);
  EXPECT_NEAR(std::abs(sq(cplx(-4.0, 0.0)) - cplx(0, 2)), 0, 1e-14);
  EXPECT_NEAR(std::abs(sq(-4.0, cplx(std::log(4.0), -kPi)) - cplx(0, -2)), 0, 1e-14);
  EXPECT_NEAR(std::abs(HoloFunction::log()(cplx(-1.0)) - cplx(0, kPi)), 0, 1e-15);
  EXPECT_TRUE(HoloFunction::log().has_branch_cut());
  EXPECT_FALSE(HoloFunction::exp_scaled(1).has_branch_cut());
}

TEST(HoloFunction, ParseRoundTripAndErrors) {
  for (const char* s : {"power:z=-0.5", "exp:t=1", "log", "rational:num=1;2,den=3;0;1", "power:z=0.3+0.2i"}) {
    const auto f = HoloFunction::parse(s);
    EXPECT_EQ(HoloFunction::parse(f.tag()).tag(), f.tag()) << s;
  }
  EXPECT_EQ(HoloFunction::parse("power:z=-0.5").kind(), HoloFunction::Kind::power);
  EXPECT_NEAR(HoloFunction::parse("exp:t=2.5").time(), 2.5, 0);
  EXPECT_THROW(HoloFunction::parse("sinh:t=1"), ConfigError);
  EXPECT_THROW(HoloFunction::parse("power"), ConfigError);
  EXPECT_THROW(HoloFunction::parse("power:z=1,t=2"), ConfigError);
  EXPECT_THROW(HoloFunction::parse("exp:t=-1"), DomainError);
}

TEST(Funcalc, ScalarExponential) {
  TorusGrid g(1, 8);
  const double c = 1.7;
  auto a = op_tau0(families::constant(g, c));
  auto e = f_of_A_contour(a, HoloFunction::exp_scaled(1.0), ContourSpec::exponential());
  EXPECT_LE(max_abs(e.matrix() - std::exp(-c) * CMatrix::Identity(8, 8)), 1e-8);
}

TEST(Funcalc, InverseOfBesselIsDiagonal) {
  TorusGrid g(1, 32);
  auto a = op_tau0(families::bessel_power(g, 2));
  auto inv = f_of_A_contour(a, HoloFunction::power(-1.0), ContourSpec::keyhole());
  auto want = multiplier_operator(g, bessel_multiplier(g, -2).cast<cplx>(), "B^-2");
  EXPECT_LE(max_abs(inv.matrix() - want.matrix()), 1e-7);
}

TEST(Funcalc, FirstPowerOnFiniteLoop) {
  TorusGrid g(1, 16);
  auto a = op_tau0(families::zero_order(g, 0.25));
  auto p1 = f_of_A_contour(a, HoloFunction::power(1.0), ContourSpec::auto_loop());
  EXPECT_LE(max_abs(p1.matrix() - a.matrix()), 1e-8);
}

TEST(Funcalc, SpectralOracleExamples) {
  TorusGrid g(1, 16);
  auto a = op_tau0(perturbed(g));
  EXPECT_LE(relative_frobenius(f_of_A_spectral(a, HoloFunction::rational({0.0, 1.0}, {1.0})), a), 1e-12);
  TorusGrid g4(1, 4);
  auto h = profile_operator(g4, [](double br) { return cplx(br < 1.5 ? 1.0 : 2.0); });
  auto lg = f_of_A_spectral(h, HoloFunction::log());
  auto want = profile_operator(g4, [](double br) { return cplx(br < 1.5 ? 0.0 : std::log(2.0)); });
  EXPECT_LE(max_abs(lg.matrix() - want.matrix()), 1e-13);
  EXPECT_THROW(f_of_A_spectral(cplx(-1.0) * OperatorMatrix::identity(g4), HoloFunction::log()), BranchCutError);
  auto c = f_of_A_contour(a, HoloFunction::power(-0.5), ContourSpec::keyhole());
  EXPECT_LE(relative_frobenius(c, f_of_A_spectral(a, HoloFunction::power(-0.5))), 1e-6);
}

TEST(Funcalc, OracleEquivalenceAcrossFamilies) {
  TorusGrid g(1, 32);
  FamilyParams p1, p2;
  p1.m = 2;
  p1.rho = 0.5;
  p2.m = 1;
  p2.rho = 1;
  p2.eps0 = -0.2;
  std::vector<SymbolField> fam = {families::bessel_power(g, 2), families::laplace_plus_one(g),
                                  builtin_family("perturbed_elliptic", p1, g), builtin_family("perturbed_elliptic", p2, g),
                                  families::zero_order(g, 0.25), families::constant(g, 2.0)};
  for (const auto& s : fam) {
    auto a = op_tau0(s);
    for (const auto& f : {HoloFunction::power(-1.0), HoloFunction::power(-0.5), HoloFunction::exp_scaled(1.0)}) {
      auto c = f_of_A_contour(a, f, default_contour_for(f));
      EXPECT_LE(relative_frobenius(c, f_of_A_spectral(a, f)), 1e-6) << s.name() << " " << f.tag();
    }
  }
}

TEST(Funcalc, QuadratureConvergence) {
  TorusGrid g(1, 16);
  auto a = op_tau0(perturbed(g));
  const auto f = HoloFunction::power(-0.5);
  auto ref = f_of_A_spectral(a, f);
  double prev = INFINITY;
  for (int n : {20, 40, 80, 160}) {
    QuadratureSpec q;
    q.nodes_per_ray = n;
    q.nodes_on_circle = std::max(8, n / 3);
    q.panel_size = std::min(20, n);
    const double err = relative_frobenius(f_of_A_contour(a, f, ContourSpec::keyhole(), q), ref);
    if (prev > 1e-9) EXPECT_LE(err, std::max(prev / 4, 1e-9)) << "nodes " << n;
    prev = err;
  }
  EXPECT_LE(prev, 1e-9);
}

TEST(Funcalc, ExpansionXIndependentIsExact) {
  TorusGrid g(1, 16);
  auto a = families::bessel_power(g, 2);
  auto px = build_parametrix(a, SectorSpec::keyhole(), 2, 2);
  for (const auto& f : {HoloFunction::power(-1.0), HoloFunction::exp_scaled(0.5)}) {
    auto s = f_of_symbol_expansion(px, f);
    for (std::size_t e = 0; e < g.size(); ++e) EXPECT_NEAR(std::abs(s.sample(0, e) - f(a.sample(0, e))), 0, 1e-13);
  }
  auto s = f_of_symbol_expansion(px, HoloFunction::exp_scaled(1.0));
  EXPECT_EQ(s.class_spec().m, 0.0);
  EXPECT_EQ(f_of_symbol_expansion(px, HoloFunction::power(-0.5)).class_spec().m, -1.0);
}

TEST(Funcalc, ExpansionLeadingTermAndHighFrequencyCorrection) {
  TorusGrid g(1, 32);
  auto a = perturbed(g);
  auto A = op_tau0(a);
  const auto f = HoloFunction::power(-1.0);
  auto px = build_parametrix(a, SectorSpec::keyhole(), 2, 2);
  auto lead = f_of_symbol_expansion(px, f, 0);
  for (std::size_t p = 0; p < lead.samples().size(); ++p)
    ASSERT_LE(std::abs(lead.samples()[p] - 1.0 / a.samples()[p]), 1e-15);
  auto ref = f_of_A_spectral(A, f);
  auto op0 = op_tau0(lead), op2 = op_tau0(f_of_symbol_expansion(px, f, 2));
  for (int eta : {2, 3, 4, 6, 8}) {
    const std::size_t e = testkit::eta_index(g, eta);
    EXPECT_LT(column_error(op2, ref, e), column_error(op0, ref, e)) << "eta=" << eta;
  }
}

TEST(ComplexPower, ZeroFirstAndHalf) {
  TorusGrid g(1, 16);
  auto a = op_tau0(perturbed(g));
  EXPECT_LE(max_abs(complex_power(a, 0.0).matrix() - CMatrix::Identity(16, 16)), 1e-8);
  EXPECT_LE(max_abs(complex_power(a, 1.0).matrix() - a.matrix()) / max_abs(a.matrix()), 1e-8);
  auto b = op_tau0(families::bessel_power(g, 2));
  auto half = complex_power(b, 0.5);
  auto want = multiplier_operator(g, bessel_multiplier(g, 1).cast<cplx>(), "B");
  EXPECT_LE(max_abs(half.matrix() - want.matrix()), 1e-7);
}

TEST(ComplexPower, OrderCalibration) {
  TorusGrid g(1, 32);
  for (auto [m, z] : {std::pair{2.0, -0.5}, std::pair{2.0, -1.0}, std::pair{1.0, -1.5}}) {
    auto a = op_tau0(families::bessel_power(g, m));
    auto p = complex_power(a, z);
    CVector d = testkit::fourier_diagonal(p);
    std::vector<double> xs, ys;
    for (int eta = 2; eta < 16; ++eta) {
      xs.push_back(bracket({double(eta), 0}));
      ys.push_back(std::abs(d(Eigen::Index(testkit::eta_index(g, eta)))));
    }
    EXPECT_NEAR(loglog_slope(xs, ys), m * z, 0.1) << "m=" << m << " z=" << z;
  }
}

TEST(ComplexPower, GroupLaw) {
  TorusGrid g(1, 16);
  auto a = op_tau0(perturbed(g));
  auto r0 = power_group_check(a, 0.0, 0.0);
  EXPECT_LE(r0.group_residual, 1e-10);
  EXPECT_LE(r0.inverse_residual, 1e-10);
  EXPECT_LE(power_group_check(a, 0.5, 0.5).group_residual, 1e-6);
  const cplx s(0.3, 0.2);
  auto rc = power_group_check(a, s, -s);
  EXPECT_LE(rc.inverse_residual, 1e-6);
  EXPECT_LE(relative_frobenius(complex_power(a, s) * complex_power(a, -s), OperatorMatrix::identity(g)), 1e-6);
}

TEST(ComplexPower, AnalyticFamily) {
  TorusGrid g(1, 16);
  auto rep = analyticity_check(op_tau0(perturbed(g)));
  EXPECT_LE(rep.relative_error, 1e-5);
}

TEST(Heat, SmallTimeAndDiagonalOracle) {
  TorusGrid g(1, 16);
  auto b = op_tau0(families::bessel_power(g, 2));
  EXPECT_LE(max_abs(heat_operator(b, 1e-8).matrix() - CMatrix::Identity(16, 16)), 1e-6);
  auto h = heat_operator(b, 1.0);
  auto want = profile_operator(g, [](double br) { return cplx(std::exp(-br * br)); });
  EXPECT_LE(max_abs(h.matrix() - want.matrix()), 1e-8);
}

TEST(Heat, Semigroup) {
  TorusGrid g(1, 16);
  auto a = op_tau0(perturbed(g));
  for (auto [t1, t2] : {std::pair{0.3, 0.7}, std::pair{0.1, 0.1}}) {
    auto lhs = heat_operator(a, t1) * heat_operator(a, t2);
    EXPECT_LE(max_abs((lhs - heat_operator(a, t1 + t2)).matrix()), 1e-7);
  }
}

TEST(Heat, RequiresPositiveMargin) {
  TorusGrid g(1, 8);
  auto a = cplx(-1.0) * OperatorMatrix::identity(g);
  EXPECT_THROW(heat_operator(a, 1.0), PreconditionError);
  EXPECT_THROW(heat_operator(OperatorMatrix::identity(g), 1.0, ContourSpec::keyhole()), DomainError);
  EXPECT_THROW(f_of_A_contour(OperatorMatrix::identity(g), HoloFunction::exp_scaled(1), ContourSpec::keyhole()),
               DomainError);
}

TEST(Log, IdentityAndScalar) {
  TorusGrid g(1, 8);
  auto id = OperatorMatrix::identity(g);
  EXPECT_LE(max_abs(log_operator(id).matrix()), 1e-9);
  auto two = log_operator(cplx(2.0) * id);
  EXPECT_LE(max_abs(two.matrix() - std::log(2.0) * CMatrix::Identity(8, 8)), 1e-9);
  EXPECT_THROW(log_operator(id, ContourSpec::keyhole()), DomainError);
  EXPECT_THROW(f_of_A_contour(id, HoloFunction::log(), ContourSpec::keyhole()), BranchCutError);
  EXPECT_THROW(log_operator(id, ContourSpec::finite_loop(0.5, 1.0)), BranchCutError);
}

TEST(Log, SpectralRoundTrip) {
  TorusGrid g(1, 16);
  auto a = op_tau0(families::zero_order(g, 0.25));
  auto l = log_operator(a);
  auto back = f_of_A_spectral(l, HoloFunction::custom("exp", [](int, cplx z, cplx) { return std::exp(z); },
                                                       {Growth::Kind::power_bound, 0.0, 0.0}));
  EXPECT_LE(max_abs(back.matrix() - a.matrix()), 1e-7);
}

TEST(Log, NegativeOrderProfileSlope) {
  TorusGrid g(1, 16);
  auto a = op_tau0(families::bessel_power(g, -2));
  CVector d = testkit::fourier_diagonal(log_operator(a));
  std::vector<double> xs, ys;
  for (int eta = 1; eta < 8; ++eta) {
    xs.push_back(std::log(bracket({double(eta), 0})));
    ys.push_back(d(Eigen::Index(testkit::eta_index(g, eta))).real());
  }
  EXPECT_NEAR(least_squares_slope(xs, ys), -2.0, 1e-6);
}

TEST(Funcalc, ContourSpectrumCollision) {
  TorusGrid g(1, 8);
  auto a = op_tau0(families::bessel_power(g, 2));
  EXPECT_THROW(f_of_A_contour(a, HoloFunction::power(-1.0), ContourSpec::keyhole(2.0, 1e4)), SpectrumCollisionError);
  EXPECT_THROW(f_of_A_contour(a, HoloFunction::power(1.0), ContourSpec::finite_loop(3.0, 1.0)), SpectrumCollisionError);
}
