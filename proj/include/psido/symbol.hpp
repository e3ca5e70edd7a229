#pragma once

// Symbols a(x, eta) on T^n x R^n with class metadata, the built-in test families, and the
// numerical certificates for class membership and parameter-ellipticity.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "psido/errors.hpp"
#include "psido/grid.hpp"
#include "psido/grid_field.hpp"
#include "psido/jet.hpp"

namespace psido {

// Order m and type (rho, delta) of S^m_{rho,delta}.
struct SymbolClassSpec {
  double m = 0.0;
  double rho = 1.0;
  double delta = 0.0;
  // Which of the three composition hypotheses hold. Flatness is automatic on the torus.
  bool rho_above_half = true;
  bool symmetric_rho_above_third = true;
  bool flat = true;

  static SymbolClassSpec make(double m, double rho, double delta) {
    if (!(0.0 <= delta && delta < rho && rho <= 1.0))
      throw DomainError("symbol class needs 0 <= delta < rho <= 1, got rho=" + std::to_string(rho) +
                        " delta=" + std::to_string(delta));
    SymbolClassSpec s;
    s.m = m;
    s.rho = rho;
    s.delta = delta;
    s.rho_above_half = rho > 0.5;
    s.symmetric_rho_above_third = rho > 1.0 / 3.0;
    s.flat = true;
    return s;
  }
  // Order gained by each step of the composition expansion (flat connection).
  double remainder_drop() const { return rho - delta; }
};

// Sector Lambda = {|arg lambda| > theta0} together with the ball |lambda| < epsilon, or the
// outside of a disk for zero-order operators.
struct SectorSpec {
  enum class Variant { keyhole, right_half_plane, finite_disk };

  Variant variant = Variant::keyhole;
  double theta0 = 0.75 * kPi;
  double epsilon = 0.1;
  cplx center = 0.0;  // finite_disk only
  double radius = 0.0;

  static SectorSpec keyhole(double theta0 = 0.75 * kPi, double epsilon = 0.1) {
    SectorSpec s;
    s.theta0 = theta0;
    s.epsilon = epsilon;
    s.validate();
    return s;
  }
  static SectorSpec right_half_plane(double theta0 = 0.25 * kPi, double epsilon = 0.1) {
    SectorSpec s;
    s.variant = Variant::right_half_plane;
    s.theta0 = theta0;
    s.epsilon = epsilon;
    s.validate();
    return s;
  }
  static SectorSpec finite_disk(cplx center, double radius) {
    SectorSpec s;
    s.variant = Variant::finite_disk;
    s.center = center;
    s.radius = radius;
    s.epsilon = radius;
    s.validate();
    return s;
  }

  void validate() const {
    switch (variant) {
      case Variant::keyhole:
        if (!(theta0 > kPi / 2 && theta0 < kPi)) throw DomainError("keyhole sector needs pi/2 < theta0 < pi");
        break;
      case Variant::right_half_plane:
        if (!(theta0 > 0 && theta0 < kPi / 2)) throw DomainError("right-half-plane sector needs 0 < theta0 < pi/2");
        break;
      case Variant::finite_disk:
        if (!(radius > 0)) throw DomainError("finite-disk sector needs a positive radius");
        break;
    }
    if (!(epsilon > 0)) throw DomainError("sector epsilon must be positive");
  }

  static std::string variant_name(Variant v) {
    switch (v) {
      case Variant::keyhole: return "keyhole";
      case Variant::right_half_plane: return "right_half_plane";
      case Variant::finite_disk: return "finite_disk";
    }
    return "?";
  }

  // 40 log-spaced moduli in [epsilon, 1e4] times 9 angles across the sector, the epsilon-circle
  // and the origin. For the finite disk: the same radial pattern measured from the boundary.
  std::vector<cplx> samples(double max_modulus = 1e4) const {
    std::vector<cplx> out;
    const int nr = 40, na = 9, nc = 16;
    if (variant == Variant::finite_disk) {
      for (int i = 0; i < nr; ++i) {
        const double r = radius * std::pow(max_modulus / radius, double(i) / (nr - 1));
        for (int k = 0; k < 2 * na; ++k) out.push_back(center + std::polar(r, 2 * kPi * k / (2 * na)));
      }
      return out;
    }
    for (int i = 0; i < nr; ++i) {
      const double r = epsilon * std::pow(max_modulus / epsilon, double(i) / (nr - 1));
      for (int k = 0; k < na; ++k) {
        const double phi = theta0 + (2 * kPi - 2 * theta0) * k / (na - 1);
        out.push_back(std::polar(r, phi));
      }
    }
    for (int k = 0; k < nc; ++k) out.push_back(std::polar(epsilon, 2 * kPi * k / nc));
    out.push_back(0.0);
    return out;
  }
};

// Trigonometric polynomial sum_k c_k e^{i k.x}; derivatives are exact.
struct TrigPolynomial {
  struct Term {
    cplx c;
    MultiIndex k;
  };
  std::vector<Term> terms;

  static TrigPolynomial one() { return {{{1.0, {0, 0}}}}; }
  // eps * sin(x_1)
  static TrigPolynomial sine_x1(double eps) { return {{{eps / (2.0 * kI), {1, 0}}, {-eps / (2.0 * kI), {-1, 0}}}}; }

  cplx derivative(const Point& x, const MultiIndex& q) const {
    cplx s = 0.0;
    for (const auto& t : terms) {
      const cplx f = std::pow(kI * double(t.k[0]), q[0]) * std::pow(kI * double(t.k[1]), q[1]);
      s += t.c * f * std::exp(kI * (double(t.k[0]) * x[0] + double(t.k[1]) * x[1]));
    }
    return s;
  }
  cplx operator()(const Point& x) const { return derivative(x, {0, 0}); }
  int bandwidth() const {
    int b = 0;
    for (const auto& t : terms) b = std::max({b, std::abs(t.k[0]), std::abs(t.k[1])});
    return b;
  }
  bool constant() const {
    for (const auto& t : terms)
      if ((t.k[0] != 0 || t.k[1] != 0) && t.c != 0.0) return false;
    return true;
  }
};

// Frequency profile h(eta) given through its Taylor jet.
using EtaProfile = std::function<Jet(const Point& eta, int order, int dim)>;

namespace profiles {

inline EtaProfile constant(cplx c) {
  return [c](const Point&, int order, int dim) { return Jet::constant(dim, order, c); };
}

// <eta>^mu = s^{mu/2} with s = 1 + |eta|^2.
inline EtaProfile bracket_power(double mu) {
  const double p = mu / 2.0;
  return [p](const Point& eta, int order, int dim) {
    Jet s = Jet::bracket_squared(dim, order, eta);
    return s.compose(univariate::power(s.value().real(), p, order));
  };
}

// <eta>^{mu} cos(<eta>^{nu}).
inline EtaProfile bracket_power_cos(double mu, double nu) {
  return [mu, nu](const Point& eta, int order, int dim) {
    Jet s = Jet::bracket_squared(dim, order, eta);
    const double s0 = s.value().real();
    Jet u = s.compose(univariate::power(s0, nu / 2.0, order));
    Jet c = u.compose(univariate::cosine(u.value(), order));
    return s.compose(univariate::power(s0, mu / 2.0, order)) * c;
  };
}

// c * eta^beta.
inline EtaProfile monomial(cplx c, MultiIndex beta) {
  return [c, beta](const Point& eta, int order, int dim) {
    Jet j = Jet::constant(dim, order, c);
    for (int axis = 0; axis < dim; ++axis)
      for (int r = 0; r < beta[axis]; ++r) j = j * Jet::coordinate(dim, order, axis, eta[axis]);
    return j;
  };
}

}  // namespace profiles

struct SeparableTerm {
  TrigPolynomial g;
  EtaProfile h;
};

namespace detail {

// Fourth-order central stencils for d^k/dt^k, k = 1..4, on offsets -3..3.
inline const std::array<double, 7>& fd_stencil(int k) {
  static const std::array<std::array<double, 7>, 5> s = {{
      {0, 0, 0, 1, 0, 0, 0},
      {0, 1.0 / 12, -8.0 / 12, 0, 8.0 / 12, -1.0 / 12, 0},
      {0, -1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12, 0},
      {1.0 / 8, -1.0, 13.0 / 8, 0, -13.0 / 8, 1.0, -1.0 / 8},
      {-1.0 / 6, 2.0, -13.0 / 2, 28.0 / 3, -13.0 / 2, 2.0, -1.0 / 6},
  }};
  return s[k];
}

inline double fd_step(double eta) { return 1e-3 * std::max(1.0, std::abs(eta)); }

}  // namespace detail

// d^alpha_eta f at (x, eta) by tensor-product fourth-order central differences, |alpha| <= 4.
inline cplx fd_eta_derivative(const std::function<cplx(const Point&, const Point&)>& f, const Point& x,
                              const Point& eta, const MultiIndex& alpha) {
  if (alpha[0] < 0 || alpha[1] < 0) throw DomainError("fd_eta_derivative: negative multi-index");
  if (total_order(alpha) > 4)
    throw UnsupportedOrderError("finite differences in eta support |alpha| <= 4, got " +
                                std::to_string(total_order(alpha)));
  const double h0 = detail::fd_step(eta[0]), h1 = detail::fd_step(eta[1]);
  const auto& s0 = detail::fd_stencil(alpha[0]);
  const auto& s1 = detail::fd_stencil(alpha[1]);
  cplx acc = 0.0;
  for (int i = 0; i < 7; ++i) {
    if (s0[i] == 0.0) continue;
    for (int j = 0; j < 7; ++j) {
      if (s1[j] == 0.0) continue;
      acc += s0[i] * s1[j] * f(x, {eta[0] + (i - 3) * h0, eta[1] + (j - 3) * h1});
    }
  }
  return acc / (std::pow(h0, alpha[0]) * std::pow(h1, alpha[1]));
}

class SymbolField {
 public:
  using Evaluator = std::function<cplx(const Point& x, const Point& eta)>;
  // Taylor jet in eta (order `order`) of d_x^q a at (x, eta).
  using JetFn = std::function<Jet(const Point& x, const Point& eta, int order, const MultiIndex& q)>;

  SymbolField(const TorusGrid& grid, SymbolClassSpec spec, std::string name, Evaluator ev, JetFn jet = {},
              bool x_independent = false)
      : grid_(grid), spec_(spec), name_(std::move(name)), ev_(std::move(ev)), jet_(std::move(jet)),
        x_independent_(x_independent) {
    sample();
  }

  // Symbol known only at the lattice points (for example the output of an expansion).
  static SymbolField from_samples(const TorusGrid& grid, SymbolClassSpec spec, std::string name,
                                  std::vector<cplx> samples) {
    if (samples.size() != grid.size() * grid.size()) throw ShapeError("SymbolField::from_samples: wrong size");
    auto data = std::make_shared<const std::vector<cplx>>(std::move(samples));
    Evaluator ev = [grid, data](const Point& x, const Point& eta) {
      MultiIndex xi{0, 0}, ei{0, 0};
      for (int a = 0; a < grid.dim(); ++a) {
        const double t = x[a] * grid.points() / (2 * kPi);
        const double r = std::round(t);
        const double e = std::round(eta[a]);
        if (std::abs(t - r) > 1e-9 || std::abs(eta[a] - e) > 1e-12 || e < -grid.points() / 2 ||
            e >= grid.points() / 2)
          throw DomainError("sampled symbol evaluated off the lattice");
        xi[a] = ((int(r) % grid.points()) + grid.points()) % grid.points();
        ei[a] = int(e) + grid.points() / 2;
      }
      return (*data)[grid.flat_index(xi) * grid.size() + grid.flat_index(ei)];
    };
    SymbolField s(grid, spec, std::move(name), std::move(ev));
    s.sampled_only_ = true;
    return s;
  }

  const TorusGrid& grid() const { return grid_; }
  const SymbolClassSpec& class_spec() const { return spec_; }
  const std::string& name() const { return name_; }
  bool x_independent() const { return x_independent_; }
  bool has_exact_jets() const { return bool(jet_); }
  bool sampled_only() const { return sampled_only_; }

  cplx operator()(const Point& x, const Point& eta) const { return ev_(x, eta); }
  const Evaluator& evaluator() const { return ev_; }

  // Lattice samples, index xi * M + ei.
  const std::vector<cplx>& samples() const { return *samples_; }
  cplx sample(std::size_t xi, std::size_t ei) const { return (*samples_)[xi * grid_.size() + ei]; }

  // Jet in eta; exact when callbacks exist, otherwise finite differences (order <= 4, q = 0).
  Jet eta_jet(const Point& x, const Point& eta, int order, const MultiIndex& q = {0, 0}) const {
    if (jet_) return jet_(x, eta, order, q);
    if (q[0] != 0 || q[1] != 0)
      throw UnsupportedOrderError("symbol '" + name_ + "' has no exact x-derivatives off the grid");
    if (order > 4) throw UnsupportedOrderError("symbol '" + name_ + "' has no exact eta-derivatives beyond order 4");
    const int dim = grid_.dim();
    Jet j(dim, order);
    const JetLayout& lay = j.layout();
    for (int p = 0; p < lay.size(); ++p) {
      const MultiIndex& b = lay.index(p);
      j[p] = (p == 0 ? ev_(x, eta) : fd_eta_derivative(ev_, x, eta, b)) / multi_factorial(b);
    }
    return j;
  }

  // Field of eta-jets of d_x^q a at all lattice points.
  GridField field(int order, const MultiIndex& q = {0, 0}) const {
    GridField f(grid_, order);
    const std::size_t m = grid_.size();
    if (order == 0 && q[0] == 0 && q[1] == 0) {
      for (std::size_t p = 0; p < f.points(); ++p) f.value_ref(p) = (*samples_)[p];
      return f;
    }
    if (!jet_ && (q[0] != 0 || q[1] != 0)) {
      GridField base = field(order);
      for (int axis = 0; axis < 2; ++axis)
        if (q[axis] > 0) base = base.x_derivative(axis, q[axis]);
      return base;
    }
    for (std::size_t xi = 0; xi < m; ++xi) {
      const Point x = grid_.x_point(xi);
      for (std::size_t ei = 0; ei < m; ++ei) {
        Jet j = eta_jet(x, grid_.eta_point(ei), order, q);
        std::copy(j.data().begin(), j.data().end(), f.jet(f.point_index(xi, ei)));
      }
    }
    return f;
  }

  SymbolField conj() const {
    Evaluator ev = [e = ev_](const Point& x, const Point& eta) { return std::conj(e(x, eta)); };
    JetFn jf;
    if (jet_)
      jf = [j = jet_](const Point& x, const Point& eta, int order, const MultiIndex& q) {
        return j(x, eta, order, q).conj();
      };
    SymbolField s(grid_, spec_, "conj(" + name_ + ")", std::move(ev), std::move(jf), x_independent_);
    s.sampled_only_ = sampled_only_;
    return s;
  }

  SymbolField scaled(cplx c) const {
    Evaluator ev = [e = ev_, c](const Point& x, const Point& eta) { return c * e(x, eta); };
    JetFn jf;
    if (jet_)
      jf = [j = jet_, c](const Point& x, const Point& eta, int order, const MultiIndex& q) {
        return c * j(x, eta, order, q);
      };
    SymbolField s(grid_, spec_, name_, std::move(ev), std::move(jf), x_independent_);
    s.sampled_only_ = sampled_only_;
    return s;
  }

  friend SymbolField operator+(const SymbolField& a, const SymbolField& b) {
    if (a.grid_ != b.grid_) throw ShapeError("symbol sum: grids differ");
    SymbolClassSpec spec = SymbolClassSpec::make(std::max(a.spec_.m, b.spec_.m), std::min(a.spec_.rho, b.spec_.rho),
                                                 std::max(a.spec_.delta, b.spec_.delta));
    Evaluator ev = [ea = a.ev_, eb = b.ev_](const Point& x, const Point& eta) { return ea(x, eta) + eb(x, eta); };
    JetFn jf;
    if (a.jet_ && b.jet_)
      jf = [ja = a.jet_, jb = b.jet_](const Point& x, const Point& eta, int order, const MultiIndex& q) {
        return ja(x, eta, order, q) + jb(x, eta, order, q);
      };
    SymbolField s(a.grid_, spec, a.name_ + "+" + b.name_, std::move(ev), std::move(jf),
                  a.x_independent_ && b.x_independent_);
    s.sampled_only_ = a.sampled_only_ || b.sampled_only_;
    return s;
  }

 private:
  void sample() {
    const std::size_t m = grid_.size();
    auto s = std::make_shared<std::vector<cplx>>(m * m);
    for (std::size_t xi = 0; xi < m; ++xi) {
      const Point x = grid_.x_point(xi);
      for (std::size_t ei = 0; ei < m; ++ei) (*s)[xi * m + ei] = ev_(x, grid_.eta_point(ei));
    }
    samples_ = std::move(s);
  }

  TorusGrid grid_;
  SymbolClassSpec spec_;
  std::string name_;
  Evaluator ev_;
  JetFn jet_;
  bool x_independent_ = false;
  bool sampled_only_ = false;
  std::shared_ptr<const std::vector<cplx>> samples_;
};

// Symbol sum_k g_k(x) h_k(eta) with exact derivatives of all orders.
inline SymbolField separable_symbol(const TorusGrid& grid, SymbolClassSpec spec, std::string name,
                                    std::vector<SeparableTerm> terms) {
  auto t = std::make_shared<const std::vector<SeparableTerm>>(std::move(terms));
  const int dim = grid.dim();
  bool xfree = true;
  for (const auto& term : *t) xfree = xfree && term.g.constant();
  auto ev = [t, dim](const Point& x, const Point& eta) {
    cplx s = 0.0;
    for (const auto& term : *t) s += term.g(x) * term.h(eta, 0, dim).value();
    return s;
  };
  auto jf = [t, dim](const Point& x, const Point& eta, int order, const MultiIndex& q) {
    Jet acc(dim, order);
    for (const auto& term : *t) {
      const cplx gq = term.g.derivative(x, q);
      if (gq == 0.0) continue;
      acc += gq * term.h(eta, order, dim);
    }
    return acc;
  };
  return SymbolField(grid, spec, std::move(name), ev, jf, xfree);
}

// Parameters of the built-in families; unused entries are ignored.
struct FamilyParams {
  double c = 1.0;
  double m = 2.0;
  double rho = 0.5;
  double delta = 0.0;
  double eps0 = 0.25;
};

namespace families {

inline void check_eps0(double eps0) {
  if (!(std::abs(eps0) <= 0.25))
    throw DomainError("perturbation amplitude eps0 must satisfy |eps0| <= 1/4 (positivity margin), got " +
                      std::to_string(eps0));
}

inline SymbolField constant(const TorusGrid& g, cplx c) {
  return separable_symbol(g, SymbolClassSpec::make(0, 1, 0), "constant", {{TrigPolynomial::one(), profiles::constant(c)}});
}

// <eta>^m
inline SymbolField bessel_power(const TorusGrid& g, double m) {
  return separable_symbol(g, SymbolClassSpec::make(m, 1, 0), "bessel_power",
                          {{TrigPolynomial::one(), profiles::bracket_power(m)}});
}

// 1 + |eta|^2
inline SymbolField laplace_plus_one(const TorusGrid& g) {
  return separable_symbol(g, SymbolClassSpec::make(2, 1, 0), "laplace_plus_one",
                          {{TrigPolynomial::one(), profiles::bracket_power(2.0)}});
}

// <eta>^m (1 + eps0 sin(x_1) cos(<eta>^{1 - rho}))
inline SymbolField perturbed_elliptic(const TorusGrid& g, double m, double rho, double delta, double eps0) {
  check_eps0(eps0);
  auto spec = SymbolClassSpec::make(m, rho, delta);
  std::vector<SeparableTerm> t{{TrigPolynomial::one(), profiles::bracket_power(m)}};
  if (eps0 != 0.0) t.push_back({TrigPolynomial::sine_x1(eps0), profiles::bracket_power_cos(m, 1.0 - rho)});
  return separable_symbol(g, spec, "perturbed_elliptic", std::move(t));
}

// 1 + <eta>^{-1} + eps0 sin(x_1) cos(<eta>^{1/2}), class S^0_{1/2,0}
inline SymbolField zero_order(const TorusGrid& g, double eps0) {
  check_eps0(eps0);
  std::vector<SeparableTerm> t{{TrigPolynomial::one(), profiles::constant(1.0)},
                               {TrigPolynomial::one(), profiles::bracket_power(-1.0)}};
  if (eps0 != 0.0) t.push_back({TrigPolynomial::sine_x1(eps0), profiles::bracket_power_cos(0.0, 0.5)});
  return separable_symbol(g, SymbolClassSpec::make(0, 0.5, 0), "zero_order", std::move(t));
}

// <eta>^{m} (1 + eps0 sin x_1) with m < 0
inline SymbolField negative_order(const TorusGrid& g, double m, double eps0) {
  check_eps0(eps0);
  if (!(m < 0)) throw DomainError("negative_order family needs m < 0");
  std::vector<SeparableTerm> t{{TrigPolynomial::one(), profiles::bracket_power(m)}};
  if (eps0 != 0.0) t.push_back({TrigPolynomial::sine_x1(eps0), profiles::bracket_power(m)});
  return separable_symbol(g, SymbolClassSpec::make(m, 1, 0), "negative_order", std::move(t));
}

}  // namespace families

inline const std::vector<std::string>& builtin_family_names() {
  static const std::vector<std::string> names = {"constant",           "bessel_power", "laplace_plus_one",
                                                 "perturbed_elliptic", "zero_order",   "negative_order"};
  return names;
}

inline SymbolField builtin_family(const std::string& name, const FamilyParams& p, const TorusGrid& g) {
  if (name == "constant") return families::constant(g, p.c);
  if (name == "bessel_power") return families::bessel_power(g, p.m);
  if (name == "laplace_plus_one") return families::laplace_plus_one(g);
  if (name == "perturbed_elliptic") return families::perturbed_elliptic(g, p.m, p.rho, p.delta, p.eps0);
  if (name == "zero_order") return families::zero_order(g, p.eps0);
  if (name == "negative_order") return families::negative_order(g, p.m, p.eps0);
  throw DomainError("unknown symbol family '" + name + "'");
}

// Random symbol sum_k c_k e^{i k.x} <eta>^{p_k} with |k_i| <= bandwidth and p_k in [-2, 1].
inline SymbolField random_trig_symbol(const TorusGrid& g, std::mt19937_64& rng, int nterms = 4, int bandwidth = 2) {
  std::uniform_int_distribution<int> kd(-bandwidth, bandwidth);
  std::normal_distribution<double> cd(0.0, 1.0);
  std::uniform_real_distribution<double> pd(-2.0, 1.0);
  std::vector<SeparableTerm> terms;
  double m = -2.0;
  for (int i = 0; i < nterms; ++i) {
    MultiIndex k{kd(rng), g.dim() == 2 ? kd(rng) : 0};
    const double p = pd(rng);
    m = std::max(m, p);
    terms.push_back({TrigPolynomial{{{cplx(cd(rng), cd(rng)), k}}}, profiles::bracket_power(p)});
  }
  return separable_symbol(g, SymbolClassSpec::make(m, 1, 0), "random_trig", std::move(terms));
}

// d_eta^alpha a at the lattice points (order-0 field); exact when the symbol carries jets.
inline GridField finite_difference_eta(const SymbolField& s, const MultiIndex& alpha) {
  const TorusGrid& g = s.grid();
  const int k = total_order(alpha);
  if (!s.has_exact_jets() && k > 4)
    throw UnsupportedOrderError("finite_difference_eta: |alpha| = " + std::to_string(k) + " > 4 without exact jets");
  if (s.sampled_only() && k > 0)
    throw DomainError("finite_difference_eta: symbol '" + s.name() + "' has no continuum evaluator");
  GridField out(g, 0);
  const std::size_t m = g.size();
  for (std::size_t xi = 0; xi < m; ++xi) {
    const Point x = g.x_point(xi);
    for (std::size_t ei = 0; ei < m; ++ei) {
      const Point eta = g.eta_point(ei);
      cplx v;
      if (k == 0)
        v = s.sample(xi, ei);
      else if (s.has_exact_jets())
        v = s.eta_jet(x, eta, k).partial(alpha);
      else
        v = fd_eta_derivative(s.evaluator(), x, eta, alpha);
      out.value_ref(out.point_index(xi, ei)) = v;
    }
  }
  return out;
}

// sup over the lattice of |d_eta^alpha d_x^q a| <eta>^{-m - delta|q| + rho|alpha|}.
inline double seminorm_estimate(const SymbolField& s, const MultiIndex& alpha, const MultiIndex& q) {
  const int ka = total_order(alpha), kq = total_order(q);
  if (ka + kq > 4) throw UnsupportedOrderError("seminorm_estimate supports |alpha| + |q| <= 4");
  const auto& c = s.class_spec();
  const TorusGrid& g = s.grid();
  GridField f = s.field(ka, q);
  const int pos = JetLayout::position(g.dim(), alpha);
  const double fac = multi_factorial(alpha);
  double sup = 0.0;
  const std::size_t m = g.size();
  for (std::size_t xi = 0; xi < m; ++xi)
    for (std::size_t ei = 0; ei < m; ++ei) {
      const double w = std::pow(bracket(g.eta_point(ei)), -c.m - c.delta * kq + c.rho * ka);
      const double v = std::abs(f.jet(f.point_index(xi, ei))[pos]) * fac * w;
      if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
      sup = std::max(sup, v);
    }
  return sup;
}

struct EllipticityReport {
  double constant = 0.0;
  cplx worst_lambda = 0.0;
  Point worst_x{0, 0};
  Point worst_eta{0, 0};
  std::size_t samples = 0;
  bool finite() const { return std::isfinite(constant); }
};

// sup over lambda samples and lattice of |(a - lambda)^{-1}| / bound, with bound
// (|lambda|^{1/m} + <eta>)^{-m} for m > 0 and (|lambda| + 1)^{-1} for m = 0.
inline EllipticityReport parameter_ellipticity_check(const SymbolField& s, const SectorSpec& sector,
                                                     std::vector<cplx> lambda_samples = {}, double c_k = 1.0) {
  sector.validate();
  const double m = s.class_spec().m;
  if (m < 0) throw PreconditionError("parameter-ellipticity is defined for m >= 0, symbol has m = " + std::to_string(m));
  if (lambda_samples.empty()) lambda_samples = sector.samples();
  const TorusGrid& g = s.grid();
  const std::size_t msz = g.size();
  EllipticityReport rep;
  for (const cplx lam : lambda_samples) {
    const double al = std::abs(lam);
    for (std::size_t xi = 0; xi < msz; ++xi)
      for (std::size_t ei = 0; ei < msz; ++ei) {
        const double br = bracket(g.eta_point(ei));
        const double scale = m > 0 ? std::pow(al, 1.0 / m) + br : al + br;
        if (scale < c_k) continue;
        const cplx d = s.sample(xi, ei) - lam;
        const double inv_bound = m > 0 ? std::pow(std::pow(al, 1.0 / m) + br, m) : al + 1.0;
        if (std::abs(d) <= 1e-14 * std::max(1.0, al)) {
          const Point x = g.x_point(xi), eta = g.eta_point(ei);
          throw DegenerateSampleError("a - lambda vanishes at x=(" + std::to_string(x[0]) + "," + std::to_string(x[1]) +
                                      ") eta=(" + std::to_string(eta[0]) + "," + std::to_string(eta[1]) +
                                      ") lambda=" + std::to_string(lam.real()) + "+" + std::to_string(lam.imag()) + "i");
        }
        const double v = inv_bound / std::abs(d);
        ++rep.samples;
        if (v > rep.constant) {
          rep.constant = v;
          rep.worst_lambda = lam;
          rep.worst_x = g.x_point(xi);
          rep.worst_eta = g.eta_point(ei);
        }
      }
  }
  return rep;
}

}  // namespace psido
