#pragma once

// Laurent-in-resolvent symbols P = sum_j c_j(x, eta) (a(x, eta) - lambda)^{-j}.
//
// The base symbol a is shared through a LaurentContext. Pole orders are stored sparsely and
// may be negative: j = -1 is the factor (a - lambda) itself. Every coefficient is a GridField of
// eta-jets, so eta-derivatives are exact at the algebra level and only consume jet order; the
// x-derivatives are spectral. The chain rule is applied symbolically:
//
//   d (a - lambda)^{-j} = -j (a - lambda)^{-j-1} d a,     d_lambda (a - lambda)^{-j} = j (a - lambda)^{-j-1}.

#include <climits>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "psido/errors.hpp"
#include "psido/grid_field.hpp"
#include "psido/holo_function.hpp"
#include "psido/symbol.hpp"

namespace psido {

struct LaurentContext {
  SymbolField base;
  int jet_order;
  GridField a;                     // eta-jets of a, order jet_order
  std::vector<GridField> dx_a;     // eta-jets of d_{x_i} a

  LaurentContext(const SymbolField& s, int order) : base(s), jet_order(order), a(s.field(order)) {
    for (int axis = 0; axis < s.grid().dim(); ++axis) {
      MultiIndex q{0, 0};
      q[axis] = 1;
      dx_a.push_back(s.field(order, q));
    }
  }
};

inline std::shared_ptr<const LaurentContext> make_laurent_context(const SymbolField& a, int jet_order) {
  return std::make_shared<const LaurentContext>(a, jet_order);
}

class ResolventPolynomial {
 public:
  static constexpr double kDropTolerance = 1e-14;

  explicit ResolventPolynomial(std::shared_ptr<const LaurentContext> ctx) : ctx_(std::move(ctx)) {
    if (!ctx_) throw DomainError("ResolventPolynomial: null context");
  }

  // (a - lambda)^{-1}
  static ResolventPolynomial from_resolvent(std::shared_ptr<const LaurentContext> ctx) {
    return monomial(std::move(ctx), 1);
  }
  // The lambda-free unit.
  static ResolventPolynomial unit(std::shared_ptr<const LaurentContext> ctx) { return monomial(std::move(ctx), 0); }
  // a - lambda
  static ResolventPolynomial shifted_base(std::shared_ptr<const LaurentContext> ctx) {
    return monomial(std::move(ctx), -1);
  }
  // c (a - lambda)^{-j} with c = 1.
  static ResolventPolynomial monomial(std::shared_ptr<const LaurentContext> ctx, int j) {
    ResolventPolynomial p(ctx);
    p.add_term(j, GridField::constant(ctx->base.grid(), 1.0, ctx->jet_order));
    return p;
  }
  static ResolventPolynomial from_field(std::shared_ptr<const LaurentContext> ctx, int j, GridField c) {
    ResolventPolynomial p(std::move(ctx));
    p.add_term(j, std::move(c));
    return p;
  }

  const std::shared_ptr<const LaurentContext>& context() const { return ctx_; }
  const std::map<int, GridField>& coeffs() const { return c_; }
  bool empty() const { return c_.empty(); }
  int max_pole_order() const { return c_.empty() ? INT_MIN : c_.rbegin()->first; }
  int min_pole_order() const { return c_.empty() ? INT_MAX : c_.begin()->first; }
  // Smallest jet order over the coefficients (how many more eta-derivatives are available).
  int jet_order() const {
    int o = INT_MAX;
    for (const auto& [j, f] : c_) o = std::min(o, f.order());
    return c_.empty() ? ctx_->jet_order : o;
  }
  const GridField* coeff(int j) const {
    auto it = c_.find(j);
    return it == c_.end() ? nullptr : &it->second;
  }
  double lambda_free_sup() const {
    const GridField* c0 = coeff(0);
    return c0 ? c0->value_sup_norm() : 0.0;
  }

  // Accumulates c into pole order j; coefficients that cancel below the tolerance are dropped.
  void add_term(int j, GridField c) {
    if (c.grid() != ctx_->base.grid()) throw ShapeError("ResolventPolynomial: coefficient on a different grid");
    auto it = c_.find(j);
    if (it == c_.end()) {
      if (c.sup_norm() >= kDropTolerance) c_.emplace(j, std::move(c));
      return;
    }
    it->second += c;
    if (it->second.sup_norm() < kDropTolerance) c_.erase(it);
  }

  // Pointwise value at the lattice, index xi * M + ei.
  std::vector<cplx> eval(cplx lambda) const {
    const GridField& a = ctx_->a;
    std::vector<cplx> out(a.points(), 0.0);
    for (const auto& [j, f] : c_)
      for (std::size_t p = 0; p < out.size(); ++p) out[p] += f.value(p) * ipow(a.value(p) - lambda, -j);
    return out;
  }

  ResolventPolynomial& operator+=(const ResolventPolynomial& o) {
    check(o);
    for (const auto& [j, f] : o.c_) add_term(j, f);
    return *this;
  }
  ResolventPolynomial& operator*=(cplx s) {
    for (auto& [j, f] : c_) f *= s;
    if (s == 0.0) c_.clear();
    return *this;
  }
  friend ResolventPolynomial operator+(ResolventPolynomial a, const ResolventPolynomial& b) { return a += b; }
  friend ResolventPolynomial operator-(ResolventPolynomial a, const ResolventPolynomial& b) {
    ResolventPolynomial nb = b;
    nb *= -1.0;
    return a += nb;
  }
  friend ResolventPolynomial operator*(cplx s, ResolventPolynomial a) { return a *= s; }

  // Pole orders add; coefficients multiply pointwise.
  friend ResolventPolynomial multiply(const ResolventPolynomial& p, const ResolventPolynomial& q) {
    p.check(q);
    ResolventPolynomial r(p.ctx_);
    for (const auto& [i, f] : p.c_)
      for (const auto& [j, g] : q.c_) r.add_term(i + j, f * g);
    return r;
  }

  ResolventPolynomial deriv_eta(int axis) const {
    const TorusGrid& g = ctx_->base.grid();
    if (axis < 0 || axis >= g.dim()) throw DomainError("deriv_eta: invalid axis");
    ResolventPolynomial r(ctx_);
    if (c_.empty()) return r;
    if (jet_order() < 1) throw UnsupportedOrderError("deriv_eta: coefficients carry no further eta-derivatives");
    const GridField da = ctx_->a.eta_derivative(axis);
    for (const auto& [j, f] : c_) {
      r.add_term(j, f.eta_derivative(axis));
      if (j != 0) r.add_term(j + 1, (f * da) * cplx(-double(j)));
    }
    return r;
  }

  ResolventPolynomial deriv_x(int axis) const {
    const TorusGrid& g = ctx_->base.grid();
    if (axis < 0 || axis >= g.dim()) throw DomainError("deriv_x: invalid axis");
    ResolventPolynomial r(ctx_);
    for (const auto& [j, f] : c_) {
      r.add_term(j, f.x_derivative(axis));
      if (j != 0 && !ctx_->base.x_independent()) r.add_term(j + 1, (f * ctx_->dx_a[axis]) * cplx(-double(j)));
    }
    return r;
  }

  ResolventPolynomial deriv_lambda() const {
    ResolventPolynomial r(ctx_);
    for (const auto& [j, f] : c_)
      if (j != 0) r.add_term(j + 1, f * cplx(double(j)));
    return r;
  }

  ResolventPolynomial deriv_eta(const MultiIndex& alpha) const {
    ResolventPolynomial r = *this;
    for (int axis = 0; axis < 2; ++axis)
      for (int k = 0; k < alpha[axis]; ++k) r = r.deriv_eta(axis);
    return r;
  }
  ResolventPolynomial deriv_x(const MultiIndex& q) const {
    ResolventPolynomial r = *this;
    for (int axis = 0; axis < 2; ++axis)
      for (int k = 0; k < q[axis]; ++k) r = r.deriv_x(axis);
    return r;
  }

  bool same_context(const ResolventPolynomial& o) const { return ctx_ == o.ctx_; }

 private:
  static cplx ipow(cplx z, int k) {
    if (k == 0) return 1.0;
    cplx base = k > 0 ? z : 1.0 / z;
    int e = std::abs(k);
    cplx r = 1.0;
    while (e) {
      if (e & 1) r *= base;
      base *= base;
      e >>= 1;
    }
    return r;
  }

  void check(const ResolventPolynomial& o) const {
    if (ctx_ != o.ctx_) throw DomainError("ResolventPolynomial: operands have different base symbols");
  }

  std::shared_ptr<const LaurentContext> ctx_;
  std::map<int, GridField> c_;
};

// sum_{|alpha| <= K} (1/alpha!) d_eta^alpha P . D_x^alpha Q with D_x = -i d_x.
inline ResolventPolynomial compose_truncated(const ResolventPolynomial& p, const ResolventPolynomial& q, int k) {
  if (k < 0 || k > 3) throw UnsupportedOrderError("compose_truncated supports 0 <= K <= 3, got " + std::to_string(k));
  if (!p.same_context(q)) throw DomainError("compose_truncated: operands have different base symbols");
  const int dim = p.context()->base.grid().dim();
  ResolventPolynomial r(p.context());
  for (const MultiIndex& alpha : multi_indices_up_to(dim, k)) {
    const int order = total_order(alpha);
    ResolventPolynomial dq = q.deriv_x(alpha);
    if (dq.empty()) continue;
    ResolventPolynomial dp = p.deriv_eta(alpha);
    if (dp.empty()) continue;
    const cplx w = std::pow(-kI, order) / multi_factorial(alpha);
    r += w * multiply(dp, dq);
  }
  return r;
}

// Termwise Cauchy integral over a contour enclosing the values of a, oriented so that
// (a - lambda)^{-1} integrates to f(a):
//   (1/2 pi i) oint f(lambda) (a - lambda)^{-j} d lambda = (-1)^{j+1} f^{(j-1)}(a) / (j-1)!.
// Terms with j <= 0 are entire in lambda and integrate to zero. f_derivs[p] is f^{(p)}.
inline GridField cauchy_apply(const ResolventPolynomial& p, const std::vector<std::function<cplx(cplx)>>& f_derivs) {
  const GridField& a = p.context()->a;
  GridField out(a.grid(), 0);
  for (const auto& [j, c] : p.coeffs()) {
    if (j <= 0) continue;
    if (j - 1 >= int(f_derivs.size()))
      throw ArityError("cauchy_apply: pole order " + std::to_string(j) + " needs f^(" + std::to_string(j - 1) +
                       ") but only " + std::to_string(f_derivs.size()) + " derivatives were supplied");
    const double w = ((j + 1) % 2 == 0 ? 1.0 : -1.0) / factorial(j - 1);
    const auto& fd = f_derivs[std::size_t(j - 1)];
    for (std::size_t q = 0; q < out.points(); ++q) out.value_ref(q) += w * c.value(q) * fd(a.value(q));
  }
  return out;
}

inline GridField cauchy_apply(const ResolventPolynomial& p, const HoloFunction& f) {
  std::vector<std::function<cplx(cplx)>> d;
  for (int k = 0; k < std::max(0, p.max_pole_order()); ++k) d.push_back([f, k](cplx z) { return f.derivative(k, z); });
  return cauchy_apply(p, d);
}

}  // namespace psido
