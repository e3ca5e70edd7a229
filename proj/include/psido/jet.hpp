#pragma once

// Truncated Taylor jets in the frequency variable eta (n <= 2).
//
// A jet of order D stores t_beta = d^beta f / beta! for |beta| <= D, ordered by total degree,
// so a jet of order D' < D is a prefix of the order-D jet. In two variables the multi-index
// (d - i, i) of degree d sits at position d (d + 1) / 2 + i.

#include <array>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "psido/errors.hpp"
#include "psido/grid.hpp"

namespace psido {

class JetLayout {
 public:
  static const JetLayout& get(int dim, int order) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::unique_ptr<JetLayout>> cache;
    if (dim != 1 && dim != 2) throw DomainError("JetLayout: dimension must be 1 or 2");
    if (order < 0) throw UnsupportedOrderError("JetLayout: negative order");
    std::lock_guard lock(mu);
    auto& slot = cache[{dim, order}];
    if (!slot) slot.reset(new JetLayout(dim, order));
    return *slot;
  }

  static int size_for(int dim, int order) { return dim == 1 ? order + 1 : (order + 1) * (order + 2) / 2; }
  static int position(int dim, const MultiIndex& b) {
    if (dim == 1) return b[0];
    const int d = b[0] + b[1];
    return d * (d + 1) / 2 + b[1];
  }

  int dim() const { return dim_; }
  int order() const { return order_; }
  int size() const { return int(index_.size()); }
  const MultiIndex& index(int p) const { return index_[p]; }
  int position(const MultiIndex& b) const { return position(dim_, b); }

  // (i, j, k): t_k += a_i * b_j whenever index(i) + index(j) = index(k).
  const std::vector<std::array<int, 3>>& products() const { return products_; }

  // For the derivative along `axis`: target position in the order-(D-1) layout, source
  // position here, and the factor (beta_axis + 1).
  struct DerivEntry {
    int target;
    int source;
    double factor;
  };
  const std::vector<DerivEntry>& derivative(int axis) const { return deriv_[axis]; }

 private:
  JetLayout(int dim, int order) : dim_(dim), order_(order) {
    index_ = multi_indices_up_to(dim, order);
    const int sz = size();
    for (int i = 0; i < sz; ++i)
      for (int j = 0; j < sz; ++j) {
        MultiIndex s{index_[i][0] + index_[j][0], index_[i][1] + index_[j][1]};
        if (total_order(s) <= order) products_.push_back({i, j, position(s)});
      }
    if (order > 0)
      for (int axis = 0; axis < dim; ++axis)
        for (int t = 0; t < size_for(dim, order - 1); ++t) {
          MultiIndex g = index_[t];
          MultiIndex src = g;
          src[axis] += 1;
          deriv_[axis].push_back({t, position(src), double(g[axis] + 1)});
        }
  }

  int dim_;
  int order_;
  std::vector<MultiIndex> index_;
  std::vector<std::array<int, 3>> products_;
  std::array<std::vector<DerivEntry>, 2> deriv_;
};

namespace jetops {

// out = a * b truncated to `layout`; out must not alias a or b.
inline void mul(const JetLayout& layout, const cplx* a, const cplx* b, cplx* out) {
  for (int k = 0; k < layout.size(); ++k) out[k] = 0.0;
  for (const auto& [i, j, k] : layout.products()) out[k] += a[i] * b[j];
}

// out = d/d eta_axis of `in` (order D in `layout`), written in the order D-1 layout.
inline void derivative(const JetLayout& layout, int axis, const cplx* in, cplx* out) {
  for (const auto& e : layout.derivative(axis)) out[e.target] = e.factor * in[e.source];
}

// Composition g(u) of a univariate function with a jet u, given g^{(k)}(u_0), k = 0..D.
inline void compose(const JetLayout& layout, const cplx* u, std::span<const cplx> gderivs, cplx* out) {
  const int d = layout.order();
  if (int(gderivs.size()) < d + 1) throw ArityError("jet compose: not enough derivatives of the outer function");
  const int sz = layout.size();
  std::vector<cplx> sigma(u, u + sz), acc(sz, 0.0), tmp(sz);
  sigma[0] = 0.0;
  acc[0] = gderivs[d] / factorial(d);
  for (int k = d - 1; k >= 0; --k) {
    mul(layout, acc.data(), sigma.data(), tmp.data());
    tmp[0] += gderivs[k] / factorial(k);
    acc.swap(tmp);
  }
  for (int k = 0; k < sz; ++k) out[k] = acc[k];
}

}  // namespace jetops

// Owning jet value, used by symbol evaluators.
class Jet {
 public:
  Jet(int dim, int order) : layout_(&JetLayout::get(dim, order)), c_(layout_->size(), 0.0) {}

  static Jet constant(int dim, int order, cplx v) {
    Jet j(dim, order);
    j.c_[0] = v;
    return j;
  }
  // The coordinate function eta_axis expanded at eta0.
  static Jet coordinate(int dim, int order, int axis, double eta0) {
    Jet j = constant(dim, order, eta0);
    if (order >= 1) j.c_[j.layout_->position(axis == 0 ? MultiIndex{1, 0} : MultiIndex{0, 1})] = 1.0;
    return j;
  }
  // s = 1 + |eta|^2 expanded at eta0.
  static Jet bracket_squared(int dim, int order, const Point& eta0) {
    Jet j = constant(dim, order, 1.0 + eta0[0] * eta0[0] + (dim == 2 ? eta0[1] * eta0[1] : 0.0));
    for (int axis = 0; axis < dim; ++axis) {
      MultiIndex e1{0, 0}, e2{0, 0};
      e1[axis] = 1;
      e2[axis] = 2;
      if (order >= 1) j.c_[j.layout_->position(e1)] = 2.0 * eta0[axis];
      if (order >= 2) j.c_[j.layout_->position(e2)] = 1.0;
    }
    return j;
  }

  int dim() const { return layout_->dim(); }
  int order() const { return layout_->order(); }
  const JetLayout& layout() const { return *layout_; }
  cplx value() const { return c_[0]; }
  cplx& operator[](int p) { return c_[p]; }
  cplx operator[](int p) const { return c_[p]; }
  cplx coeff(const MultiIndex& b) const { return c_[layout_->position(b)]; }
  // d^beta f (not divided by beta!).
  cplx partial(const MultiIndex& b) const { return coeff(b) * multi_factorial(b); }
  std::span<const cplx> data() const { return c_; }
  std::span<cplx> data() { return c_; }

  Jet truncated(int order) const {
    if (order > this->order()) throw UnsupportedOrderError("Jet::truncated: cannot raise order");
    Jet j(dim(), order);
    for (int k = 0; k < j.layout_->size(); ++k) j.c_[k] = c_[k];
    return j;
  }

  Jet derivative(int axis) const {
    if (order() == 0) throw UnsupportedOrderError("Jet::derivative: order-0 jet carries no derivatives");
    Jet j(dim(), order() - 1);
    jetops::derivative(*layout_, axis, c_.data(), j.c_.data());
    return j;
  }
  Jet derivative(const MultiIndex& alpha) const {
    Jet j = *this;
    for (int axis = 0; axis < 2; ++axis)
      for (int r = 0; r < alpha[axis]; ++r) j = j.derivative(axis);
    return j;
  }

  Jet compose(std::span<const cplx> gderivs) const {
    Jet j(dim(), order());
    jetops::compose(*layout_, c_.data(), gderivs, j.c_.data());
    return j;
  }

  Jet& operator+=(const Jet& o) {
    const int sz = std::min(layout_->size(), o.layout_->size());
    if (o.order() < order()) *this = truncated(o.order());
    for (int k = 0; k < sz; ++k) c_[k] += o.c_[k];
    return *this;
  }
  Jet& operator*=(cplx s) {
    for (auto& v : c_) v *= s;
    return *this;
  }
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator*(Jet a, cplx s) { return a *= s; }
  friend Jet operator*(cplx s, Jet a) { return a *= s; }
  friend Jet operator*(const Jet& a, const Jet& b) {
    const int ord = std::min(a.order(), b.order());
    Jet j(a.dim(), ord);
    jetops::mul(*j.layout_, a.c_.data(), b.c_.data(), j.c_.data());
    return j;
  }
  Jet conj() const {
    Jet j = *this;
    for (auto& v : j.c_) v = std::conj(v);
    return j;
  }

 private:
  const JetLayout* layout_;
  std::vector<cplx> c_;
};

// Derivative lists g^{(k)}(u0), k = 0..order, for the univariate building blocks.
namespace univariate {

// u -> u^p for real u > 0.
inline std::vector<cplx> power(double u0, double p, int order) {
  std::vector<cplx> d(order + 1);
  double coef = 1.0;
  for (int k = 0; k <= order; ++k) {
    d[k] = coef * std::pow(u0, p - k);
    coef *= (p - k);
  }
  return d;
}

inline std::vector<cplx> cosine(cplx u0, int order) {
  std::vector<cplx> d(order + 1);
  const cplx c = std::cos(u0), s = std::sin(u0);
  const cplx cyc[4] = {c, -s, -c, s};
  for (int k = 0; k <= order; ++k) d[k] = cyc[k % 4];
  return d;
}

inline std::vector<cplx> sine(cplx u0, int order) {
  std::vector<cplx> d(order + 1);
  const cplx c = std::cos(u0), s = std::sin(u0);
  const cplx cyc[4] = {s, c, -s, -c};
  for (int k = 0; k <= order; ++k) d[k] = cyc[k % 4];
  return d;
}

inline std::vector<cplx> exponential(cplx u0, int order) { return std::vector<cplx>(order + 1, std::exp(u0)); }

}  // namespace univariate

}  // namespace psido
