#pragma once

// Samples on the discrete phase space: one eta-jet per (x_j, eta_e) pair.
//
// Storage is row-major over x then eta then jet coefficient:
//   data[(xi * M + ei) * ncoef + c],  M = N^n.
// An order-0 field is a plain N^n x N^n sample array.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "psido/errors.hpp"
#include "psido/grid.hpp"
#include "psido/jet.hpp"

namespace psido {

class GridField {
 public:
  GridField(const TorusGrid& grid, int order)
      : grid_(grid), order_(order), ncoef_(JetLayout::size_for(grid.dim(), order)),
        data_(grid.size() * grid.size() * std::size_t(ncoef_), 0.0) {
    if (order < 0) throw UnsupportedOrderError("GridField: negative jet order");
  }

  static GridField constant(const TorusGrid& grid, cplx v, int order = 0) {
    GridField f(grid, order);
    for (std::size_t p = 0; p < f.points(); ++p) f.data_[p * f.ncoef_] = v;
    return f;
  }

  // Order-0 field from samples indexed by xi * M + ei.
  static GridField from_values(const TorusGrid& grid, std::span<const cplx> values) {
    GridField f(grid, 0);
    if (values.size() != f.points())
      throw ShapeError("GridField::from_values: expected " + std::to_string(f.points()) + " samples, got " +
                       std::to_string(values.size()));
    std::copy(values.begin(), values.end(), f.data_.begin());
    return f;
  }

  const TorusGrid& grid() const { return grid_; }
  int order() const { return order_; }
  int ncoef() const { return ncoef_; }
  const JetLayout& layout() const { return JetLayout::get(grid_.dim(), order_); }
  std::size_t points() const { return grid_.size() * grid_.size(); }
  std::size_t point_index(std::size_t xi, std::size_t ei) const { return xi * grid_.size() + ei; }

  cplx* jet(std::size_t p) { return data_.data() + p * ncoef_; }
  const cplx* jet(std::size_t p) const { return data_.data() + p * ncoef_; }
  cplx value(std::size_t xi, std::size_t ei) const { return jet(point_index(xi, ei))[0]; }
  cplx value(std::size_t p) const { return jet(p)[0]; }
  cplx& value_ref(std::size_t p) { return jet(p)[0]; }

  std::vector<cplx> values() const {
    std::vector<cplx> v(points());
    for (std::size_t p = 0; p < points(); ++p) v[p] = value(p);
    return v;
  }
  std::span<const cplx> raw() const { return data_; }
  std::span<cplx> raw() { return data_; }

  GridField truncated(int order) const {
    if (order > order_) throw UnsupportedOrderError("GridField::truncated: cannot raise jet order");
    if (order == order_) return *this;
    GridField f(grid_, order);
    for (std::size_t p = 0; p < points(); ++p) std::copy_n(jet(p), f.ncoef_, f.jet(p));
    return f;
  }

  GridField& operator+=(const GridField& o) {
    check_grid(o);
    if (o.order_ < order_) *this = truncated(o.order_);
    for (std::size_t p = 0; p < points(); ++p) {
      cplx* d = jet(p);
      const cplx* s = o.jet(p);
      for (int c = 0; c < ncoef_; ++c) d[c] += s[c];
    }
    return *this;
  }
  GridField& operator-=(const GridField& o) { return *this += o * cplx(-1.0); }
  GridField& operator*=(cplx s) {
    for (auto& v : data_) v *= s;
    return *this;
  }
  friend GridField operator+(GridField a, const GridField& b) { return a += b; }
  friend GridField operator-(GridField a, const GridField& b) { return a -= b; }
  friend GridField operator*(GridField a, cplx s) { return a *= s; }
  friend GridField operator*(cplx s, GridField a) { return a *= s; }

  // Pointwise product of jets; the result has the smaller of the two orders.
  friend GridField operator*(const GridField& a, const GridField& b) {
    a.check_grid(b);
    GridField r(a.grid_, std::min(a.order_, b.order_));
    const JetLayout& lay = r.layout();
    if (r.order_ == 0) {
      for (std::size_t p = 0; p < r.points(); ++p) r.data_[p] = a.jet(p)[0] * b.jet(p)[0];
      return r;
    }
    for (std::size_t p = 0; p < r.points(); ++p) jetops::mul(lay, a.jet(p), b.jet(p), r.jet(p));
    return r;
  }

  // d/d eta_axis; the jet order drops by one.
  GridField eta_derivative(int axis) const {
    if (axis < 0 || axis >= grid_.dim()) throw DomainError("eta_derivative: invalid axis");
    if (order_ == 0) throw UnsupportedOrderError("eta_derivative: field carries no eta-derivatives");
    GridField r(grid_, order_ - 1);
    const JetLayout& lay = layout();
    for (std::size_t p = 0; p < points(); ++p) jetops::derivative(lay, axis, jet(p), r.jet(p));
    return r;
  }

  // d/dx_axis of the trigonometric interpolant, applied to every eta column and jet slot.
  GridField x_derivative(int axis, int order = 1) const {
    GridField r = *this;
    spectral_derivative_x_inplace(grid_, r.data_, grid_.size() * std::size_t(ncoef_), axis, order);
    return r;
  }

  GridField conj() const {
    GridField r = *this;
    for (auto& v : r.data_) v = std::conj(v);
    return r;
  }

  // Largest modulus over all stored jet coefficients.
  double sup_norm() const {
    double m = 0.0;
    for (const auto& v : data_) m = std::max(m, std::abs(v));
    return m;
  }
  double value_sup_norm() const {
    double m = 0.0;
    for (std::size_t p = 0; p < points(); ++p) m = std::max(m, std::abs(value(p)));
    return m;
  }
  bool is_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
  }

 private:
  void check_grid(const GridField& o) const {
    if (grid_ != o.grid_) throw ShapeError("GridField: fields live on different grids");
  }

  TorusGrid grid_;
  int order_;
  int ncoef_;
  std::vector<cplx> data_;
};

}  // namespace psido
