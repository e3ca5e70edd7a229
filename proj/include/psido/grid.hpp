#pragma once

// Discrete flat torus T^n = [0, 2pi)^n, n in {1, 2}.
//
//   spatial nodes      x_j   = 2 pi j / N,            j   = 0 .. N-1   (per axis)
//   frequency lattice  eta_e = e - N/2,               e   = 0 .. N-1   (per axis)
//   forward transform  u^(eta) = N^{-n} sum_j u(x_j) e^{-i x_j . eta}
//   inverse transform  u(x_j)  = sum_eta u^(eta) e^{i x_j . eta}
//
// Multi-dimensional samples are stored row-major: flat index = i0 * N + i1.
// The unpaired frequency -N/2 is part of the lattice and is never symmetrized.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "psido/errors.hpp"

namespace psido {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

// Point in R^n (n <= 2); unused trailing components stay zero.
using Point = std::array<double, 2>;
// Multi-index in N^n (n <= 2); unused trailing components stay zero.
using MultiIndex = std::array<int, 2>;

inline int total_order(const MultiIndex& a) { return a[0] + a[1]; }

inline double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

inline double multi_factorial(const MultiIndex& a) { return factorial(a[0]) * factorial(a[1]); }

// All multi-indices of dimension n with total order <= max_order, sorted by total order.
inline std::vector<MultiIndex> multi_indices_up_to(int n, int max_order) {
  std::vector<MultiIndex> out;
  for (int d = 0; d <= max_order; ++d) {
    if (n == 1) {
      out.push_back({d, 0});
    } else {
      for (int i = 0; i <= d; ++i) out.push_back({d - i, i});
    }
  }
  return out;
}

// Japanese bracket <eta> = (1 + |eta|^2)^{1/2}; the fiber weight is the Euclidean norm.
inline double bracket(const Point& eta) { return std::sqrt(1.0 + eta[0] * eta[0] + eta[1] * eta[1]); }

class TorusGrid {
 public:
  TorusGrid(int dim, int points_per_axis) : dim_(dim), n_(points_per_axis) {
    if (dim != 1 && dim != 2) throw DomainError("TorusGrid: dimension must be 1 or 2");
    if (points_per_axis < 4 || points_per_axis % 2 != 0)
      throw DomainError("TorusGrid: N must be even and >= 4, got " + std::to_string(points_per_axis));
  }

  int dim() const { return dim_; }
  int points() const { return n_; }
  // N^n: number of spatial nodes, equal to the number of lattice frequencies.
  std::size_t size() const { return dim_ == 1 ? std::size_t(n_) : std::size_t(n_) * n_; }

  double x_coord(int i) const { return 2.0 * kPi * i / n_; }
  int eta_coord(int e) const { return e - n_ / 2; }

  MultiIndex axis_indices(std::size_t flat) const {
    if (dim_ == 1) return {int(flat), 0};
    return {int(flat / n_), int(flat % n_)};
  }
  std::size_t flat_index(const MultiIndex& idx) const {
    return dim_ == 1 ? std::size_t(idx[0]) : std::size_t(idx[0]) * n_ + idx[1];
  }

  Point x_point(std::size_t flat) const {
    auto idx = axis_indices(flat);
    return {x_coord(idx[0]), dim_ == 2 ? x_coord(idx[1]) : 0.0};
  }
  MultiIndex eta_lattice(std::size_t flat) const {
    auto idx = axis_indices(flat);
    return {eta_coord(idx[0]), dim_ == 2 ? eta_coord(idx[1]) : 0};
  }
  Point eta_point(std::size_t flat) const {
    auto e = eta_lattice(flat);
    return {double(e[0]), double(e[1])};
  }

  // 1-D matrix F1[e, j] = N^{-1} e^{-i x_j eta_e}.
  CMatrix dft_matrix_1d() const {
    CMatrix f(n_, n_);
    for (int e = 0; e < n_; ++e)
      for (int j = 0; j < n_; ++j) f(e, j) = phase(-(long(eta_coord(e)) * j)) / double(n_);
    return f;
  }
  // 1-D matrix G1[j, e] = e^{i x_j eta_e}; G1 = F1^{-1}.
  CMatrix idft_matrix_1d() const {
    CMatrix g(n_, n_);
    for (int j = 0; j < n_; ++j)
      for (int e = 0; e < n_; ++e) g(j, e) = phase(long(eta_coord(e)) * j);
    return g;
  }
  // Full forward transform matrix (size N^n x N^n): coefficients = F * samples.
  CMatrix dft_matrix() const {
    CMatrix f1 = dft_matrix_1d();
    return dim_ == 1 ? f1 : kron(f1, f1);
  }
  CMatrix idft_matrix() const {
    CMatrix g1 = idft_matrix_1d();
    return dim_ == 1 ? g1 : kron(g1, g1);
  }

  // e^{2 pi i k / N} for integer k, exact on the N-th roots of unity.
  cplx phase(long k) const {
    long r = ((k % n_) + n_) % n_;
    if (r == 0) return 1.0;
    if (2 * r == n_) return -1.0;
    if (4 * r == n_) return kI;
    if (4 * r == 3 * n_) return -kI;
    double t = 2.0 * kPi * double(r) / n_;
    return {std::cos(t), std::sin(t)};
  }

  bool operator==(const TorusGrid& o) const { return dim_ == o.dim_ && n_ == o.n_; }
  bool operator!=(const TorusGrid& o) const { return !(*this == o); }

 private:
  static CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < a.cols(); ++j)
        k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return k;
  }

  int dim_;
  int n_;
};

namespace detail {

inline void require_grid_size(const TorusGrid& g, std::size_t n, const char* what) {
  if (n != g.size())
    throw ShapeError(std::string(what) + ": expected " + std::to_string(g.size()) + " entries, got " +
                     std::to_string(n));
}

// Applies the N x N matrix `op` along spatial axis `axis` of a block of samples laid out as
// [spatial flat index][cols] (row-major, `cols` values per spatial node).
inline void apply_along_axis(const TorusGrid& g, const CMatrix& op, int axis, std::span<cplx> data,
                             std::size_t cols) {
  using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Index n = g.points();
  if (g.dim() == 1 || axis == 0) {
    const Eigen::Index inner = Eigen::Index(g.size() / n) * Eigen::Index(cols);
    Eigen::Map<RowMat> m(data.data(), n, inner);
    RowMat r = op * m;
    m = r;
    return;
  }
  const Eigen::Index inner = Eigen::Index(cols);
  for (Eigen::Index i0 = 0; i0 < n; ++i0) {
    Eigen::Map<RowMat> m(data.data() + i0 * n * inner, n, inner);
    RowMat r = op * m;
    m = r;
  }
}

}  // namespace detail

// u^(eta) = N^{-n} sum_j u(x_j) e^{-i x_j . eta}; output indexed by the lattice flat index.
inline CVector dft_forward(const TorusGrid& g, std::span<const cplx> u) {
  detail::require_grid_size(g, u.size(), "dft_forward");
  std::vector<cplx> buf(u.begin(), u.end());
  CMatrix f1 = g.dft_matrix_1d();
  for (int axis = 0; axis < g.dim(); ++axis) detail::apply_along_axis(g, f1, axis, buf, 1);
  return Eigen::Map<CVector>(buf.data(), Eigen::Index(buf.size()));
}

inline CVector dft_inverse(const TorusGrid& g, std::span<const cplx> coeffs) {
  detail::require_grid_size(g, coeffs.size(), "dft_inverse");
  std::vector<cplx> buf(coeffs.begin(), coeffs.end());
  CMatrix g1 = g.idft_matrix_1d();
  for (int axis = 0; axis < g.dim(); ++axis) detail::apply_along_axis(g, g1, axis, buf, 1);
  return Eigen::Map<CVector>(buf.data(), Eigen::Index(buf.size()));
}

// Differentiation matrix of the trigonometric interpolant on the lattice: multiplies the
// coefficient of eta by (i eta)^order, including the unpaired mode -N/2.
inline CMatrix spectral_diff_matrix_1d(const TorusGrid& g, int order) {
  if (order < 0) throw DomainError("spectral derivative order must be >= 0");
  CMatrix f1 = g.dft_matrix_1d();
  CMatrix g1 = g.idft_matrix_1d();
  CVector mult(g.points());
  for (int e = 0; e < g.points(); ++e) mult(e) = std::pow(kI * double(g.eta_coord(e)), order);
  return g1 * mult.asDiagonal() * f1;
}

// Spectral x-derivative of order `order` along `axis`, applied to a block of samples with
// `cols` interleaved columns per spatial node (cols = 1 for a plain grid function).
// Lines that are exactly constant along the axis get an exact zero derivative.
inline void spectral_derivative_x_inplace(const TorusGrid& g, std::span<cplx> data, std::size_t cols, int axis,
                                          int order) {
  if (axis < 0 || axis >= g.dim()) throw DomainError("spectral_derivative_x: invalid axis " + std::to_string(axis));
  if (order == 0) return;
  const std::size_t n = std::size_t(g.points());
  const std::size_t lines = g.size() / n;
  // Spatial flat index of node k on line l.
  auto node = [&](std::size_t l, std::size_t k) {
    if (g.dim() == 1) return k;
    return axis == 1 ? l * n + k : k * n + l;
  };
  std::vector<char> flat(lines * cols, 1);
  for (std::size_t l = 0; l < lines; ++l)
    for (std::size_t c = 0; c < cols; ++c) {
      const cplx v0 = data[node(l, 0) * cols + c];
      for (std::size_t k = 1; k < n; ++k)
        if (data[node(l, k) * cols + c] != v0) {
          flat[l * cols + c] = 0;
          break;
        }
    }
  detail::apply_along_axis(g, spectral_diff_matrix_1d(g, order), axis, data, cols);
  for (std::size_t l = 0; l < lines; ++l)
    for (std::size_t c = 0; c < cols; ++c)
      if (flat[l * cols + c])
        for (std::size_t k = 0; k < n; ++k) data[node(l, k) * cols + c] = 0.0;
}

inline CVector spectral_derivative_x(const TorusGrid& g, std::span<const cplx> u, int axis, int order) {
  detail::require_grid_size(g, u.size(), "spectral_derivative_x");
  std::vector<cplx> buf(u.begin(), u.end());
  spectral_derivative_x_inplace(g, buf, 1, axis, order);
  return Eigen::Map<CVector>(buf.data(), Eigen::Index(buf.size()));
}

// Bessel potential multiplier <eta>^s on the lattice.
inline RVector bessel_multiplier(const TorusGrid& g, double s) {
  RVector m = RVector::Zero(Eigen::Index(g.size()));
  for (std::size_t k = 0; k < g.size(); ++k) m(Eigen::Index(k)) = std::pow(bracket(g.eta_point(k)), s);
  return m;
}

// Parameter Bessel multiplier (|lambda|^{1/|k|} + <eta>)^k.
inline RVector param_bessel_multiplier(const TorusGrid& g, double k, cplx lambda) {
  if (k == 0.0) throw DomainError("param_bessel_multiplier: k must be nonzero");
  const double shift = std::pow(std::abs(lambda), 1.0 / std::abs(k));
  RVector m = RVector::Zero(Eigen::Index(g.size()));
  for (std::size_t e = 0; e < g.size(); ++e)
    m(Eigen::Index(e)) = std::pow(shift + bracket(g.eta_point(e)), k);
  return m;
}

}  // namespace psido
