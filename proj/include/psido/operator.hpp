#pragma once

// Dense realizations of quantized symbols on the grid.
//
//   tau = 0:  M[j,k] = N^{-n} sum_eta a(x_j, eta) e^{i (x_j - x_k).eta}
//   tau = 1:  M[j,k] = N^{-n} sum_eta a(x_k, eta) e^{i (x_j - x_k).eta}

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "psido/errors.hpp"
#include "psido/grid.hpp"
#include "psido/symbol.hpp"

namespace psido {

// Dense eigendecomposition A = V diag(lambda) V^{-1}.
struct SpectralData {
  CVector eigenvalues;
  CMatrix vectors;
  CMatrix vectors_inverse;
  double condition = 1.0;  // 2-norm condition number of V
};

class OperatorMatrix {
 public:
  OperatorMatrix(const TorusGrid& grid, CMatrix entries, std::string provenance)
      : grid_(grid), m_(std::move(entries)), provenance_(std::move(provenance)), cache_(std::make_shared<Cache>()) {
    const auto n = Eigen::Index(grid_.size());
    if (m_.rows() != n || m_.cols() != n)
      throw ShapeError("OperatorMatrix: expected " + std::to_string(n) + "x" + std::to_string(n) + " entries");
    if (!m_.allFinite()) throw DomainError("OperatorMatrix '" + provenance_ + "' has non-finite entries");
  }

  static OperatorMatrix identity(const TorusGrid& g) {
    return {g, CMatrix::Identity(Eigen::Index(g.size()), Eigen::Index(g.size())), "identity"};
  }

  const TorusGrid& grid() const { return grid_; }
  const CMatrix& matrix() const { return m_; }
  const std::string& provenance() const { return provenance_; }
  Eigen::Index rows() const { return m_.rows(); }

  cplx trace() const { return m_.trace(); }
  double frobenius() const { return m_.norm(); }

  OperatorMatrix adjoint() const { return {grid_, m_.adjoint(), provenance_ + "*"}; }

  friend OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
    a.check(b);
    return {a.grid_, a.m_ + b.m_, "(" + a.provenance_ + "+" + b.provenance_ + ")"};
  }
  friend OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b) {
    a.check(b);
    return {a.grid_, a.m_ - b.m_, "(" + a.provenance_ + "-" + b.provenance_ + ")"};
  }
  friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
    a.check(b);
    return {a.grid_, a.m_ * b.m_, a.provenance_ + "*" + b.provenance_};
  }
  friend OperatorMatrix operator*(cplx s, const OperatorMatrix& a) { return {a.grid_, s * a.m_, a.provenance_}; }
  OperatorMatrix shifted(cplx lambda) const {
    CMatrix m = m_;
    m.diagonal().array() -= lambda;
    return {grid_, std::move(m), provenance_ + "-lambda"};
  }

  CVector apply(const CVector& u) const { return m_ * u; }

  // Eigendecomposition, computed once and shared between copies.
  const SpectralData& spectrum() const {
    std::lock_guard lock(cache_->mu);
    if (!cache_->spec) {
      Eigen::ComplexEigenSolver<CMatrix> es(m_, true);
      if (es.info() != Eigen::Success) throw DecompositionError("eigendecomposition failed for '" + provenance_ + "'");
      auto sd = std::make_unique<SpectralData>();
      sd->eigenvalues = es.eigenvalues();
      sd->vectors = es.eigenvectors();
      Eigen::PartialPivLU<CMatrix> lu(sd->vectors);
      sd->vectors_inverse = lu.inverse();
      Eigen::JacobiSVD<CMatrix> svd(sd->vectors);
      const auto& sv = svd.singularValues();
      sd->condition = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
      cache_->spec = std::move(sd);
    }
    return *cache_->spec;
  }
  const CVector& eigenvalues() const { return spectrum().eigenvalues; }

 private:
  struct Cache {
    std::mutex mu;
    std::unique_ptr<SpectralData> spec;
  };

  void check(const OperatorMatrix& o) const {
    if (grid_ != o.grid_) throw ShapeError("OperatorMatrix: operands live on different grids");
  }

  TorusGrid grid_;
  CMatrix m_;
  std::string provenance_;
  std::shared_ptr<Cache> cache_;
};

namespace detail {

// e^{i x_j . eta_e} for spatial flat index j and lattice flat index e.
inline cplx plane_wave(const TorusGrid& g, std::size_t j, std::size_t e) {
  const MultiIndex xj = g.axis_indices(j);
  const MultiIndex eta = g.eta_lattice(e);
  return g.phase(long(xj[0]) * eta[0] + long(xj[1]) * eta[1]);
}

inline CMatrix plane_wave_matrix(const TorusGrid& g) {
  const auto m = Eigen::Index(g.size());
  CMatrix w(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index e = 0; e < m; ++e) w(j, e) = plane_wave(g, std::size_t(j), std::size_t(e));
  return w;
}

}  // namespace detail

// tau = 0 quantization from lattice samples a(x_j, eta_e) stored at j * M + e.
inline OperatorMatrix op_tau0(const TorusGrid& g, std::span<const cplx> samples, std::string provenance) {
  const auto m = Eigen::Index(g.size());
  if (samples.size() != std::size_t(m * m)) throw ShapeError("op_tau0: sample array has the wrong size");
  CMatrix w = detail::plane_wave_matrix(g);
  CMatrix s(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index e = 0; e < m; ++e) s(j, e) = samples[std::size_t(j * m + e)] * w(j, e);
  return {g, s * w.adjoint() / double(m), std::move(provenance)};
}

inline OperatorMatrix op_tau1(const TorusGrid& g, std::span<const cplx> samples, std::string provenance) {
  const auto m = Eigen::Index(g.size());
  if (samples.size() != std::size_t(m * m)) throw ShapeError("op_tau1: sample array has the wrong size");
  CMatrix w = detail::plane_wave_matrix(g);
  CMatrix t(m, m);
  for (Eigen::Index k = 0; k < m; ++k)
    for (Eigen::Index e = 0; e < m; ++e) t(e, k) = samples[std::size_t(k * m + e)] * std::conj(w(k, e));
  return {g, w * t / double(m), std::move(provenance)};
}

inline OperatorMatrix op_tau0(const SymbolField& s) { return op_tau0(s.grid(), s.samples(), "Op0(" + s.name() + ")"); }
inline OperatorMatrix op_tau1(const SymbolField& s) { return op_tau1(s.grid(), s.samples(), "Op1(" + s.name() + ")"); }

// Direct Fourier-sum application Au(x_j) = sum_eta a(x_j, eta) u^(eta) e^{i x_j.eta}.
inline CVector apply_tau0(const SymbolField& s, std::span<const cplx> u) {
  const TorusGrid& g = s.grid();
  CVector uh = dft_forward(g, u);
  const std::size_t m = g.size();
  CVector out = CVector::Zero(Eigen::Index(m));
  for (std::size_t j = 0; j < m; ++j) {
    cplx acc = 0.0;
    for (std::size_t e = 0; e < m; ++e) acc += s.sample(j, e) * uh(Eigen::Index(e)) * detail::plane_wave(g, j, e);
    out(Eigen::Index(j)) = acc;
  }
  return out;
}

// Fourier multiplier G diag(mult) F.
inline OperatorMatrix multiplier_operator(const TorusGrid& g, const CVector& mult, std::string provenance) {
  if (mult.size() != Eigen::Index(g.size())) throw ShapeError("multiplier_operator: wrong multiplier length");
  return {g, g.idft_matrix() * mult.asDiagonal() * g.dft_matrix(), std::move(provenance)};
}

inline double operator_norm(const CMatrix& m) {
  Eigen::BDCSVD<CMatrix> svd(m);
  if (svd.info() != Eigen::Success) throw DecompositionError("SVD failed");
  return svd.singularValues()(0);
}
inline double operator_norm(const OperatorMatrix& a) { return operator_norm(a.matrix()); }

// Discrete H^s -> H^t norm: || <eta>^t F A G <eta>^{-s} ||_2.
inline double sobolev_operator_norm(const OperatorMatrix& a, double s, double t) {
  const TorusGrid& g = a.grid();
  CMatrix fa = g.dft_matrix() * a.matrix() * g.idft_matrix();
  const RVector bt = bessel_multiplier(g, t), bs = bessel_multiplier(g, -s);
  CMatrix w = bt.cast<cplx>().asDiagonal() * fa * bs.cast<cplx>().asDiagonal();
  return operator_norm(w);
}

struct PositiveRealReport {
  bool positive_real = false;
  double margin = 0.0;  // min Re(lambda_j)
};

// Spectrum contained in {Re z >= 0} up to -1e-10.
inline PositiveRealReport positive_real_check(const OperatorMatrix& a) {
  const CVector& ev = a.eigenvalues();
  double mn = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i) mn = std::min(mn, ev(i).real());
  return {mn >= -1e-10, mn};
}

}  // namespace psido
