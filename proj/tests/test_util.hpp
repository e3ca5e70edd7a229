#pragma once

#include <random>
#include <vector>

#include "psido/operator.hpp"
#include "psido/symbol.hpp"

namespace psido::testkit {

// i eta_1 on the grid.
inline SymbolField i_eta(const TorusGrid& g) {
  return separable_symbol(g, SymbolClassSpec::make(1, 1, 0), "i_eta",
                          {{TrigPolynomial::one(), profiles::monomial(kI, {1, 0})}});
}

// e^{i k x_1}, eta-free.
inline SymbolField exp_ix(const TorusGrid& g, int k = 1) {
  TrigPolynomial p{{{1.0, {k, 0}}}};
  return separable_symbol(g, SymbolClassSpec::make(0, 1, 0), "exp_ix", {{p, profiles::constant(1.0)}});
}

// e^{i x_1} <eta>^{mu}
inline SymbolField exp_ix_bracket(const TorusGrid& g, double mu) {
  TrigPolynomial p{{{1.0, {1, 0}}}};
  return separable_symbol(g, SymbolClassSpec::make(mu, 1, 0), "exp_ix_bracket", {{p, profiles::bracket_power(mu)}});
}

inline CVector random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  CVector u = CVector::Zero(Eigen::Index(n));
  for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = {d(rng), d(rng)};
  return u;
}

// Lattice position of eta on a 1-D grid.
inline std::size_t eta_index(const TorusGrid& g, int eta) { return std::size_t(eta + g.points() / 2); }

// Diagonal of F M F^{-1}, the Fourier multiplier of a translation-invariant operator.
inline CVector fourier_diagonal(const OperatorMatrix& a) {
  const TorusGrid& g = a.grid();
  return (g.dft_matrix() * a.matrix() * g.idft_matrix()).diagonal();
}

}  // namespace psido::testkit
