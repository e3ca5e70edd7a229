#pragma once

// Contours for the Dunford-Riesz integral and their quadrature.
//
// keyhole:      Gamma_1 inward along arg = +pi from R to eps, the circle |lambda| = eps clockwise
//               from arg +pi to -pi, Gamma_3 outward along arg = -pi. Both rays sit on the negative
//               real axis; each node carries its own log(lambda) so branch-cut functions see the
//               two sides of the cut.
// exponential:  the same shape with rays at arg = +-angle (angle < pi/2) and the arc through arg 0,
//               so every node has positive real part.
// finite_loop:  circle around a center, trapezoid rule.
//
// Weights are for d lambda with the orientation calibrated numerically so that
// (1/2 pi i) sum w f(lambda) (a - lambda)^{-1} = f(a) for a scalar a enclosed by the contour.

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "psido/errors.hpp"
#include "psido/grid.hpp"
#include "psido/holo_function.hpp"

namespace psido {

struct ContourSpec {
  enum class Kind { keyhole, exponential, finite_loop };

  Kind kind = Kind::keyhole;
  double epsilon = 0.0;      // circle radius; <= 0 means automatic (dist(0, spectrum) / 3)
  std::optional<double> R;   // ray truncation; empty means from truncation_bound
  double angle = kPi;        // ray angle
  cplx center = 1.0;         // finite loop
  double radius = 0.5;       // finite loop; <= 0 means automatic

  static ContourSpec keyhole(double epsilon = 0.0, std::optional<double> r = {}) {
    ContourSpec c;
    c.kind = Kind::keyhole;
    c.epsilon = epsilon;
    c.R = r;
    c.angle = kPi;
    return c;
  }
  static ContourSpec exponential(double angle = 0.25 * kPi, double epsilon = 0.0, std::optional<double> r = {}) {
    ContourSpec c;
    c.kind = Kind::exponential;
    c.epsilon = epsilon;
    c.R = r;
    c.angle = angle;
    return c;
  }
  static ContourSpec finite_loop(cplx center, double radius) {
    ContourSpec c;
    c.kind = Kind::finite_loop;
    c.center = center;
    c.radius = radius;
    c.angle = 0.0;
    return c;
  }
  static ContourSpec auto_loop() { return finite_loop(0.0, 0.0); }

  bool auto_epsilon() const { return kind != Kind::finite_loop && !(epsilon > 0); }
  bool auto_loop_geometry() const { return kind == Kind::finite_loop && !(radius > 0); }

  static std::string kind_name(Kind k) {
    switch (k) {
      case Kind::keyhole: return "keyhole";
      case Kind::exponential: return "exponential";
      case Kind::finite_loop: return "finite_loop";
    }
    return "?";
  }
  static Kind parse_kind(const std::string& s) {
    if (s == "keyhole") return Kind::keyhole;
    if (s == "exponential") return Kind::exponential;
    if (s == "finite_loop") return Kind::finite_loop;
    throw ConfigError("unknown contour kind '" + s + "' (expected keyhole, exponential or finite_loop)");
  }

  // Checks a fully resolved spec (epsilon and R known).
  void validate() const {
    switch (kind) {
      case Kind::keyhole:
      case Kind::exponential:
        if (!(epsilon > 0)) throw DomainError("contour epsilon must be positive");
        if (!R || !(*R > epsilon))
          throw DomainError("degenerate contour: need epsilon < R, got epsilon=" + std::to_string(epsilon) +
                            " R=" + (R ? std::to_string(*R) : std::string("unset")));
        if (kind == Kind::exponential && !(angle > 0 && angle < 0.5 * kPi))
          throw DomainError("exponential contour needs 0 < angle < pi/2, got " + std::to_string(angle));
        break;
      case Kind::finite_loop:
        if (!(radius > 0)) throw DomainError("finite loop radius must be positive");
        break;
    }
  }
};

struct QuadratureSpec {
  int nodes_per_ray = 200;
  int nodes_on_circle = 64;
  int panel_size = 20;  // Gauss-Legendre nodes per panel on the rays (log variable)

  void validate() const {
    if (nodes_per_ray < 8 || nodes_on_circle < 8)
      throw DomainError("quadrature needs at least 8 nodes per segment");
    if (panel_size < 8) throw DomainError("quadrature panel size must be at least 8");
  }
};

struct ContourNode {
  cplx lambda;
  cplx weight;      // d lambda weight, orientation included
  cplx log_lambda;  // branch of log on this piece
};

// Gauss-Legendre nodes and weights on [-1, 1], Newton iteration on P_n.
inline const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  if (n < 1) throw DomainError("gauss_legendre needs n >= 1");
  std::vector<double> x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first->second;
}

// Composite Gauss-Legendre on [lo, hi] with `total` nodes in panels of `panel`.
inline std::vector<std::pair<double, double>> composite_gauss(double lo, double hi, int total, int panel) {
  const int npan = std::max(1, (total + panel - 1) / panel);
  const int per = std::max(1, total / npan);
  const auto& [x, w] = gauss_legendre(per);
  std::vector<std::pair<double, double>> out;
  const double h = (hi - lo) / npan;
  for (int p = 0; p < npan; ++p) {
    const double a = lo + p * h;
    for (int i = 0; i < per; ++i) out.emplace_back(a + 0.5 * h * (x[i] + 1.0), 0.5 * h * w[i]);
  }
  return out;
}

namespace detail {

// Nodes in the stated direction, before orientation calibration.
inline std::vector<ContourNode> raw_nodes(const ContourSpec& c, const QuadratureSpec& q) {
  std::vector<ContourNode> out;
  if (c.kind == ContourSpec::Kind::finite_loop) {
    const int n = q.nodes_on_circle;
    for (int k = 0; k < n; ++k) {
      const double phi = 2 * kPi * k / n;
      const cplx e = std::exp(kI * phi);
      const cplx lam = c.center + c.radius * e;
      out.push_back({lam, kI * c.radius * e * (2 * kPi / n), std::log(lam)});
    }
    return out;
  }
  const double eps = c.epsilon, r_max = *c.R, th = c.angle;
  const auto ray = composite_gauss(std::log(eps), std::log(r_max), q.nodes_per_ray, q.panel_size);
  // Collapsed keyhole rays use the exact point -r on both sides.
  auto point = [&](double r, double sgn) {
    return c.kind == ContourSpec::Kind::keyhole ? cplx(-r, 0.0) : std::polar(r, sgn * th);
  };
  // Gamma_1: inward along arg = +angle.
  for (auto it = ray.rbegin(); it != ray.rend(); ++it) {
    const double r = std::exp(it->first);
    out.push_back({point(r, 1.0), -std::exp(kI * th) * r * it->second, cplx(std::log(r), th)});
  }
  // Gamma_2: arc from arg +angle to -angle through arg 0.
  for (const auto& [phi, w] : composite_gauss(-th, th, q.nodes_on_circle, q.nodes_on_circle)) {
    const double ph = -phi;  // decreasing
    const cplx e = std::exp(kI * ph);
    cplx lam = eps * e;
    out.push_back({lam, -kI * lam * w, cplx(std::log(eps), ph)});
  }
  // Gamma_3: outward along arg = -angle.
  for (const auto& [u, w] : ray) {
    const double r = std::exp(u);
    out.push_back({point(r, -1.0), std::exp(-kI * th) * r * w, cplx(std::log(r), -th)});
  }
  return out;
}

}  // namespace detail

// Orientation sign relative to the stated direction, found from the scalar Cauchy formula.
inline double orientation_sign(const ContourSpec& c, const QuadratureSpec& q) {
  const auto nodes = detail::raw_nodes(c, q);
  cplx a, expected, sum = 0.0;
  if (c.kind == ContourSpec::Kind::finite_loop) {
    a = c.center;
    expected = 1.0;
    for (const auto& n : nodes) sum += n.weight / (a - n.lambda);
  } else if (c.kind == ContourSpec::Kind::keyhole) {
    a = std::sqrt(c.epsilon * *c.R);
    expected = 1.0 / a;
    for (const auto& n : nodes) sum += n.weight / n.lambda / (a - n.lambda);
  } else {
    // e^{-kappa lambda} is below e^{-30} at the ray ends.
    const double kappa = 30.0 / (*c.R * std::cos(c.angle));
    a = std::sqrt(c.epsilon * *c.R);
    expected = std::exp(-kappa * a);
    for (const auto& n : nodes) sum += n.weight * std::exp(-kappa * n.lambda) / (a - n.lambda);
  }
  sum /= 2 * kPi * kI;
  const double proj = (sum * std::conj(expected)).real() / std::norm(expected);
  if (!(std::abs(std::abs(proj) - 1.0) < 1e-3))
    throw DomainError("contour orientation calibration failed (scalar Cauchy integral " + std::to_string(proj) + ")");
  return proj > 0 ? 1.0 : -1.0;
}

inline std::vector<ContourNode> nodes_and_weights(const ContourSpec& c, const QuadratureSpec& q = {}) {
  c.validate();
  q.validate();
  auto nodes = detail::raw_nodes(c, q);
  const double s = orientation_sign(c, q);
  for (auto& n : nodes) n.weight *= s;
  return nodes;
}

struct TailDecay {
  enum class Kind { power, exponential };
  Kind kind = Kind::power;
  double value = -1.0;  // exponent s, or rate t

  static TailDecay power(double s) { return {Kind::power, s}; }
  static TailDecay exponential(double t) { return {Kind::exponential, t}; }
};

// Smallest R whose analytic tail bound equals tol:
// power:        R^s / |s| = tol
// exponential:  e^{-t R cos(angle)} / (t cos(angle)) = tol, since Re lambda = R cos(angle) on the rays.
inline double truncation_bound(const ContourSpec& c, TailDecay d, double tol) {
  if (!(tol > 0 && tol < 1)) throw DomainError("truncation tolerance must be in (0, 1)");
  if (d.kind == TailDecay::Kind::power) {
    if (c.kind == ContourSpec::Kind::exponential)
      throw DomainError("exponential contour needs an exponential decay rate");
    if (!(d.value < 0))
      throw DomainError("keyhole truncation needs decay exponent s < 0, got s = " + std::to_string(d.value) +
                        "; split f = (f lambda^{-k}) lambda^k first");
    return std::pow(tol * std::abs(d.value), 1.0 / d.value);
  }
  if (!(d.value > 0)) throw DomainError("exponential decay rate must be positive");
  const double ca = std::cos(c.angle);
  if (!(ca > 0)) throw DomainError("exponential truncation needs rays in the right half-plane");
  return std::max(0.0, -std::log(tol * d.value * ca) / (d.value * ca));
}

// The tail bound at R, for checking a returned R.
inline double tail_bound(const ContourSpec& c, TailDecay d, double r) {
  if (d.kind == TailDecay::Kind::power) return std::pow(r, d.value) / std::abs(d.value);
  const double ca = std::cos(c.angle);
  return std::exp(-d.value * r * ca) / (d.value * ca);
}

// Raises SpectrumCollisionError if an eigenvalue meets the contour or is not enclosed by it.
inline void check_spectrum_against_contour(const CVector& eig, const ContourSpec& c) {
  auto fmt = [](cplx z) { return std::to_string(z.real()) + (z.imag() < 0 ? "" : "+") + std::to_string(z.imag()) + "i"; };
  for (const cplx mu : eig.reshaped()) {
    const double am = std::abs(mu);
    switch (c.kind) {
      case ContourSpec::Kind::keyhole:
        if (am <= c.epsilon * (1 + 1e-9))
          throw SpectrumCollisionError("eigenvalue " + fmt(mu) + " lies inside the epsilon-disk of radius " +
                                       std::to_string(c.epsilon));
        if (mu.real() <= 0 && std::abs(mu.imag()) <= 1e-9 * std::max(1.0, am))
          throw SpectrumCollisionError("eigenvalue " + fmt(mu) + " lies on the keyhole cut (-inf, 0]");
        break;
      case ContourSpec::Kind::exponential:
        if (am <= c.epsilon * (1 + 1e-9))
          throw SpectrumCollisionError("eigenvalue " + fmt(mu) + " lies inside the epsilon-disk of radius " +
                                       std::to_string(c.epsilon));
        if (std::abs(std::arg(mu)) >= c.angle)
          throw SpectrumCollisionError("eigenvalue " + fmt(mu) + " lies outside the sector |arg| < " +
                                       std::to_string(c.angle));
        break;
      case ContourSpec::Kind::finite_loop:
        if (std::abs(mu - c.center) >= c.radius * (1 - 1e-9))
          throw SpectrumCollisionError("eigenvalue " + fmt(mu) + " is not enclosed by the loop |lambda - " +
                                       fmt(c.center) + "| = " + std::to_string(c.radius));
        break;
    }
  }
}

// Default circle radius: a third of the distance from 0 to the spectrum.
inline double auto_epsilon(const CVector& eig) {
  double d = std::numeric_limits<double>::infinity();
  for (const cplx mu : eig.reshaped()) d = std::min(d, std::abs(mu));
  if (!(d > 0) || !std::isfinite(d)) throw SpectrumCollisionError("zero is in the spectrum; no epsilon-circle exists");
  return d / 3.0;
}

// Circle around the real range of the spectrum with equal margins to the spectrum and to 0:
// center c, spectral radius r_s about c, radius sqrt(r_s c).
inline ContourSpec auto_finite_loop(const CVector& eig) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const cplx mu : eig.reshaped()) {
    lo = std::min(lo, mu.real());
    hi = std::max(hi, mu.real());
  }
  const double c = 0.5 * (lo + hi);
  double rs = 0.0;
  for (const cplx mu : eig.reshaped()) rs = std::max(rs, std::abs(mu - c));
  if (!(c > 0) || !(rs < c))
    throw BranchCutError("spectrum cannot be enclosed by a circle that avoids (-inf, 0] (center " + std::to_string(c) +
                         ", spectral radius " + std::to_string(rs) + ")");
  rs = std::max(rs, 1e-3 * c);
  return ContourSpec::finite_loop(c, std::sqrt(rs * c));
}

// Trapezoid node count for a loop: geometric convergence with ratio max(r_s/rho, rho/d_cut).
inline int loop_node_count(const CVector& eig, const ContourSpec& loop, double tol = 1e-15,
                           int minimum = 64) {
  double rs = 0.0;
  for (const cplx mu : eig.reshaped()) rs = std::max(rs, std::abs(mu - loop.center));
  const double dcut = loop.center.real() > 0 ? std::abs(loop.center) : loop.radius * 2;
  const double ratio = std::max(rs / loop.radius, loop.radius / dcut);
  if (!(ratio < 1)) return minimum;
  return std::max(minimum, int(std::ceil(std::log(tol) / std::log(ratio))));
}

}  // namespace psido
