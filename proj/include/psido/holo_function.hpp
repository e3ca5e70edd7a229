#pragma once

// Holomorphic functions f(lambda) with derivatives of every order, for the contour, spectral
// and symbol-expansion paths. Branch-cut functions (lambda^z, log) use arg in (-pi, pi] unless
// an explicit value of log(lambda) is supplied, as on the two edges of a keyhole contour.

#include <cctype>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "psido/errors.hpp"
#include "psido/grid.hpp"

namespace psido {

// How fast |f(lambda)| grows at infinity.
struct Growth {
  enum class Kind { power_bound, exponential_decay, logarithmic, unbounded };
  Kind kind = Kind::power_bound;
  double s = 0.0;     // |f| <= C |lambda|^s
  double rate = 0.0;  // |f| <= C e^{-rate Re lambda}
};

class HoloFunction {
 public:
  enum class Kind { power, exp_scaled, log, rational, custom };
  // f^{(p)} at lambda with log(lambda) supplied.
  using DerivFn = std::function<cplx(int p, cplx lambda, cplx log_lambda)>;

  static HoloFunction power(cplx z) {
    HoloFunction f(Kind::power, "power:z=" + format_complex(z));
    f.z_ = z;
    f.growth_ = {Growth::Kind::power_bound, z.real(), 0.0};
    f.fn_ = [z](int p, cplx, cplx loglam) {
      cplx c = 1.0;
      for (int i = 0; i < p; ++i) c *= (z - double(i));
      if (c == 0.0) return cplx(0.0);
      return c * std::exp((z - double(p)) * loglam);
    };
    return f;
  }

  // e^{-t lambda}
  static HoloFunction exp_scaled(double t) {
    if (!(t > 0)) throw DomainError("exp_scaled needs t > 0");
    HoloFunction f(Kind::exp_scaled, "exp:t=" + format_real(t));
    f.t_ = t;
    f.growth_ = {Growth::Kind::exponential_decay, 0.0, t};
    f.fn_ = [t](int p, cplx lam, cplx) { return std::pow(-t, p) * std::exp(-t * lam); };
    return f;
  }

  static HoloFunction log() {
    HoloFunction f(Kind::log, "log");
    f.growth_ = {Growth::Kind::logarithmic, 0.0, 0.0};
    f.fn_ = [](int p, cplx lam, cplx loglam) {
      if (p == 0) return loglam;
      return (p % 2 == 1 ? 1.0 : -1.0) * factorial(p - 1) * std::pow(lam, -p);
    };
    return f;
  }

  // num(lambda) / den(lambda), coefficients in ascending powers.
  static HoloFunction rational(std::vector<cplx> num, std::vector<cplx> den) {
    trim(num);
    trim(den);
    if (den.empty()) throw DomainError("rational function with zero denominator");
    if (num.empty()) num = {0.0};
    HoloFunction f(Kind::rational, "rational:num=" + join(num) + ",den=" + join(den));
    f.growth_ = {Growth::Kind::power_bound, double(num.size()) - double(den.size()), 0.0};
    f.fn_ = [num, den](int p, cplx lam, cplx) {
      std::vector<cplx> a = taylor_shift(num, lam, p), b = taylor_shift(den, lam, p);
      if (std::abs(b[0]) == 0.0) throw DomainError("rational function evaluated at a pole");
      std::vector<cplx> q(p + 1);
      for (int i = 0; i <= p; ++i) {
        cplx acc = a[i];
        for (int j = 1; j <= i; ++j) acc -= b[j] * q[i - j];
        q[i] = acc / b[0];
      }
      return q[p] * factorial(p);
    };
    return f;
  }

  static HoloFunction custom(std::string name, DerivFn fn, Growth growth, bool branch_cut = false) {
    HoloFunction f(Kind::custom, std::move(name));
    f.fn_ = std::move(fn);
    f.growth_ = growth;
    f.branch_ = branch_cut;
    return f;
  }

  // TAG[:key=value,...]; list values are separated by ';'.
  static HoloFunction parse(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string tag = spec.substr(0, colon);
    std::vector<std::pair<std::string, std::string>> kv;
    if (colon != std::string::npos) {
      std::stringstream ss(spec.substr(colon + 1));
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("function parameter '" + item + "' is not key=value");
        kv.emplace_back(item.substr(0, eq), item.substr(eq + 1));
      }
    }
    auto get = [&](const std::string& key) -> std::string {
      for (const auto& [k, v] : kv)
        if (k == key) return v;
      throw ConfigError("function '" + tag + "' needs parameter '" + key + "'");
    };
    auto only = [&](std::initializer_list<const char*> keys) {
      for (const auto& [k, v] : kv) {
        bool ok = false;
        for (const char* a : keys) ok = ok || k == a;
        if (!ok) throw ConfigError("function '" + tag + "' has no parameter '" + k + "'");
      }
    };
    if (tag == "power") {
      only({"z"});
      return power(parse_complex(get("z")));
    }
    if (tag == "exp") {
      only({"t"});
      return exp_scaled(parse_complex(get("t")).real());
    }
    if (tag == "log") {
      only({});
      return log();
    }
    if (tag == "rational") {
      only({"num", "den"});
      return rational(parse_list(get("num")), parse_list(get("den")));
    }
    throw ConfigError("unknown function tag '" + tag + "' (expected power, exp, log or rational)");
  }

  Kind kind() const { return kind_; }
  const std::string& tag() const { return tag_; }
  cplx exponent() const { return z_; }
  double time() const { return t_; }
  const Growth& growth() const { return growth_; }

  bool has_branch_cut() const {
    if (kind_ == Kind::log) return true;
    if (kind_ == Kind::power) return !(z_.imag() == 0.0 && z_.real() == std::round(z_.real()));
    return branch_;
  }

  cplx operator()(cplx lam) const { return fn_(0, lam, principal_log(lam)); }
  cplx operator()(cplx lam, cplx log_lam) const { return fn_(0, lam, log_lam); }
  cplx derivative(int p, cplx lam) const { return fn_(p, lam, principal_log(lam)); }
  cplx derivative(int p, cplx lam, cplx log_lam) const { return fn_(p, lam, log_lam); }

  std::vector<cplx> derivatives(cplx lam, int up_to) const {
    std::vector<cplx> d(up_to + 1);
    const cplx l = principal_log(lam);
    for (int p = 0; p <= up_to; ++p) d[p] = fn_(p, lam, l);
    return d;
  }

  // lambda^k f(lambda) for integer k, derivatives by the Leibniz rule.
  HoloFunction times_power(int k) const {
    if (k == 0) return *this;
    if (kind_ == Kind::power) return power(z_ + double(k));
    DerivFn base = fn_;
    DerivFn fn = [base, k](int p, cplx lam, cplx loglam) {
      cplx acc = 0.0;
      for (int i = 0; i <= p; ++i) {
        const int r = p - i;
        cplx gr = 1.0;
        for (int q = 0; q < r; ++q) gr *= double(k - q);
        if (gr == 0.0) continue;
        acc += binomial(p, i) * base(i, lam, loglam) * gr * std::pow(lam, k - r);
      }
      return acc;
    };
    Growth g = growth_;
    if (g.kind == Growth::Kind::power_bound || g.kind == Growth::Kind::logarithmic) {
      g.kind = Growth::Kind::power_bound;
      g.s += k;
    }
    return custom("(" + tag_ + ")*lambda^" + std::to_string(k), fn, g, has_branch_cut());
  }

  static cplx principal_log(cplx lam) { return std::log(lam); }

  static cplx parse_complex(std::string s) {
    std::string t;
    for (char c : s)
      if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    if (t.empty()) throw ConfigError("empty number");
    try {
      if (t.back() != 'i') return std::stod(t);
      t.pop_back();
      // Split at the last sign that is not an exponent sign.
      std::size_t split = std::string::npos;
      for (std::size_t i = 1; i < t.size(); ++i)
        if ((t[i] == '+' || t[i] == '-') && t[i - 1] != 'e' && t[i - 1] != 'E') split = i;
      if (split == std::string::npos) {
        if (t.empty() || t == "+") return {0.0, 1.0};
        if (t == "-") return {0.0, -1.0};
        return {0.0, std::stod(t)};
      }
      const std::string re = t.substr(0, split), im = t.substr(split);
      const double iv = im == "+" ? 1.0 : im == "-" ? -1.0 : std::stod(im);
      return {std::stod(re), iv};
    } catch (const std::logic_error&) {
      throw ConfigError("cannot parse number '" + s + "'");
    }
  }

 private:
  HoloFunction(Kind k, std::string tag) : kind_(k), tag_(std::move(tag)) {}

  static double binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

  static void trim(std::vector<cplx>& c) {
    while (!c.empty() && c.back() == 0.0) c.pop_back();
  }

  // Taylor coefficients of poly(lam + h) in h up to h^p.
  static std::vector<cplx> taylor_shift(const std::vector<cplx>& c, cplx lam, int p) {
    std::vector<cplx> out(p + 1, 0.0);
    for (int i = 0; i <= p && i < int(c.size()); ++i)
      for (int j = i; j < int(c.size()); ++j) out[i] += binomial(j, i) * c[j] * std::pow(lam, j - i);
    return out;
  }

  static std::vector<cplx> parse_list(const std::string& s) {
    std::vector<cplx> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ';')) out.push_back(parse_complex(item));
    if (out.empty()) throw ConfigError("empty coefficient list");
    return out;
  }

  static std::string format_real(double v) {
    std::ostringstream o;
    o.precision(17);
    o << v;
    return o.str();
  }
  static std::string format_complex(cplx z) {
    if (z.imag() == 0.0) return format_real(z.real());
    return format_real(z.real()) + (z.imag() < 0 ? "-" : "+") + format_real(std::abs(z.imag())) + "i";
  }
  static std::string join(const std::vector<cplx>& c) {
    std::string s;
    for (std::size_t i = 0; i < c.size(); ++i) s += (i ? ";" : "") + format_complex(c[i]);
    return s;
  }

  Kind kind_;
  std::string tag_;
  cplx z_ = 0.0;
  double t_ = 0.0;
  Growth growth_;
  bool branch_ = false;
  DerivFn fn_;
};

}  // namespace psido
