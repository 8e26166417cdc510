#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "holocycles/error.hpp"

namespace holocycles {

using Complex = std::complex<double>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline const Complex kI{0.0, 1.0};

inline bool is_finite(Complex c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); }

/// Sparse polynomial in two complex variables, stored as exponent pair -> coefficient.
/// Exact zeros are never stored.
class Polynomial2 {
 public:
  using Exponents = std::pair<int, int>;

  Polynomial2() = default;

  static Polynomial2 monomial(int i, int j, Complex c = 1.0) {
    Polynomial2 p;
    p.add_term(i, j, c);
    return p;
  }

  static Polynomial2 constant(Complex c) { return monomial(0, 0, c); }

  void add_term(int i, int j, Complex c) {
    if (i < 0 || j < 0) fail(ErrorCode::InvalidArgument, "negative exponent in polynomial term");
    if (!is_finite(c)) fail(ErrorCode::InvalidArgument, "non-finite polynomial coefficient");
    if (c == Complex{}) return;
    auto [it, inserted] = terms_.emplace(Exponents{i, j}, c);
    if (!inserted) {
      it->second += c;
      if (it->second == Complex{}) terms_.erase(it);
    }
  }

  const std::map<Exponents, Complex>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  /// Max total degree; -1 for the zero polynomial.
  int degree() const {
    int d = -1;
    for (const auto& [e, c] : terms_) d = std::max(d, e.first + e.second);
    return d;
  }

  Complex coeff(int i, int j) const {
    auto it = terms_.find({i, j});
    return it == terms_.end() ? Complex{} : it->second;
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
    return m;
  }

  Complex operator()(Complex x, Complex y) const {
    Complex sum{};
    for (const auto& [e, c] : terms_) sum += c * ipow(x, e.first) * ipow(y, e.second);
    return sum;
  }

  Polynomial2 dx() const {
    Polynomial2 r;
    for (const auto& [e, c] : terms_)
      if (e.first > 0) r.add_term(e.first - 1, e.second, c * double(e.first));
    return r;
  }

  Polynomial2 dy() const {
    Polynomial2 r;
    for (const auto& [e, c] : terms_)
      if (e.second > 0) r.add_term(e.first, e.second - 1, c * double(e.second));
    return r;
  }

  /// Homogeneous part of total degree d.
  Polynomial2 homogeneous_part(int d) const {
    Polynomial2 r;
    for (const auto& [e, c] : terms_)
      if (e.first + e.second == d) r.add_term(e.first, e.second, c);
    return r;
  }

  friend Polynomial2 operator+(Polynomial2 a, const Polynomial2& b) {
    for (const auto& [e, c] : b.terms_) a.add_term(e.first, e.second, c);
    return a;
  }

  friend Polynomial2 operator-(Polynomial2 a, const Polynomial2& b) {
    for (const auto& [e, c] : b.terms_) a.add_term(e.first, e.second, -c);
    return a;
  }

  friend Polynomial2 operator*(const Polynomial2& a, const Polynomial2& b) {
    Polynomial2 r;
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) r.add_term(ea.first + eb.first, ea.second + eb.second, ca * cb);
    return r;
  }

  friend Polynomial2 operator*(Complex s, Polynomial2 a) {
    if (s == Complex{}) return {};
    for (auto& [e, c] : a.terms_) c *= s;
    return a;
  }

  static Complex ipow(Complex base, int n) {
    Complex r{1.0, 0.0};
    while (n > 0) {
      if (n & 1) r *= base;
      base *= base;
      n >>= 1;
    }
    return r;
  }

 private:
  std::map<Exponents, Complex> terms_;
};

/// Univariate polynomial coefficients, lowest degree first.
using UnivariateCoeffs = std::vector<Complex>;

inline Complex eval_univariate(const UnivariateCoeffs& c, Complex x) {
  Complex r{};
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * x + *it;
  return r;
}

inline UnivariateCoeffs derivative(const UnivariateCoeffs& c) {
  UnivariateCoeffs d;
  for (std::size_t k = 1; k < c.size(); ++k) d.push_back(c[k] * double(k));
  return d;
}

/// Drops leading coefficients that are zero relative to the largest one.
inline UnivariateCoeffs trim(UnivariateCoeffs c, double rel_tol = 1e-13) {
  double scale = 0.0;
  for (auto v : c) scale = std::max(scale, std::abs(v));
  while (!c.empty() && std::abs(c.back()) <= rel_tol * scale) c.pop_back();
  return c;
}

/// Roots of a univariate polynomial (with multiplicity) via companion-matrix eigenvalues,
/// each polished by a few Newton steps. Expects trimmed coefficients.
inline std::vector<Complex> polynomial_roots(const UnivariateCoeffs& coeffs) {
  const int deg = static_cast<int>(coeffs.size()) - 1;
  if (deg < 1) return {};
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(deg, deg);
  for (int k = 1; k < deg; ++k) companion(k, k - 1) = 1.0;
  for (int k = 0; k < deg; ++k) companion(k, deg - 1) = -coeffs[k] / coeffs[deg];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
  if (solver.info() != Eigen::Success) fail(ErrorCode::NoConvergence, "companion eigenvalue solver failed");

  const auto dcoeffs = derivative(coeffs);
  std::vector<Complex> roots;
  roots.reserve(deg);
  for (int k = 0; k < deg; ++k) {
    Complex z = solver.eigenvalues()(k);
    for (int it = 0; it < 4; ++it) {
      const Complex f = eval_univariate(coeffs, z);
      const Complex df = eval_univariate(dcoeffs, z);
      if (std::abs(df) < 1e-300) break;
      const Complex step = f / df;
      // Newton near a multiple root can overshoot; only accept improving steps.
      if (std::abs(eval_univariate(coeffs, z - step)) >= std::abs(f)) break;
      z -= step;
    }
    roots.push_back(z);
  }
  return roots;
}

struct RootCluster {
  Complex value;
  int multiplicity = 1;
};

/// Groups roots that coincide within a relative tolerance.
inline std::vector<RootCluster> cluster_roots(const std::vector<Complex>& roots, double rel_tol = 1e-6) {
  std::vector<RootCluster> clusters;
  for (Complex r : roots) {
    bool merged = false;
    for (auto& c : clusters) {
      if (std::abs(c.value - r) <= rel_tol * std::max(1.0, std::abs(r))) {
        c.value = (c.value * double(c.multiplicity) + r) / double(c.multiplicity + 1);
        ++c.multiplicity;
        merged = true;
        break;
      }
    }
    if (!merged) clusters.push_back({r, 1});
  }
  return clusters;
}

}  // namespace holocycles
