#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "holocycles/core.hpp"
#include "holocycles/cycle_forge.hpp"

namespace holocycles {

enum class CertificateMethod { Multiplier, Integral };

inline std::string to_string(CertificateMethod m) { return m == CertificateMethod::Multiplier ? "multiplier" : "integral"; }

struct CertificateEntry {
  std::size_t j = 1;       ///< 1-based position in the list
  double value = 0.0;      ///< |mu_j| or |I_j|
  double threshold = 0.0;  ///< bound that value must stay strictly below (multiplier) or above (integral)
  double log_value = 0.0;      ///< multiplier method only
  double log_threshold = 0.0;  ///< multiplier method only
  double margin = 0.0;     ///< log margin (multiplier) or absolute margin beyond the error allowance (integral)
  bool passed = false;
};

struct IndependenceCertificate {
  CertificateMethod method = CertificateMethod::Multiplier;
  std::vector<CertificateEntry> entries;
  bool certified = false;
  std::optional<std::size_t> failing_j;  ///< first failing position, 1-based
  std::vector<std::string> caveats;
};

// ---------------------------------------------------------------------------
// Multiplier criterion, carried in logs
// ---------------------------------------------------------------------------

/// |mu_1| < 1 and |mu_j| < |mu_1 ... mu_{j-1}|, each with log margin at least kLogMargin.
inline IndependenceCertificate certify_multipliers_log(const std::vector<double>& log_abs) {
  IndependenceCertificate cert;
  cert.method = CertificateMethod::Multiplier;
  double log_threshold = 0.0;
  for (std::size_t k = 0; k < log_abs.size(); ++k) {
    CertificateEntry e;
    e.j = k + 1;
    e.log_value = log_abs[k];
    e.log_threshold = log_threshold;
    e.value = std::exp(e.log_value);
    e.threshold = std::exp(log_threshold);
    e.margin = log_threshold - e.log_value;
    // |mu| = 0 gives log = -inf and must fail: the inequality 0 < |mu_j| is strict.
    e.passed = std::isfinite(e.log_value) && e.margin >= kLogMargin;
    if (!e.passed && !cert.failing_j) cert.failing_j = e.j;
    log_threshold += log_abs[k];
    cert.entries.push_back(e);
  }
  cert.certified = !log_abs.empty() && !cert.failing_j;
  return cert;
}

inline IndependenceCertificate certify_multipliers(const std::vector<Complex>& mus) {
  std::vector<double> logs;
  logs.reserve(mus.size());
  for (Complex m : mus) logs.push_back(std::log(std::abs(m)));
  return certify_multipliers_log(logs);
}

// ---------------------------------------------------------------------------
// Integral criterion
// ---------------------------------------------------------------------------

struct IntegralEstimate {
  Complex value;
  double error = 0.0;
};

namespace detail {

inline Complex shoelace(const std::vector<std::array<Complex, 2>>& pts, std::size_t stride) {
  Complex sum{};
  std::size_t prev = 0;
  auto add = [&](std::size_t a, std::size_t b) {
    sum += pts[a][0] * pts[b][1] - pts[a][1] * pts[b][0];
  };
  for (std::size_t k = stride; k < pts.size(); k += stride) {
    add(prev, k);
    prev = k;
  }
  if (prev != pts.size() - 1) add(prev, pts.size() - 1);
  return sum;
}

}  // namespace detail

/// Integral of x dy - y dx along a closed sampled curve. The exact integral over the
/// polygonal interpolant is computed at full and half resolution and combined by one
/// Richardson step; the error estimate is the size of that correction.
inline IntegralEstimate cycle_integral(const std::vector<std::array<Complex, 2>>& pts, double closure_tol = 1e-8) {
  if (pts.size() < 5) fail(ErrorCode::InvalidArgument, "integral needs at least five samples");
  const auto& a = pts.front();
  const auto& b = pts.back();
  const double gap = std::hypot(std::abs(a[0] - b[0]), std::abs(a[1] - b[1]));
  double scale = 1.0;
  for (const auto& p : pts) scale = std::max({scale, std::abs(p[0]), std::abs(p[1])});
  if (!(gap <= closure_tol * scale)) fail(ErrorCode::NotClosed, "curve does not close up");
  const Complex fine = detail::shoelace(pts, 1);
  const Complex coarse = detail::shoelace(pts, 2);
  return {fine + (fine - coarse) / 3.0, std::abs(fine - coarse) / 3.0};
}

inline IntegralEstimate cycle_integral(const std::vector<PathSample>& samples, double closure_tol = 1e-8) {
  std::vector<std::array<Complex, 2>> pts;
  pts.reserve(samples.size());
  for (const auto& s : samples) pts.push_back({s.z, s.w});
  return cycle_integral(pts, closure_tol);
}

/// Integral of a representative in the ambient coordinates of the model's chart.
inline IntegralEstimate cycle_integral(const Representative& rep, const LocalLinearModel& model,
                                       double closure_tol = 1e-8) {
  std::vector<std::array<Complex, 2>> pts;
  pts.reserve(rep.samples.size());
  for (const auto& s : rep.samples) pts.push_back(model.to_ambient(s.z, s.w));
  return cycle_integral(pts, closure_tol);
}

constexpr double kIntegralSafety = 10.0;

/// |I_1| > 0 and |I_j| > |I_1| + ... + |I_{j-1}|, each beyond 10x the combined quadrature error.
inline IndependenceCertificate certify_integrals(const std::vector<Complex>& values, const std::vector<double>& errors = {}) {
  if (!errors.empty() && errors.size() != values.size())
    fail(ErrorCode::InvalidArgument, "one error estimate per integral is required");
  IndependenceCertificate cert;
  cert.method = CertificateMethod::Integral;
  double sum = 0.0, err_sum = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double err = errors.empty() ? 0.0 : errors[k];
    CertificateEntry e;
    e.j = k + 1;
    e.value = std::abs(values[k]);
    e.threshold = sum;
    e.margin = e.value - sum - kIntegralSafety * (err_sum + err);
    e.passed = e.margin > 0.0;
    if (!e.passed && !cert.failing_j) cert.failing_j = e.j;
    sum += e.value;
    err_sum += err;
    cert.entries.push_back(e);
  }
  cert.certified = !values.empty() && !cert.failing_j;
  return cert;
}

// ---------------------------------------------------------------------------
// Brute-force dependency search
// ---------------------------------------------------------------------------

enum class DependencyMode { Additive, Multiplicative };

constexpr std::size_t kBruteForceLimit = 20;

/// Nonzero alpha in {-1, 0, 1}^N with |sum alpha_n v_n| < tol (additive) or
/// |sum alpha_n log|v_n|| < tol (multiplicative, moduli only). The first nonzero entry of the
/// returned tuple is +1.
inline std::optional<std::vector<int>> brute_force_dependency(const std::vector<Complex>& values, DependencyMode mode,
                                                              double tol = 1e-9) {
  const std::size_t n = values.size();
  if (n > kBruteForceLimit) fail(ErrorCode::TooLarge, "brute-force search is limited to 20 values");
  std::vector<Complex> v(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (mode == DependencyMode::Additive) {
      v[k] = values[k];
    } else {
      if (values[k] == Complex{}) fail(ErrorCode::InvalidArgument, "multiplicative mode needs nonzero values");
      v[k] = std::log(std::abs(values[k]));
    }
  }
  std::vector<int> alpha(n, 0);
  std::optional<std::vector<int>> found;
  // Depth-first over positions; `leading` records whether a nonzero entry has been placed.
  auto dfs = [&](auto&& self, std::size_t pos, Complex partial, bool leading) -> bool {
    if (pos == n) {
      if (leading && std::abs(partial) < tol) {
        found = alpha;
        return true;
      }
      return false;
    }
    alpha[pos] = 0;
    if (self(self, pos + 1, partial, leading)) return true;
    alpha[pos] = 1;
    if (self(self, pos + 1, partial + v[pos], true)) return true;
    if (leading) {
      alpha[pos] = -1;
      if (self(self, pos + 1, partial - v[pos], true)) return true;
    }
    alpha[pos] = 0;
    return false;
  };
  dfs(dfs, 0, Complex{}, false);
  return found;
}

}  // namespace holocycles
