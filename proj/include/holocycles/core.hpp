#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "holocycles/error.hpp"
#include "holocycles/polynomial.hpp"

namespace holocycles {

// ---------------------------------------------------------------------------
// Numeric configuration
// ---------------------------------------------------------------------------

struct NumericConfig {
  double ode_rel_tol = 1e-11;
  double ode_abs_tol = 1e-13;
  double fixed_point_tol = 1e-12;
  std::size_t max_iterations = 100000;
  std::size_t boundary_samples = 256;
  /// Samples per unit path parameter (per turn for spirals) in recorded curves.
  std::size_t quadrature_points = 512;
  double initial_step = 1e-3;
  double max_step = 5e-2;

  void validate() const {
    if (!(ode_rel_tol > 0 && ode_abs_tol > 0 && fixed_point_tol > 0 && initial_step > 0 && max_step > 0))
      fail(ErrorCode::InvalidArgument, "numeric tolerances and step sizes must be strictly positive");
    if (max_iterations == 0 || boundary_samples == 0 || quadrature_points == 0)
      fail(ErrorCode::InvalidArgument, "iteration and sample counts must be strictly positive");
  }
};

inline Complex require_finite(Complex c, const char* what) {
  if (!is_finite(c)) fail(ErrorCode::InvalidArgument, std::string("non-finite value for ") + what);
  return c;
}

// ---------------------------------------------------------------------------
// Polynomial vector fields  xdot = P(x, y), ydot = Q(x, y)
// ---------------------------------------------------------------------------

struct Monomial {
  int i = 0;
  int j = 0;
  Complex coeff;
};

class PolynomialVectorField {
 public:
  PolynomialVectorField(Polynomial2 p, Polynomial2 q) : p_(std::move(p)), q_(std::move(q)) {
    if (p_.is_zero() && q_.is_zero()) fail(ErrorCode::InvalidArgument, "vector field has no nonzero monomial");
    build_derivatives();
  }

  static PolynomialVectorField from_monomials(const std::vector<Monomial>& p, const std::vector<Monomial>& q) {
    Polynomial2 pp, qq;
    for (const auto& m : p) pp.add_term(m.i, m.j, require_finite(m.coeff, "monomial coefficient"));
    for (const auto& m : q) qq.add_term(m.i, m.j, require_finite(m.coeff, "monomial coefficient"));
    return {std::move(pp), std::move(qq)};
  }

  const Polynomial2& p() const { return p_; }
  const Polynomial2& q() const { return q_; }
  int degree() const { return std::max(p_.degree(), q_.degree()); }

  Complex P(Complex x, Complex y) const { return p_(x, y); }
  Complex Q(Complex x, Complex y) const { return q_(x, y); }

  /// Row-major Jacobian [[P_x, P_y], [Q_x, Q_y]].
  std::array<Complex, 4> jacobian(Complex x, Complex y) const {
    return {px_(x, y), py_(x, y), qx_(x, y), qy_(x, y)};
  }

 private:
  void build_derivatives() {
    px_ = p_.dx();
    py_ = p_.dy();
    qx_ = q_.dx();
    qy_ = q_.dy();
  }

  Polynomial2 p_, q_;
  Polynomial2 px_, py_, qx_, qy_;
};

// ---------------------------------------------------------------------------
// Orientation, nu, hyperbolicity
// ---------------------------------------------------------------------------

/// Relative threshold deciding that an eigenvalue ratio is not real.
constexpr double kNonRealRatioTol = 1e-9;

struct Orientation {
  Complex lambda;
  /// True when conjugate coordinates were adopted; downstream coordinates must be conjugated too.
  bool conjugated = false;
};

inline bool is_nonreal(Complex ratio) { return std::abs(ratio.imag()) > kNonRealRatioTol * std::abs(ratio); }

inline Orientation normalize_orientation(Complex lambda) {
  require_finite(lambda, "lambda");
  if (!is_nonreal(lambda)) fail(ErrorCode::NotComplexHyperbolic, "eigenvalue ratio is real");
  if (lambda.imag() > 0) return {lambda, false};
  return {std::conj(lambda), true};
}

/// e^{2 pi i lambda}; the real part is reduced mod 1 first so the result is exactly 1-periodic up to rounding of lambda.
inline Complex nu_from_lambda(Complex lambda) {
  return std::polar(std::exp(-kTwoPi * lambda.imag()), kTwoPi * std::remainder(lambda.real(), 1.0));
}

/// log|nu| without forming nu.
inline double log_abs_nu(Complex lambda) { return -kTwoPi * lambda.imag(); }

struct Matrix2 {
  Complex a, b, c, d;  // [[a, b], [c, d]]

  static Matrix2 from_array(const std::array<Complex, 4>& m) { return {m[0], m[1], m[2], m[3]}; }
  static Matrix2 diag(Complex x, Complex y) { return {x, 0.0, 0.0, y}; }
  double max_abs() const { return std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)}); }
};

struct EigenPair {
  Complex value;
  std::array<Complex, 2> vector;
};

/// Eigenpairs of a 2x2 complex matrix. Eigenvectors are unit-normalized; for a scalar
/// matrix the coordinate axes are returned.
inline std::array<EigenPair, 2> eigen2(const Matrix2& m) {
  const Complex half_tr = 0.5 * (m.a + m.d);
  const Complex det = m.a * m.d - m.b * m.c;
  const Complex disc = std::sqrt(half_tr * half_tr - det);
  Complex e1 = half_tr + disc;
  Complex e2 = half_tr - disc;
  // Recompute the smaller root from the product to avoid cancellation.
  if (std::abs(e1) < std::abs(e2)) std::swap(e1, e2);
  if (std::abs(e1) > 0) e2 = det / e1;

  auto vec_for = [&](Complex e, std::array<Complex, 2> fallback) {
    std::array<Complex, 2> v1{m.b, e - m.a};
    std::array<Complex, 2> v2{e - m.d, m.c};
    const double n1 = std::hypot(std::abs(v1[0]), std::abs(v1[1]));
    const double n2 = std::hypot(std::abs(v2[0]), std::abs(v2[1]));
    const double scale = std::max(1e-300, m.max_abs());
    if (std::max(n1, n2) <= 1e-14 * scale) return fallback;
    if (n1 >= n2) return std::array<Complex, 2>{v1[0] / n1, v1[1] / n1};
    return std::array<Complex, 2>{v2[0] / n2, v2[1] / n2};
  };
  return {EigenPair{e1, vec_for(e1, {1.0, 0.0})}, EigenPair{e2, vec_for(e2, {0.0, 1.0})}};
}

struct HyperbolicityVerdict {
  bool hyperbolic = false;
  /// numerator / denominator eigenvalue; meaningful when both are nonzero.
  Complex ratio;
  Complex denominator_eigenvalue;
  Complex numerator_eigenvalue;
};

/// Complex hyperbolicity test. The eigenvalue whose eigenvector is best aligned with
/// `denominator_direction` is placed in the denominator of the ratio; the default
/// (1, 0) gives lambda = e_w / e_z, matching the chart z dw = lambda w dz.
inline HyperbolicityVerdict is_complex_hyperbolic(const Matrix2& jacobian,
                                                  std::array<Complex, 2> denominator_direction = {1.0, 0.0}) {
  HyperbolicityVerdict out;
  const double scale = jacobian.max_abs();
  if (!(scale > 0) || !std::isfinite(scale)) return out;
  auto pairs = eigen2(jacobian);
  auto alignment = [&](const EigenPair& p) {
    return std::abs(std::conj(p.vector[0]) * denominator_direction[0] + std::conj(p.vector[1]) * denominator_direction[1]);
  };
  if (alignment(pairs[1]) > alignment(pairs[0])) std::swap(pairs[0], pairs[1]);
  out.denominator_eigenvalue = pairs[0].value;
  out.numerator_eigenvalue = pairs[1].value;
  const double zero_tol = 1e-12 * scale;
  if (std::abs(pairs[0].value) <= zero_tol || std::abs(pairs[1].value) <= zero_tol) return out;
  out.ratio = pairs[1].value / pairs[0].value;
  out.hyperbolic = is_nonreal(out.ratio);
  return out;
}

// ---------------------------------------------------------------------------
// Affine singular points
// ---------------------------------------------------------------------------

struct SearchBox {
  Complex center_x{};
  Complex center_y{};
  /// Half-width of the box in each real coordinate.
  double radius = 2.0;
  /// Newton starts per real dimension (grid^4 starts in total).
  int grid = 5;
};

struct SingularPoint {
  Complex x, y;
  Matrix2 jacobian;
  HyperbolicityVerdict verdict;
  double residual = 0.0;
};

namespace detail {

inline double field_residual(const PolynomialVectorField& f, Complex x, Complex y) {
  return std::abs(f.P(x, y)) + std::abs(f.Q(x, y));
}

/// Damped (Levenberg-Marquardt) Newton for P = Q = 0. Returns the last iterate.
inline std::array<Complex, 2> damped_newton(const PolynomialVectorField& f, Complex x, Complex y, int max_iter = 200) {
  double mu = 1e-3;
  double res = field_residual(f, x, y);
  for (int it = 0; it < max_iter && res > 1e-15; ++it) {
    const auto j = f.jacobian(x, y);
    const Complex F0 = f.P(x, y), F1 = f.Q(x, y);
    // Normal equations (J^H J + mu I) delta = -J^H F.
    const Complex a = std::norm(j[0]) + std::norm(j[2]);
    const Complex b = std::conj(j[0]) * j[1] + std::conj(j[2]) * j[3];
    const Complex d = std::norm(j[1]) + std::norm(j[3]);
    const Complex r0 = -(std::conj(j[0]) * F0 + std::conj(j[2]) * F1);
    const Complex r1 = -(std::conj(j[1]) * F0 + std::conj(j[3]) * F1);
    bool improved = false;
    for (int tries = 0; tries < 30; ++tries) {
      const double damp = mu * std::max(1e-300, std::max(a.real(), d.real()));
      const Complex aa = a + damp, dd = d + damp;
      const Complex det = aa * dd - b * std::conj(b);
      if (std::abs(det) == 0) {
        mu *= 10;
        continue;
      }
      const Complex dx = (dd * r0 - b * r1) / det;
      const Complex dy = (aa * r1 - std::conj(b) * r0) / det;
      const double trial = field_residual(f, x + dx, y + dy);
      if (std::isfinite(trial) && trial < res) {
        x += dx;
        y += dy;
        res = trial;
        mu = std::max(mu / 10, 1e-15);
        improved = true;
        break;
      }
      mu *= 10;
    }
    if (!improved) break;
  }
  return {x, y};
}

}  // namespace detail

/// Isolated common zeros of P and Q inside the search box.
inline std::vector<SingularPoint> singular_points(const PolynomialVectorField& field, const SearchBox& box = {}) {
  if (box.grid < 1 || !(box.radius > 0)) fail(ErrorCode::InvalidArgument, "invalid search box");
  const int dp = field.p().degree();
  const int dq = field.q().degree();
  if (field.p().is_zero() || field.q().is_zero()) {
    const auto& other = field.p().is_zero() ? field.q() : field.p();
    if (other.degree() >= 1) fail(ErrorCode::DegenerateField, "one component vanishes identically; zero locus is a curve");
    return {};
  }
  if (dp == 0 || dq == 0) return {};  // a nonzero constant component has no zeros
  const std::size_t bezout = static_cast<std::size_t>(dp) * static_cast<std::size_t>(dq);

  constexpr double kResidualTol = 1e-10;
  std::vector<SingularPoint> found;
  const int g = box.grid;
  auto node = [&](int k) { return g == 1 ? 0.0 : -box.radius + 2.0 * box.radius * k / (g - 1); };
  for (int a = 0; a < g; ++a)
    for (int b = 0; b < g; ++b)
      for (int c = 0; c < g; ++c)
        for (int d = 0; d < g; ++d) {
          const Complex x0 = box.center_x + Complex{node(a), node(b)};
          const Complex y0 = box.center_y + Complex{node(c), node(d)};
          auto [x, y] = detail::damped_newton(field, x0, y0);
          const double res = detail::field_residual(field, x, y);
          if (!(res <= kResidualTol)) continue;
          const Complex ox = x - box.center_x, oy = y - box.center_y;
          const double slack = 1e-9 * (1.0 + box.radius);
          if (std::abs(ox.real()) > box.radius + slack || std::abs(ox.imag()) > box.radius + slack ||
              std::abs(oy.real()) > box.radius + slack || std::abs(oy.imag()) > box.radius + slack)
            continue;
          const Matrix2 jac = Matrix2::from_array(field.jacobian(x, y));
          const double jscale = std::max(1.0, jac.max_abs());
          const bool singular_jac = std::abs(jac.a * jac.d - jac.b * jac.c) < 1e-8 * jscale * jscale;
          // Multiple roots converge slowly; merge them with a looser radius.
          const double merge = singular_jac ? 1e-4 : 1e-8;
          bool duplicate = false;
          for (auto& s : found) {
            if (std::abs(s.x - x) + std::abs(s.y - y) < merge * (1.0 + std::abs(x) + std::abs(y))) {
              if (res < s.residual) {
                s.x = x;
                s.y = y;
                s.residual = res;
                s.jacobian = jac;
              }
              duplicate = true;
              break;
            }
          }
          if (!duplicate) found.push_back({x, y, jac, {}, res});
          if (found.size() > bezout)
            fail(ErrorCode::DegenerateField, "more zeros than the Bezout bound; the zero locus is not isolated");
        }
  for (auto& s : found) s.verdict = is_complex_hyperbolic(s.jacobian);
  std::sort(found.begin(), found.end(), [](const SingularPoint& l, const SingularPoint& r) {
    if (l.x.real() != r.x.real()) return l.x.real() < r.x.real();
    if (l.x.imag() != r.x.imag()) return l.x.imag() < r.x.imag();
    if (l.y.real() != r.y.real()) return l.y.real() < r.y.real();
    return l.y.imag() < r.y.imag();
  });
  return found;
}

// ---------------------------------------------------------------------------
// Local linear model  z dw = lambda w dz  on the unit bidisc
// ---------------------------------------------------------------------------

/// Linearization chart at a complex hyperbolic point. Internally the chart is the unit
/// bidisc; z_radius and w_radius record the user-facing size of U.
class LocalLinearModel {
 public:
  explicit LocalLinearModel(Complex lambda, double z_radius = 1.0, double w_radius = 1.0) {
    const auto o = normalize_orientation(lambda);
    if (!(z_radius > 0) || !(w_radius > 0) || !std::isfinite(z_radius) || !std::isfinite(w_radius))
      fail(ErrorCode::InvalidArgument, "bidisc radii must be positive and finite");
    lambda_ = o.lambda;
    conjugated_ = o.conjugated;
    nu_ = nu_from_lambda(lambda_);
    z_radius_ = z_radius;
    w_radius_ = w_radius;
  }

  Complex lambda() const { return lambda_; }
  Complex nu() const { return nu_; }
  double log_abs_nu() const { return holocycles::log_abs_nu(lambda_); }
  bool conjugated() const { return conjugated_; }
  double z_radius() const { return z_radius_; }
  double w_radius() const { return w_radius_; }

  /// Shrinks the z-extent of U by `factor` (in chart units) and re-rescales to the unit bidisc.
  LocalLinearModel shrink_z(double factor) const {
    LocalLinearModel m = *this;
    m.z_radius_ *= factor;
    return m;
  }

  /// Chart (unit bidisc) -> ambient coordinates of U.
  std::array<Complex, 2> to_ambient(Complex z, Complex w) const { return {z * z_radius_, w * w_radius_}; }
  std::array<Complex, 2> to_chart(Complex x, Complex y) const { return {x / z_radius_, y / w_radius_}; }

 private:
  Complex lambda_;
  Complex nu_;
  bool conjugated_ = false;
  double z_radius_ = 1.0;
  double w_radius_ = 1.0;
};

/// The transversal T = {z = 1} with the closed disc D of the given radius centred at the
/// anchor (O = (1, 0), i.e. w = 0, unless stated otherwise).
struct CrossSection {
  double disc_radius = 0.0;
  Complex anchor{};

  explicit CrossSection(double radius, Complex anchor_point = {}) : disc_radius(radius), anchor(anchor_point) {
    if (!(radius > 0) || !std::isfinite(radius)) fail(ErrorCode::InvalidArgument, "section disc radius must be positive");
  }

  /// Sections inside a linear chart must fit in the unit bidisc.
  CrossSection(double radius, const LocalLinearModel&) : CrossSection(radius) {
    if (radius > 1.0) fail(ErrorCode::InvalidArgument, "section disc exceeds the w-radius of the chart");
  }
};

// ---------------------------------------------------------------------------
// Leafwise paths
// ---------------------------------------------------------------------------

struct PathSample {
  double t = 0.0;
  Complex z, w;
  bool exterior = false;  ///< outside the closed unit bidisc
};

inline bool outside_closed_unit_bidisc(Complex z, Complex w, double tol = 1e-12) {
  return std::abs(z) > 1.0 + tol || std::abs(w) > 1.0 + tol;
}

struct LeafwisePath {
  std::vector<PathSample> samples;

  bool empty() const { return samples.empty(); }
  const PathSample& front() const { return samples.front(); }
  const PathSample& back() const { return samples.back(); }

  void refresh_exterior_flags() {
    for (auto& s : samples) s.exterior = outside_closed_unit_bidisc(s.z, s.w);
  }

  /// Parameters strictly increasing from 0 to 1.
  bool parameters_valid() const {
    if (samples.size() < 2 || samples.front().t != 0.0 || samples.back().t != 1.0) return false;
    for (std::size_t k = 1; k < samples.size(); ++k)
      if (!(samples[k].t > samples[k - 1].t)) return false;
    return true;
  }

  /// Remaps parameters affinely onto [0, 1].
  void normalize_parameters() {
    if (samples.size() < 2) fail(ErrorCode::InvalidArgument, "leafwise path needs at least two samples");
    const double t0 = samples.front().t, t1 = samples.back().t;
    if (!(t1 > t0)) fail(ErrorCode::InvalidArgument, "leafwise path parameters must increase");
    for (auto& s : samples) s.t = (s.t - t0) / (t1 - t0);
    samples.front().t = 0.0;
    samples.back().t = 1.0;
  }

  bool interior_exterior() const {
    for (std::size_t k = 1; k + 1 < samples.size(); ++k)
      if (!samples[k].exterior) return false;
    return true;
  }
};

/// Largest per-step violation of the linear leaf relation log w - lambda log z = const
/// between consecutive samples. Samples on the separatrix w = 0 must stay there.
inline double linear_leaf_defect(const LeafwisePath& path, Complex lambda) {
  double worst = 0.0;
  for (std::size_t k = 1; k < path.samples.size(); ++k) {
    const auto& a = path.samples[k - 1];
    const auto& b = path.samples[k];
    if (a.w == Complex{} || b.w == Complex{}) {
      worst = std::max(worst, std::abs(a.w) + std::abs(b.w));
      continue;
    }
    if (a.z == Complex{} || b.z == Complex{}) return std::numeric_limits<double>::infinity();
    Complex d = std::log(b.w / a.w) - lambda * std::log(b.z / a.z);
    // The relation holds modulo 2 pi i.
    d.imag(std::remainder(d.imag(), kTwoPi));
    worst = std::max(worst, std::abs(d));
  }
  return worst;
}

}  // namespace holocycles
