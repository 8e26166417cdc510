#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "holocycles/core.hpp"
#include "holocycles/cycle_forge.hpp"
#include "holocycles/polynomial.hpp"

namespace holocycles {

/// Recorded with every characteristic number so the convention travels with the data.
inline constexpr const char* kCharacteristicConvention = "transversal eigenvalue / eigenvalue along the line at infinity";

enum class InfinityChart { U, S };  ///< U: (u, v) = (y/x, 1/x);  S: (s, r) = (x/y, 1/y)

/// The field written in an infinity chart and multiplied by the power of the second
/// coordinate that makes it polynomial: (u', v') = (Q~ - u P~, -v P~) with
/// P~(u, v) = sum p_ij u^j v^(n-i-j), and symmetrically in the S chart.
inline PolynomialVectorField infinity_chart_field(const PolynomialVectorField& f, InfinityChart chart) {
  const int n = f.degree();
  auto transform = [&](const Polynomial2& p) {
    Polynomial2 out;
    for (const auto& [e, c] : p.terms()) {
      const int rest = n - e.first - e.second;
      if (chart == InfinityChart::U) out.add_term(e.second, rest, c);
      else out.add_term(e.first, rest, c);
    }
    return out;
  };
  const Polynomial2 pt = transform(f.p()), qt = transform(f.q());
  const Polynomial2 first = Polynomial2::monomial(1, 0), second = Polynomial2::monomial(0, 1);
  if (chart == InfinityChart::U) return PolynomialVectorField(qt - first * pt, Complex{-1.0} * (second * pt));
  return PolynomialVectorField(pt - first * qt, Complex{-1.0} * (second * qt));
}

namespace detail {

/// Coefficients in t of h(t) = H(1, t) (chart U) or H(t, 1) (chart S) for a homogeneous H.
inline UnivariateCoeffs dehomogenize(const Polynomial2& h, int degree, InfinityChart chart) {
  UnivariateCoeffs c(static_cast<std::size_t>(std::max(degree, 0) + 1), Complex{});
  for (const auto& [e, v] : h.terms()) c[static_cast<std::size_t>(chart == InfinityChart::U ? e.second : e.first)] += v;
  return c;
}

/// R(u) = Q_n(1, u) - u P_n(1, u) (chart U) or P_n(s, 1) - s Q_n(s, 1) (chart S), untrimmed.
inline UnivariateCoeffs direction_polynomial(const PolynomialVectorField& f, InfinityChart chart) {
  const int n = f.degree();
  const auto pn = dehomogenize(f.p().homogeneous_part(n), n, chart);
  const auto qn = dehomogenize(f.q().homogeneous_part(n), n, chart);
  const auto& a = chart == InfinityChart::U ? qn : pn;
  const auto& b = chart == InfinityChart::U ? pn : qn;
  UnivariateCoeffs r(static_cast<std::size_t>(n + 2), Complex{});
  for (std::size_t k = 0; k < a.size(); ++k) r[k] += a[k];
  for (std::size_t k = 0; k < b.size(); ++k) r[k + 1] -= b[k];
  return r;
}

inline double top_scale(const PolynomialVectorField& f) {
  const int n = f.degree();
  return std::max(f.p().homogeneous_part(n).max_abs_coeff(), f.q().homogeneous_part(n).max_abs_coeff());
}

}  // namespace detail

/// R with leading coefficients that are roundoff relative to the top-degree part removed.
inline UnivariateCoeffs trimmed_direction_polynomial(const PolynomialVectorField& f, InfinityChart chart) {
  auto r = detail::direction_polynomial(f, chart);
  const double tol = 1e-13 * detail::top_scale(f);
  while (!r.empty() && std::abs(r.back()) <= tol) r.pop_back();
  return r;
}

/// L_inf is invariant unless x Q_n - y P_n vanishes identically.
inline bool is_dicritical(const PolynomialVectorField& f) {
  return trimmed_direction_polynomial(f, InfinityChart::U).empty();
}

struct InfinitySingularity {
  Complex direction_x, direction_y;  ///< point [x : y] on L_inf
  InfinityChart chart = InfinityChart::U;
  Complex coordinate;  ///< u or s of the point in its chart
  Matrix2 jacobian;
  Complex line_eigenvalue;        ///< along L_inf
  Complex transversal_eigenvalue;
  std::optional<Complex> lambda;  ///< transversal / line eigenvalue; absent when the line eigenvalue vanishes
  int multiplicity = 1;
  bool non_generic = false;  ///< multiple root
  bool hyperbolic = false;   ///< both eigenvalues nonzero with non-real ratio
};

/// Characteristic number of the singular point with chart coordinate `c`, read off the
/// triangular Jacobian of the chart field at (c, 0).
inline InfinitySingularity analyze_infinity_point(const PolynomialVectorField& f, InfinityChart chart, Complex c,
                                                  int multiplicity = 1) {
  const auto g = infinity_chart_field(f, chart);
  InfinitySingularity s;
  s.chart = chart;
  s.coordinate = c;
  s.direction_x = chart == InfinityChart::U ? Complex{1.0} : c;
  s.direction_y = chart == InfinityChart::U ? c : Complex{1.0};
  s.jacobian = Matrix2::from_array(g.jacobian(c, 0.0));
  s.line_eigenvalue = s.jacobian.a;  // the second row is (0, d) on L_inf
  s.transversal_eigenvalue = s.jacobian.d;
  s.multiplicity = multiplicity;
  s.non_generic = multiplicity > 1;
  const double scale = std::max({1.0, std::abs(s.jacobian.a), std::abs(s.jacobian.d)});
  if (std::abs(s.line_eigenvalue) > 1e-10 * scale) {
    s.lambda = s.transversal_eigenvalue / s.line_eigenvalue;
    s.hyperbolic = std::abs(s.transversal_eigenvalue) > 1e-10 * scale && is_nonreal(*s.lambda);
  }
  return s;
}

/// Singular points of the extension to CP^2 on the line at infinity, with multiplicity.
/// Roots of R in chart U give the points [1 : u]; a degree deficit of R is the multiplicity
/// of [0 : 1], analysed in chart S.
inline std::vector<InfinitySingularity> infinity_singularities(const PolynomialVectorField& f) {
  const int n = f.degree();
  if (n < 1) fail(ErrorCode::DegenerateField, "constant field has no singular points at infinity");
  const auto r = trimmed_direction_polynomial(f, InfinityChart::U);
  if (r.empty()) fail(ErrorCode::NotInvariantLine, "x Q_n - y P_n vanishes identically; the line at infinity is not invariant");
  std::vector<InfinitySingularity> out;
  for (const auto& cl : cluster_roots(polynomial_roots(r))) out.push_back(analyze_infinity_point(f, InfinityChart::U, cl.value, cl.multiplicity));
  const int deficit = n + 1 - (static_cast<int>(r.size()) - 1);
  if (deficit > 0) out.push_back(analyze_infinity_point(f, InfinityChart::S, 0.0, deficit));
  return out;
}

// ---------------------------------------------------------------------------
// Tangencies with a line
// ---------------------------------------------------------------------------

/// The line point + t dir.
struct Line {
  Complex px, py;
  Complex dx{1.0}, dy{};

  /// y = a x + b.
  static Line graph(Complex a, Complex b) { return {0.0, b, 1.0, a}; }
};

struct TangencyCount {
  int affine = 0;             ///< roots of the tangency polynomial, with multiplicity
  int at_infinity = 0;        ///< projective degree minus the affine count
  int projective_degree = 0;  ///< n, or n - 1 when L_inf is not invariant
  int b_class = 0;            ///< least n with the foliation in B_n
  std::vector<std::array<Complex, 2>> points;
};

namespace detail {

/// Coefficients in t of p(px + t dx, py + t dy).
inline UnivariateCoeffs restrict_to_line(const Polynomial2& p, const Line& l) {
  UnivariateCoeffs out(static_cast<std::size_t>(std::max(p.degree(), 0) + 1), Complex{});
  auto binomial_expand = [](Complex base, Complex slope, int k) {
    UnivariateCoeffs c(static_cast<std::size_t>(k + 1), Complex{});
    c[0] = 1.0;
    for (int step = 0; step < k; ++step)
      for (int m = step + 1; m >= 0; --m) c[m] = (m <= step ? c[m] * base : Complex{}) + (m > 0 ? c[m - 1] * slope : Complex{});
    return c;
  };
  for (const auto& [e, c] : p.terms()) {
    const auto a = binomial_expand(l.px, l.dx, e.first);
    const auto b = binomial_expand(l.py, l.dy, e.second);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += c * a[i] * b[j];
  }
  return out;
}

}  // namespace detail

/// Tangencies of the field with a line: zeros of dx Q - dy P along it, plus those at
/// infinity implied by the projective degree.
inline TangencyCount count_tangencies(const PolynomialVectorField& f, const Line& line) {
  if (line.dx == Complex{} && line.dy == Complex{}) fail(ErrorCode::InvalidArgument, "line direction must be nonzero");
  const auto pl = detail::restrict_to_line(f.p(), line);
  const auto ql = detail::restrict_to_line(f.q(), line);
  UnivariateCoeffs t(std::max(pl.size(), ql.size()), Complex{});
  for (std::size_t k = 0; k < ql.size(); ++k) t[k] += line.dx * ql[k];
  for (std::size_t k = 0; k < pl.size(); ++k) t[k] -= line.dy * pl[k];
  double scale = 0.0;
  for (Complex c : t) scale = std::max(scale, std::abs(c));
  const double reach = (1.0 + std::abs(line.px) + std::abs(line.py)) * (1.0 + std::abs(line.dx) + std::abs(line.dy));
  double field_scale = 0.0;
  for (const auto& [e, c] : f.p().terms()) field_scale = std::max(field_scale, std::abs(c));
  for (const auto& [e, c] : f.q().terms()) field_scale = std::max(field_scale, std::abs(c));
  if (!(scale > 1e-12 * field_scale * std::pow(reach, f.degree())))
    fail(ErrorCode::InvariantLine, "the line is invariant: the tangency polynomial vanishes identically");
  t = trim(t, 1e-12);

  TangencyCount out;
  out.affine = static_cast<int>(t.size()) - 1;
  out.projective_degree = is_dicritical(f) ? f.degree() - 1 : f.degree();
  out.at_infinity = out.projective_degree - out.affine;
  out.b_class = out.projective_degree + 1;
  for (Complex root : polynomial_roots(t)) out.points.push_back({line.px + root * line.dx, line.py + root * line.dy});
  return out;
}

// ---------------------------------------------------------------------------
// Broken separatrix connection
// ---------------------------------------------------------------------------

enum class ConnectionVerdict { AssumptionsSatisfied, Unbroken, Inconclusive };

inline std::string to_string(ConnectionVerdict v) {
  switch (v) {
    case ConnectionVerdict::AssumptionsSatisfied: return "assumptions-satisfied";
    case ConnectionVerdict::Unbroken: return "unbroken";
    case ConnectionVerdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

struct ConnectionCheckResult {
  Complex o_p, o_q;
  double separation = 0.0;    ///< |O_P - O_Q|
  double displacement = 0.0;  ///< |M_beta(O_P) - O_P|
  ConnectionVerdict verdict = ConnectionVerdict::Inconclusive;
};

/// Fixed points of the two contracting holonomies on a shared transversal. Distinct fixed
/// points mean the connection is broken and M_beta moves O_P. Germs with an unbounded
/// domain are examined on the disc of radius `default_radius` about their anchor.
inline ConnectionCheckResult broken_connection_check(const GermMap& m_alpha, const GermMap& m_beta, const NumericConfig& cfg,
                                                     double tol = 1e-9, double default_radius = 1.0) {
  auto radius = [&](const GermMap& g) { return std::isfinite(g.domain_radius()) ? g.domain_radius() : default_radius; };
  ConnectionCheckResult out;
  out.o_p = find_fixed_point(m_alpha, radius(m_alpha), cfg).p;
  out.o_q = find_fixed_point(m_beta, radius(m_beta), cfg).p;
  out.separation = std::abs(out.o_p - out.o_q);
  if (out.separation <= tol) {
    out.verdict = ConnectionVerdict::Unbroken;
    out.displacement = m_beta.in_domain(out.o_p) ? std::abs(m_beta(out.o_p) - out.o_p) : 0.0;
    return out;
  }
  if (!m_beta.in_domain(out.o_p)) return out;  // no shared transversal disc: inconclusive
  out.displacement = std::abs(m_beta(out.o_p) - out.o_p);
  out.verdict = out.displacement > tol ? ConnectionVerdict::AssumptionsSatisfied : ConnectionVerdict::Inconclusive;
  return out;
}

}  // namespace holocycles
