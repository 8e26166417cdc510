#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "holocycles/core.hpp"
#include "holocycles/linear_chart.hpp"
#include "holocycles/transport.hpp"

namespace holocycles {

/// Same germ, viewed on the disc of radius `radius` about `anchor`.
inline GermMap restrict_germ(const GermMap& g, Complex anchor, double radius) {
  if (!g.in_domain(anchor) || std::abs(anchor - g.anchor()) + radius > g.domain_radius() * (1.0 + 1e-12))
    fail(ErrorCode::DomainError, "restricted disc is not inside the germ's domain");
  return GermMap(g.kind(), anchor, radius);
}

/// nu^n * M_beta.
inline GermMap build_Mn(Complex nu, const GermMap& m_beta, int n) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "cycle index must be at least 1");
  return compose(GermMap::linear(std::pow(nu, n)), m_beta);
}

struct DiscBounds {
  double sup_modulus = 0.0;     ///< sup |M - anchor_out| on the boundary
  double sup_derivative = 0.0;  ///< sup |M'| on the boundary
};

namespace detail {

/// Boundary-sample suprema of |M(w) - centre| and |M'(w)|; by the maximum principle these
/// bound the interior values.
inline DiscBounds disc_bounds(const GermMap& m, Complex anchor, double r, std::size_t samples, Complex centre) {
  DiscBounds b;
  for (Complex w : circle_samples(anchor, r, samples)) {
    const Jet j = m.eval(w);
    if (!is_finite(j.value) || !is_finite(j.deriv)) fail(ErrorCode::NoConvergence, "germ estimate is not finite");
    b.sup_modulus = std::max(b.sup_modulus, std::abs(j.value - centre));
    b.sup_derivative = std::max(b.sup_derivative, std::abs(j.deriv));
  }
  return b;
}

}  // namespace detail

constexpr double kContractionTarget = 0.5;
constexpr double kInvarianceMargin = 0.999;

/// Least n with sup |M_n'| <= 1/2 and M_n(D) inside D with margin, where M_n = nu^n M_beta
/// and D is the disc of radius r about the germ's anchor. Both conditions are checked in
/// log scale, so large n do not underflow.
inline int min_contracting_index(Complex nu, const GermMap& m_beta, double r, std::size_t samples = 256,
                                 int max_index = 100000) {
  const double log_nu = std::log(std::abs(nu));
  if (!(log_nu < 0.0)) fail(ErrorCode::InvalidArgument, "contraction needs |nu| < 1");
  const Complex c = m_beta.anchor();
  const auto b = detail::disc_bounds(m_beta, c, r, samples, 0.0);
  const double log_s1 = std::log(b.sup_derivative);
  const double log_s0 = std::log(b.sup_modulus);
  const double log_target = std::log(kContractionTarget);

  auto holds = [&](int n) {
    if (n * log_nu + log_s1 > log_target) return false;
    if (c == Complex{}) return n * log_nu + log_s0 <= std::log(kInvarianceMargin * r);
    // Off-centre disc: check the image directly.
    const Complex nun = std::pow(nu, n);
    for (Complex w : detail::circle_samples(c, r, samples))
      if (std::abs(nun * m_beta(w) - c) > kInvarianceMargin * r) return false;
    return true;
  };

  int n = 1;
  if (c == Complex{}) {
    double need = 1.0;
    if (b.sup_derivative > 0.0) need = std::max(need, (log_target - log_s1) / log_nu);
    if (b.sup_modulus > 0.0) need = std::max(need, (std::log(kInvarianceMargin * r) - log_s0) / log_nu);
    if (!(need < max_index)) fail(ErrorCode::NoConvergence, "contraction index exceeds the search limit");
    n = std::max(1, static_cast<int>(std::ceil(need)));
    while (n > 1 && holds(n - 1)) --n;  // guard against rounding in the ceiling
  }
  while (!holds(n)) {
    if (++n > max_index) fail(ErrorCode::NoConvergence, "contraction index exceeds the search limit");
  }
  return n;
}

struct FixedPoint {
  Complex p;
  double residual = 0.0;
  std::size_t iterations = 0;
};

/// Fixed point of a contraction of the disc D (radius r about M's anchor): Picard iteration
/// until the residual drops below 1e-4, then Newton on M(w) - w.
inline FixedPoint find_fixed_point(const GermMap& m, double r, const NumericConfig& cfg,
                                   std::optional<Complex> seed = std::nullopt) {
  cfg.validate();
  const Complex c = m.anchor();
  const auto b = detail::disc_bounds(m, c, r, cfg.boundary_samples, c);
  if (!(b.sup_derivative < 1.0)) fail(ErrorCode::ContractionViolated, "germ does not contract on the disc");
  if (!(b.sup_modulus <= r)) fail(ErrorCode::ContractionViolated, "germ does not map the disc into itself");

  auto inside = [&](Complex w) {
    if (!(std::abs(w - c) <= r * (1.0 + 1e-12))) fail(ErrorCode::ContractionViolated, "iteration left the disc");
  };
  Complex w = seed.value_or(c);
  inside(w);
  std::size_t it = 0;
  double res = std::abs(m(w) - w);
  while (!(res < 1e-4)) {
    if (++it > cfg.max_iterations) fail(ErrorCode::NoConvergence, "Picard iteration did not converge");
    w = m(w);
    inside(w);
    res = std::abs(m(w) - w);
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double tol = cfg.fixed_point_tol;
  for (;;) {
    // Small fixed points need a relative stop; an absolute one alone would stop early.
    if (res <= tol * std::min(1.0, std::abs(w))) break;
    if (++it > cfg.max_iterations) fail(ErrorCode::NoConvergence, "Newton iteration did not converge");
    const Jet j = m.eval(w);
    const Complex step = (j.value - w) / (j.deriv - 1.0);
    const Complex next = w - step;
    inside(next);
    const double next_res = std::abs(m(next) - next);
    const bool stalled = !(next_res < res);
    if (stalled && res <= tol) break;  // noise floor of the germ evaluation reached
    w = next;
    res = next_res;
    if (std::abs(step) <= 4.0 * eps * std::abs(w)) break;
  }
  if (!(res <= tol)) fail(ErrorCode::NoConvergence, "fixed point residual above tolerance");
  return {w, res, it};
}

/// nu^n M_beta'(p_n).
inline Complex multiplier(Complex nu, int n, const GermMap& m_beta, Complex p_n) {
  return std::pow(nu, n) * m_beta.deriv(p_n);
}

/// n log|nu| + log|M_beta'(p_n)|, finite even when |nu|^n underflows.
inline double log_abs_multiplier(double log_abs_nu, int n, const GermMap& m_beta, Complex p_n) {
  return n * log_abs_nu + std::log(std::abs(m_beta.deriv(p_n)));
}

// ---------------------------------------------------------------------------
// Representatives
// ---------------------------------------------------------------------------

/// Lift of the base path of M_beta through (1, w), in chart coordinates. Lifted germs use the
/// integrated trace. Closed-form germs have no recorded path, so a stand-in loop is used:
/// z = 1 + rho (1 - e^{2 pi i t}) stays outside the unit disc for 0 < t < 1 and does not wind
/// around 0, and w moves linearly from w to M_beta(w).
inline LeafwisePath beta_lift(const GermMap& m_beta, Complex w, const NumericConfig& cfg, double rho = 0.5) {
  if (const auto* lifted = std::get_if<LiftedGerm>(&m_beta.kind())) {
    const auto& spec = *lifted->spec;
    auto r = lift_path(spec.foliation, spec.path, w, spec.cfg, {spec.base, true});
    return std::move(r.trace);
  }
  if (!m_beta.is_closed_form()) fail(ErrorCode::InvalidArgument, "composite germs carry no base path to lift");
  const Complex end = m_beta(w);
  const std::size_t count = std::max<std::size_t>(cfg.quadrature_points, 8);
  LeafwisePath out;
  out.samples.reserve(count + 1);
  for (std::size_t k = 0; k <= count; ++k) {
    const double t = double(k) / double(count);
    const Complex z = k == 0 || k == count ? Complex{1.0} : 1.0 + rho * (1.0 - std::exp(kTwoPi * kI * t));
    const Complex v = k == count ? end : w + t * (end - w);
    out.samples.push_back({t, z, v, outside_closed_unit_bidisc(z, v)});
  }
  return out;
}

struct Representative {
  std::vector<PathSample> samples;  ///< beta-lift on t in [0, 1], spiral on [1, 1 + n]
  std::size_t beta_samples = 0;     ///< samples[0 .. beta_samples) belong to the beta-lift
  double closure_defect = 0.0;
  double junction_defect = 0.0;
};

/// Beta-lift through (1, p_n) followed by n turns of the spiral from (1, M_beta(p_n)).
inline Representative assemble_representative(const LocalLinearModel& model, const GermMap& m_beta, Complex p_n, int n,
                                              const NumericConfig& cfg) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "cycle index must be at least 1");
  Representative rep;
  const auto lift = beta_lift(m_beta, p_n, cfg);
  rep.samples = lift.samples;
  rep.beta_samples = rep.samples.size();

  const Complex start = m_beta(p_n);
  if (std::abs(start) > 1.0 + 1e-12) fail(ErrorCode::AssemblyError, "spiral start lies outside the unit bidisc");
  const auto& lift_end = rep.samples.back();
  const double lift_tol = cfg.ode_rel_tol * std::abs(start) + cfg.ode_abs_tol;
  rep.junction_defect = std::hypot(std::abs(lift_end.z - 1.0), std::abs(lift_end.w - start));
  if (rep.junction_defect > 10.0 * lift_tol) fail(ErrorCode::AssemblyError, "beta-lift does not end at the spiral start");

  const SpiralCurve spiral{start, n, model.lambda()};
  auto pts = spiral.sample(cfg.quadrature_points);
  for (std::size_t k = 1; k < pts.size(); ++k) {
    pts[k].t += 1.0;
    rep.samples.push_back(pts[k]);
  }
  const auto& first = rep.samples.front();
  const auto& last = rep.samples.back();
  rep.closure_defect = std::hypot(std::abs(last.z - first.z), std::abs(last.w - first.w));
  if (rep.closure_defect > cfg.fixed_point_tol + lift_tol)
    fail(ErrorCode::AssemblyError, "representative does not close up");
  for (std::size_t k = 1; k + 1 < rep.beta_samples; ++k)
    if (!rep.samples[k].exterior) fail(ErrorCode::AssemblyError, "beta-lift enters the closed unit bidisc");
  return rep;
}

/// Winding number of the z-projection of a closed sampled curve around 0.
inline double z_winding(const std::vector<PathSample>& samples) {
  std::vector<Complex> zs;
  zs.reserve(samples.size());
  for (const auto& s : samples) zs.push_back(s.z);
  if (std::abs(zs.front() - zs.back()) < 1e-9) zs.pop_back();
  const auto w = winding_number(zs, 0.0);
  return w.value_or(std::numeric_limits<double>::quiet_NaN());
}

// ---------------------------------------------------------------------------
// Subsequence selection
// ---------------------------------------------------------------------------

constexpr double kLogMargin = 1e-6;

/// Greedy scan on log|mu|: the first index with log|mu| < 0, then every index whose
/// log|mu| is below the sum of the logs selected so far. Strictness uses kLogMargin.
inline std::vector<std::size_t> select_subsequence_log(const std::vector<double>& log_abs) {
  std::vector<std::size_t> picked;
  double threshold = 0.0;
  for (std::size_t k = 0; k < log_abs.size(); ++k) {
    const double v = log_abs[k];
    if (!std::isfinite(v)) continue;  // |mu| = 0 or infinite
    if (v < threshold - kLogMargin) {
      picked.push_back(k);
      threshold += v;
    }
  }
  return picked;
}

inline std::vector<std::size_t> select_subsequence(const std::vector<Complex>& mus) {
  std::vector<double> logs;
  logs.reserve(mus.size());
  for (Complex m : mus) logs.push_back(std::log(std::abs(m)));
  return select_subsequence_log(logs);
}

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

struct LimitCycle {
  int n = 0;
  Complex p;
  Complex mu;
  double log_abs_mu = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
  Representative curve;
};

struct CycleFamily {
  LocalLinearModel model;
  GermMap m_beta;  ///< restricted to the section disc
  SectionChoice section;
  std::vector<LimitCycle> cycles;
  std::vector<std::size_t> selected;  ///< positions in `cycles` chosen by select_subsequence
};

/// Cycles n = N, ..., N + count - 1 with N = min_contracting_index (or `first_index` if larger).
inline CycleFamily build_cycle_family(const LocalLinearModel& model, const GermMap& m_beta, double initial_radius,
                                      int count, const NumericConfig& cfg, int first_index = 1) {
  cfg.validate();
  if (count < 1) fail(ErrorCode::InvalidArgument, "cycle count must be at least 1");
  const SectionChoice section = shrink_section(m_beta, initial_radius, model.nu(), cfg);
  const GermMap germ = restrict_germ(m_beta, m_beta.anchor(), section.radius);
  const int start =
      std::max(first_index, min_contracting_index(model.nu(), germ, section.radius, cfg.boundary_samples));
  CycleFamily fam{model, germ, section, {}, {}};
  std::vector<double> logs;
  for (int n = start; n < start + count; ++n) {
    const auto fp = find_fixed_point(build_Mn(model.nu(), germ, n), section.radius, cfg);
    LimitCycle c;
    c.n = n;
    c.p = fp.p;
    c.residual = fp.residual;
    c.iterations = fp.iterations;
    c.mu = multiplier(model.nu(), n, germ, fp.p);
    c.log_abs_mu = log_abs_multiplier(model.log_abs_nu(), n, germ, fp.p);
    c.curve = assemble_representative(model, germ, fp.p, n, cfg);
    logs.push_back(c.log_abs_mu);
    fam.cycles.push_back(std::move(c));
  }
  fam.selected = select_subsequence_log(logs);
  return fam;
}

// ---------------------------------------------------------------------------
// Disjointness certificate
// ---------------------------------------------------------------------------

struct CertificateClause {
  std::string name;
  bool passed = false;
  double margin = 0.0;
  std::string detail;
};

struct DisjointnessCertificate {
  std::vector<CertificateClause> clauses;
  std::vector<std::string> caveats;
  bool verdict = false;

  const CertificateClause* failing() const {
    for (const auto& c : clauses)
      if (!c.passed) return &c;
    return nullptr;
  }
};

namespace detail {

inline double cross(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

inline bool segments_touch(Complex a, Complex b, Complex c, Complex d) {
  const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  auto on = [](Complex p, Complex q, Complex r) {
    return cross(q - p, r - p) == 0.0 && std::min(p.real(), q.real()) <= r.real() && r.real() <= std::max(p.real(), q.real()) &&
           std::min(p.imag(), q.imag()) <= r.imag() && r.imag() <= std::max(p.imag(), q.imag());
  };
  return on(a, b, c) || on(a, b, d) || on(c, d, a) || on(c, d, b);
}

/// The polygon through the z-samples is simple apart from its shared endpoints.
inline bool base_polygon_simple(const std::vector<PathSample>& s, std::size_t count) {
  for (std::size_t i = 0; i + 1 < count; ++i)
    for (std::size_t j = i + 2; j + 1 < count; ++j) {
      if (i == 0 && j + 2 == count) continue;  // first and last segments meet at the closing point
      if (segments_touch(s[i].z, s[i + 1].z, s[j].z, s[j + 1].z)) return false;
    }
  return true;
}

}  // namespace detail

/// Checks the hypotheses under which the representatives are simple and pairwise disjoint:
/// (a) the ratio bound on D, (b) numeric univalence of M_beta on D, (c) distinct fixed points,
/// (d) the integer-shift spiral test, (e) beta-lifts outside the closed bidisc and separated.
inline DisjointnessCertificate certify_disjoint_family(const CycleFamily& fam, const NumericConfig& cfg) {
  DisjointnessCertificate cert;
  cert.caveats.push_back("numeric univalence");
  const double r = fam.section.radius;
  const Complex nu = fam.model.nu();
  const auto& cyc = fam.cycles;

  // (a)
  {
    CertificateClause c{"a_ratio_bound", false, 0.0, ""};
    try {
      const auto b = certify_section_bound(fam.m_beta, r, nu, cfg.boundary_samples);
      c.passed = b.passes;
      c.margin = b.log_margin;
      c.detail = b.passes ? "max/min of |M_beta| on the boundary is below |nu|^-1 / 1.001"
                          : "section radius too large: ratio bound not certified";
    } catch (const Error& e) {
      c.detail = e.what();
    }
    cert.clauses.push_back(c);
  }
  // (b)
  {
    const auto u = certify_univalence(fam.m_beta, r, cfg.boundary_samples);
    cert.clauses.push_back({"b_univalence", u.passes, u.min_derivative,
                            "boundary image winding " + std::to_string(u.winding)});
  }
  // (c)
  {
    CertificateClause c{"c_distinct_fixed_points", true, std::numeric_limits<double>::infinity(), ""};
    for (std::size_t i = 0; i < cyc.size(); ++i)
      for (std::size_t j = i + 1; j < cyc.size(); ++j) {
        const double scale = std::max(std::abs(cyc[i].p), std::abs(cyc[j].p));
        const double rel = scale > 0 ? std::abs(cyc[i].p - cyc[j].p) / scale : 0.0;
        c.margin = std::min(c.margin, rel);
        if (!(rel > 1e-12)) {
          c.passed = false;
          c.detail = "p_" + std::to_string(cyc[i].n) + " = p_" + std::to_string(cyc[j].n);
        }
      }
    if (cyc.size() < 2) c.margin = 0.0;
    cert.clauses.push_back(c);
  }
  // (d) A common spiral point needs w_m / w_n = nu^k; the ratio bound leaves only k = 0,
  // where t = s forces M_beta(p_m) = M_beta(p_n) and univalence gives p_m = p_n.
  {
    const bool ab = cert.clauses[0].passed && cert.clauses[1].passed && cert.clauses[2].passed;
    CertificateClause c{"d_spiral_disjointness", true, std::numeric_limits<double>::infinity(), ""};
    std::size_t via_univalence = 0;
    for (std::size_t i = 0; i < cyc.size() && c.passed; ++i)
      for (std::size_t j = i + 1; j < cyc.size(); ++j) {
        const auto v = spirals_intersect(cyc[i].n, fam.m_beta(cyc[i].p), cyc[j].n, fam.m_beta(cyc[j].p),
                                         fam.model.lambda());
        c.margin = std::min(c.margin, v.lattice_distance);
        if (v.relation == SpiralRelation::Disjoint) continue;
        if (v.k == 0 && ab) {
          ++via_univalence;
          continue;
        }
        c.passed = false;
        c.detail = "spirals " + std::to_string(cyc[i].n) + " and " + std::to_string(cyc[j].n) + " meet at shift " +
                   std::to_string(v.k);
        break;
      }
    if (cyc.size() < 2) c.margin = 0.0;
    if (c.passed)
      c.detail = std::to_string(via_univalence) + " pair(s) with shift 0 resolved by univalence and distinct fixed points";
    cert.clauses.push_back(c);
  }
  // (e) Lifts of one base path through distinct points are disjoint at equal parameters, so a
  // crossing needs the base polygon to revisit a point.
  {
    CertificateClause c{"e_beta_lifts", true, std::numeric_limits<double>::infinity(), ""};
    for (const auto& cy : cyc) {
      for (std::size_t k = 1; k + 1 < cy.curve.beta_samples; ++k) {
        const auto& s = cy.curve.samples[k];
        c.margin = std::min(c.margin, std::max(std::abs(s.z), std::abs(s.w)) - 1.0);
        if (!s.exterior) {
          c.passed = false;
          c.detail = "beta-lift of cycle " + std::to_string(cy.n) + " enters the closed bidisc";
        }
      }
    }
    if (c.passed && !cyc.empty() && !detail::base_polygon_simple(cyc.front().curve.samples, cyc.front().curve.beta_samples)) {
      c.passed = false;
      c.detail = "base path of the beta-lifts is not simple";
    }
    for (std::size_t i = 0; i < cyc.size() && c.passed; ++i)
      for (std::size_t j = 0; j < cyc.size(); ++j) {
        if (i == j) continue;
        // Start of one lift against the end of another: the only other shared base point.
        const double gap = std::abs(cyc[i].p - fam.m_beta(cyc[j].p));
        if (!(gap > 1e-12)) {
          c.passed = false;
          c.detail = "beta-lift endpoints coincide";
          break;
        }
      }
    if (c.passed) c.detail = "interior samples exterior; base polygon simple";
    cert.clauses.push_back(c);
  }
  cert.verdict = std::all_of(cert.clauses.begin(), cert.clauses.end(), [](const auto& c) { return c.passed; });
  return cert;
}

}  // namespace holocycles
