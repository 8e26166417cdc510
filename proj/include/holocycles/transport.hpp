#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "holocycles/base_path.hpp"
#include "holocycles/core.hpp"

namespace holocycles {

/// A foliation is either a global polynomial field or the exact local model.
using Foliation = std::variant<PolynomialVectorField, LocalLinearModel>;

// ---------------------------------------------------------------------------
// Leafwise direction field
// ---------------------------------------------------------------------------

/// Slope d(fiber)/d(base) of the leaf and its derivative with respect to the fiber.
struct LeafSlope {
  Complex slope;
  Complex dslope;
};

namespace detail {

constexpr double kSingularRatio = 1e-12;

[[noreturn]] inline void singular_encounter(Complex base, Complex fiber) {
  fail(ErrorCode::SingularEncounter, "leaf direction degenerates near base=" + std::to_string(base.real()) + "+" +
                                         std::to_string(base.imag()) + "i, fiber=" + std::to_string(fiber.real()) +
                                         "+" + std::to_string(fiber.imag()) + "i");
}

inline LeafSlope leaf_slope(const PolynomialVectorField& f, BaseCoordinate base, Complex b, Complex v) {
  const Complex x = base == BaseCoordinate::First ? b : v;
  const Complex y = base == BaseCoordinate::First ? v : b;
  const Complex P = f.P(x, y), Q = f.Q(x, y);
  const Complex denom = base == BaseCoordinate::First ? P : Q;
  const Complex numer = base == BaseCoordinate::First ? Q : P;
  const double scale = std::abs(P) + std::abs(Q);
  const double size = 1.0 + std::abs(x) + std::abs(y);
  if (!(scale > kSingularRatio * std::pow(size, std::max(1, f.degree()))) ||
      std::abs(denom) < kSingularRatio * scale)
    singular_encounter(b, v);
  const auto j = f.jacobian(x, y);
  // d/d(fiber) of numer/denom.
  const Complex dnumer = base == BaseCoordinate::First ? j[3] : j[0];
  const Complex ddenom = base == BaseCoordinate::First ? j[1] : j[2];
  return {numer / denom, (dnumer * denom - numer * ddenom) / (denom * denom)};
}

inline LeafSlope leaf_slope(const LocalLinearModel& m, BaseCoordinate base, Complex b, Complex v) {
  if (std::abs(b) < kSingularRatio) singular_encounter(b, v);
  if (base == BaseCoordinate::First) return {m.lambda() * v / b, m.lambda() / b};  // dw/dz = lambda w / z
  return {v / (m.lambda() * b), 1.0 / (m.lambda() * b)};                       // dz/dw = z / (lambda w)
}

inline LeafSlope leaf_slope(const Foliation& f, BaseCoordinate base, Complex b, Complex v) {
  return std::visit([&](const auto& g) { return leaf_slope(g, base, b, v); }, f);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Path lifting
// ---------------------------------------------------------------------------

struct LiftResult {
  Complex endpoint;
  /// Derivative of the endpoint with respect to the start value (holonomy derivative).
  Complex derivative;
  LeafwisePath trace;
  double estimated_error = 0.0;
  std::size_t steps = 0;
};

struct LiftOptions {
  BaseCoordinate base = BaseCoordinate::First;
  bool record_trace = false;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct DP54 {
  static constexpr double c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
  static constexpr double a[7][6] = {
      {},
      {1.0 / 5},
      {3.0 / 40, 9.0 / 40},
      {44.0 / 45, -56.0 / 15, 32.0 / 9},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
      {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
  // 5th-order weights minus embedded 4th-order weights.
  static constexpr double e[7] = {71.0 / 57600,  0.0, -71.0 / 16695, 71.0 / 1920, -17253.0 / 339200,
                                  22.0 / 525, -1.0 / 40};
};

using State = std::array<Complex, 2>;  // fiber value, variational derivative

struct Lifter {
  const Foliation& foliation;
  const PathSegment* segment = nullptr;
  BaseCoordinate base;

  State rhs(double t, const State& s) const {
    const Complex b = BasePath::point_on(*segment, t);
    const Complex db = BasePath::velocity_on(*segment, t);
    const LeafSlope ls = leaf_slope(foliation, base, b, s[0]);
    return {ls.slope * db, ls.dslope * db * s[1]};
  }
};

inline LiftResult lift_once(const Foliation& foliation, const BasePath& path, Complex start, const NumericConfig& cfg,
                            const LiftOptions& opts, double rtol, double atol) {
  LiftResult out;
  State y{start, 1.0};
  double h = cfg.initial_step;
  double propagated_error = 0.0;

  auto record = [&](double t, const State& s) {
    const Complex b = path.point(t);
    PathSample ps;
    ps.t = t;
    ps.z = opts.base == BaseCoordinate::First ? b : s[0];
    ps.w = opts.base == BaseCoordinate::First ? s[0] : b;
    ps.exterior = outside_closed_unit_bidisc(ps.z, ps.w);
    out.trace.samples.push_back(ps);
  };
  if (opts.record_trace) record(0.0, y);

  const std::size_t nodes = cfg.quadrature_points;
  for (const auto& seg : path.segments()) {
    Lifter lifter{foliation, &seg, opts.base};
    // Stops inside this segment: the trace grid (if any) and the segment end.
    std::vector<double> stops;
    if (opts.record_trace) {
      for (std::size_t k = 1; k < nodes; ++k) {
        const double tk = double(k) / double(nodes);
        if (tk > seg.t0 && tk < seg.t1) stops.push_back(tk);
      }
    }
    stops.push_back(seg.t1);

    double t = seg.t0;
    State k[7];
    for (double stop : stops) {
      while (t < stop) {
        if (++out.steps > cfg.max_iterations)
          fail(ErrorCode::NoConvergence, "path lifting exceeded the step budget");
        const bool last = t + h >= stop;
        const double hh = last ? stop - t : h;
        k[0] = lifter.rhs(t, y);
        for (int s = 1; s < 7; ++s) {
          State tmp = y;
          for (int j = 0; j < s; ++j)
            for (int c = 0; c < 2; ++c) tmp[c] += hh * DP54::a[s][j] * k[j][c];
          k[s] = lifter.rhs(std::min(t + DP54::c[s] * hh, seg.t1), tmp);
        }
        State ynew = y;
        State err{};
        // The last stage has zero weight in the 5th-order solution.
        for (int j = 0; j < 7; ++j)
          for (int c = 0; c < 2; ++c) {
            if (j < 6) ynew[c] += hh * DP54::a[6][j] * k[j][c];
            err[c] += hh * DP54::e[j] * k[j][c];
          }
        if (!is_finite(ynew[0]) || !is_finite(ynew[1])) singular_encounter(BasePath::point_on(seg, t), y[0]);
        double norm = 0.0;
        for (int c = 0; c < 2; ++c) {
          const double sc = atol + rtol * std::max(std::abs(y[c]), std::abs(ynew[c]));
          norm = std::max(norm, std::abs(err[c]) / sc);
        }
        // Error per unit step keeps the summed local error within one tolerance over [0, 1].
        const double ratio = norm / hh;
        if (ratio <= 1.0) {
          const double growth = std::abs(ynew[1]) / std::abs(y[1]);
          propagated_error = propagated_error * growth + std::abs(err[0]);
          t = last ? stop : t + hh;
          y = ynew;
        }
        const double factor = ratio == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(ratio, -0.25), 0.2, 5.0);
        const double hnew = std::min(cfg.max_step, hh * factor);
        if (!(ratio <= 1.0) || !last) h = hnew;
        if (h < 1e-13) singular_encounter(BasePath::point_on(seg, t), y[0]);
      }
      if (opts.record_trace && stop < 1.0) record(stop, y);
    }
  }
  if (opts.record_trace) record(1.0, y);
  out.endpoint = y[0];
  out.derivative = y[1];
  out.estimated_error = propagated_error;
  return out;
}

}  // namespace detail

/// Analytic continuation of the leaf through `start` along the base path, jointly with
/// the variational equation. Local error is controlled by a Dormand-Prince 5(4) pair on
/// the real path parameter.
inline LiftResult lift_path(const Foliation& foliation, const BasePath& path, Complex start, const NumericConfig& cfg,
                            const LiftOptions& opts = {}) {
  cfg.validate();
  require_finite(start, "lift start");
  double rtol = cfg.ode_rel_tol, atol = cfg.ode_abs_tol;
  for (int attempt = 0;; ++attempt) {
    LiftResult r = detail::lift_once(foliation, path, start, cfg, opts, rtol, atol);
    const double bound = cfg.ode_rel_tol * std::abs(r.endpoint) + cfg.ode_abs_tol;
    if (r.estimated_error <= bound) return r;
    if (attempt == 3 || rtol <= 1e-15)
      fail(ErrorCode::NoConvergence, "lift error estimate exceeds the requested tolerance");
    const double shrink = std::clamp(0.5 * bound / r.estimated_error, 1e-3, 0.5);
    rtol = std::max(1e-15, rtol * shrink);
    atol = std::max(1e-300, atol * shrink);
  }
}

// ---------------------------------------------------------------------------
// Germs
// ---------------------------------------------------------------------------

struct Jet {
  Complex value;
  Complex deriv;
};

struct ExactLinearGerm {
  Complex nu;
};

/// w -> a + b w
struct AffineGerm {
  Complex a, b;
};

/// w -> (a w + b) / (c w + d)
struct MoebiusGerm {
  Complex a, b, c, d;
};

struct LiftSpec {
  Foliation foliation;
  BasePath path;
  BaseCoordinate base = BaseCoordinate::First;
  NumericConfig cfg;
};

struct LiftedGerm {
  std::shared_ptr<const LiftSpec> spec;
};

class GermMap;

/// parts = {g, f} denotes g o f; evaluation applies the last part first.
struct CompositeGerm {
  std::vector<GermMap> parts;
};

class GermMap {
 public:
  using Kind = std::variant<ExactLinearGerm, AffineGerm, MoebiusGerm, LiftedGerm, CompositeGerm>;

  GermMap(Kind kind, Complex anchor = {}, double domain_radius = std::numeric_limits<double>::infinity())
      : kind_(std::move(kind)), anchor_(anchor), radius_(domain_radius) {
    if (!(radius_ > 0)) fail(ErrorCode::InvalidArgument, "germ domain radius must be positive");
    if (const auto* m = std::get_if<MoebiusGerm>(&kind_)) {
      if (m->a * m->d - m->b * m->c == Complex{}) fail(ErrorCode::InvalidArgument, "degenerate Moebius germ");
      if (m->c != Complex{}) radius_ = std::min(radius_, std::abs(-m->d / m->c - anchor_));
    }
  }

  static GermMap identity() { return GermMap(ExactLinearGerm{1.0}); }
  static GermMap linear(Complex nu) { return GermMap(ExactLinearGerm{nu}); }
  static GermMap affine(Complex a, Complex b) { return GermMap(AffineGerm{a, b}); }
  static GermMap moebius(Complex a, Complex b, Complex c, Complex d) { return GermMap(MoebiusGerm{a, b, c, d}); }

  const Kind& kind() const { return kind_; }
  Complex anchor() const { return anchor_; }
  double domain_radius() const { return radius_; }

  bool is_closed_form() const {
    return std::holds_alternative<ExactLinearGerm>(kind_) || std::holds_alternative<AffineGerm>(kind_) ||
           std::holds_alternative<MoebiusGerm>(kind_);
  }

  std::string kind_name() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, ExactLinearGerm>) return "exact-linear";
          else if constexpr (std::is_same_v<T, AffineGerm>) return "affine";
          else if constexpr (std::is_same_v<T, MoebiusGerm>) return "moebius";
          else if constexpr (std::is_same_v<T, LiftedGerm>) return "lifted";
          else return "composite";
        },
        kind_);
  }

  bool in_domain(Complex w) const { return std::abs(w - anchor_) <= radius_ * (1.0 + 1e-12); }

  Jet eval(Complex w) const {
    if (!in_domain(w)) fail(ErrorCode::DomainError, "germ evaluated outside its domain");
    return std::visit([w](const auto& k) { return eval_kind(k, w); }, kind_);
  }

  Complex operator()(Complex w) const { return eval(w).value; }
  Complex deriv(Complex w) const { return eval(w).deriv; }

 private:
  static Jet eval_kind(const ExactLinearGerm& k, Complex w) { return {k.nu * w, k.nu}; }
  static Jet eval_kind(const AffineGerm& k, Complex w) { return {k.a + k.b * w, k.b}; }
  static Jet eval_kind(const MoebiusGerm& k, Complex w) {
    const Complex den = k.c * w + k.d;
    return {(k.a * w + k.b) / den, (k.a * k.d - k.b * k.c) / (den * den)};
  }
  static Jet eval_kind(const LiftedGerm& k, Complex w) {
    const auto r = lift_path(k.spec->foliation, k.spec->path, w, k.spec->cfg, {k.spec->base, false});
    return {r.endpoint, r.derivative};
  }
  static Jet eval_kind(const CompositeGerm& k, Complex w) {
    Jet acc{w, 1.0};
    for (auto it = k.parts.rbegin(); it != k.parts.rend(); ++it) {
      const Jet j = it->eval(acc.value);
      acc = {j.value, j.deriv * acc.deriv};
    }
    return acc;
  }

  Kind kind_;
  Complex anchor_;
  double radius_;
};

/// Holonomy germ along a base path, evaluated by lifting from each start point in the
/// section disc.
inline GermMap holonomy_germ(const Foliation& foliation, const BasePath& path, const CrossSection& section,
                             const NumericConfig& cfg, BaseCoordinate base = BaseCoordinate::First) {
  auto spec = std::make_shared<const LiftSpec>(LiftSpec{foliation, path, base, cfg});
  // Fails early (and with the lift's own error) if the anchor leaf cannot be continued.
  lift_path(spec->foliation, spec->path, section.anchor, cfg, {base, false});
  return GermMap(LiftedGerm{std::move(spec)}, section.anchor, section.disc_radius);
}

namespace detail {

inline std::array<Complex, 4> as_matrix(const GermMap::Kind& k) {
  if (const auto* l = std::get_if<ExactLinearGerm>(&k)) return {l->nu, 0.0, 0.0, 1.0};
  if (const auto* a = std::get_if<AffineGerm>(&k)) return {a->b, a->a, 0.0, 1.0};
  const auto& m = std::get<MoebiusGerm>(k);
  return {m.a, m.b, m.c, m.d};
}

inline void flatten_into(std::vector<GermMap>& out, const GermMap& g) {
  if (const auto* c = std::get_if<CompositeGerm>(&g.kind()))
    for (const auto& p : c->parts) flatten_into(out, p);
  else
    out.push_back(g);
}

}  // namespace detail

/// g o f. Closed-form kinds compose symbolically; anything else becomes a composite.
inline GermMap compose(const GermMap& g, const GermMap& f) {
  const Complex image = f(f.anchor());
  if (!g.in_domain(image)) fail(ErrorCode::DomainError, "image of the inner anchor lies outside the outer germ's domain");

  const auto& gk = g.kind();
  const auto& fk = f.kind();
  auto is_identity = [](const GermMap& h) {
    const auto* l = std::get_if<ExactLinearGerm>(&h.kind());
    return l && l->nu == Complex{1.0};
  };
  if (is_identity(f) && f.anchor() == g.anchor() && f.domain_radius() >= g.domain_radius()) return g;
  if (is_identity(g)) return f;
  if (g.is_closed_form() && f.is_closed_form()) {
    const auto* gl = std::get_if<ExactLinearGerm>(&gk);
    const auto* fl = std::get_if<ExactLinearGerm>(&fk);
    const auto* ga = std::get_if<AffineGerm>(&gk);
    const auto* fa = std::get_if<AffineGerm>(&fk);
    if (gl && fl) return GermMap(ExactLinearGerm{gl->nu * fl->nu}, f.anchor(), f.domain_radius());
    if (gl && fa) return GermMap(AffineGerm{gl->nu * fa->a, gl->nu * fa->b}, f.anchor(), f.domain_radius());
    if (ga && fl) return GermMap(AffineGerm{ga->a, ga->b * fl->nu}, f.anchor(), f.domain_radius());
    if (ga && fa) return GermMap(AffineGerm{ga->a + ga->b * fa->a, ga->b * fa->b}, f.anchor(), f.domain_radius());
    const auto m = detail::as_matrix(gk);
    const auto n = detail::as_matrix(fk);
    return GermMap(MoebiusGerm{m[0] * n[0] + m[1] * n[2], m[0] * n[1] + m[1] * n[3], m[2] * n[0] + m[3] * n[2],
                               m[2] * n[1] + m[3] * n[3]},
                   f.anchor(), f.domain_radius());
  }
  std::vector<GermMap> parts;
  detail::flatten_into(parts, g);
  detail::flatten_into(parts, f);
  return GermMap(CompositeGerm{std::move(parts)}, f.anchor(), f.domain_radius());
}

}  // namespace holocycles
