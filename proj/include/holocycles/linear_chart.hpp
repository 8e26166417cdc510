#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "holocycles/core.hpp"
#include "holocycles/transport.hpp"

namespace holocycles {

// ---------------------------------------------------------------------------
// Spirals  t -> (e^{2 pi i t}, w e^{2 pi i lambda t})
// ---------------------------------------------------------------------------

inline std::array<Complex, 2> spiral_point(Complex w, Complex lambda, double t) {
  return {std::exp(kTwoPi * kI * t), w * std::exp(kTwoPi * kI * lambda * t)};
}

struct SpiralCurve {
  Complex start_w;
  int turns = 1;
  Complex lambda;

  std::array<Complex, 2> point(double t) const { return spiral_point(start_w, lambda, t); }

  /// Endpoint w-coordinate nu^n * start_w.
  Complex end_w() const { return start_w * std::exp(kTwoPi * kI * lambda * double(turns)); }

  /// `per_turn` samples per unit parameter, both ends included; t runs over [0, turns].
  std::vector<PathSample> sample(std::size_t per_turn) const {
    const std::size_t count = per_turn * static_cast<std::size_t>(turns);
    std::vector<PathSample> out;
    out.reserve(count + 1);
    for (std::size_t k = 0; k <= count; ++k) {
      const double t = double(turns) * double(k) / double(count);
      const auto p = point(t);
      out.push_back({t, p[0], p[1], outside_closed_unit_bidisc(p[0], p[1])});
    }
    return out;
  }
};

/// CSV rows "t,Re z,Im z,Re w,Im w" with 17 significant digits.
inline void write_samples_csv(std::ostream& os, const std::vector<PathSample>& samples) {
  const auto old = os.precision(17);
  os << "t,re_z,im_z,re_w,im_w\n";
  for (const auto& s : samples)
    os << s.t << ',' << s.z.real() << ',' << s.z.imag() << ',' << s.w.real() << ',' << s.w.imag() << '\n';
  os.precision(old);
}

// ---------------------------------------------------------------------------
// kappa selection
// ---------------------------------------------------------------------------

/// Unit kappa with Re kappa < 0 and Re(lambda kappa) < 0, placed at the midpoint of the
/// admissible arc so that both margins are as large as possible.
inline Complex choose_kappa(Complex lambda) {
  require_finite(lambda, "lambda");
  if (lambda == Complex{} || (lambda.imag() == 0.0 && lambda.real() < 0.0))
    fail(ErrorCode::NoAdmissibleDirection, "no kappa satisfies Re kappa < 0 and Re(lambda kappa) < 0");
  // The admissible arcs are centred at pi and pi - arg(lambda); their intersection is
  // centred halfway between.
  const double angle = std::numbers::pi - 0.5 * std::arg(lambda);
  const Complex kappa = std::polar(1.0, angle);
  if (!(kappa.real() < 0.0) || !((lambda * kappa).real() < 0.0))
    fail(ErrorCode::NoAdmissibleDirection, "admissible arc for kappa is numerically empty");
  return kappa;
}

// ---------------------------------------------------------------------------
// Entry path normalization
// ---------------------------------------------------------------------------

enum class EntryCase { I, II };

struct EntryPathSpec {
  Complex z_end, w_end;  ///< endpoint of the input path, in input chart coordinates
  EntryCase entry_case = EntryCase::I;
  double rotation = 0.0;  ///< angle applied to z
  std::optional<Complex> kappa;
  std::optional<double> shrink_radius;  ///< |e^kappa z~| in input chart units
};

struct NormalizedEntry {
  LeafwisePath path;
  EntryPathSpec spec;
  LocalLinearModel model;
};

namespace detail {

inline void reparametrize_by_length(LeafwisePath& path) {
  auto& s = path.samples;
  // Steps at rounding level would give repeated parameters.
  s.erase(std::unique(s.begin(), s.end(),
                      [](const PathSample& a, const PathSample& b) {
                        return std::abs(a.z - b.z) + std::abs(a.w - b.w) <= 1e-14 * (1.0 + std::abs(a.z) + std::abs(a.w));
                      }),
          s.end());
  double acc = 0.0;
  std::vector<double> len{0.0};
  for (std::size_t k = 1; k < path.samples.size(); ++k) {
    const auto& a = path.samples[k - 1];
    const auto& b = path.samples[k];
    acc += std::hypot(std::abs(b.z - a.z), std::abs(b.w - a.w));
    len.push_back(acc);
  }
  if (!(acc > 0)) fail(ErrorCode::InvalidArgument, "entry path has zero length");
  for (std::size_t k = 0; k < path.samples.size(); ++k) path.samples[k].t = len[k] / acc;
  path.samples.back().t = 1.0;
}

/// Leafwise path along L = {w = 0}: radially from 1 to |target|, then along the circle of
/// that radius to `target`. Interior points stay outside the closed unit bidisc when |target| > 1.
inline std::vector<PathSample> separatrix_connector(Complex target, int samples_per_piece = 32) {
  std::vector<PathSample> out;
  const double r = std::abs(target);
  const double phi = std::arg(target);
  for (int k = 0; k < samples_per_piece; ++k) {
    const double s = double(k) / samples_per_piece;
    out.push_back({0.0, Complex{1.0 + s * (r - 1.0), 0.0}, 0.0, false});
  }
  if (std::abs(phi) * r < 1e-12) return out;
  for (int k = 0; k < samples_per_piece; ++k) {
    const double s = double(k) / samples_per_piece;
    out.push_back({0.0, std::polar(r, s * phi), 0.0, false});
  }
  return out;
}

}  // namespace detail

/// Brings an entry path into the normal form used by the cycle construction: it starts
/// at (1, 0) on L, its interior stays outside the closed unit bidisc and it ends at
/// (1, w0) with |w0| < 1. A path ending on the horizontal boundary |w| = 1 gets the
/// exponential tail (z e^{tau kappa}, w e^{lambda tau kappa}) and U is shrunk accordingly.
inline NormalizedEntry normalize_entry_path(const LeafwisePath& input, const LocalLinearModel& model, double tol = 1e-9) {
  if (input.samples.size() < 2) fail(ErrorCode::InvalidArgument, "entry path needs at least two samples");
  const Complex z_end = input.back().z, w_end = input.back().w;
  if (std::abs(w_end) <= tol || std::abs(z_end) <= tol)
    fail(ErrorCode::OnSeparatrix, "entry path ends on a separatrix");
  if (std::abs(input.front().w) > tol) fail(ErrorCode::InvalidArgument, "entry path must start on L = {w = 0}");

  NormalizedEntry out{input, {}, model};
  out.spec.z_end = z_end;
  out.spec.w_end = w_end;
  auto& samples = out.path.samples;

  if (std::abs(std::abs(w_end) - 1.0) <= tol) {
    out.spec.entry_case = EntryCase::II;
    if (std::abs(z_end) > 1.0 + tol) fail(ErrorCode::InvalidArgument, "entry path endpoint is outside the closed bidisc");
    const Complex kappa = choose_kappa(model.lambda());
    out.spec.kappa = kappa;
    constexpr int kTailSamples = 100;
    double prev_z = std::abs(z_end), prev_w = std::abs(w_end);
    for (int k = 1; k <= kTailSamples; ++k) {
      const double tau = double(k) / kTailSamples;
      const Complex z = z_end * std::exp(tau * kappa);
      const Complex w = w_end * std::exp(model.lambda() * tau * kappa);
      if (!(std::abs(z) < prev_z) || !(std::abs(w) < prev_w))
        fail(ErrorCode::InvalidArgument, "exponential tail is not monotonically entering the bidisc");
      prev_z = std::abs(z);
      prev_w = std::abs(w);
      samples.push_back({0.0, z, w, false});
    }
    const double rho = std::abs(std::exp(kappa) * z_end);
    out.spec.shrink_radius = rho;
    for (auto& s : samples) s.z /= rho;
    out.model = model.shrink_z(rho);
  } else if (std::abs(std::abs(z_end) - 1.0) <= tol && std::abs(w_end) < 1.0) {
    out.spec.entry_case = EntryCase::I;
  } else {
    fail(ErrorCode::InvalidArgument, "entry path must end on the boundary of the bidisc");
  }

  // Rotate z so the endpoint becomes (1, w0); the foliation is invariant under z -> c z.
  const double theta = std::arg(samples.back().z);
  out.spec.rotation = -theta;
  const Complex rot = std::polar(1.0, -theta);
  for (auto& s : samples) s.z *= rot;
  samples.back().z = std::abs(samples.back().z);

  // Replace the initial segment: start at (1, 0) and leave the closed bidisc at once,
  // travelling along L to the first sample that is outside.
  out.path.refresh_exterior_flags();
  std::size_t first_out = 1;
  while (first_out < samples.size() && !samples[first_out].exterior) ++first_out;
  if (first_out + 1 >= samples.size()) fail(ErrorCode::InvalidArgument, "entry path never leaves the closed bidisc");
  if (std::abs(samples[first_out].w) > tol)
    fail(ErrorCode::InvalidArgument, "entry path leaves L inside the bidisc; it is not leafwise near its start");
  auto connector = detail::separatrix_connector(samples[first_out].z);
  samples.erase(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(first_out));
  samples.insert(samples.begin(), connector.begin(), connector.end());

  detail::reparametrize_by_length(out.path);
  out.path.refresh_exterior_flags();

  const auto& end = samples.back();
  if (!(std::abs(end.z - 1.0) < 1e-10) || !(std::abs(end.w) < 1.0))
    fail(ErrorCode::InvalidArgument, "normalized entry path does not end at (1, w0) with |w0| < 1");
  if (!out.path.interior_exterior())
    fail(ErrorCode::InvalidArgument, "normalized entry path has interior samples inside the closed bidisc");
  return out;
}

// ---------------------------------------------------------------------------
// Section size: the ratio bound and numeric univalence
// ---------------------------------------------------------------------------

/// Winding number of a closed sampled curve around `center`. Returns nullopt when some
/// step turns by more than a quarter turn (sampling too coarse to trust).
inline std::optional<double> winding_number(const std::vector<Complex>& closed, Complex center) {
  if (closed.size() < 3) return std::nullopt;
  double total = 0.0;
  for (std::size_t k = 0; k < closed.size(); ++k) {
    const Complex a = closed[k] - center;
    const Complex b = closed[(k + 1) % closed.size()] - center;
    if (a == Complex{} || b == Complex{}) return std::nullopt;
    const double step = std::arg(b / a);
    if (std::abs(step) > 0.5 * std::numbers::pi) return std::nullopt;
    total += step;
  }
  return total / kTwoPi;
}

struct SectionBound {
  bool passes = false;
  double radius = 0.0;
  double max_modulus = 0.0;
  double min_modulus = 0.0;
  /// log|nu|^{-1} - log(1.001) - log(max/min); positive iff the bound holds with the safety factor.
  double log_margin = 0.0;
};

constexpr double kSectionSafety = 1.001;

namespace detail {

inline std::vector<Complex> circle_samples(Complex center, double r, std::size_t n) {
  std::vector<Complex> pts(n);
  for (std::size_t k = 0; k < n; ++k) pts[k] = center + std::polar(r, kTwoPi * double(k) / double(n));
  return pts;
}

}  // namespace detail

/// Checks |nu| < |M(w)/M(w')| < |nu|^{-1} on the disc of radius r about the germ's anchor.
/// Boundary extrema of |M| bound the interior ones (maximum principle for M and 1/M),
/// so the check runs on `samples` boundary points.
inline SectionBound certify_section_bound(const GermMap& germ, double r, Complex nu, std::size_t samples) {
  if (!(r > 0)) fail(ErrorCode::InvalidArgument, "section radius must be positive");
  if (samples < 8) fail(ErrorCode::InvalidArgument, "need at least 8 boundary samples");
  if (!(std::abs(nu) < 1.0) || nu == Complex{}) fail(ErrorCode::InvalidArgument, "section bound needs 0 < |nu| < 1");
  const auto pts = detail::circle_samples(germ.anchor(), r, samples);
  std::vector<Complex> image;
  image.reserve(samples);
  SectionBound out;
  out.radius = r;
  out.min_modulus = std::numeric_limits<double>::infinity();
  for (Complex w : pts) {
    const Complex v = germ(w);
    image.push_back(v);
    out.max_modulus = std::max(out.max_modulus, std::abs(v));
    out.min_modulus = std::min(out.min_modulus, std::abs(v));
  }
  const double centre_mod = std::abs(germ(germ.anchor()));
  if (!(out.min_modulus > 1e-12 * std::max(1.0, out.max_modulus)) || !(centre_mod > 0.0))
    fail(ErrorCode::GermVanishes, "germ vanishes on the section disc");
  const auto winding = winding_number(image, 0.0);
  if (!winding || std::abs(*winding) > 0.5) fail(ErrorCode::GermVanishes, "germ has a zero inside the section disc");
  out.log_margin = -std::log(std::abs(nu)) - std::log(kSectionSafety) - std::log(out.max_modulus / out.min_modulus);
  out.passes = out.log_margin > 0.0;
  return out;
}

struct UnivalenceCheck {
  bool passes = false;
  double min_derivative = 0.0;
  double winding = 0.0;
};

/// Numeric univalence: derivative nonvanishing on the boundary samples and the boundary
/// image winds exactly once around M(anchor). Not a proof.
inline UnivalenceCheck certify_univalence(const GermMap& germ, double r, std::size_t samples) {
  const auto pts = detail::circle_samples(germ.anchor(), r, samples);
  std::vector<Complex> image;
  image.reserve(samples);
  UnivalenceCheck out;
  out.min_derivative = std::numeric_limits<double>::infinity();
  double max_derivative = 0.0;
  for (Complex w : pts) {
    const Jet j = germ.eval(w);
    image.push_back(j.value);
    out.min_derivative = std::min(out.min_derivative, std::abs(j.deriv));
    max_derivative = std::max(max_derivative, std::abs(j.deriv));
  }
  const auto winding = winding_number(image, germ(germ.anchor()));
  out.winding = winding.value_or(std::numeric_limits<double>::quiet_NaN());
  out.passes = winding && std::abs(*winding - 1.0) < 1e-6 && out.min_derivative > 1e-12 * max_derivative;
  return out;
}

struct SectionChoice {
  double radius = 0.0;
  SectionBound bound;
  UnivalenceCheck univalence;
  std::size_t halvings = 0;
};

/// Largest radius in r0, r0/2, r0/4, ... where the ratio bound and numeric univalence hold.
inline SectionChoice shrink_section(const GermMap& germ, double initial_radius, Complex nu, const NumericConfig& cfg) {
  cfg.validate();
  if (!(initial_radius > 0)) fail(ErrorCode::InvalidArgument, "initial section radius must be positive");
  if (germ(germ.anchor()) == Complex{}) fail(ErrorCode::GermVanishes, "germ vanishes at the section anchor");
  double r = std::min(initial_radius, germ.domain_radius());
  const std::size_t limit = std::min<std::size_t>(cfg.max_iterations, 200);
  for (std::size_t k = 0; k <= limit; ++k, r *= 0.5) {
    try {
      const auto bound = certify_section_bound(germ, r, nu, cfg.boundary_samples);
      if (!bound.passes) continue;
      const auto uni = certify_univalence(germ, r, cfg.boundary_samples);
      if (uni.passes) return {r, bound, uni, k};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::GermVanishes) throw;
    }
  }
  fail(ErrorCode::NoConvergence, "no section radius in the halving sequence satisfies the ratio bound");
}

// ---------------------------------------------------------------------------
// Spiral intersection
// ---------------------------------------------------------------------------

enum class SpiralRelation { Disjoint, Intersect, SameSpiral };

struct SpiralVerdict {
  SpiralRelation relation = SpiralRelation::Disjoint;
  long long k = 0;          ///< integer shift t - s when an integer candidate exists
  double lattice_distance;  ///< distance of the log-ratio from the nearest lattice point
};

/// Analytic test for the spirals (e^{2 pi i t}, w_n e^{2 pi i lambda t}), t in [0, n] and
/// (e^{2 pi i s}, w_m e^{2 pi i lambda s}), s in [0, m]. A common point forces t - s = k in Z and
/// w_m / w_n = nu^k; the parameter windows must then overlap.
inline SpiralVerdict spirals_intersect(int n, Complex w_n, int m, Complex w_m, Complex lambda, double tol = 1e-6) {
  if (w_n == Complex{} || w_m == Complex{}) fail(ErrorCode::InvalidArgument, "spiral start must be off the separatrix");
  if (lambda.imag() == 0.0) fail(ErrorCode::NotComplexHyperbolic, "spirals need a non-real lambda");
  // log(w_m / w_n) / (2 pi i) = lambda k + j with integers k, j.
  const Complex x = std::log(w_m / w_n) / (kTwoPi * kI);
  const double k_real = x.imag() / lambda.imag();
  const double k_round = std::round(k_real);
  const double j_real = x.real() - k_round * lambda.real();
  const double dist = std::max(std::abs(k_real - k_round), std::abs(j_real - std::round(j_real)));
  SpiralVerdict v{SpiralRelation::Disjoint, static_cast<long long>(k_round), dist};
  if (dist >= tol) return v;
  const long long k = v.k;
  if (k > n || k + m < 0) return v;  // windows [0, n] and [k, k + m] miss each other
  v.relation = (k == 0 && n == m) ? SpiralRelation::SameSpiral : SpiralRelation::Intersect;
  return v;
}

}  // namespace holocycles
