#include <cmath>
#include <random>

#include "holocycles/cycle_forge.hpp"
#include "support.hpp"

using namespace holocycles;
using test_support::rel_err;

namespace {

const Complex kNuI = std::exp(-kTwoPi);  // nu for lambda = i

Complex affine_fixed_point(Complex nun, Complex a, Complex b) { return nun * a / (1.0 - nun * b); }

/// Smallest sampled distance between two spirals over a grid of parameter pairs, with the
/// w-gap measured relative to |w| since every spiral shrinks by |nu| per turn.
double sampled_spiral_distance(int n, Complex wn, int m, Complex wm, Complex lambda, int grid) {
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a <= grid; ++a) {
    const auto p = spiral_point(wn, lambda, n * double(a) / grid);
    for (int b = 0; b <= grid; ++b) {
      const auto q = spiral_point(wm, lambda, m * double(b) / grid);
      const double scale = std::max(std::abs(p[1]), std::abs(q[1]));
      best = std::min(best, std::hypot(std::abs(p[0] - q[0]), std::abs(p[1] - q[1]) / scale));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("build_Mn") {
  const Complex nu{0.3, 0.4};
  const auto m1 = build_Mn(nu, GermMap::identity(), 1);
  REQUIRE(m1.kind_name() == "exact-linear");
  CHECK(std::get<ExactLinearGerm>(m1.kind()).nu == nu);

  const auto m3 = build_Mn(nu, GermMap::affine(0.5, 0.2), 3);
  REQUIRE(m3.kind_name() == "affine");
  CHECK(rel_err(std::get<AffineGerm>(m3.kind()).a, std::pow(nu, 3) * 0.5) < 1e-15);
  CHECK(rel_err(std::get<AffineGerm>(m3.kind()).b, std::pow(nu, 3) * 0.2) < 1e-15);

  const auto m2 = build_Mn(kNuI, GermMap::affine(0.5, 0.2), 2);
  CHECK(rel_err(std::get<AffineGerm>(m2.kind()).a, 0.5 * std::exp(-2 * kTwoPi)) < 1e-14);
  CHECK(rel_err(std::get<AffineGerm>(m2.kind()).b, 0.2 * std::exp(-2 * kTwoPi)) < 1e-14);

  REQUIRE_CODE(build_Mn(nu, GermMap::identity(), 0), ErrorCode::InvalidArgument);
}

TEST_CASE("min_contracting_index") {
  CHECK(min_contracting_index(kNuI, GermMap::affine(0.5, 0.2), 0.5) == 1);
  CHECK(min_contracting_index(0.9, GermMap::identity(), 0.3) == 7);
  CHECK(min_contracting_index(0.9, GermMap::identity(), 17.0) == 7);
  CHECK(min_contracting_index(0.5, GermMap::affine(0.1, 0.0), 0.5) == 1);

  // Oracle: scan n upward with the closed-form affine bounds.
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Complex a = test_support::random_complex(rng, -1.0, 1.0);
    const Complex b = test_support::random_complex(rng, -2.0, 2.0);
    const double r = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
    const double nu_abs = std::uniform_real_distribution<double>(0.3, 0.95)(rng);
    const Complex nu = std::polar(nu_abs, 1.0);
    int want = 1;
    while (!(std::pow(nu_abs, want) * std::abs(b) <= kContractionTarget &&
             std::pow(nu_abs, want) * (std::abs(a) + std::abs(b) * r) <= kInvarianceMargin * r))
      ++want;
    const int got = min_contracting_index(nu, GermMap::affine(a, b), r, 1024);
    // Boundary sampling can only underestimate the sup, by at most one index here.
    CHECK(got <= want);
    CHECK(got >= want - 1);
  }
  REQUIRE_CODE(min_contracting_index(1.0, GermMap::identity(), 0.5), ErrorCode::InvalidArgument);
}

TEST_CASE("find_fixed_point") {
  const NumericConfig cfg;
  const auto lin = find_fixed_point(GermMap::linear(kNuI), 0.5, cfg);
  CHECK(std::abs(lin.p) <= cfg.fixed_point_tol);

  const Complex a = 0.5, b = 0.2;
  const auto fp = find_fixed_point(GermMap::affine(kNuI * a, kNuI * b), 0.5, cfg);
  const Complex want = affine_fixed_point(kNuI, a, b);
  CHECK(std::abs(fp.p - 9.3407e-4) < 1e-8);
  CHECK(rel_err(fp.p, want) < 1e-12);
  CHECK(fp.residual <= cfg.fixed_point_tol);

  REQUIRE_CODE(find_fixed_point(GermMap::affine(0.0, 2.0), 0.5, cfg), ErrorCode::ContractionViolated);
  REQUIRE_CODE(find_fixed_point(GermMap::affine(0.9, 0.1), 0.5, cfg), ErrorCode::ContractionViolated);

  // A nonlinear contraction: w -> 0.1 + 0.3 w^2 / (1 + w) has its fixed point in closed form.
  const auto mob = GermMap::moebius(0.3, 0.1, 1.0, 10.0);  // (0.3 w + 0.1) / (w + 10)
  const auto q = find_fixed_point(mob, 0.5, cfg);
  // w^2 + 9.7 w - 0.1 = 0
  const double root = (-9.7 + std::sqrt(9.7 * 9.7 + 0.4)) / 2.0;
  CHECK(std::abs(q.p - root) < 1e-13);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto m5 = build_Mn(kNuI, GermMap::affine(a, b), 1);
  for (int k = 0; k < 20; ++k) {
    const Complex seed = std::polar(0.5 * std::sqrt(u(rng)), kTwoPi * u(rng));
    const auto s = find_fixed_point(m5, 0.5, cfg, seed);
    CHECK(std::abs(s.p - fp.p) < 1e-10);
  }
  REQUIRE_CODE(find_fixed_point(m5, 0.5, cfg, Complex{0.6}), ErrorCode::ContractionViolated);
}

TEST_CASE("multipliers") {
  const auto g = GermMap::affine(0.5, 0.2);
  const Complex mu1 = multiplier(kNuI, 1, g, 0.3);
  CHECK(std::abs(std::abs(mu1) - 3.73489e-4) < 1e-9);
  for (int n = 1; n <= 5; ++n) CHECK(rel_err(multiplier(kNuI, n, g, 0.1), std::pow(kNuI, n) * 0.2) < 1e-14);
  CHECK(rel_err(multiplier(kNuI, 4, GermMap::identity(), 0.2), std::pow(kNuI, 4)) < 1e-14);
  // The log form stays finite where the product underflows.
  const double lm = log_abs_multiplier(-kTwoPi, 400, g, 0.0);
  CHECK(std::abs(lm - (-400 * kTwoPi + std::log(0.2))) < 1e-9);
  CHECK(std::abs(multiplier(kNuI, 400, g, 0.0)) == 0.0);
}

TEST_CASE("assemble_representative") {
  const NumericConfig cfg;
  const LocalLinearModel model(kI);
  const auto g = GermMap::affine(0.5, 0.2);
  for (int n = 1; n <= 4; ++n) {
    const Complex p = affine_fixed_point(std::pow(kNuI, n), 0.5, 0.2);
    const auto rep = assemble_representative(model, g, p, n, cfg);
    const auto& last = rep.samples.back();
    CHECK(std::abs(last.w - p) < 1e-12);
    CHECK(std::abs(last.z - 1.0) < 1e-14);
    CHECK(rep.closure_defect < 1e-9);
    CHECK(rep.junction_defect == 0.0);
    CHECK(std::abs(z_winding(rep.samples) - n) < 1e-9);
    CHECK(rep.samples[rep.beta_samples - 1].t == 1.0);
    CHECK(std::abs(last.t - (1.0 + n)) < 1e-12);
  }
  // A point that is not fixed leaves the curve open.
  REQUIRE_CODE(assemble_representative(model, g, 0.01, 1, cfg), ErrorCode::AssemblyError);
  // A spiral start outside the bidisc is rejected.
  REQUIRE_CODE(assemble_representative(model, GermMap::affine(2.0, 0.0), 0.0, 1, cfg), ErrorCode::AssemblyError);
}

TEST_CASE("select_subsequence") {
  CHECK(select_subsequence({0.5, 0.3, 0.2, 0.1, 0.04, 0.004}) == std::vector<std::size_t>{0, 1, 3, 5});
  CHECK(select_subsequence({1.0, 2.0, 1.5}).empty());
  CHECK(select_subsequence({}).empty());
  CHECK(select_subsequence({0.0, 0.5}) == std::vector<std::size_t>{1});

  // Geometric sequences: every selected term beats the product of its predecessors.
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const double lnu = -std::uniform_real_distribution<double>(0.01, 7.0)(rng);
    const double lb = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
    std::vector<double> logs;
    for (int n = 1; n <= 60; ++n) logs.push_back(n * lnu + lb);
    const auto idx = select_subsequence_log(logs);
    const bool any_below = std::any_of(logs.begin(), logs.end(), [](double v) { return v < -kLogMargin; });
    CHECK(idx.empty() == !any_below);
    double sum = 0.0;
    for (std::size_t k : idx) {
      CHECK(logs[k] < sum - kLogMargin);
      sum += logs[k];
    }
  }
}

TEST_CASE("affine family against the closed form") {
  const NumericConfig cfg;
  const LocalLinearModel model(kI);
  const Complex a = 0.5, b = 0.2;
  const auto fam = build_cycle_family(model, GermMap::affine(a, b), 0.5, 30, cfg);
  REQUIRE(fam.cycles.size() == 30);
  CHECK(fam.cycles.front().n == 1);
  for (const auto& c : fam.cycles) {
    const Complex nun = std::pow(kNuI, c.n);
    CHECK(rel_err(c.p, affine_fixed_point(nun, a, b)) < 1e-9);
    if (std::abs(nun) > 0.0) CHECK(rel_err(c.mu, nun * b) < 1e-9);
    CHECK(std::abs(c.log_abs_mu - (c.n * model.log_abs_nu() + std::log(0.2))) < 1e-9 * std::abs(c.log_abs_mu));
  }
  // Decay law |mu_{n+1}| / |mu_n| -> |nu|.
  for (std::size_t k = 0; k + 1 < 20; ++k) {
    const double ratio = std::exp(fam.cycles[k + 1].log_abs_mu - fam.cycles[k].log_abs_mu);
    CHECK(std::abs(ratio / std::abs(kNuI) - 1.0) < 1e-3);
  }
  REQUIRE(!fam.selected.empty());
  CHECK(fam.selected.front() == 0);
  for (std::size_t k = 1; k < fam.selected.size(); ++k) CHECK(fam.selected[k] > fam.selected[k - 1]);
}

TEST_CASE("family built from a lifted holonomy germ") {
  // x' = x - 3, y' = c0 y + c1: the loop about 3 through 1 has holonomy w -> e w + (c1 / c0)(e - 1),
  // e = exp(2 pi i c0). The lifts stay in 1 <= |x| <= 5, outside the closed unit bidisc.
  const Complex c0{0.3, 0.05}, c1{0.1, 0.0};
  const auto field = PolynomialVectorField::from_monomials({{1, 0, 1.0}, {0, 0, -3.0}}, {{0, 1, c0}, {0, 0, c1}});
  NumericConfig cfg;
  cfg.quadrature_points = 256;
  const auto germ = holonomy_germ(field, BasePath::loop_around(3.0, 1.0, 1), CrossSection(0.5), cfg);
  const Complex e = std::exp(kTwoPi * kI * c0);
  const Complex shift = (c1 / c0) * (e - 1.0);

  const LocalLinearModel model(kI);
  const auto fam = build_cycle_family(model, germ, 0.5, 4, cfg);
  REQUIRE(fam.cycles.size() == 4);
  for (const auto& c : fam.cycles) {
    const Complex nun = std::pow(model.nu(), c.n);
    CHECK(rel_err(c.p, nun * shift / (1.0 - nun * e)) < 1e-8);
    CHECK(rel_err(c.mu, nun * e) < 1e-8);
    CHECK(std::abs(z_winding(c.curve.samples) - c.n) < 1e-9);
  }
  const auto cert = certify_disjoint_family(fam, cfg);
  CHECK(cert.verdict);
}

TEST_CASE("disjointness certificate") {
  const NumericConfig cfg;
  const LocalLinearModel model(kI);
  const auto fam = build_cycle_family(model, GermMap::affine(0.5, 0.2), 0.5, 10, cfg);
  const auto cert = certify_disjoint_family(fam, cfg);
  REQUIRE(cert.clauses.size() == 5);
  for (const auto& c : cert.clauses) {
    INFO(c.name << ": " << c.detail);
    CHECK(c.passed);
  }
  CHECK(cert.verdict);
  CHECK(cert.failing() == nullptr);
  CHECK(cert.caveats == std::vector<std::string>{"numeric univalence"});

  // Cross-check clause (d) by sampling.
  for (std::size_t j = 1; j < 4; ++j) {
    const double d = sampled_spiral_distance(fam.cycles[0].n, fam.m_beta(fam.cycles[0].p), fam.cycles[j].n,
                                             fam.m_beta(fam.cycles[j].p), model.lambda(), 200);
    CHECK(d > 1e-6);
  }

  auto dup = fam;
  dup.cycles[1].p = dup.cycles[0].p;
  const auto dc = certify_disjoint_family(dup, cfg);
  CHECK_FALSE(dc.verdict);
  REQUIRE(dc.failing() != nullptr);
  CHECK(dc.failing()->name == "c_distinct_fixed_points");

  // |M_beta| ratio on |w| = 2.495 is 0.999 / 0.001 > e^{2 pi}.
  auto wide = fam;
  wide.m_beta = GermMap::affine(0.5, 0.2);
  wide.section.radius = 2.495;
  const auto wc = certify_disjoint_family(wide, cfg);
  CHECK_FALSE(wc.verdict);
  REQUIRE(wc.failing() != nullptr);
  CHECK(wc.failing()->name == "a_ratio_bound");
  CHECK(wc.failing()->margin < 0.0);
}
