#include <cmath>
#include <random>

#include "holocycles/core.hpp"
#include "support.hpp"

using namespace holocycles;
using test_support::rel_err;
using Catch::Approx;

namespace {

PolynomialVectorField linear_field(Complex a, Complex d) {
  return PolynomialVectorField(Polynomial2::monomial(1, 0, a), Polynomial2::monomial(0, 1, d));
}

}  // namespace

TEST_CASE("polynomial arithmetic and derivatives") {
  Polynomial2 p = Polynomial2::monomial(2, 1, 3.0) + Polynomial2::monomial(0, 0, {0, 1});
  CHECK(p.degree() == 3);
  CHECK(p(2.0, 5.0) == Complex{60.0, 1.0});
  CHECK(p.dx()(2.0, 5.0) == Complex{60.0});  // 6 x y
  CHECK(p.dy()(2.0, 5.0) == Complex{12.0});  // 3 x^2
  CHECK((p - p).is_zero());
  CHECK((p * p).degree() == 6);
  CHECK(p.homogeneous_part(3).terms().size() == 1);
  CHECK(Polynomial2().degree() == -1);
  REQUIRE_CODE(Polynomial2::monomial(-1, 0), ErrorCode::InvalidArgument);
}

TEST_CASE("univariate roots with multiplicity clustering") {
  // (u - 1)^2 (u + 2) = u^3 - 3u + 2
  const UnivariateCoeffs c{2.0, -3.0, 0.0, 1.0};
  const auto clusters = cluster_roots(polynomial_roots(c));
  REQUIRE(clusters.size() == 2);
  int total = 0;
  for (const auto& cl : clusters) {
    total += cl.multiplicity;
    if (cl.multiplicity == 2) CHECK(std::abs(cl.value - 1.0) < 1e-6);
    else CHECK(std::abs(cl.value + 2.0) < 1e-12);
  }
  CHECK(total == 3);
  CHECK(trim({1.0, 2.0, 1e-20}).size() == 2);
}

TEST_CASE("vector field construction") {
  const auto f = PolynomialVectorField::from_monomials({{1, 0, 1.0}, {0, 2, 2.0}}, {{0, 1, 1.0}});
  CHECK(f.degree() == 2);
  const auto j = f.jacobian(1.0, 3.0);
  CHECK(j[0] == Complex{1.0});
  CHECK(j[1] == Complex{12.0});
  CHECK(j[2] == Complex{0.0});
  CHECK(j[3] == Complex{1.0});
  REQUIRE_CODE(PolynomialVectorField::from_monomials({}, {{1, 1, 0.0}}), ErrorCode::InvalidArgument);
}

TEST_CASE("normalize_orientation") {
  CHECK(normalize_orientation({1, 2}).lambda == Complex{1, 2});
  CHECK_FALSE(normalize_orientation({1, 2}).conjugated);
  const auto o = normalize_orientation({1, -2});
  CHECK(o.lambda == Complex{1, 2});
  CHECK(o.conjugated);
  REQUIRE_CODE(normalize_orientation(3.0), ErrorCode::NotComplexHyperbolic);

  std::mt19937_64 rng(11);
  for (int k = 0; k < 200; ++k) {
    const Complex l = test_support::random_complex(rng, -3, 3);
    if (!is_nonreal(l)) continue;
    const Complex once = normalize_orientation(l).lambda;
    CHECK(normalize_orientation(once).lambda == once);
    CHECK(once.imag() > 0);
  }
}

TEST_CASE("nu_from_lambda") {
  CHECK(std::abs(nu_from_lambda(1.0) - 1.0) < 1e-15);
  CHECK(std::abs(nu_from_lambda(0.5) + 1.0) < 1e-15);
  // e^{-2 pi} to 17 digits
  CHECK(rel_err(nu_from_lambda(kI), 1.8674427317079888e-3) < 1e-14);

  std::mt19937_64 rng(12);
  for (int k = 0; k < 1000; ++k) {
    const Complex l = test_support::random_complex(rng, -2, 2);
    CHECK(rel_err(nu_from_lambda(l + 1.0), nu_from_lambda(l)) < 1e-12);
    if (l.imag() != 0.0) CHECK((std::abs(nu_from_lambda(l)) < 1.0) == (l.imag() > 0));
    CHECK(log_abs_nu(l) == Approx(std::log(std::abs(nu_from_lambda(l)))).margin(1e-12));
  }
}

TEST_CASE("is_complex_hyperbolic") {
  const auto v = is_complex_hyperbolic(Matrix2::diag(1.0, kI));
  CHECK(v.hyperbolic);
  CHECK(std::abs(v.ratio - kI) < 1e-15);
  CHECK_FALSE(is_complex_hyperbolic(Matrix2::diag(1.0, 2.0)).hyperbolic);
  CHECK_FALSE(is_complex_hyperbolic(Matrix2{0.0, 1.0, 0.0, 0.0}).hyperbolic);
  CHECK_FALSE(is_complex_hyperbolic(Matrix2{0.0, 0.0, 0.0, 0.0}).hyperbolic);
  // The denominator follows the requested direction.
  const auto w = is_complex_hyperbolic(Matrix2::diag(1.0, kI), {0.0, 1.0});
  CHECK(std::abs(w.ratio + kI) < 1e-15);
}

TEST_CASE("eigen2 on a non-normal matrix") {
  const Matrix2 m{2.0, 1.0, 0.0, {0.0, 3.0}};
  for (const auto& p : eigen2(m)) {
    const Complex r0 = m.a * p.vector[0] + m.b * p.vector[1] - p.value * p.vector[0];
    const Complex r1 = m.c * p.vector[0] + m.d * p.vector[1] - p.value * p.vector[1];
    CHECK(std::abs(r0) + std::abs(r1) < 1e-14);
  }
}

TEST_CASE("singular_points") {
  SECTION("linear field") {
    const auto pts = singular_points(linear_field(1.0, 2.0));
    REQUIRE(pts.size() == 1);
    CHECK(std::abs(pts[0].x) + std::abs(pts[0].y) < 1e-12);
    CHECK(pts[0].jacobian.a == Complex{1.0});
    CHECK(pts[0].jacobian.d == Complex{2.0});
    CHECK_FALSE(pts[0].verdict.hyperbolic);
  }
  SECTION("x^2 - 1, y") {
    const auto f = PolynomialVectorField::from_monomials({{2, 0, 1.0}, {0, 0, -1.0}}, {{0, 1, 1.0}});
    const auto pts = singular_points(f);
    REQUIRE(pts.size() == 2);
    CHECK(std::abs(pts[0].x + 1.0) < 1e-12);
    CHECK(std::abs(pts[1].x - 1.0) < 1e-12);
    for (const auto& p : pts) {
      CHECK(std::abs(p.y) < 1e-12);
      CHECK(p.residual < 1e-10);
    }
  }
  SECTION("common factor") {
    const auto f = PolynomialVectorField::from_monomials({{1, 0, 1.0}}, {{1, 0, 1.0}});
    REQUIRE_CODE(singular_points(f), ErrorCode::DegenerateField);
  }
  SECTION("hyperbolic point is found with its ratio") {
    const auto pts = singular_points(linear_field(1.0, {0.5, 1.0}));
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].verdict.hyperbolic);
    CHECK(std::abs(pts[0].verdict.ratio - Complex{0.5, 1.0}) < 1e-14);
  }
  SECTION("random quadratic fields: residuals and Bezout bound") {
    std::mt19937_64 rng(13);
    for (int k = 0; k < 10; ++k) {
      std::vector<Monomial> p, q;
      for (int i = 0; i <= 2; ++i)
        for (int j = 0; i + j <= 2; ++j) {
          p.push_back({i, j, test_support::random_complex(rng, -1, 1)});
          q.push_back({i, j, test_support::random_complex(rng, -1, 1)});
        }
      const auto pts = singular_points(PolynomialVectorField::from_monomials(p, q), {0.0, 0.0, 3.0, 5});
      CHECK(pts.size() <= 4);
      for (const auto& s : pts) CHECK(s.residual < 1e-10);
    }
  }
}

TEST_CASE("local linear model and sections") {
  const LocalLinearModel m({0.25, -1.0}, 2.0, 0.5);
  CHECK(m.conjugated());
  CHECK(m.lambda() == Complex{0.25, 1.0});
  CHECK(std::abs(m.nu() - std::exp(kTwoPi * kI * m.lambda())) < 1e-15);
  CHECK(std::abs(m.nu()) < 1.0);
  const auto amb = m.to_ambient(1.0, 1.0);
  CHECK(amb[0] == Complex{2.0});
  CHECK(amb[1] == Complex{0.5});
  const auto back = m.to_chart(amb[0], amb[1]);
  CHECK(back[0] == Complex{1.0});
  CHECK(m.shrink_z(0.5).z_radius() == 1.0);
  REQUIRE_CODE(LocalLinearModel(2.0), ErrorCode::NotComplexHyperbolic);
  REQUIRE_CODE(LocalLinearModel(kI, -1.0), ErrorCode::InvalidArgument);
  REQUIRE_CODE(CrossSection(0.0), ErrorCode::InvalidArgument);
  REQUIRE_CODE(CrossSection(1.5, m), ErrorCode::InvalidArgument);
  CHECK(CrossSection(0.5, m).disc_radius == 0.5);
}

TEST_CASE("numeric config validation") {
  NumericConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.fixed_point_tol = 0.0;
  REQUIRE_CODE(cfg.validate(), ErrorCode::InvalidArgument);
}

TEST_CASE("leafwise paths") {
  LeafwisePath p;
  const Complex l = kI;
  for (int k = 0; k <= 20; ++k) {
    const double t = k / 20.0;
    const Complex z = std::exp(kTwoPi * kI * t);
    p.samples.push_back({t * 3.0, z, 0.3 * std::exp(kTwoPi * kI * l * t), false});
  }
  CHECK_FALSE(p.parameters_valid());
  p.normalize_parameters();
  CHECK(p.parameters_valid());
  CHECK(linear_leaf_defect(p, l) < 1e-12);
  CHECK(linear_leaf_defect(p, 2.0 * l) > 0.1);
  p.refresh_exterior_flags();
  CHECK_FALSE(p.interior_exterior());
  CHECK(outside_closed_unit_bidisc(1.5, 0.0));
  CHECK_FALSE(outside_closed_unit_bidisc(1.0, 0.5));
}
