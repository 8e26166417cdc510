#include <cmath>
#include <random>

#include "holocycles/certify.hpp"
#include "support.hpp"

using namespace holocycles;

namespace {

std::vector<std::array<Complex, 2>> test_loop(std::size_t n, bool reversed = false) {
  std::vector<std::array<Complex, 2>> pts;
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = double(reversed ? n - k : k) / double(n);
    pts.push_back({std::exp(kTwoPi * kI * t), std::exp(-kTwoPi * kI * t)});
  }
  pts.back() = pts.front();
  return pts;
}

double min_margin(const IndependenceCertificate& c) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& e : c.entries) m = std::min(m, e.margin);
  return m;
}

}  // namespace

TEST_CASE("certify_multipliers") {
  const Complex nu = std::exp(-kTwoPi);
  std::vector<Complex> mus;
  for (int n = 1; n <= 5; ++n) mus.push_back(std::pow(nu, n) * 0.2);
  // Geometric moduli nu^n b pass only on a sparse subsequence.
  const auto all = certify_multipliers(mus);
  CHECK(all.method == CertificateMethod::Multiplier);
  CHECK(to_string(all.method) == "multiplier");
  REQUIRE(all.entries.size() == 5);
  CHECK(all.entries[0].passed);
  CHECK(all.entries[0].threshold == 1.0);

  const auto good = certify_multipliers({0.5, 0.3, 0.1, 0.004});
  CHECK(good.certified);
  CHECK_FALSE(good.failing_j.has_value());
  CHECK(std::abs(good.entries[2].threshold - 0.15) < 1e-15);
  CHECK(std::abs(good.entries[2].margin - std::log(1.5)) < 1e-14);

  const auto bad = certify_multipliers({0.5, 0.3, 0.2});
  CHECK_FALSE(bad.certified);
  CHECK(bad.failing_j == 3u);

  CHECK_FALSE(certify_multipliers({1.0}).certified);
  CHECK_FALSE(certify_multipliers({0.0, 0.1}).certified);
  CHECK_FALSE(certify_multipliers({}).certified);

  // Margins below the log threshold fail.
  CHECK_FALSE(certify_multipliers({0.5, 0.5 * (1.0 - 1e-8)}).certified);
  CHECK(certify_multipliers_log({-1000.0, -2000.0}).certified);
}

TEST_CASE("cycle_integral on a symbolic loop") {
  const Complex want = -2.0 * kTwoPi * kI;  // -4 pi i
  const auto fwd = cycle_integral(test_loop(2048));
  CHECK(std::abs(fwd.value - want) < 1e-8);
  CHECK(fwd.error < 1e-4);

  const auto rev = cycle_integral(test_loop(2048, true));
  CHECK(std::abs(rev.value + fwd.value) < 1e-10);

  // Refinement shrinks the error estimate (second order: by about 4).
  for (std::size_t n : {64u, 128u, 256u, 512u}) {
    const double ratio = cycle_integral(test_loop(n)).error / cycle_integral(test_loop(2 * n)).error;
    CHECK(ratio >= 2.0);
    CHECK(ratio <= 8.0);
    // Doubling changes the value by less than 4x the reported error.
    CHECK(std::abs(cycle_integral(test_loop(2 * n)).value - cycle_integral(test_loop(n)).value) <
          4.0 * cycle_integral(test_loop(n)).error);
  }

  auto open = test_loop(256);
  open.pop_back();
  REQUIRE_CODE(cycle_integral(open), ErrorCode::NotClosed);
  REQUIRE_CODE(cycle_integral(std::vector<std::array<Complex, 2>>(3)), ErrorCode::InvalidArgument);

  // The ambient overload undoes the chart rescaling: x dy - y dx scales by z_radius * w_radius.
  const LocalLinearModel model(kI, 2.0, 3.0);
  Representative rep;
  for (const auto& p : test_loop(1024)) rep.samples.push_back({0.0, p[0], p[1], false});
  const auto amb = cycle_integral(rep, model);
  CHECK(std::abs(amb.value - 6.0 * cycle_integral(test_loop(1024)).value) < 1e-9);
}

TEST_CASE("certify_integrals") {
  const auto ok = certify_integrals({1.0, 2.0, 4.5});
  CHECK(ok.certified);
  CHECK(to_string(ok.method) == "integral");

  const auto edge = certify_integrals({1.0, 2.0, 3.0});
  CHECK_FALSE(edge.certified);
  CHECK(edge.failing_j == 3u);

  CHECK_FALSE(certify_integrals({0.0, 1.0}).certified);
  CHECK(certify_integrals({0.0, 1.0}).failing_j == 1u);

  // Error estimates enter with the safety factor.
  CHECK(certify_integrals({1.0, 2.0, 4.5}, {0.01, 0.01, 0.01}).certified);
  CHECK_FALSE(certify_integrals({1.0, 2.0, 4.5}, {0.1, 0.1, 0.1}).certified);
  REQUIRE_CODE(certify_integrals({1.0, 2.0}, {0.1}), ErrorCode::InvalidArgument);
}

TEST_CASE("brute_force_dependency") {
  CHECK(brute_force_dependency({1.0, 2.0, 3.0}, DependencyMode::Additive) == std::vector<int>{1, 1, -1});
  CHECK_FALSE(brute_force_dependency({0.5, 0.2}, DependencyMode::Multiplicative, 1e-9).has_value());
  const Complex c{0.3, -0.7};
  CHECK(brute_force_dependency({c, c}, DependencyMode::Additive) == std::vector<int>{1, -1});
  CHECK(brute_force_dependency({c, c}, DependencyMode::Multiplicative) == std::vector<int>{1, -1});
  // 0.5^2 = 0.25 needs exponent 2, outside {-1, 0, 1}.
  CHECK_FALSE(brute_force_dependency({0.5, 0.25}, DependencyMode::Multiplicative).has_value());
  CHECK(brute_force_dependency({0.5, 0.25, 0.125}, DependencyMode::Multiplicative) == std::vector<int>{1, 1, -1});
  CHECK(brute_force_dependency({0.0}, DependencyMode::Additive) == std::vector<int>{1});
  REQUIRE_CODE(brute_force_dependency(std::vector<Complex>(21, 1.0), DependencyMode::Additive), ErrorCode::TooLarge);
  REQUIRE_CODE(brute_force_dependency({0.0}, DependencyMode::Multiplicative), ErrorCode::InvalidArgument);

  // Oracle: a planted tuple is found, and whatever is returned really cancels.
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 7;
    std::vector<Complex> v(n);
    for (auto& x : v) x = test_support::random_complex(rng, -1.0, 1.0);
    const std::size_t i = rng() % n, j = (i + 1 + rng() % (n - 1)) % n;
    v[j] = v[i];
    const auto hit = brute_force_dependency(v, DependencyMode::Additive);
    REQUIRE(hit.has_value());
    Complex sum{};
    for (std::size_t k = 0; k < n; ++k) sum += double((*hit)[k]) * v[k];
    CHECK(std::abs(sum) < 1e-9);
    CHECK(*std::find_if(hit->begin(), hit->end(), [](int a) { return a != 0; }) == 1);
  }
}

TEST_CASE("certified lists have no small dependency") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int certified_mult = 0, certified_int = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 10;
    // Multiplier lists: logs decreasing fast enough most of the time.
    std::vector<double> logs;
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double step = u(rng) < 0.8 ? sum - 0.1 - 2.0 * u(rng) : sum + 0.5 * u(rng);
      logs.push_back(std::min(step, -0.05));
      sum += logs.back();
    }
    std::vector<Complex> mus;
    for (double l : logs) mus.push_back(std::polar(std::exp(l), kTwoPi * u(rng)));
    const auto cm = certify_multipliers(mus);
    if (cm.certified) {
      ++certified_mult;
      CHECK_FALSE(brute_force_dependency(mus, DependencyMode::Multiplicative, 0.5 * min_margin(cm)).has_value());
    }
    // Integral lists: moduli growing fast enough most of the time.
    std::vector<Complex> ints;
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double mod = u(rng) < 0.8 ? total + 0.1 + u(rng) : total * u(rng);
      ints.push_back(std::polar(mod, kTwoPi * u(rng)));
      total += mod;
    }
    const auto ci = certify_integrals(ints);
    if (ci.certified) {
      ++certified_int;
      CHECK_FALSE(brute_force_dependency(ints, DependencyMode::Additive, 0.5 * min_margin(ci)).has_value());
    }
  }
  CHECK(certified_mult > 20);
  CHECK(certified_int > 20);
}
