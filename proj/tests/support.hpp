#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <random>

#include <catch_amalgamated.hpp>

#include "holocycles/error.hpp"

namespace test_support {

/// Runs `fn` and reports the error code it raised, if any.
inline std::optional<holocycles::ErrorCode> code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const holocycles::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline double rel_err(std::complex<double> got, std::complex<double> want) {
  const double scale = std::abs(want);
  return scale > 0 ? std::abs(got - want) / scale : std::abs(got);
}

inline std::complex<double> random_complex(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return {d(rng), d(rng)};
}

}  // namespace test_support

#define REQUIRE_CODE(expr, expected) REQUIRE(test_support::code_of([&] { (void)(expr); }) == (expected))
