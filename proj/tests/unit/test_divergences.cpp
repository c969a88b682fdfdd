#include <cmath>
#include <vector>

#include "doctest.h"
#include "minv/divergences.hpp"
#include "minv/error.hpp"
#include "minv/rng.hpp"

using namespace minv;

namespace {

std::vector<PhiKind> builtin_kinds() { return {PhiKind::kl(), PhiKind::chi_squared(), PhiKind::total_variation()}; }

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> p(n);
  double s = 0;
  for (auto& v : p) s += (v = -std::log(1.0 - uniform01(rng)));
  for (auto& v : p) v /= s;
  return p;
}

}  // namespace

TEST_CASE("phi divergence worked examples") {
  const std::vector<double> p = {0.5, 0.5};
  const std::vector<double> q = {0.25, 0.75};
  const double direct = 0.5 * std::log(0.5 / 0.25) + 0.5 * std::log(0.5 / 0.75);
  CHECK(phi_divergence(p, q, PhiKind::kl()) == doctest::Approx(direct).epsilon(1e-14));
  CHECK(phi_divergence(p, q, PhiKind::kl()) == doctest::Approx(0.143841).epsilon(1e-5));
  for (const auto& k : builtin_kinds()) CHECK(phi_divergence(q, q, k) == 0.0);
  const std::vector<double> a = {1.0, 0.0};
  const std::vector<double> b = {0.0, 1.0};
  CHECK(phi_divergence(a, b, PhiKind::total_variation()) == doctest::Approx(1.0));
  CHECK(std::isinf(phi_divergence(a, b, PhiKind::kl())));
  CHECK(std::isinf(phi_divergence(a, b, PhiKind::chi_squared())));
}

TEST_CASE("Jensen lower bound") {
  for (const auto& k : builtin_kinds()) CHECK(jensen_lower_bound(k, 1.0) == 0.0);
  CHECK(jensen_lower_bound(PhiKind::kl(), 0.5) == doctest::Approx(std::log(2.0)));
  CHECK(jensen_lower_bound(PhiKind::chi_squared(), 0.5) == doctest::Approx(1.0));
  CHECK(jensen_lower_bound(PhiKind::total_variation(), 0.25) == doctest::Approx(0.75));
  CHECK_THROWS_AS(jensen_lower_bound(PhiKind::kl(), 0.0), Error);
  CHECK_THROWS_AS(jensen_lower_bound(PhiKind::kl(), 1.5), Error);
  const auto unbounded = PhiKind::custom([](double t) { return -std::log(t); }, INFINITY, 0.0, "reverse-kl");
  CHECK_THROWS_AS(jensen_lower_bound(unbounded, 0.5), Error);
}

TEST_CASE("custom kinds must vanish at one") {
  CHECK_THROWS_AS(PhiKind::custom([](double t) { return t * t; }, 0.0, INFINITY), Error);
  const auto hellinger = PhiKind::custom([](double t) { return (std::sqrt(t) - 1) * (std::sqrt(t) - 1); }, 1.0, 1.0);
  CHECK(hellinger(1.0) == 0.0);
}

TEST_CASE("conditional attains the bound and range-supported competitors never beat it") {
  auto rng = make_rng(8, "divergences/jensen");
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + trial % 10;
    const auto q = random_simplex(rng, n);
    std::vector<char> in_range(n);
    double nu1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      in_range[i] = i == 0 || uniform01(rng) < 0.5;
      if (in_range[i]) nu1 += q[i];
    }
    std::vector<double> cond(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) cond[i] = in_range[i] ? q[i] / nu1 : 0.0;
    for (const auto& k : builtin_kinds()) {
      const double bound = jensen_lower_bound(k, nu1);
      CHECK(std::abs(phi_divergence(cond, q, k) - bound) <= 1e-10);
      auto other = random_simplex(rng, n);
      double s = 0;
      for (std::size_t i = 0; i < n; ++i) s += (other[i] = in_range[i] ? other[i] : 0.0);
      for (auto& v : other) v /= s;
      CHECK(phi_divergence(other, q, k) >= bound - 1e-12);
      CHECK(phi_divergence(other, q, k) >= 0.0);
    }
  }
}

TEST_CASE("measure overloads check their supports") {
  Matrix pts(2, 1);
  pts << 0, 1;
  const auto p = ParticleMeasure::uniform(pts);
  Matrix other(2, 1);
  other << 0, 2;
  CHECK_THROWS_AS(phi_divergence(p, ParticleMeasure::uniform(other), PhiKind::kl()), Error);
  CHECK(phi_divergence(p, p, PhiKind::kl()) == 0.0);
}
