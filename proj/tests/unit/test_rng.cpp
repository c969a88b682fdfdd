#include <cmath>

#include "doctest.h"
#include "minv/rng.hpp"

using namespace minv;

TEST_CASE("named streams are reproducible and distinct") {
  auto a = make_rng(42, "alpha");
  auto b = make_rng(42, "alpha");
  auto c = make_rng(42, "beta");
  auto d = make_rng(43, "alpha");
  const auto first = a();
  CHECK(first == b());
  CHECK(first != c());
  CHECK(first != d());
  CHECK(derive_seed(42, "alpha") == derive_seed(42, "alpha"));
}

TEST_CASE("uniform and normal draws have the right moments") {
  auto rng = make_rng(1, "moments");
  constexpr int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = uniform01(rng);
    CHECK_UNARY(u >= 0.0);
    CHECK_UNARY(u < 1.0);
    su += u;
    const double z = standard_normal(rng);
    sn += z;
    sn2 += z * z;
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
}
