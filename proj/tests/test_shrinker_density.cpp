#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rsflow/shrinker_density.hpp"

using namespace rsf;

TEST_CASE("sphere densities match their closed-form values") {
  CHECK(density_sphere(2) == doctest::Approx(2.0 / std::exp(1.0)).epsilon(1e-13));
  CHECK(density_sphere(3) ==
        doctest::Approx(2.0 * std::sqrt(M_PI) * std::exp(-1.5)).epsilon(1e-13));
}

TEST_CASE("closed form agrees with the surface-area integral route") {
  for (int n = 2; n <= 50; ++n) {
    const double a = density_sphere(n);
    const double b = density_sphere_integral(n);
    CHECK(std::abs(a - b) / a <= 1e-12);
  }
}

TEST_CASE("scan: strictly increasing, below the limit, positive gaps") {
  DensityScan scan = density_scan(50);
  CHECK(scan.monotone);
  CHECK(scan.below_limit);
  CHECK(scan.cylinder_below);
  CHECK(scan.max_route_mismatch <= 1e-12);
  for (const auto& row : scan.rows) {
    CHECK(row.gap > 0.0);
    CHECK(row.closed_form < density_limit());
  }
  // approach to the limit is monotone from below
  CHECK(scan.rows.back().closed_form > 0.85);
}

TEST_CASE("product shrinkers and quotients") {
  ShrinkerSpec gaussian{{{ShrinkerFactor::euclidean, 3}}, 1};
  CHECK(density_spec(gaussian) == doctest::Approx(1.0).epsilon(1e-15));

  ShrinkerSpec cylinder{{{ShrinkerFactor::sphere, 2}, {ShrinkerFactor::euclidean, 1}}, 1};
  CHECK(density_spec(cylinder) == doctest::Approx(density_sphere(2)).epsilon(1e-15));

  ShrinkerSpec s2xs2q{{{ShrinkerFactor::sphere, 2}, {ShrinkerFactor::sphere, 2}}, 2};
  const double v2 = density_sphere(2);
  CHECK(density_spec(s2xs2q) == doctest::Approx(v2 * v2 / 2.0).epsilon(1e-15));

  // product rule: concatenation multiplies densities exactly
  ShrinkerSpec parts{{{ShrinkerFactor::sphere, 3}, {ShrinkerFactor::sphere, 5},
                      {ShrinkerFactor::euclidean, 2}},
                     1};
  CHECK(density_spec(parts) ==
        doctest::Approx(density_sphere(3) * density_sphere(5)).epsilon(1e-15));
}

TEST_CASE("invalid inputs are rejected") {
  CHECK_THROWS_AS(density_sphere(1), std::invalid_argument);
  CHECK_THROWS_AS(density_sphere_integral(0), std::invalid_argument);
  CHECK_THROWS_AS(density_scan(2), std::invalid_argument);
  ShrinkerSpec bad_sphere{{{ShrinkerFactor::sphere, 1}}, 1};
  CHECK_THROWS_AS(density_spec(bad_sphere), std::invalid_argument);
  ShrinkerSpec bad_quot{{{ShrinkerFactor::sphere, 2}}, 0};
  CHECK_THROWS_AS(density_spec(bad_quot), std::invalid_argument);
  ShrinkerSpec empty{{}, 1};
  CHECK_THROWS_AS(density_spec(empty), std::invalid_argument);
}
