#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rsflow/finite_diff.hpp"
#include "rsflow/radial_profile.hpp"
#include "rsflow/warped_geometry.hpp"

using namespace rsf;

namespace {

RadialProfile make_profile(int n, double r_lo, double r_hi, std::size_t m,
                           double (*u)(double), double (*ur)(double) = nullptr) {
  RadialProfile p;
  p.n = n;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = r_lo + (r_hi - r_lo) * double(i) / (m - 1);
    p.grid.push_back(r);
    p.u.push_back(u(r));
  }
  if (ur) {
    p.u_r.emplace();
    for (double r : p.grid) p.u_r->push_back(ur(r));
  }
  return p;
}

}  // namespace

TEST_CASE("flat profile u == 1 has vanishing curvature") {
  auto p = make_profile(4, 0.2, 3.0, 64, [](double) { return 1.0; });
  auto cf = curvature_fields(p);
  auto hq = hamilton_quantity(p);
  for (std::size_t i = 0; i < p.grid.size(); ++i) {
    CHECK(std::abs(cf.R[i]) <= 1e-12);
    CHECK(std::abs(cf.v[i]) <= 1e-12);
    CHECK(std::abs(cf.ric_rad[i]) <= 1e-12);
    CHECK(std::abs(cf.ric_sph[i]) <= 1e-12);
    CHECK(std::abs(hq.H[i]) <= 1e-12);
  }
}

TEST_CASE("round sphere u = 1 - r^2: constant R and linear v") {
  const int n = 5;
  auto p = make_profile(
      n, 0.05, 0.9, 96, [](double r) { return 1.0 - r * r; },
      [](double r) { return -2.0 * r; });
  auto cf = curvature_fields(p);
  for (std::size_t i = 0; i < p.grid.size(); ++i) {
    CHECK(cf.R[i] == doctest::Approx(double(n) * (n - 1)).epsilon(1e-12));
    CHECK(cf.v[i] == doctest::Approx((n - 1) * p.grid[i]).epsilon(1e-12));
  }
  // H = R + u^{-1} v^2 in closed form on the sphere
  auto hq = hamilton_quantity(p);
  for (std::size_t i = 0; i < p.grid.size(); ++i) {
    const double r = p.grid[i];
    const double expected =
        n * (n - 1.0) + (n - 1.0) * (n - 1.0) * r * r / (1.0 - r * r);
    CHECK(hq.H[i] == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("radial identity residual vanishes for the shrinking sphere") {
  const int n = 4;
  // stay away from r -> 1 where H_r and its differencing constant blow up
  auto p = make_profile(
      n, 0.05, 0.6, 401, [](double r) { return 1.0 - r * r; },
      [](double r) { return -2.0 * r; });
  // u(r,t) = 1 - r^2/rho^2(t), rho^2 = 1 - 2(n-1)t  =>  u_t = -2(n-1) r^2 at t=0
  std::vector<double> ut;
  for (double r : p.grid) ut.push_back(-2.0 * (n - 1) * r * r);
  auto hq = hamilton_quantity(p, ut);
  REQUIRE(hq.radial_identity_residual.has_value());
  const auto& res = *hq.radial_identity_residual;
  for (std::size_t i = 1; i + 1 < res.size(); ++i)
    CHECK(std::abs(res[i]) <= 1e-2);  // O(h^2) differencing of H_r
}

TEST_CASE("neck detection") {
  // long thin tube: u tiny over a scale-invariant length >> 1/eps
  RadialProfile tube;
  tube.n = 4;
  for (std::size_t i = 0; i < 512; ++i) {
    const double r = 1.0 + 9.0 * double(i) / 511;
    tube.grid.push_back(r);
    tube.u.push_back(0.01);
  }
  NeckReport rep = detect_necks(tube, 0.05);
  REQUIRE(rep.necks.size() == 1);
  CHECK(rep.necks[0].rescaled_length >= 20.0);
  CHECK(rep.necks[0].max_u == doctest::Approx(0.01));

  auto flat = make_profile(4, 1.0, 10.0, 512, [](double) { return 1.0; });
  CHECK(detect_necks(flat, 0.05).necks.empty());

  CHECK_THROWS_AS(detect_necks(flat, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(detect_necks(flat, 0.7), std::invalid_argument);
}

TEST_CASE("profile validation rejects malformed input") {
  RadialProfile p;
  p.n = 2;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.n = 4;
  p.grid = {1, 2, 3, 4, 5, 6, 7, 8};
  p.u = {1, 1, 1, 1, 1, 1, 1, -1};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);  // u must be positive
  p.u.back() = 1;
  p.grid.back() = 6.5;  // not increasing
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.grid.back() = 8;
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("CSV round trip preserves the profile bit-for-bit") {
  auto p = make_profile(
      6, 0.3, 2.7, 32, [](double r) { return std::exp(-r); },
      [](double r) { return -std::exp(-r); });
  p.kind = "sample";
  std::ostringstream os;
  write_profile_csv(p, os);
  std::istringstream is(os.str());
  RadialProfile q = read_profile_csv(is);
  CHECK(q.n == p.n);
  CHECK(q.kind == p.kind);
  REQUIRE(q.grid.size() == p.grid.size());
  for (std::size_t i = 0; i < p.grid.size(); ++i) {
    CHECK(q.grid[i] == p.grid[i]);
    CHECK(q.u[i] == p.u[i]);
    CHECK((*q.u_r)[i] == (*p.u_r)[i]);
  }
}

TEST_CASE("finite differences are exact on quadratics") {
  std::vector<double> x, f;
  for (int i = 0; i <= 20; ++i) {
    x.push_back(0.1 * i + 0.003 * i * i);  // nonuniform
    f.push_back(3.0 + 2.0 * x.back() - 0.7 * x.back() * x.back());
  }
  auto df = derivative(x, f);
  auto d2f = second_derivative(x, f);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(df[i] == doctest::Approx(2.0 - 1.4 * x[i]).epsilon(1e-10));
    CHECK(d2f[i] == doctest::Approx(-1.4).epsilon(1e-8));
  }
}

TEST_CASE("Hermite interpolants reproduce polynomials of matching degree") {
  auto cubic = [](double t) { return 1.0 + t - 2.0 * t * t + 0.5 * t * t * t; };
  auto dcubic = [](double t) { return 1.0 - 4.0 * t + 1.5 * t * t; };
  CHECK(hermite3(0.37, 0.0, 1.0, cubic(0.0), dcubic(0.0), cubic(1.0), dcubic(1.0)) ==
        doctest::Approx(cubic(0.37)).epsilon(1e-14));
  auto quint = [](double t) { return std::pow(t, 5) - 2 * std::pow(t, 3) + t; };
  auto dquint = [](double t) { return 5 * std::pow(t, 4) - 6 * t * t + 1; };
  auto d2quint = [](double t) { return 20 * std::pow(t, 3) - 12 * t; };
  CHECK(hermite5(0.63, 0.0, 1.0, quint(0.0), dquint(0.0), d2quint(0.0), quint(1.0),
                 dquint(1.0), d2quint(1.0)) ==
        doctest::Approx(quint(0.63)).epsilon(1e-13));
}
