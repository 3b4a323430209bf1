#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "rsflow/flow_evolution.hpp"

using namespace rsf;

namespace {

RadialProfile sphere_profile(int n, double rho0_sq, double t, std::size_t m,
                             double rmax) {
  RadialProfile p;
  p.n = n;
  for (std::size_t i = 1; i <= m; ++i) {
    const double r = rmax * double(i) / m;
    p.grid.push_back(r);
    p.u.push_back(exact_sphere_u(n, rho0_sq, r, t));
  }
  p.kind = "sphere";
  return p;
}

}  // namespace

TEST_CASE("flat data stays flat") {
  RadialProfile init;
  init.n = 4;
  for (std::size_t i = 1; i <= 64; ++i) {
    init.grid.push_back(0.05 * i);
    init.u.push_back(1.0);
  }
  StepperConfig cfg;
  cfg.outer = StepperConfig::Outer::dirichlet;
  cfg.outer_value = [](double) { return 1.0; };
  FlowState st = evolve(init, 0.0, 0.5, cfg);
  for (double u : st.profiles.back().u) CHECK(u == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(st.max_principle_ok);
}

TEST_CASE("second-order convergence to the exact shrinking sphere") {
  const int n = 3;
  const double rho0_sq = 4.0, T = 0.2, rmax = 1.2;
  double prev = 0.0;
  std::size_t m = 41;
  for (int k = 0; k < 4; ++k, m = 2 * m - 1) {
    RadialProfile init = sphere_profile(n, rho0_sq, 0.0, m, rmax);
    StepperConfig cfg;
    cfg.outer = StepperConfig::Outer::dirichlet;
    cfg.outer_value = [&](double t) { return exact_sphere_u(n, rho0_sq, rmax, t); };
    FlowState st = evolve(init, 0.0, T, cfg);
    CHECK(st.max_principle_ok);
    CHECK_FALSE(st.halted);
    const auto& p = st.profiles.back();
    double err = 0.0;
    for (std::size_t i = 0; i < p.grid.size(); ++i)
      err = std::max(err,
                     std::abs(p.u[i] - exact_sphere_u(n, rho0_sq, p.grid[i], T)));
    if (k > 0) CHECK(prev / err >= 3.5);
    prev = err;
  }
}

TEST_CASE("steady soliton barely drifts over unit time") {
  const int n = 4;
  SolitonProfile sol = solve_singular_soliton(n, 0.3, 60.0);
  RadialProfile init;
  init.n = n;
  const std::size_t m = 201;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = 0.5 + 2.5 * double(i) / (m - 1);
    double f, fr, frr;
    sol.eval(r, f, fr, frr);
    init.grid.push_back(r);
    init.u.push_back(f);
  }
  StepperConfig cfg;
  const double uin = init.u.front(), uout = init.u.back();
  cfg.inner = StepperConfig::Inner::dirichlet;
  cfg.inner_value = [=](double) { return uin; };
  cfg.outer_value = [=](double) { return uout; };
  FlowState st = evolve(init, 0.0, 1.0, cfg);
  CHECK_FALSE(st.halted);
  double drift = 0.0;
  const auto& p = st.profiles.back();
  for (std::size_t i = 0; i < p.grid.size(); ++i)
    drift = std::max(drift, std::abs(p.u[i] - init.u[i]));
  CHECK(drift <= 1e-3);  // 10x the O(h^2) defect tolerance at this resolution
}

TEST_CASE("comparison against the verified barrier") {
  const int n = 4;
  SolitonProfile sol = solve_singular_soliton(n, 0.1, 60.0);
  locate_r_star(sol);
  Zeta zeta(n);
  const double a = 2.0 * 2.825330e7;
  BetaTable beta = compute_beta(n, a, sol, zeta);
  BarrierPsi psi(n, a, sol, zeta, beta);
  const double t0 = -1.0, t1 = -0.7;
  auto make_init = [&](double factor) {
    RadialProfile init;
    init.n = n;
    for (std::size_t i = 0; i < 201; ++i) {
      const double r = 0.8 + 0.8 * double(i) / 200;
      init.grid.push_back(r);
      init.u.push_back(factor * psi(r / std::sqrt(-2.0 * t0)));
    }
    return init;
  };

  SUBCASE("data below the barrier stays below") {
    ComparisonReport rep = comparison_test(make_init(0.9), psi, t0, t1);
    CHECK(rep.precondition_ok);
    CHECK(rep.ordering_ok);
    CHECK(rep.worst_margin >= -1e-8);
  }
  SUBCASE("weak contact at one interior point is allowed") {
    RadialProfile init = make_init(0.9);
    init.u[100] = psi(init.grid[100] / std::sqrt(-2.0 * t0));
    ComparisonReport rep = comparison_test(init, psi, t0, t1);
    CHECK(rep.precondition_ok);
    CHECK(rep.ordering_ok);
  }
  SUBCASE("data above the barrier is a precondition violation, not a failure") {
    ComparisonReport rep = comparison_test(make_init(1.1), psi, t0, t1);
    CHECK_FALSE(rep.precondition_ok);
    CHECK(rep.violation_r > 0.0);
  }
}

TEST_CASE("arclength transform closed forms") {
  SUBCASE("u == 1: unit-speed coordinate") {
    RadialProfile p;
    p.n = 3;
    for (std::size_t i = 1; i <= 64; ++i) {
      p.grid.push_back(0.05 * i);
      p.u.push_back(1.0);
    }
    ArclengthProfile ap = arclength_profile(p, 0.0, 1.0);
    for (double z : {-0.5, 0.0, 0.7}) CHECK(ap.F_at(z) == doctest::Approx(1.0 + z).epsilon(1e-12));
  }
  SUBCASE("u == c: linear rescaling") {
    const double c = 0.25;
    RadialProfile p;
    p.n = 3;
    for (std::size_t i = 1; i <= 64; ++i) {
      p.grid.push_back(0.05 * i);
      p.u.push_back(c);
    }
    ArclengthProfile ap = arclength_profile(p, 0.0, 1.0);
    for (double z : {-0.5, 0.3}) CHECK(ap.F_at(z) == doctest::Approx(1.0 + std::sqrt(c) * z).epsilon(1e-12));
  }
  SUBCASE("unit sphere: F(z) = sin(asin(r_bar) + z)") {
    RadialProfile p = sphere_profile(3, 1.0, 0.0, 801, 0.8);
    ArclengthProfile ap = arclength_profile(p, 0.0, 0.4);
    for (double z : {-0.3, -0.1, 0.0, 0.15, 0.3})
      CHECK(ap.F_at(z) ==
            doctest::Approx(std::sin(std::asin(0.4) + z)).epsilon(1e-6));
  }
}

TEST_CASE("F-equation residual: identity on solutions, O(1) off them") {
  const int n = 3;
  const double rho0_sq = 1.0;
  const double ts[3] = {-0.012, -0.006, 0.0};
  std::vector<double> zg;
  for (int i = -40; i <= 40; ++i) zg.push_back(0.3 * i / 40.0);

  SUBCASE("exact sphere with the marked point tracked: residual shrinks") {
    double prev = 0.0;
    int k = 0;
    for (int zn : {40, 80}) {
      std::vector<double> z2;
      for (int i = -zn; i <= zn; ++i) z2.push_back(0.3 * i / zn);
      std::array<ArclengthProfile, 3> lv;
      for (int j = 0; j < 3; ++j) {
        const double rho = std::sqrt(rho0_sq - 2.0 * (n - 1) * ts[j]);
        RadialProfile p = sphere_profile(n, rho0_sq, ts[j], 1601, 0.8);
        lv[j] = arclength_profile(p, ts[j], 0.4 * rho);  // r_bar follows the flow
      }
      auto res = f_equation_residual(n, lv, z2);
      double mx = 0.0;
      for (std::size_t i = 2; i + 2 < res.size(); ++i)
        mx = std::max(mx, std::abs(res[i]));  // interior (endpoint stencils 1st order)
      if (k++) CHECK(mx < prev);
      CHECK(mx < 0.05);
      prev = mx;
    }
  }
  SUBCASE("random smooth non-solution: residual O(1)") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(0.3, 0.9);
    const double c1 = U(rng), c2 = U(rng);
    std::array<ArclengthProfile, 3> lv;
    for (int k = 0; k < 3; ++k) {
      RadialProfile p;
      p.n = n;
      for (std::size_t i = 1; i <= 401; ++i) {
        const double r = 0.8 * double(i) / 401;
        p.grid.push_back(r);
        p.u.push_back(0.4 + 0.3 * std::sin(c1 + 3 * r) * std::cos(c2 + 2 * ts[k]));
      }
      lv[k] = arclength_profile(p, ts[k], 0.4);
    }
    auto res = f_equation_residual(n, lv, zg);
    double mx = 0.0;
    for (double v : res) mx = std::max(mx, std::abs(v));
    CHECK(mx > 0.1);
  }
}

TEST_CASE("marked-point velocity matches the closed form on the sphere") {
  const int n = 3;
  RadialProfile p = sphere_profile(n, 1.0, 0.0, 801, 0.8);
  CHECK(marked_radius_velocity(p, 0.4) ==
        doctest::Approx(-(n - 1) * 0.4).epsilon(1e-4));
  CHECK_THROWS_AS(marked_radius_velocity(p, 2.0), std::invalid_argument);
}

TEST_CASE("rescaled profile: sign structure") {
  SUBCASE("linear F gives linear G") {
    RadialProfile p;
    p.n = 4;
    for (std::size_t i = 1; i <= 64; ++i) {
      p.grid.push_back(0.05 * i);
      p.u.push_back(0.36);
    }
    const double tau = 1.0, t = -std::exp(-tau);
    ArclengthProfile ap = arclength_profile(p, t, 1.0);
    RescaledProfile rp = rescaled_profile(4, ap, tau);
    CHECK(rp.monotone);
    for (std::size_t i = 1; i + 1 < rp.xi.size(); ++i)
      CHECK(std::abs(rp.G_xixi[i]) <= 1e-8);
  }
  SUBCASE("soliton shape: monotone and concave") {
    SolitonProfile sol = solve_singular_soliton(4, 0.3, 60.0);
    RadialProfile p;
    p.n = 4;
    for (std::size_t i = 0; i < 401; ++i) {
      const double r = 0.5 + 10.0 * double(i) / 400;
      double f, fr, frr;
      sol.eval(r, f, fr, frr);
      p.grid.push_back(r);
      p.u.push_back(f);
    }
    const double tau = 2.0, t = -std::exp(-tau);
    ArclengthProfile ap = arclength_profile(p, t, 3.0);
    RescaledProfile rp = rescaled_profile(4, ap, tau);
    CHECK(rp.monotone);
    CHECK(rp.concave);
    CHECK_THROWS_AS(rescaled_profile(4, ap, 1.5), std::invalid_argument);
  }
}

TEST_CASE("configuration validation") {
  StepperConfig cfg;
  cfg.time_factor = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.time_factor = 0.25;
  cfg.num_snapshots = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  RadialProfile init = sphere_profile(3, 4.0, 0.0, 41, 1.2);
  StepperConfig ok;
  ok.outer = StepperConfig::Outer::dirichlet;  // data missing
  CHECK_THROWS_AS(evolve(init, 0.0, 0.1, ok), std::invalid_argument);
  ok.outer_value = [](double) { return 0.9; };
  CHECK_THROWS_AS(evolve(init, 0.1, 0.1, ok), std::invalid_argument);
}
