#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsflow/barrier.hpp"
#include "rsflow/finite_diff.hpp"
#include "rsflow/radial_profile.hpp"

namespace rsf {

/// The gauge-fixed radial flow equation,
///   u_t = u u_rr - (1/2) u_r^2 + (n-2) u_r / r - u u_r / r
///         + 2(n-2) u (1 - u) / r^2,
/// solved by a semi-implicit method of lines: the linear-in-u part with the
/// diffusion coefficient extrapolated to the half step is treated by
/// Crank-Nicolson (tridiagonal solve), the gradient nonlinearity -(1/2)u_r^2
/// by second-order Adams-Bashforth. First step: backward Euler.
struct StepperConfig {
  double time_factor = 0.25;  // dt = time_factor * h, in (0, 1]
  enum class Inner { origin_fit, dirichlet } inner = Inner::origin_fit;
  enum class Outer { dirichlet, zero_flux } outer = Outer::dirichlet;
  std::function<double(double t)> inner_value;  // used by Inner::dirichlet
  std::function<double(double t)> outer_value;  // used by Outer::dirichlet
  std::size_t num_snapshots = 11;
  double blowup_floor = 1e-6;       // halt when min u drops below this
  double gradient_cap = 1e4;        // halt when max |u_r| r exceeds this
  // One-sided differencing of the advection term. Centered advection sheds a
  // neutrally stable grid-scale sawtooth from the outflow boundary whenever
  // the amplitude of u is so small that the diffusion u u_rr cannot damp it
  // (barrier-scale comparison data, u ~ 1/a^2). Upwinding makes the update
  // monotone at the cost of first-order accuracy in the advection term, which
  // is the right trade for ordering tests; leave it off for convergence runs.
  bool upwind_advection = false;
  void validate() const {
    if (!(time_factor > 0.0 && time_factor <= 1.0))
      throw std::invalid_argument("StepperConfig: time_factor must be in (0, 1]");
    if (num_snapshots < 2)
      throw std::invalid_argument("StepperConfig: need at least 2 snapshots");
  }
};

struct FlowState {
  int n = 0;
  std::vector<double> times;
  std::vector<RadialProfile> profiles;
  std::string inner_bc, outer_bc;
  double max_u_seen = 0, min_u_seen = 0;
  bool max_principle_tracked = false;  // initial datum had 0 < u <= 1
  bool max_principle_ok = true;        // no excursion beyond 1e-8
  bool halted = false;                 // neck degeneration / instability
  double halt_time = 0;                // blow-up time estimate when halted
};

/// Exact shrinking-sphere solution u(r, t) = 1 - r^2 / rho^2(t),
/// rho^2(t) = rho0^2 - 2(n-1) t; satisfies the flow equation identically.
inline double exact_sphere_u(int n, double rho0_sq, double r, double t) {
  return 1.0 - r * r / (rho0_sq - 2.0 * (n - 1) * t);
}

namespace detail {

/// Linearized part A(c) u = c u_rr + ((n-2)/r - c/r) u_r + 2(n-2)(1-2c)/r^2 u
/// on the uniform interior stencil; row i of the matrix as (lower, diag,
/// upper). The reaction term u(1-u) is linearized tangentially around the
/// extrapolated state c, u(1-u) ~ (1-2c)u + c^2: a secant linearization
/// (1-c)u would push the feedback of coefficient errors into the explicit
/// side with gain dt/r^2, which is violently unstable near the origin. The
/// constant remainder 2(n-2)c^2/r^2 is added to the right-hand side by the
/// caller.
inline void linear_row(int n, double r, double h, double c, bool upwind,
                       double& lo, double& di, double& up) {
  const double b = ((n - 2) - c) / r;
  lo = c / (h * h);
  di = -2.0 * c / (h * h) + 2.0 * (n - 2) * (1.0 - 2.0 * c) / (r * r);
  up = c / (h * h);
  if (upwind) {
    if (b >= 0.0) {
      di -= b / h;
      up += b / h;
    } else {
      di += b / h;
      lo -= b / h;
    }
  } else {
    lo -= b / (2.0 * h);
    up += b / (2.0 * h);
  }
}

inline void thomas(std::vector<double>& lo, std::vector<double>& di,
                   std::vector<double>& up, std::vector<double>& rhs) {
  const std::size_t m = di.size();
  for (std::size_t i = 1; i < m; ++i) {
    const double f = lo[i] / di[i - 1];
    di[i] -= f * up[i - 1];
    rhs[i] -= f * rhs[i - 1];
  }
  rhs[m - 1] /= di[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) rhs[i] = (rhs[i] - up[i] * rhs[i + 1]) / di[i];
}

}  // namespace detail

inline FlowState evolve(const RadialProfile& init, double t_start, double t_final,
                        const StepperConfig& config) {
  init.validate();
  config.validate();
  if (!(t_final > t_start)) throw std::invalid_argument("evolve: t_final <= t_start");
  const int n = init.n;
  const auto& r = init.grid;
  const std::size_t m = r.size();
  const double h = r[1] - r[0];
  for (std::size_t i = 1; i + 1 < m; ++i)
    if (std::abs((r[i + 1] - r[i]) - h) > 1e-9 * h)
      throw std::invalid_argument("evolve: uniform grid required");
  if (config.inner == StepperConfig::Inner::dirichlet && !config.inner_value)
    throw std::invalid_argument("evolve: inner Dirichlet data missing");
  if (config.outer == StepperConfig::Outer::dirichlet && !config.outer_value)
    throw std::invalid_argument("evolve: outer Dirichlet data missing");

  FlowState state;
  state.n = n;
  state.inner_bc =
      config.inner == StepperConfig::Inner::origin_fit ? "origin_fit" : "dirichlet";
  state.outer_bc =
      config.outer == StepperConfig::Outer::dirichlet ? "dirichlet" : "zero_flux";
  const double init_max = *std::max_element(init.u.begin(), init.u.end());
  const double init_min = *std::min_element(init.u.begin(), init.u.end());
  state.max_principle_tracked = init_max <= 1.0 + 1e-12 && init_min > 0.0;
  state.max_u_seen = init_max;
  state.min_u_seen = init_min;

  const std::size_t steps =
      std::max<std::size_t>(1, std::llround(std::ceil((t_final - t_start) /
                                                      (config.time_factor * h))));
  const double dt = (t_final - t_start) / steps;
  const std::size_t stride =
      std::max<std::size_t>(1, steps / (config.num_snapshots - 1));

  auto snapshot = [&](double t, const std::vector<double>& u) {
    RadialProfile p;
    p.n = n;
    p.grid = r;
    p.u = u;
    p.kind = "evolved";
    state.times.push_back(t);
    state.profiles.push_back(std::move(p));
  };

  std::vector<double> u = init.u, u_prev = init.u;
  snapshot(t_start, u);

  auto nonlinear = [&](const std::vector<double>& w, std::size_t i) {
    const double wr = (w[i + 1] - w[i - 1]) / (2.0 * h);
    return -0.5 * wr * wr;
  };

  std::vector<double> lo(m), di(m), up(m), rhs(m);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t_new = t_start + dt * (k + 1);
    const bool first = k == 0;
    const double theta = first ? 1.0 : 0.5;

    for (std::size_t i = 1; i + 1 < m; ++i) {
      // diffusion coefficient extrapolated to the half step
      const double c = first ? u[i] : 1.5 * u[i] - 0.5 * u_prev[i];
      double al, ad, au;
      detail::linear_row(n, r[i], h, c, config.upwind_advection, al, ad, au);
      lo[i] = -theta * dt * al;
      di[i] = 1.0 - theta * dt * ad;
      up[i] = -theta * dt * au;
      double explicit_part = u[i];
      if (!first)
        explicit_part += 0.5 * dt * (al * u[i - 1] + ad * u[i] + au * u[i + 1]);
      const double nl = first ? nonlinear(u, i)
                              : 1.5 * nonlinear(u, i) - 0.5 * nonlinear(u_prev, i);
      const double reaction_const = 2.0 * (n - 2) * c * c / (r[i] * r[i]);
      rhs[i] = explicit_part + dt * (nl + reaction_const);
    }

    // inner boundary row
    lo[0] = 0.0;
    if (config.inner == StepperConfig::Inner::origin_fit) {
      // smoothness across the origin: 1 - u = O(r^2), fit u = 1 + c2 r^2
      const double g = r[0] * r[0] / (r[1] * r[1]);
      di[0] = 1.0;
      up[0] = -g;
      rhs[0] = 1.0 - g;
    } else {
      di[0] = 1.0;
      up[0] = 0.0;
      rhs[0] = config.inner_value(t_new);
    }
    // outer boundary row
    up[m - 1] = 0.0;
    if (config.outer == StepperConfig::Outer::dirichlet) {
      lo[m - 1] = 0.0;
      di[m - 1] = 1.0;
      rhs[m - 1] = config.outer_value(t_new);
    } else {
      lo[m - 1] = -1.0;
      di[m - 1] = 1.0;
      rhs[m - 1] = 0.0;
    }

    detail::thomas(lo, di, up, rhs);
    u_prev = u;
    u = rhs;

    double umin = u[0], umax = u[0], grmax = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      umin = std::min(umin, u[i]);
      umax = std::max(umax, u[i]);
      if (i > 0 && i + 1 < m)
        grmax = std::max(grmax, std::abs((u[i + 1] - u[i - 1]) / (2.0 * h)) * r[i]);
    }
    state.min_u_seen = std::min(state.min_u_seen, umin);
    state.max_u_seen = std::max(state.max_u_seen, umax);
    if (state.max_principle_tracked && (umax > 1.0 + 1e-8 || umin < -1e-8))
      state.max_principle_ok = false;
    if (umin < config.blowup_floor || grmax > config.gradient_cap) {
      state.halted = true;
      state.halt_time = t_new;
      snapshot(t_new, u);
      return state;
    }
    if ((k + 1) % stride == 0 && k + 1 != steps) snapshot(t_new, u);
    if (k + 1 == steps) snapshot(t_new, u);
  }
  return state;
}

struct ComparisonReport {
  bool precondition_ok = true;
  bool ordering_ok = true;
  double worst_margin = std::numeric_limits<double>::infinity();  // min of psi - u
  double violation_t = 0, violation_r = 0;
  double barrier_residual_at_violation = 0;  // D[psi] there: separates causes
};

/// Evolve initial data lying below the barrier in self-similar variables and
/// check that u(r, t) <= psi_a(r / sqrt(-2t)) persists. Boundary data are the
/// self-similar continuations of the initial boundary values, which keeps the
/// boundary ordering by construction.
inline ComparisonReport comparison_test(const RadialProfile& init,
                                        const BarrierPsi& psi, double t0, double t1,
                                        double time_factor = 0.25) {
  init.validate();
  if (!(t0 < t1 && t1 < 0.0))
    throw std::invalid_argument("comparison_test: need t0 < t1 < 0");
  ComparisonReport rep;

  auto s_of = [&](double r, double t) { return r / std::sqrt(-2.0 * t); };
  // barrier-scale data can sit many orders of magnitude below 1, so the
  // tolerances are relative to the data scale, not absolute
  double u_scale = 0.0;
  for (double v : init.u) u_scale = std::max(u_scale, std::abs(v));
  for (std::size_t i = 0; i < init.grid.size(); ++i) {
    const double margin = psi(s_of(init.grid[i], t0)) - init.u[i];
    if (margin < -1e-12 * u_scale) {
      rep.precondition_ok = false;
      rep.violation_r = init.grid[i];
      rep.violation_t = t0;
      return rep;
    }
  }

  const double r_in = init.grid.front(), r_out = init.grid.back();
  if (s_of(r_in, t0) < psi.s_lo() || s_of(r_out, t1) > psi.s_hi())
    throw std::invalid_argument("comparison_test: grid leaves the barrier domain");

  StepperConfig cfg;
  cfg.time_factor = time_factor;
  cfg.inner = StepperConfig::Inner::dirichlet;
  cfg.outer = StepperConfig::Outer::dirichlet;
  const double in0 = init.u.front(), out0 = init.u.back();
  cfg.inner_value = [&psi, s_of, r_in, t0, in0](double t) {
    return in0 * psi(s_of(r_in, t)) / psi(s_of(r_in, t0));
  };
  cfg.outer_value = [&psi, s_of, r_out, t0, out0](double t) {
    return out0 * psi(s_of(r_out, t)) / psi(s_of(r_out, t0));
  };
  cfg.num_snapshots = 21;
  // barrier-scale data sit at u ~ (n-2)/a^2; the neck-degeneration halt must
  // not trigger on smallness alone, only on an actual sign change
  cfg.blowup_floor = 0.0;
  // at this amplitude diffusion cannot damp the centered scheme's sawtooth
  // mode, so use the monotone upwind discretization of the advection term
  cfg.upwind_advection = true;

  FlowState state = evolve(init, t0, t1, cfg);
  for (std::size_t k = 0; k < state.times.size(); ++k) {
    const double t = state.times[k];
    const auto& p = state.profiles[k];
    for (std::size_t i = 0; i < p.grid.size(); ++i) {
      const double margin = psi(s_of(p.grid[i], t)) - p.u[i];
      if (margin < rep.worst_margin) {
        rep.worst_margin = margin;
        rep.violation_t = t;
        rep.violation_r = p.grid[i];
      }
    }
  }
  if (rep.worst_margin < -1e-8 * u_scale) {
    rep.ordering_ok = false;
    rep.barrier_residual_at_violation =
        supersolution_residual(psi, s_of(rep.violation_r, rep.violation_t));
  }
  return rep;
}

/// Radius of the sphere at signed metric distance z from the marked radius:
/// F(int_rbar^rho u^{-1/2} dr, t) = rho.
struct ArclengthProfile {
  double t = 0, r_bar = 0;
  std::vector<double> z;   // signed distance, contains 0
  std::vector<double> F;   // radii, strictly increasing
  std::vector<double> Fz;  // dF/dz = u^{1/2}(F)

  double F_at(double zq) const {
    if (zq < z.front() || zq > z.back())
      throw std::out_of_range("ArclengthProfile: z outside computed range");
    auto it = std::upper_bound(z.begin(), z.end(), zq);
    std::size_t i = std::min<std::size_t>(z.size() - 2, it - z.begin() - 1);
    return hermite3(zq, z[i], z[i + 1], F[i], Fz[i], F[i + 1], Fz[i + 1]);
  }
  double Fz_at(double zq) const {
    auto it = std::upper_bound(z.begin(), z.end(), zq);
    std::size_t i = std::min<std::size_t>(z.size() - 2, it - z.begin() - 1);
    const double w = (zq - z[i]) / (z[i + 1] - z[i]);
    return (1.0 - w) * Fz[i] + w * Fz[i + 1];
  }
};

/// Radial drift of a point fixed in the manifold: d r_bar / dt = -v(r_bar, t)
/// with v = ((n-2)(1 - u) - r u_r / 2) / r. The arclength profiles fed to
/// f_equation_residual must anchor z = 0 at radii following this ODE across
/// the time levels, otherwise the F-equation picks up a spurious advection
/// term. (For the exact sphere the solution is r_bar(t) proportional to the
/// sphere radius rho(t).)
inline double marked_radius_velocity(const RadialProfile& profile, double r_bar) {
  profile.validate();
  const auto& r = profile.grid;
  if (r_bar < r.front() || r_bar > r.back())
    throw std::invalid_argument("marked_radius_velocity: r_bar outside the grid");
  auto it = std::upper_bound(r.begin(), r.end(), r_bar);
  std::size_t i = std::min<std::size_t>(r.size() - 2, it - r.begin() - 1);
  const double w = (r_bar - r[i]) / (r[i + 1] - r[i]);
  const double u = (1.0 - w) * profile.u[i] + w * profile.u[i + 1];
  // centered slope around the bracketing cell
  const std::size_t lo = i > 0 ? i - 1 : i, hi = std::min(i + 2, r.size() - 1);
  const double ur = (profile.u[hi] - profile.u[lo]) / (r[hi] - r[lo]);
  return -((profile.n - 2) * (1.0 - u) - 0.5 * r_bar * ur) / r_bar;
}

inline ArclengthProfile arclength_profile(const RadialProfile& profile, double t,
                                          double r_bar) {
  profile.validate();
  if (r_bar < profile.grid.front() || r_bar > profile.grid.back())
    throw std::invalid_argument("arclength_profile: r_bar outside the grid");
  for (double v : profile.u)
    if (!(v > 0.0))
      throw std::invalid_argument("arclength_profile: u must stay positive");

  ArclengthProfile out;
  out.t = t;
  out.r_bar = r_bar;
  const auto& r = profile.grid;
  const auto& u = profile.u;
  // cumulative trapezoid of u^{-1/2} from the grid start
  std::vector<double> zz(r.size(), 0.0);
  for (std::size_t i = 1; i < r.size(); ++i)
    zz[i] = zz[i - 1] + 0.5 * (1.0 / std::sqrt(u[i - 1]) + 1.0 / std::sqrt(u[i])) *
                            (r[i] - r[i - 1]);
  // offset so that z = 0 at r_bar
  auto it = std::upper_bound(r.begin(), r.end(), r_bar);
  std::size_t j = std::min<std::size_t>(r.size() - 2, it - r.begin() - 1);
  const double w = (r_bar - r[j]) / (r[j + 1] - r[j]);
  const double uj = (1.0 - w) * u[j] + w * u[j + 1];
  const double z_bar = zz[j] + 0.5 * (1.0 / std::sqrt(u[j]) + 1.0 / std::sqrt(uj)) *
                                   (r_bar - r[j]);
  out.z.resize(r.size());
  out.F = r;
  out.Fz.resize(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    out.z[i] = zz[i] - z_bar;
    out.Fz[i] = std::sqrt(u[i]);
  }
  return out;
}

/// Residual of the F-equation
///   0 = F_t - F_zz + (n - 2 + F_z^2) / F
///       + (n-1) F_z ( -F_z(0,t)/F(0,t) + int_{F(0,t)}^{F(z,t)} u^{1/2}/r^2 dr )
/// on a common z grid, with F_t by the centered difference of three
/// consecutive time levels. The nonlocal integral becomes
/// int_0^z (F_z / F)^2 dzeta along the profile.
inline std::vector<double> f_equation_residual(
    int n, const std::array<ArclengthProfile, 3>& levels,
    const std::vector<double>& z_grid) {
  const double dt1 = levels[1].t - levels[0].t;
  const double dt2 = levels[2].t - levels[1].t;
  if (!(dt1 > 0.0 && dt2 > 0.0))
    throw std::invalid_argument("f_equation_residual: time stamps must increase");
  if (z_grid.size() < 5)
    throw std::invalid_argument("f_equation_residual: z grid too coarse");

  const ArclengthProfile& mid = levels[1];
  std::vector<double> F(z_grid.size()), Ft(z_grid.size());
  for (std::size_t i = 0; i < z_grid.size(); ++i) {
    F[i] = mid.F_at(z_grid[i]);
    // nonuniform-in-time centered difference
    const double f0 = levels[0].F_at(z_grid[i]);
    const double f2 = levels[2].F_at(z_grid[i]);
    Ft[i] = (dt1 * dt1 * f2 + (dt2 * dt2 - dt1 * dt1) * F[i] - dt2 * dt2 * f0) /
            (dt1 * dt2 * (dt1 + dt2));
  }
  auto Fz = derivative(z_grid, F);
  auto Fzz = second_derivative(z_grid, F);

  // cumulative trapezoid of (F_z / F)^2 from z = 0
  std::vector<double> nonlocal(z_grid.size(), 0.0);
  std::size_t i0 = 0;
  for (std::size_t i = 1; i < z_grid.size(); ++i)
    if (std::abs(z_grid[i]) < std::abs(z_grid[i0])) i0 = i;
  auto integrand = [&](std::size_t i) { return Fz[i] * Fz[i] / (F[i] * F[i]); };
  for (std::size_t i = i0 + 1; i < z_grid.size(); ++i)
    nonlocal[i] = nonlocal[i - 1] +
                  0.5 * (integrand(i - 1) + integrand(i)) * (z_grid[i] - z_grid[i - 1]);
  for (std::size_t i = i0; i-- > 0;)
    nonlocal[i] = nonlocal[i + 1] -
                  0.5 * (integrand(i) + integrand(i + 1)) * (z_grid[i + 1] - z_grid[i]);
  const double F0 = mid.F_at(0.0), Fz0 = Fz[i0];

  std::vector<double> res(z_grid.size());
  for (std::size_t i = 0; i < z_grid.size(); ++i)
    res[i] = Ft[i] - Fzz[i] + (n - 2 + Fz[i] * Fz[i]) / F[i] +
             (n - 1) * Fz[i] * (-Fz0 / F0 + nonlocal[i]);
  return res;
}

/// Type-II rescaling G(xi, tau) = e^{tau/2} F(e^{-tau/2} xi, -e^{-tau})
///                                - sqrt(2(n-2)).
struct RescaledProfile {
  double tau = 0;
  std::vector<double> xi, G, G_xi, G_xixi;
  bool monotone = false;  // G_xi > 0 on the grid
  bool concave = false;   // G_xixi <= 0 on the grid (up to differencing slack)
};

inline RescaledProfile rescaled_profile(int n, const ArclengthProfile& F, double tau) {
  const double t_expected = -std::exp(-tau);
  if (std::abs(F.t - t_expected) > 1e-9 * std::abs(t_expected))
    throw std::invalid_argument("rescaled_profile: profile time is not -e^{-tau}");
  RescaledProfile out;
  out.tau = tau;
  const double lam = std::exp(0.5 * tau);
  const double shift = std::sqrt(2.0 * (n - 2));
  out.xi.resize(F.z.size());
  out.G.resize(F.z.size());
  for (std::size_t i = 0; i < F.z.size(); ++i) {
    out.xi[i] = lam * F.z[i];
    out.G[i] = lam * F.F[i] - shift;
  }
  out.G_xi = derivative(out.xi, out.G);
  out.G_xixi = second_derivative(out.xi, out.G);
  out.monotone = true;
  out.concave = true;
  for (std::size_t i = 0; i < out.xi.size(); ++i) {
    if (!(out.G_xi[i] > 0.0)) out.monotone = false;
    if (i > 0 && i + 1 < out.xi.size() && out.G_xixi[i] > 1e-8) out.concave = false;
  }
  return out;
}

}  // namespace rsf
