#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "rsflow/finite_diff.hpp"
#include "rsflow/radial_profile.hpp"

namespace rsf {

/// First-integral coordinates x = psi^2, y = (psi')^2, z = psi psi'' along
/// the warped-product arclength chart; on the radial chart x = r^2, y = phi.
struct FirstIntegralState {
  std::vector<double> x, y, z;
};

/// Conserved quantity with C = 1:
///   x y = -(n-2)y^2 - 2yz + z^2 - (n-3)(n-2)y - 2(n-2)z + (n-2)^2.
/// Returns the defect of that relation per point.
inline std::vector<double> first_integral_residual(int n,
                                                   const FirstIntegralState& s) {
  const double A = n - 2;
  std::vector<double> res(s.x.size());
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    const double y = s.y[i], z = s.z[i];
    res[i] = s.x[i] * y -
             (-A * y * y - 2 * y * z + z * z - (n - 3) * A * y - 2 * A * z + A * A);
  }
  return res;
}

/// Residual of the first integral normalized by the magnitude of its terms;
/// near the tip the raw residual is dominated by rounding of terms of size
/// y^2 ~ 1e12 and only the scaled quantity is meaningful.
inline std::vector<double> first_integral_residual_scaled(
    int n, const FirstIntegralState& s) {
  const double A = n - 2;
  auto res = first_integral_residual(n, s);
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    const double y = std::abs(s.y[i]), z = std::abs(s.z[i]);
    const double scale = std::max(1.0, s.x[i] * y + A * y * y + 2 * y * z + z * z +
                                           (n - 3) * A * y + 2 * A * z + A * A);
    res[i] /= scale;
  }
  return res;
}

namespace detail {

/// Root of the first-integral quadratic in z that vanishes on the branch
/// approaching (x, y, z) = (+inf, 0, 0); written to avoid cancellation.
inline double soliton_z(int n, double x, double y) {
  const double A = n - 2;
  const double b2 = y + A;  // half the linear coefficient
  const double c0 = A * A - A * y * y - (n - 3) * A * y - x * y;
  const double disc = b2 * b2 - c0;
  if (disc < 0.0)
    throw std::runtime_error("singular soliton branch: discriminant < 0 at x=" +
                             std::to_string(x));
  return c0 / (b2 + std::sqrt(disc));
}

/// Total derivative dz/dx along the trajectory, from implicit differentiation
/// of the first integral with dy/dx = z/x substituted.
inline double soliton_zprime(int n, double x, double y, double z) {
  const double A = n - 2;
  const double Gx = y;
  const double Gy = x + 2 * A * y + 2 * z + (n - 3) * A;
  const double Gz = 2 * y - 2 * z + 2 * A;
  return -(Gx + Gy * z / x) / Gz;
}

/// Coefficients of the large-r expansion phi ~ sum_k a_k r^{-2k}, obtained by
/// substituting the series into the first integral (with C = 1) and matching
/// orders. Every member of the C = 1 family shares these coefficients; they
/// differ only by corrections beyond all orders (~ exp(-r^2 / (2(n-2)))).
inline std::vector<double> soliton_series_coefficients(int n, std::size_t terms) {
  const double A = n - 2;
  std::vector<double> a(terms + 1, 0.0);  // a[1..terms]
  if (terms >= 1) a[1] = A * A;
  for (std::size_t m = 1; m < terms; ++m) {
    double s = ((n - 3) * A - 2.0 * A * m) * a[m];
    for (std::size_t i = 1; i < m; ++i) {
      const std::size_t j = m - i;
      s += (A - 2.0 * j - double(i) * j) * a[i] * a[j];
    }
    a[m + 1] = -s;
  }
  return a;
}

}  // namespace detail

/// The rotationally symmetric steady soliton that is singular at the tip and
/// asymptotic to the Bryant soliton, normalized by C = 1 in the first
/// integral. Members of the C = 1 trajectory family share the full asymptotic
/// series; the artifact pins one member by a fixed tip-side seed.
struct SolitonProfile {
  int n = 0;
  std::vector<double> grid;  // radii covered by the sampled table
  std::vector<double> phi, phi_r, phi_rr;
  double normalization = 1.0;  // first-integral constant C
  double r_star = std::numeric_limits<double>::quiet_NaN();
  double r_reachable_lo = 0, r_reachable_hi = 0;

  // dense trajectory in lx = ln x, for interpolation between adaptive nodes
  std::vector<double> node_lx, node_y, node_dy, node_d2y;

  // large-r series coefficients; usable beyond the table for
  // r >= series_valid_from, where the optimal-truncation error of the
  // (divergent) asymptotic series is below double rounding
  std::vector<double> series_a;
  double series_valid_from = std::numeric_limits<double>::infinity();

  bool series_usable(double r) const {
    return !series_a.empty() && r >= series_valid_from;
  }

  /// phi - (n-2)^2 r^{-2}, the subleading asymptotic tail, evaluated without
  /// cancellation directly from the series. Requires r >= series_valid_from.
  double phi_tail(double r) const {
    if (!series_usable(r))
      throw std::out_of_range("SolitonProfile: radius below series validity");
    const double t = 1.0 / (r * r);
    double acc = 0.0;
    for (std::size_t k = series_a.size() - 1; k >= 2; --k)
      acc = (acc + series_a[k]) * t;
    return acc * t;
  }

  /// Tail and its radial derivatives, again without the (n-2)^2 r^{-2}
  /// leading term; subtracting it from eval_series output would cancel
  /// catastrophically, so the k = 1 coefficient is simply skipped.
  void phi_tail_derivs(double r, double& T, double& Tr, double& Trr) const {
    if (!series_usable(r))
      throw std::out_of_range("SolitonProfile: radius below series validity");
    const double x = r * r, t = 1.0 / x;
    double y = 0.0, z = 0.0, zx = 0.0;  // tail parts of y, x y', dz/dx
    double tk = t * t;
    for (std::size_t k = 2; k < series_a.size(); ++k, tk *= t) {
      y += series_a[k] * tk;
      z -= k * series_a[k] * tk;
      zx += double(k) * k * series_a[k] * tk;
    }
    zx *= t;
    T = y;
    Tr = 2.0 * z / r;
    Trr = 4.0 * zx - 2.0 * z / x;
  }

  void eval_series(double r, double& f, double& fr, double& frr) const {
    if (!series_usable(r))
      throw std::out_of_range("SolitonProfile: radius below series validity");
    const double x = r * r, t = 1.0 / x;
    double y = 0.0, z = 0.0, zx = 0.0;  // y, x y', dz/dx
    double tk = t;
    for (std::size_t k = 1; k < series_a.size(); ++k, tk *= t) {
      y += series_a[k] * tk;
      z -= k * series_a[k] * tk;
      zx += double(k) * k * series_a[k] * tk;
    }
    zx *= t;
    f = y;
    fr = 2.0 * z / r;
    frr = 4.0 * zx - 2.0 * z / x;
  }

  double phi_at(double r) const {
    const double lx = 2.0 * std::log(r);
    if (lx < node_lx.front() || lx > node_lx.back())
      throw std::out_of_range("SolitonProfile: radius outside computed range");
    auto it = std::upper_bound(node_lx.begin(), node_lx.end(), lx);
    std::size_t i = std::min<std::size_t>(node_lx.size() - 2,
                                          it - node_lx.begin() - 1);
    return hermite5(lx, node_lx[i], node_lx[i + 1], node_y[i], node_dy[i],
                    node_d2y[i], node_y[i + 1], node_dy[i + 1], node_d2y[i + 1]);
  }

  /// phi and its radial derivatives. Inside the table, derivatives come from
  /// the first integral, not from differencing, so the conservation law holds
  /// as an algebraic identity; beyond the table the asymptotic series is used.
  void eval(double r, double& f, double& fr, double& frr) const {
    if (series_usable(r)) {
      // beyond optimal truncation the series is more accurate than the table
      eval_series(r, f, fr, frr);
      return;
    }
    const double x = r * r;
    f = phi_at(r);
    const double z = detail::soliton_z(n, x, f);
    const double zp = detail::soliton_zprime(n, x, f, z);
    fr = 2.0 * z / r;
    frr = 4.0 * zp - 2.0 * z / x;
  }

  FirstIntegralState trajectory() const {
    FirstIntegralState s;
    s.x.reserve(node_lx.size());
    for (std::size_t i = 0; i < node_lx.size(); ++i) {
      const double x = std::exp(node_lx[i]);
      s.x.push_back(x);
      s.y.push_back(node_y[i]);
      s.z.push_back(node_dy[i]);  // dy/dlx = z
    }
    return s;
  }

  RadialProfile as_radial_profile() const {
    RadialProfile p;
    p.n = n;
    p.grid = grid;
    p.u = phi;
    p.u_r = phi_r;
    p.u_rr = phi_rr;
    p.kind = "singular_steady";
    p.nonneg_curvature = false;  // phi exceeds 1 near the tip
    return p;
  }
};

struct SolitonSolveOptions {
  double tol = 1e-10;
  double phi_cap = 1e6;      // stop reporting radii once phi exceeds this
  double x_seed = 1e-10;     // fixed tip-side seed (normalization convention)
  std::size_t num_points = 512;
};

inline SolitonProfile solve_singular_soliton(int n, double r_lo, double r_hi,
                                             const SolitonSolveOptions& opt = {}) {
  if (n < 3) throw std::invalid_argument("solve_singular_soliton: n >= 3 required");
  if (!(r_lo > 0.0 && r_hi > r_lo))
    throw std::invalid_argument("solve_singular_soliton: bad radius range");

  SolitonProfile out;
  out.n = n;

  const double tip_exponent = 1.0 - std::sqrt(double(n - 1));
  // the seed location is part of the normalization convention and must not
  // depend on the requested range
  if (r_lo * r_lo < 4.0 * opt.x_seed)
    throw std::invalid_argument("solve_singular_soliton: r_lo too close to the tip seed");
  const double x0 = opt.x_seed;
  const double x1 = std::max(r_hi * r_hi * 1.1, 4.0);
  double lx = std::log(x0);
  const double lx_end = std::log(x1);
  std::vector<double> state{std::pow(x0, tip_exponent)};

  namespace ode = boost::numeric::odeint;
  auto rhs = [n](const std::vector<double>& y, std::vector<double>& dydlx,
                 double lxv) {
    dydlx[0] = detail::soliton_z(n, std::exp(lxv), y[0]);
  };
  auto record = [&](const std::vector<double>& y, double lxv) {
    const double x = std::exp(lxv);
    const double z = detail::soliton_z(n, x, y[0]);
    out.node_lx.push_back(lxv);
    out.node_y.push_back(y[0]);
    out.node_dy.push_back(z);
    out.node_d2y.push_back(x * detail::soliton_zprime(n, x, y[0], z));
  };

  auto stepper = ode::make_dense_output(1e-14, opt.tol,
                                        ode::runge_kutta_dopri5<std::vector<double>>());
  const std::size_t n_obs = std::max<std::size_t>(64, (lx_end - lx) / 0.05);
  ode::integrate_n_steps(stepper, rhs, state, lx, (lx_end - lx) / n_obs, n_obs,
                         [&](const std::vector<double>& y, double lxv) {
                           record(y, lxv);
                         });
  if (out.node_lx.size() < 4)
    throw std::runtime_error("solve_singular_soliton: integration produced too few nodes");

  out.series_a = detail::soliton_series_coefficients(n, 24);
  out.series_valid_from = std::sqrt(90.0 * (n - 2));

  // reachable range: clip below where phi exceeds the cap
  double r_min_ok = std::exp(0.5 * out.node_lx.front());
  for (std::size_t i = 0; i < out.node_lx.size(); ++i) {
    if (out.node_y[i] <= opt.phi_cap) {
      r_min_ok = std::exp(0.5 * out.node_lx[i]);
      break;
    }
  }
  out.r_reachable_lo = std::max(r_min_ok, std::exp(0.5 * out.node_lx.front()));
  out.r_reachable_hi = std::exp(0.5 * out.node_lx.back());
  const double lo = std::max(r_lo, out.r_reachable_lo);
  const double hi = std::min(r_hi, out.r_reachable_hi);
  if (!(hi > lo))
    throw std::runtime_error("solve_singular_soliton: requested range unreachable");

  out.grid.resize(opt.num_points);
  out.phi.resize(opt.num_points);
  out.phi_r.resize(opt.num_points);
  out.phi_rr.resize(opt.num_points);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (std::size_t i = 0; i < opt.num_points; ++i) {
    const double r = std::exp(llo + (lhi - llo) * double(i) / (opt.num_points - 1));
    out.grid[i] = r;
    out.eval(r, out.phi[i], out.phi_r[i], out.phi_rr[i]);
  }
  return out;
}

/// Radius with phi(r_star) = 2, by bisection on the monotone profile.
inline double locate_r_star(SolitonProfile& profile, double tol = 1e-12) {
  double lo = profile.r_reachable_lo, hi = profile.r_reachable_hi;
  double flo = profile.phi_at(lo) - 2.0, fhi = profile.phi_at(hi) - 2.0;
  if (flo * fhi > 0.0)
    throw std::runtime_error(
        "locate_r_star: phi - 2 has no sign change in range; extend the range");
  while (hi - lo > tol * lo) {
    const double mid = 0.5 * (lo + hi);
    const double fm = profile.phi_at(mid) - 2.0;
    if (flo * fm <= 0.0) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  profile.r_star = 0.5 * (lo + hi);
  return profile.r_star;
}

struct AsymptoticFit {
  double c2 = 0, c4 = 0;
  double c2_expected = 0, c4_expected = 0;
  double c2_rel_error = 0, c4_rel_error = 0;
};

/// Least-squares fit of phi ~ c2 r^{-2} + c4 r^{-4} on a window, in the
/// weighted form r^4 phi = c2 r^2 + c4 (well conditioned for large r).
inline AsymptoticFit fit_asymptotics(const SolitonProfile& profile,
                                     double window_lo, double window_hi,
                                     std::size_t samples = 200) {
  if (!(window_hi > window_lo) || samples < 8)
    throw std::invalid_argument("fit_asymptotics: bad window");
  const double approx = (profile.n - 2) * (profile.n - 2);
  {
    const double t = window_lo * window_lo * profile.phi_at(window_lo);
    if (std::abs(t - approx) > 0.1 * approx)
      throw std::invalid_argument(
          "fit_asymptotics: window not in the asymptotic regime (r^2 phi off by >10%)");
  }
  double s22 = 0, s20 = 0, s00 = 0, b2 = 0, b0 = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double r = window_lo + (window_hi - window_lo) * double(i) / (samples - 1);
    const double w = r * r;
    const double rhs = w * w * profile.phi_at(r);
    s22 += w * w;
    s20 += w;
    s00 += 1.0;
    b2 += w * rhs;
    b0 += rhs;
  }
  const double det = s22 * s00 - s20 * s20;
  if (std::abs(det) < 1e-30 * s22 * s00)
    throw std::runtime_error("fit_asymptotics: window too small for a conditioned fit");
  AsymptoticFit fit;
  fit.c2 = (b2 * s00 - b0 * s20) / det;
  fit.c4 = (s22 * b0 - s20 * b2) / det;
  const int n = profile.n;
  fit.c2_expected = (n - 2.0) * (n - 2.0);
  fit.c4_expected = -(n - 5.0) * std::pow(n - 2.0, 3);
  fit.c2_rel_error = std::abs(fit.c2 - fit.c2_expected) / fit.c2_expected;
  const double scale = std::max(std::abs(fit.c4_expected), 1.0);
  fit.c4_rel_error = std::abs(fit.c4 - fit.c4_expected) / scale;
  return fit;
}

/// Residual of the steady equation (the parabolic operator with zero time
/// derivative) for given (phi, phi', phi'') samples.
inline double steady_equation_residual(int n, double r, double f, double fr,
                                       double frr) {
  return f * frr - 0.5 * fr * fr + (n - 2) * fr / r - f * fr / r +
         2.0 * (n - 2) / (r * r) * f * (1.0 - f);
}

}  // namespace rsf
