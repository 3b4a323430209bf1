#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsf {

/// Closed-form backward Ricci flows used as testbeds for the L-geometry:
/// flat space, the shrinking round sphere, and the shrinking round cylinder.
/// Radius-squared grows linearly in backward time tau (Einstein
/// normalization): sphere rho^2 = rho0^2 + 2(n-1) tau, cylinder sphere factor
/// rho^2 = rho0^2 + 2(n-2) tau.
///
/// All three models are homogeneous, and for paths from a fixed base point
/// the L-integrand symmetrizes onto one effective coordinate per factor:
///  - flat: signed distance along the ray through the endpoint (metric 1);
///  - sphere: polar angle from the base point (metric rho^2(tau));
///  - cylinder: polar angle on the sphere factor (metric rho^2(tau)) plus the
///    axial displacement (metric 1).
struct ModelFlow {
  enum Kind { flat, shrinking_sphere, shrinking_cylinder };
  Kind kind = flat;
  int n = 0;
  double rho0_sq = 1.0;  // radius^2 at tau = 0 (ignored for flat)

  void validate() const {
    if (n < 2 || (kind == shrinking_cylinder && n < 3))
      throw std::invalid_argument("ModelFlow: dimension too small");
    if (kind != flat && rho0_sq < 0.0)
      throw std::invalid_argument("ModelFlow: rho0^2 must be nonnegative");
  }

  double rho_sq(double tau) const {
    switch (kind) {
      case shrinking_sphere: return rho0_sq + 2.0 * (n - 1) * tau;
      case shrinking_cylinder: return rho0_sq + 2.0 * (n - 2) * tau;
      default: return 1.0;
    }
  }

  double scalar_curvature(double tau) const {
    switch (kind) {
      case shrinking_sphere: return n * (n - 1) / rho_sq(tau);
      case shrinking_cylinder: return (n - 1) * (n - 2) / rho_sq(tau);
      default: return 0.0;
    }
  }

  std::size_t num_coords() const { return kind == shrinking_cylinder ? 2 : 1; }

  /// Metric coefficient of effective coordinate c at backward time tau.
  double coord_metric(std::size_t c, double tau) const {
    if (kind == flat) return 1.0;
    if (kind == shrinking_sphere) return rho_sq(tau);
    return c == 0 ? rho_sq(tau) : 1.0;  // cylinder: angle, then axial
  }
};

/// Piecewise-linear space-time path in the sigma = sqrt(tau) parametrization,
/// from the base point (coordinates x0) at tau = 0 to x at tau.
struct SpaceTimePath {
  std::vector<double> x0, x;
  double tau = 0;
  std::vector<double> sigma;                // strictly increasing, 0 .. sqrt(tau)
  std::vector<std::vector<double>> coords;  // coords[node][coordinate]

  void validate(const ModelFlow& flow) const {
    if (x0.size() != flow.num_coords() || x.size() != flow.num_coords())
      throw std::invalid_argument("SpaceTimePath: coordinate count mismatch");
    if (!(tau > 0.0)) throw std::invalid_argument("SpaceTimePath: tau must be positive");
    if (sigma.size() < 2 || coords.size() != sigma.size())
      throw std::invalid_argument("SpaceTimePath: need matching sigma/coords nodes");
    if (std::abs(sigma.front()) > 1e-14 ||
        std::abs(sigma.back() - std::sqrt(tau)) > 1e-12 * std::sqrt(tau))
      throw std::invalid_argument("SpaceTimePath: sigma must run 0 .. sqrt(tau)");
    for (std::size_t i = 1; i < sigma.size(); ++i)
      if (sigma[i] <= sigma[i - 1])
        throw std::invalid_argument("SpaceTimePath: sigma must be strictly increasing");
    for (std::size_t c = 0; c < x0.size(); ++c)
      if (std::abs(coords.front()[c] - x0[c]) > 1e-12 ||
          std::abs(coords.back()[c] - x[c]) > 1e-12)
        throw std::invalid_argument("SpaceTimePath: endpoints not fixed to x0/x");
  }
};

inline SpaceTimePath make_linear_path(const ModelFlow& flow,
                                      const std::vector<double>& x0,
                                      const std::vector<double>& x, double tau,
                                      std::size_t num_nodes = 17) {
  SpaceTimePath p;
  p.x0 = x0;
  p.x = x;
  p.tau = tau;
  const double s_end = std::sqrt(tau);
  for (std::size_t i = 0; i < num_nodes; ++i) {
    const double t = double(i) / (num_nodes - 1);
    p.sigma.push_back(t * s_end);
    std::vector<double> q(x0.size());
    for (std::size_t c = 0; c < x0.size(); ++c) q[c] = x0[c] + t * (x[c] - x0[c]);
    p.coords.push_back(std::move(q));
  }
  p.sigma.back() = s_end;
  p.validate(flow);
  return p;
}

namespace detail {

// 5-point Gauss-Legendre nodes/weights on [-1, 1]
inline constexpr std::array<double, 5> kGaussX{
    -0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
    0.9061798459386640};
inline constexpr std::array<double, 5> kGaussW{
    0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
    0.4786286704993665, 0.2369268850561891};

/// Integral of 2 sigma^2 R(sigma^2) over [a, b].
inline double curvature_term(const ModelFlow& flow, double a, double b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < kGaussX.size(); ++k) {
    const double s = 0.5 * (a + b) + 0.5 * (b - a) * kGaussX[k];
    acc += kGaussW[k] * 2.0 * s * s * flow.scalar_curvature(s * s);
  }
  return acc * 0.5 * (b - a);
}

/// Integral of m_c(sigma^2) over [a, b].
inline double metric_mass(const ModelFlow& flow, std::size_t c, double a, double b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < kGaussX.size(); ++k) {
    const double s = 0.5 * (a + b) + 0.5 * (b - a) * kGaussX[k];
    acc += kGaussW[k] * flow.coord_metric(c, s * s);
  }
  return acc * 0.5 * (b - a);
}

inline double unit_sphere_area(int k) {
  // surface area of the unit S^k
  return std::exp(std::log(2.0) + 0.5 * (k + 1) * std::log(M_PI) -
                  std::lgamma(0.5 * (k + 1)));
}

}  // namespace detail

/// L(gamma) = int_0^tau sqrt(s) (R + |gamma'|^2) ds evaluated in the
/// sigma = sqrt(s) variable, where it reads
///   int_0^{sqrt(tau)} [ 2 sigma^2 R(sigma^2)
///                       + (1/2) sum_c m_c(sigma^2) (dq_c/dsigma)^2 ] dsigma,
/// with no derivative singularity at sigma = 0.
inline double l_functional(const ModelFlow& flow, const SpaceTimePath& path) {
  flow.validate();
  path.validate(flow);
  double L = 0.0;
  for (std::size_t i = 0; i + 1 < path.sigma.size(); ++i) {
    const double a = path.sigma[i], b = path.sigma[i + 1];
    L += detail::curvature_term(flow, a, b);
    for (std::size_t c = 0; c < flow.num_coords(); ++c) {
      const double slope = (path.coords[i + 1][c] - path.coords[i][c]) / (b - a);
      L += 0.5 * detail::metric_mass(flow, c, a, b) * slope * slope;
    }
  }
  return L;
}

struct OptimizerConfig {
  std::size_t initial_nodes = 9;
  std::size_t max_nodes = 129;
  double grad_tol = 1e-8;
};

struct ReducedDistanceResult {
  double l = 0;
  double grad_norm = 0;  // first-variation norm at the reported path
  bool converged = false;
  SpaceTimePath path;
};

/// Minimize the L-functional over piecewise-linear paths with fixed
/// endpoints, then normalize by 1/(2 sqrt(tau)). On the homogeneous models
/// the curvature term is path-independent, so the objective is a separable
/// quadratic in the node coordinates; each refinement level is minimized
/// exactly by one tridiagonal solve per coordinate, and refinement can only
/// lower the value (nested path spaces).
inline ReducedDistanceResult reduced_distance(const ModelFlow& flow,
                                              const std::vector<double>& x0,
                                              const std::vector<double>& x,
                                              double tau,
                                              const OptimizerConfig& cfg = {}) {
  flow.validate();
  if (!(tau > 0.0)) throw std::invalid_argument("reduced_distance: tau must be positive");
  if (cfg.initial_nodes < 3)
    throw std::invalid_argument("reduced_distance: need at least 3 nodes");

  ReducedDistanceResult res;
  std::size_t nodes = cfg.initial_nodes;
  while (true) {
    SpaceTimePath p = make_linear_path(flow, x0, x, tau, nodes);
    const std::size_t m = p.sigma.size();
    for (std::size_t c = 0; c < flow.num_coords(); ++c) {
      // segment stiffness w_i = metric mass / Delta sigma^2; minimize
      // sum w_i (q_{i+1} - q_i)^2 over interior nodes (Thomas algorithm)
      std::vector<double> w(m - 1);
      for (std::size_t i = 0; i + 1 < m; ++i) {
        const double h = p.sigma[i + 1] - p.sigma[i];
        w[i] = detail::metric_mass(flow, c, p.sigma[i], p.sigma[i + 1]) / (h * h);
      }
      const std::size_t k = m - 2;  // interior unknowns
      std::vector<double> diag(k), upper(k), rhs(k, 0.0);
      for (std::size_t i = 0; i < k; ++i) {
        diag[i] = w[i] + w[i + 1];
        upper[i] = -w[i + 1];
      }
      rhs[0] += w[0] * x0[c];
      rhs[k - 1] += w[k] * x[c];
      for (std::size_t i = 1; i < k; ++i) {
        const double f = -w[i] / diag[i - 1];
        diag[i] -= f * upper[i - 1];
        rhs[i] -= f * rhs[i - 1];
      }
      std::vector<double> q(k);
      q[k - 1] = rhs[k - 1] / diag[k - 1];
      for (std::size_t i = k - 1; i-- > 0;) q[i] = (rhs[i] - upper[i] * q[i + 1]) / diag[i];
      for (std::size_t i = 0; i < k; ++i) p.coords[i + 1][c] = q[i];

      // first-variation norm of this coordinate at the solution
      for (std::size_t i = 0; i < k; ++i) {
        const double g = 2.0 * w[i] * (p.coords[i + 1][c] - p.coords[i][c]) -
                         2.0 * w[i + 1] * (p.coords[i + 2][c] - p.coords[i + 1][c]);
        res.grad_norm += g * g;
      }
    }
    res.path = std::move(p);
    if (nodes >= cfg.max_nodes) break;
    nodes = 2 * (nodes - 1) + 1;
    res.grad_norm = 0.0;
  }
  res.grad_norm = std::sqrt(res.grad_norm);
  res.converged = res.grad_norm <= cfg.grad_tol;
  res.l = l_functional(flow, res.path) / (2.0 * std::sqrt(tau));
  return res;
}

struct QuadratureConfig {
  std::size_t angular_points = 193;  // odd (composite Simpson)
  std::size_t axial_points = 129;    // odd
  double tail_tol = 1e-10;
  OptimizerConfig optimizer{9, 65, 1e-8};
};

struct ReducedVolumeResult {
  double value = 0;
  double tail_estimate = 0;  // integrand magnitude at the truncation boundary
};

namespace detail {

inline double simpson(const std::vector<double>& f, double h) {
  if (f.size() % 2 == 0) throw std::invalid_argument("simpson: odd point count required");
  double acc = f.front() + f.back();
  for (std::size_t i = 1; i + 1 < f.size(); ++i) acc += (i % 2 ? 4.0 : 2.0) * f[i];
  return acc * h / 3.0;
}

}  // namespace detail

/// V(tau) = (4 pi tau)^{-n/2} int_M e^{-l(., tau)} dmu_{g(tau)}, with the
/// spatial integral reduced to the model's effective coordinates and
/// truncated where the Gaussian tail falls below tail_tol.
inline ReducedVolumeResult reduced_volume(const ModelFlow& flow,
                                          const std::vector<double>& x0, double tau,
                                          const QuadratureConfig& cfg = {}) {
  flow.validate();
  if (!(tau > 0.0)) throw std::invalid_argument("reduced_volume: tau must be positive");
  const int n = flow.n;
  const double pref = std::exp(-0.5 * n * std::log(4.0 * M_PI * tau));
  ReducedVolumeResult out;

  auto lval = [&](const std::vector<double>& x) {
    return reduced_distance(flow, x0, x, tau, cfg.optimizer).l;
  };

  if (flow.kind == ModelFlow::flat) {
    const double D = std::sqrt(tau) * (std::sqrt(2.0 * n) +
                                       std::sqrt(-4.0 * std::log(cfg.tail_tol)));
    std::vector<double> f(cfg.angular_points);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double d = D * double(i) / (f.size() - 1);
      const double l = d == 0.0 ? 0.0 : lval({x0[0] + d});
      f[i] = std::pow(d, n - 1) * std::exp(-l);
    }
    out.tail_estimate = f.back() / (*std::max_element(f.begin(), f.end()) + 1e-300);
    out.value = pref * detail::unit_sphere_area(n - 1) *
                detail::simpson(f, D / (f.size() - 1));
    return out;
  }

  const double rho = std::sqrt(flow.rho_sq(tau));
  if (flow.kind == ModelFlow::shrinking_sphere) {
    std::vector<double> f(cfg.angular_points);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double alpha = M_PI * double(i) / (f.size() - 1);
      const double l = alpha == 0.0 ? 0.0 : lval({x0[0] + alpha});
      f[i] = std::pow(std::sin(alpha), n - 1) * std::exp(-l);
    }
    out.value = pref * std::pow(rho, n) * detail::unit_sphere_area(n - 1) *
                detail::simpson(f, M_PI / (f.size() - 1));
    out.tail_estimate = 0.0;  // compact slice, no truncation
    return out;
  }

  // cylinder: product quadrature over the sphere angle and the axial line
  const double W = std::sqrt(-4.0 * tau * std::log(cfg.tail_tol)) + std::sqrt(tau);
  std::vector<double> axial(cfg.axial_points);
  std::vector<double> angular(cfg.angular_points);
  double peak = 0.0;
  for (std::size_t j = 0; j < axial.size(); ++j) {
    const double wcoord = -W + 2.0 * W * double(j) / (axial.size() - 1);
    for (std::size_t i = 0; i < angular.size(); ++i) {
      const double alpha = M_PI * double(i) / (angular.size() - 1);
      const double l = (alpha == 0.0 && wcoord == 0.0)
                           ? 0.0
                           : lval({x0[0] + alpha, x0[1] + wcoord});
      angular[i] = std::pow(std::sin(alpha), n - 2) * std::exp(-l);
      peak = std::max(peak, angular[i]);
    }
    axial[j] = detail::simpson(angular, M_PI / (angular.size() - 1));
  }
  out.tail_estimate = std::max(axial.front(), axial.back()) / (peak + 1e-300);
  out.value = pref * std::pow(rho, n - 1) * detail::unit_sphere_area(n - 2) *
              detail::simpson(axial, 2.0 * W / (axial.size() - 1));
  return out;
}

struct LBoundsRow {
  double tau = 0;
  double min_l = 0;
  double c_fit = 0, C_fit = 0;   // empirical quadratic sandwich constants
  double gradient_C = 0;         // empirical C with |grad l|^2 + R <= C l / tau
  bool min_l_ok = false;         // min l <= n/2 + tol
  bool sandwich_ok = false;
};

struct LBoundsReport {
  std::vector<LBoundsRow> rows;
  bool all_ok = true;
};

/// Empirical checks of the reduced-distance estimates on a model flow:
/// (i) inf l <= n/2 at each tau; (ii) two-sided quadratic growth in
/// d_tau(x0, x)^2 / tau with fitted constants; (iii) the gradient bound
/// |grad l|^2 + R <= C l / tau with grad l by centered differences.
/// Fitted constants are model-specific conventions of this toolkit.
inline LBoundsReport check_l_bounds(const ModelFlow& flow,
                                    const std::vector<double>& tau_grid,
                                    std::size_t samples = 25, double tol = 1e-6) {
  flow.validate();
  LBoundsReport rep;
  const std::vector<double> x0(flow.num_coords(), 0.0);
  const OptimizerConfig ocfg{9, 65, 1e-8};

  for (double tau : tau_grid) {
    LBoundsRow row;
    row.tau = tau;
    const double rho = std::sqrt(flow.rho_sq(tau));

    std::vector<std::vector<double>> pts;
    if (flow.kind == ModelFlow::shrinking_cylinder) {
      const std::size_t k = std::max<std::size_t>(3, (std::size_t)std::sqrt(double(samples)));
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
          pts.push_back({M_PI * double(i) / (k - 1),
                         4.0 * std::sqrt(tau) * (2.0 * double(j) / (k - 1) - 1.0)});
    } else {
      const double span =
          flow.kind == ModelFlow::shrinking_sphere ? M_PI : 6.0 * std::sqrt(tau);
      for (std::size_t i = 0; i < samples; ++i)
        pts.push_back({span * double(i) / (samples - 1)});
    }

    row.min_l = std::numeric_limits<double>::infinity();
    row.c_fit = std::numeric_limits<double>::infinity();
    row.C_fit = 0.0;
    row.gradient_C = 0.0;
    const double R = flow.scalar_curvature(tau);
    for (const auto& x : pts) {
      const double l = reduced_distance(flow, x0, x, tau, ocfg).l;
      row.min_l = std::min(row.min_l, l);

      double d_sq = 0.0;  // d_{g(tau)}(x0, x)^2 in the model chart
      for (std::size_t c = 0; c < x.size(); ++c)
        d_sq += flow.coord_metric(c, tau) * x[c] * x[c];
      const double ratio = (l + 1.0) / (d_sq / tau + 1.0);
      row.c_fit = std::min(row.c_fit, ratio);
      row.C_fit = std::max(row.C_fit, ratio);

      // |grad l|^2 by centered differences in each effective coordinate
      double grad_sq = 0.0;
      for (std::size_t c = 0; c < x.size(); ++c) {
        const double h = 1e-4 * (1.0 + std::abs(x[c]));
        std::vector<double> xp = x, xm = x;
        xp[c] += h;
        xm[c] -= h;
        if (flow.kind != ModelFlow::flat && c == 0) {
          // keep the angle inside (0, pi)
          if (xm[c] <= 0.0 || xp[c] >= M_PI) continue;
        }
        const double dl = (reduced_distance(flow, x0, xp, tau, ocfg).l -
                           reduced_distance(flow, x0, xm, tau, ocfg).l) /
                          (2.0 * h);
        grad_sq += dl * dl / flow.coord_metric(c, tau);
      }
      if (l > 1e-8)
        row.gradient_C = std::max(row.gradient_C, (grad_sq + R) * tau / l);
    }
    row.min_l_ok = row.min_l <= 0.5 * flow.n + tol;
    row.sandwich_ok = row.c_fit > 0.0 && std::isfinite(row.C_fit);
    rep.all_ok = rep.all_ok && row.min_l_ok && row.sandwich_ok;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace rsf
