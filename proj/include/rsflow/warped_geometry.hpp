#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "rsflow/finite_diff.hpp"
#include "rsflow/radial_profile.hpp"

namespace rsf {

/// Pointwise curvature quantities of g = u^{-1} dr (x) dr + r^2 g_{S^{n-1}}:
///   Ric = ric_rad dr (x) dr + ric_sph g_{S^{n-1}},
///   R   = (n-1) r^{-2} ((n-2)(1-u) - r u_r),
///   v   = r^{-1} ((n-2)(1-u) - r u_r / 2)   (soliton velocity field V = v d/dr).
struct CurvatureFields {
  std::vector<double> ric_rad;
  std::vector<double> ric_sph;
  std::vector<double> R;
  std::vector<double> v;
};

inline CurvatureFields curvature_fields(RadialProfile profile) {
  profile.validate();
  profile.ensure_derivatives();
  const int n = profile.n;
  const auto& r = profile.grid;
  const auto& u = profile.u;
  const auto& ur = *profile.u_r;
  CurvatureFields out;
  const std::size_t m = r.size();
  out.ric_rad.resize(m);
  out.ric_sph.resize(m);
  out.R.resize(m);
  out.v.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    out.ric_rad[i] = -0.5 * (n - 1) / r[i] * ur[i] / u[i];
    out.ric_sph[i] = (n - 2) * (1.0 - u[i]) - 0.5 * r[i] * ur[i];
    out.R[i] = (n - 1) / (r[i] * r[i]) * ((n - 2) * (1.0 - u[i]) - r[i] * ur[i]);
    out.v[i] = ((n - 2) * (1.0 - u[i]) - 0.5 * r[i] * ur[i]) / r[i];
  }
  return out;
}

struct HamiltonQuantity {
  std::vector<double> H;  // R + u^{-1} v^2, from the closed-form identity
  /// When u_t is supplied: residual of
  /// (R + u^{-1}v^2)_r = -((n-1)/r)(1 + (r/(n-1)) u^{-1} v) u^{-1} u_t.
  std::optional<std::vector<double>> radial_identity_residual;
};

inline HamiltonQuantity hamilton_quantity(
    RadialProfile profile, std::span<const double> u_t = {}) {
  profile.validate();
  profile.ensure_derivatives();
  const int n = profile.n;
  const auto& r = profile.grid;
  const auto& u = profile.u;
  const auto& ur = *profile.u_r;
  const std::size_t m = r.size();
  HamiltonQuantity out;
  out.H.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double w = n - 2 + u[i] - 0.5 * r[i] * ur[i];
    out.H[i] = w * w / (u[i] * r[i] * r[i]) -
               (n - 1) / (r[i] * r[i]) * (n - 2 + u[i]);
  }
  if (!u_t.empty()) {
    if (u_t.size() != m)
      throw std::invalid_argument("hamilton_quantity: u_t size mismatch");
    auto H_r = derivative(r, out.H);
    std::vector<double> res(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double v = ((n - 2) * (1.0 - u[i]) - 0.5 * r[i] * ur[i]) / r[i];
      const double rhs = -((n - 1) / r[i]) *
                         (1.0 + r[i] / (n - 1) * v / u[i]) * u_t[i] / u[i];
      res[i] = H_r[i] - rhs;
    }
    out.radial_identity_residual = std::move(res);
  }
  return out;
}

struct NeckInterval {
  double r_lo = 0, r_hi = 0;
  double rescaled_length = 0;  // integral of u^{-1/2}/r over the interval
  double max_u = 0;
};

/// A maximal interval qualifies as an eps-neck when u stays below eps and the
/// scale-invariant length (metric length divided by the sphere radius) is at
/// least 1/eps. The neck notion is qualitative in the literature; this criterion
/// is this toolkit's quantitative stand-in and is flagged as such in reports.
struct NeckReport {
  std::vector<NeckInterval> necks;
  double cap_diameter = 0;  // metric length of the complement of the necks
};

inline NeckReport detect_necks(const RadialProfile& profile, double eps) {
  profile.validate();
  if (!(eps > 0.0 && eps < 0.5))
    throw std::invalid_argument("detect_necks: eps must lie in (0, 0.5)");
  const auto& r = profile.grid;
  const auto& u = profile.u;
  const std::size_t m = r.size();
  NeckReport rep;
  std::vector<bool> in_neck(m, false);
  std::size_t i = 0;
  while (i < m) {
    if (u[i] >= eps) {
      ++i;
      continue;
    }
    std::size_t j = i;
    double len = 0.0, umax = u[i];
    while (j + 1 < m && u[j + 1] < eps) {
      len += 0.5 * (1.0 / (std::sqrt(u[j]) * r[j]) +
                    1.0 / (std::sqrt(u[j + 1]) * r[j + 1])) * (r[j + 1] - r[j]);
      umax = std::max(umax, u[j + 1]);
      ++j;
    }
    if (len >= 1.0 / eps) {
      rep.necks.push_back({r[i], r[j], len, umax});
      for (std::size_t k = i; k <= j; ++k) in_neck[k] = true;
    }
    i = j + 1;
  }
  double cap = 0.0;
  for (std::size_t k = 0; k + 1 < m; ++k)
    if (!in_neck[k] || !in_neck[k + 1])
      cap += 0.5 * (1.0 / std::sqrt(u[k]) + 1.0 / std::sqrt(u[k + 1])) *
             (r[k + 1] - r[k]);
  rep.cap_diameter = cap;
  return rep;
}

}  // namespace rsf
