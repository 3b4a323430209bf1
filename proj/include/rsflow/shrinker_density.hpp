#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsf {

/// Gaussian density of the round shrinking sphere S^n, closed form
///   V~(S^n) = sqrt(2 pi) m^{m+1/2} e^{-m} / Gamma(m+1) * sqrt(2/e),
/// with m = (n-1)/2, evaluated in log space so large n stays finite.
inline double density_sphere(int n) {
  if (n < 2) throw std::invalid_argument("density_sphere: n >= 2 required");
  const double m = 0.5 * (n - 1);
  const double log_v = 0.5 * std::log(2.0 * M_PI) + (m + 0.5) * std::log(m) - m -
                       std::lgamma(m + 1.0) + 0.5 * (std::log(2.0) - 1.0);
  return std::exp(log_v);
}

/// Independent oracle for density_sphere: the defining integral
///   (4 pi)^{-n/2} int e^{-f} over S^n.
/// Under Ric + Hess f = g/2 the round sphere has radius sqrt(2(n-1)) and the
/// normalization |grad f|^2 + R = f forces the constant potential
/// f = R = n/2, so the integral is e^{-n/2} times the surface area
/// omega_n rho^n with omega_n = 2 pi^{(n+1)/2} / Gamma((n+1)/2).
inline double density_sphere_integral(int n) {
  if (n < 2) throw std::invalid_argument("density_sphere_integral: n >= 2 required");
  const double log_area = std::log(2.0) + 0.5 * (n + 1) * std::log(M_PI) -
                          std::lgamma(0.5 * (n + 1)) +
                          0.5 * n * std::log(2.0 * (n - 1));
  return std::exp(-0.5 * n * std::log(4.0 * M_PI) - 0.5 * n + log_area);
}

/// Limit of V~(S^n) as n -> infinity.
inline double density_limit() { return std::sqrt(2.0 / std::exp(1.0)); }

struct ShrinkerFactor {
  enum Kind { sphere, euclidean } kind;
  int dim;
};

/// A product shrinker assembled from sphere and Euclidean (Gaussian) factors,
/// optionally quotiented by a finite group of order quotient_order.
struct ShrinkerSpec {
  std::vector<ShrinkerFactor> factors;
  int quotient_order = 1;

  int total_dimension() const {
    int d = 0;
    for (const auto& f : factors) d += f.dim;
    return d;
  }
  void validate() const {
    if (quotient_order < 1)
      throw std::invalid_argument("ShrinkerSpec: quotient order must be positive");
    if (factors.empty())
      throw std::invalid_argument("ShrinkerSpec: at least one factor required");
    for (const auto& f : factors) {
      if (f.kind == ShrinkerFactor::sphere && f.dim < 2)
        throw std::invalid_argument("ShrinkerSpec: sphere factors need dim >= 2");
      if (f.kind == ShrinkerFactor::euclidean && f.dim < 1)
        throw std::invalid_argument("ShrinkerSpec: euclidean factors need dim >= 1");
    }
  }
};

/// Density of a product shrinker: product of factor densities (the Gaussian
/// factor contributes 1) divided by the quotient order.
inline double density_spec(const ShrinkerSpec& spec) {
  spec.validate();
  double v = 1.0;
  for (const auto& f : spec.factors)
    if (f.kind == ShrinkerFactor::sphere) v *= density_sphere(f.dim);
  return v / spec.quotient_order;
}

struct DensityScanRow {
  int n;
  double closed_form;
  double integral_oracle;
  double gap;  // V~(S^n) - V~(S^{n-1}), a numeric gap-constant candidate
};

struct DensityScan {
  std::vector<DensityScanRow> rows;
  bool monotone = false;          // V~(S^n) strictly increasing in n
  bool below_limit = false;       // all values < sqrt(2/e)
  bool cylinder_below = false;    // V~(S^{n-1} x R) < V~(S^n) for each n
  double max_route_mismatch = 0;  // worst relative disagreement of the two routes
};

inline DensityScan density_scan(int n_max) {
  if (n_max < 3) throw std::invalid_argument("density_scan: n_max >= 3 required");
  DensityScan scan;
  scan.monotone = scan.below_limit = scan.cylinder_below = true;
  double prev = 0.0;
  const double limit = density_limit();
  for (int n = 2; n <= n_max; ++n) {
    DensityScanRow row;
    row.n = n;
    row.closed_form = density_sphere(n);
    row.integral_oracle = density_sphere_integral(n);
    row.gap = n == 2 ? row.closed_form : row.closed_form - prev;
    const double mismatch =
        std::abs(row.closed_form - row.integral_oracle) / row.closed_form;
    scan.max_route_mismatch = std::max(scan.max_route_mismatch, mismatch);
    if (n > 2) {
      if (row.closed_form <= prev) scan.monotone = false;
      // V~(S^{n-1} x R) = V~(S^{n-1}) = prev
      if (prev >= row.closed_form) scan.cylinder_below = false;
    }
    if (row.closed_form >= limit) scan.below_limit = false;
    prev = row.closed_form;
    scan.rows.push_back(row);
  }
  return scan;
}

}  // namespace rsf
