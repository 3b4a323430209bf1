#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace rsf {

/// Second-order finite differences on a possibly nonuniform grid.
/// Interior points use the centered 3-point stencil, endpoints the
/// one-sided 3-point stencil.
inline std::vector<double> derivative(std::span<const double> x,
                                      std::span<const double> f) {
  const std::size_t m = x.size();
  if (m < 3 || f.size() != m)
    throw std::invalid_argument("derivative: need at least 3 matching nodes");
  std::vector<double> df(m);
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const double hm = x[i] - x[i - 1];
    const double hp = x[i + 1] - x[i];
    df[i] = -hp / (hm * (hm + hp)) * f[i - 1] +
            (hp - hm) / (hm * hp) * f[i] +
            hm / (hp * (hm + hp)) * f[i + 1];
  }
  {
    const double h0 = x[1] - x[0];
    const double h1 = x[2] - x[1];
    df[0] = -(2 * h0 + h1) / (h0 * (h0 + h1)) * f[0] +
            (h0 + h1) / (h0 * h1) * f[1] - h0 / (h1 * (h0 + h1)) * f[2];
    const double g1 = x[m - 2] - x[m - 3];
    const double g0 = x[m - 1] - x[m - 2];
    df[m - 1] = g0 / (g1 * (g0 + g1)) * f[m - 3] -
                (g0 + g1) / (g0 * g1) * f[m - 2] +
                (2 * g0 + g1) / (g0 * (g0 + g1)) * f[m - 1];
  }
  return df;
}

/// Second derivative, 3-point stencils (first-order at endpoints).
inline std::vector<double> second_derivative(std::span<const double> x,
                                             std::span<const double> f) {
  const std::size_t m = x.size();
  if (m < 3 || f.size() != m)
    throw std::invalid_argument("second_derivative: need at least 3 matching nodes");
  std::vector<double> d2f(m);
  auto stencil = [&](std::size_t a, std::size_t b, std::size_t c) {
    const double hm = x[b] - x[a];
    const double hp = x[c] - x[b];
    return 2.0 / (hm * (hm + hp)) * f[a] - 2.0 / (hm * hp) * f[b] +
           2.0 / (hp * (hm + hp)) * f[c];
  };
  for (std::size_t i = 1; i + 1 < m; ++i) d2f[i] = stencil(i - 1, i, i + 1);
  d2f[0] = d2f[1];
  d2f[m - 1] = d2f[m - 2];
  return d2f;
}

/// Cubic Hermite interpolation on [x0,x1] given values and derivatives.
inline double hermite3(double x, double x0, double x1, double f0, double d0,
                       double f1, double d1) {
  const double h = x1 - x0;
  const double t = (x - x0) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * d0 +
         (-2 * t3 + 3 * t2) * f1 + (t3 - t2) * h * d1;
}

/// Quintic Hermite interpolation using values, first and second derivatives.
inline double hermite5(double x, double x0, double x1, double f0, double d0,
                       double s0, double f1, double d1, double s1) {
  const double h = x1 - x0;
  const double t = (x - x0) / h;
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double H0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
  const double H1 = t - 6 * t3 + 8 * t4 - 3 * t5;
  const double H2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5);
  const double H3 = 0.5 * (t3 - 2 * t4 + t5);
  const double H4 = -4 * t3 + 7 * t4 - 3 * t5;
  const double H5 = 10 * t3 - 15 * t4 + 6 * t5;
  return H0 * f0 + H1 * h * d0 + H2 * h * h * s0 + H3 * h * h * s1 +
         H4 * h * d1 + H5 * f1;
}

}  // namespace rsf
