#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsflow/finite_diff.hpp"

namespace rsf {

/// Sampled warped-product coefficient u(r) of the metric
/// g = u^{-1} dr (x) dr + r^2 g_{S^{n-1}} over a radial grid.
struct RadialProfile {
  int n = 0;                      // dimension, n >= 3
  std::vector<double> grid;       // strictly increasing radii, r > 0
  std::vector<double> u;          // u(r_i)
  std::optional<std::vector<double>> u_r;
  std::optional<std::vector<double>> u_rr;
  bool nonneg_curvature = false;  // profile claims 0 < u <= 1, u_r <= 0
  std::string kind;               // optional tag carried through CSV

  void validate() const {
    if (n < 3) throw std::invalid_argument("RadialProfile: dimension must be >= 3");
    if (grid.size() < 8)
      throw std::invalid_argument("RadialProfile: grid needs at least 8 points");
    if (u.size() != grid.size())
      throw std::invalid_argument("RadialProfile: grid/u size mismatch");
    if (grid.front() <= 0.0)
      throw std::invalid_argument("RadialProfile: radii must be positive");
    for (std::size_t i = 1; i < grid.size(); ++i)
      if (grid[i] <= grid[i - 1])
        throw std::invalid_argument("RadialProfile: grid must be strictly increasing");
    for (double v : u)
      if (!(v > 0.0))
        throw std::invalid_argument("RadialProfile: u must be positive");
    if (nonneg_curvature) {
      for (double v : u)
        if (v > 1.0 + 1e-12)
          throw std::invalid_argument("RadialProfile: nonneg curvature requires u <= 1");
    }
  }

  /// Fill missing derivative tables by centered differences.
  void ensure_derivatives() {
    if (!u_r) u_r = derivative(grid, u);
    if (!u_rr) u_rr = second_derivative(grid, u);
  }
};

inline std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

inline void write_profile_csv(const RadialProfile& p, std::ostream& os) {
  os << "# n=" << p.n << "\n";
  if (!p.kind.empty()) os << "# kind=" << p.kind << "\n";
  const bool d1 = p.u_r.has_value(), d2 = p.u_rr.has_value();
  os << "r,u";
  if (d1) os << ",u_r";
  if (d2) os << ",u_rr";
  os << "\n";
  for (std::size_t i = 0; i < p.grid.size(); ++i) {
    os << format_g17(p.grid[i]) << ',' << format_g17(p.u[i]);
    if (d1) os << ',' << format_g17((*p.u_r)[i]);
    if (d2) os << ',' << format_g17((*p.u_rr)[i]);
    os << "\n";
  }
}

inline void write_profile_csv(const RadialProfile& p, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_profile_csv(p, os);
}

inline RadialProfile read_profile_csv(std::istream& is) {
  RadialProfile p;
  std::string line;
  std::vector<std::string> columns;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto eat = [&](const std::string& key) -> std::optional<std::string> {
        auto pos = line.find(key + "=");
        if (pos == std::string::npos) return std::nullopt;
        return line.substr(pos + key.size() + 1);
      };
      if (auto v = eat("n")) p.n = std::stoi(*v);
      if (auto v = eat("kind")) p.kind = *v;
      continue;
    }
    std::stringstream ss(line);
    std::string tok;
    if (columns.empty() && line.find("r") != std::string::npos &&
        !std::isdigit(static_cast<unsigned char>(line[0])) && line[0] != '-') {
      while (std::getline(ss, tok, ',')) columns.push_back(tok);
      continue;
    }
    std::vector<double> vals;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    if (vals.size() < 2) throw std::runtime_error("profile CSV: bad row: " + line);
    p.grid.push_back(vals[0]);
    p.u.push_back(vals[1]);
    if (vals.size() > 2) {
      if (!p.u_r) p.u_r.emplace();
      p.u_r->push_back(vals[2]);
    }
    if (vals.size() > 3) {
      if (!p.u_rr) p.u_rr.emplace();
      p.u_rr->push_back(vals[3]);
    }
  }
  p.validate();
  return p;
}

inline RadialProfile read_profile_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_profile_csv(is);
}

}  // namespace rsf
