#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "qpfem/error.hpp"

namespace qpfem {

/// Quadrature rule on the reference interval (-1,1).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
};

namespace detail {

/// Legendre polynomial P_n and its derivative at x (three-term recurrence).
inline std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0;
  if (n == 0) return {1.0, 0.0};
  double p1 = x;
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1);
    p0 = p1;
    p1 = p2;
  }
  // P_n' from the identity (x^2-1) P_n' = n (x P_n - P_{n-1}); only used away from +-1.
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

constexpr double kNewtonTol = 1e-15;
constexpr int kNewtonMaxIter = 100;

}  // namespace detail

/// Gauss-Legendre rule with n points, exact for polynomials of degree 2n-1.
inline QuadratureRule gauss_legendre(int n) {
  if (n < 1 || n > 64)
    throw UnsupportedRule("gauss_legendre: point count " + std::to_string(n) + " outside [1,64]");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < detail::kNewtonMaxIter; ++it) {
      auto [p, d] = detail::legendre(n, x);
      dp = d;
      const double dx = p / d;
      x -= dx;
      if (std::abs(dx) < detail::kNewtonTol) break;
    }
    dp = detail::legendre(n, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

/// Gauss-Lobatto nodes for degree r: the r+1 points {-1, roots of P_r', +1}, ascending.
inline std::vector<double> gauss_lobatto_nodes(int r) {
  if (r < 1) throw InvalidDegree("gauss_lobatto_nodes: degree must be >= 1");
  std::vector<double> nodes(r + 1);
  nodes.front() = -1.0;
  nodes.back() = 1.0;
  for (int j = 1; j < r; ++j) {
    double x = -std::cos(std::numbers::pi * j / r);
    for (int it = 0; it < detail::kNewtonMaxIter; ++it) {
      auto [p, dp] = detail::legendre(r, x);
      // Legendre ODE: (1-x^2) P'' = 2x P' - r(r+1) P
      const double ddp = (2.0 * x * dp - r * (r + 1.0) * p) / (1.0 - x * x);
      const double dx = dp / ddp;
      x -= dx;
      if (std::abs(dx) < detail::kNewtonTol) break;
    }
    nodes[j] = x;
  }
  std::sort(nodes.begin(), nodes.end());
  return nodes;
}

}  // namespace qpfem
