#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <vector>

#include "qpfem/fe_space.hpp"
#include "qpfem/problem.hpp"
#include "qpfem/projection.hpp"
#include "qpfem/quadrature.hpp"

namespace qpfem {

namespace detail {

/// Sum over elements of the quadrature of integrand(x, fh(x), fh'(x)) * weight.
template <class Integrand>
double integrate_fe(const FEFunction& fh, int points, Integrand&& integrand) {
  const FESpace& sp = fh.space();
  const QuadratureRule rule = gauss_legendre(points);
  std::vector<std::vector<double>> values(rule.size()), derivs(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) sp.basis().eval(rule.nodes[q], values[q], derivs[q]);
  double total = 0.0;
  for (int e = 0; e < sp.element_count(); ++e) {
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const ElementPoint ep = map_to_element(sp.partition(), e, rule.nodes[q]);
      const auto [v, d] = fh.combine(e, values[q], derivs[q]);
      total += rule.weights[q] * ep.jac * integrand(ep.x, v, d);
    }
  }
  return total;
}

inline int error_points(const FEFunction& fh, int points) {
  return points > 0 ? points : 2 * fh.space().degree() + 2;
}

}  // namespace detail

/// ||fh - u||_{L2} for a callable u(x); default 2r+2 Gauss points per element.
template <class Fn>
double l2_distance(const FEFunction& fh, Fn&& u, int points = 0) {
  const double s = detail::integrate_fe(fh, detail::error_points(fh, points),
                                        [&](double x, double v, double) {
                                          const double d = v - u(x);
                                          return d * d;
                                        });
  return std::sqrt(s);
}

/// Full H1 norm of fh - u: sqrt(L2^2 + |.|_1^2).
template <class Fn, class DFn>
double h1_distance(const FEFunction& fh, Fn&& u, DFn&& ux, int points = 0) {
  const double s = detail::integrate_fe(fh, detail::error_points(fh, points),
                                        [&](double x, double v, double d) {
                                          const double a = v - u(x);
                                          const double b = d - ux(x);
                                          return a * a + b * b;
                                        });
  return std::sqrt(s);
}

inline double l2_norm(const FEFunction& fh) {
  return l2_distance(fh, [](double) { return 0.0; });
}

inline double h1_norm(const FEFunction& fh) {
  const auto zero = [](double) { return 0.0; };
  return h1_distance(fh, zero, zero);
}

inline double l2_error(const FEFunction& fh, const ManufacturedSolution& s, double t, int points = 0) {
  return l2_distance(fh, [&](double x) { return s.u(x, t); }, points);
}

inline double h1_error(const FEFunction& fh, const ManufacturedSolution& s, double t, int points = 0) {
  return h1_distance(fh, [&](double x) { return s.u(x, t); }, [&](double x) { return s.u_x(x, t); },
                     points);
}

/// max |fh - u| over the knots and `per_element` Chebyshev points in every element
/// (default 4r+5).
template <class Fn>
double linf_distance(const FEFunction& fh, Fn&& u, int per_element = 0) {
  const FESpace& sp = fh.space();
  const int m = per_element > 0 ? per_element : 4 * sp.degree() + 5;
  std::vector<double> refs;
  refs.reserve(m + 2);
  refs.push_back(-1.0);
  for (int k = 0; k < m; ++k) refs.push_back(-std::cos(std::numbers::pi * (2 * k + 1) / (2.0 * m)));
  refs.push_back(1.0);
  std::vector<std::vector<double>> values(refs.size()), derivs(refs.size());
  for (std::size_t q = 0; q < refs.size(); ++q) sp.basis().eval(refs[q], values[q], derivs[q]);
  double worst = 0.0;
  for (int e = 0; e < sp.element_count(); ++e) {
    for (std::size_t q = 0; q < refs.size(); ++q) {
      const double x = map_to_element(sp.partition(), e, refs[q]).x;
      const double v = fh.combine(e, values[q], derivs[q]).first;
      worst = std::max(worst, std::abs(v - u(x)));
    }
  }
  return worst;
}

inline double linf_error(const FEFunction& fh, const ManufacturedSolution& s, double t,
                         int per_element = 0) {
  return linf_distance(fh, [&](double x) { return s.u(x, t); }, per_element);
}

/// Sine coefficients e_k = sqrt(2) * integral of (fh - u) sin(k pi x), k = 1..K.
/// Mode k uses r + 4 + ceil(2 k h) Gauss points per element.
template <class Fn>
std::vector<double> sine_coefficients(const FEFunction& fh, Fn&& u, int modes) {
  if (modes < 1) throw ParameterError("negative norm needs at least one mode");
  const FESpace& sp = fh.space();
  const double h = sp.partition().h_max();
  std::map<int, std::vector<int>> by_points;
  for (int k = 1; k <= modes; ++k) {
    const int n = std::min(64, sp.degree() + 4 + static_cast<int>(std::ceil(2.0 * k * h)));
    by_points[n].push_back(k);
  }
  std::vector<double> coeffs(modes, 0.0);
  std::vector<double> xs, ws, es;
  for (const auto& [npts, ks] : by_points) {
    const QuadratureRule rule = gauss_legendre(npts);
    std::vector<std::vector<double>> values(rule.size()), derivs(rule.size());
    for (std::size_t q = 0; q < rule.size(); ++q) sp.basis().eval(rule.nodes[q], values[q], derivs[q]);
    xs.clear();
    ws.clear();
    es.clear();
    for (int e = 0; e < sp.element_count(); ++e) {
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const ElementPoint ep = map_to_element(sp.partition(), e, rule.nodes[q]);
        xs.push_back(ep.x);
        ws.push_back(rule.weights[q] * ep.jac);
        es.push_back(fh.combine(e, values[q], derivs[q]).first - u(ep.x));
      }
    }
    for (int k : ks) {
      double s = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i)
        s += ws[i] * es[i] * std::sin(k * std::numbers::pi * xs[i]);
      coeffs[k - 1] = std::sqrt(2.0) * s;
    }
  }
  return coeffs;
}

/// (sum_k (k pi)^{-2s} e_k^2)^{1/2}.
inline double negative_norm_from_coefficients(const std::vector<double>& coeffs, int s) {
  if (s < 1 || s > 3) throw ParameterError("negative norm order must be 1..3");
  double sum = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const double kpi = (i + 1) * std::numbers::pi;
    sum += std::pow(kpi, -2.0 * s) * coeffs[i] * coeffs[i];
  }
  return std::sqrt(sum);
}

/// Sine-spectral H^{-s} surrogate of fh - u(.,t) truncated at K modes.
inline double negative_norm_error(const FEFunction& fh, const ManufacturedSolution& sol, double t,
                                  int s, int modes) {
  if (s < 1 || s > 3) throw ParameterError("negative norm order must be 1..3");
  return negative_norm_from_coefficients(
      sine_coefficients(fh, [&](double x) { return sol.u(x, t); }, modes), s);
}

/// |fh(x) - u(x)| at every interior knot, keyed by knot position.
template <class Fn>
std::map<double, double> knot_distances(const FEFunction& fh, Fn&& u) {
  const FESpace& sp = fh.space();
  const auto& knots = sp.partition().knots();
  std::map<double, double> out;
  for (int i = 1; i < sp.element_count(); ++i)
    out[knots[i]] = std::abs(fh.coeffs()[sp.knot_dof(i)] - u(knots[i]));
  return out;
}

inline std::map<double, double> knot_errors(const FEFunction& fh, const ManufacturedSolution& s,
                                            double t) {
  return knot_distances(fh, [&](double x) { return s.u(x, t); });
}

inline double max_value(const std::map<double, double>& m) {
  double worst = 0.0;
  for (const auto& [x, v] : m) worst = std::max(worst, v);
  return worst;
}

struct ZetaTheta {
  double zeta_L2 = 0.0;
  double zeta_H1 = 0.0;
  double theta_L2 = 0.0;
};

/// zeta = u_h(t) - U and theta_k = zeta + z_1(t) + ... + z_k(t).
inline ZetaTheta zeta_theta_diagnostics(const FEFunction& U, ProjectionEngine& engine, double t,
                                        int k) {
  if (k < 0) throw ParameterError("theta index must be >= 0");
  const FEFunction zeta = axpy(-1.0, U, engine.elliptic_projection(t));
  FEFunction theta = zeta;
  for (int j = 1; j <= k; ++j) theta = axpy(1.0, engine.quasi_projection_z(t, j), theta);
  return {l2_norm(zeta), h1_norm(zeta), l2_norm(theta)};
}

/// Pairwise rates log(e_{i-1}/e_i)/log(h_{i-1}/h_i); nullopt marks an exact
/// (zero-error) pair.
inline std::vector<std::optional<double>> eoc(const std::vector<double>& errors,
                                              const std::vector<double>& hs) {
  if (errors.size() != hs.size()) throw ParameterError("eoc: length mismatch");
  std::vector<std::optional<double>> rates;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    if (errors[i - 1] <= 0.0 || errors[i] <= 0.0) {
      rates.emplace_back(std::nullopt);
      continue;
    }
    rates.emplace_back(std::log(errors[i - 1] / errors[i]) / std::log(hs[i - 1] / hs[i]));
  }
  return rates;
}

}  // namespace qpfem
