#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "qpfem/error.hpp"

namespace qpfem {

/// Scalar coefficient of (value u, gradient xi).
using Coefficient = std::function<double(double u, double xi)>;
/// Scalar field of (x, t).
using SpaceTimeField = std::function<double(double x, double t)>;

/// u_t - (A(u,u_x))_x + f(u,u_x) = g on (0,1), with the partials of A and f.
struct NonlinearProblem {
  std::string name;
  Coefficient A, A_u, A_xi;
  Coefficient f, f_u, f_xi;
};

struct ManufacturedSolution {
  std::string name;
  SpaceTimeField u, u_t, u_x, u_xx;
};

inline const std::vector<std::string>& problem_names() {
  static const std::vector<std::string> names{"heat", "cubic_flux", "burgers_react",
                                              "full_quasilinear"};
  return names;
}

inline const std::vector<std::string>& solution_names() {
  static const std::vector<std::string> names{"sine_decay", "sine_poly", "bump"};
  return names;
}

inline NonlinearProblem lookup_problem(const std::string& name) {
  const auto zero = [](double, double) { return 0.0; };
  const auto one = [](double, double) { return 1.0; };
  const auto flux = [](double, double xi) { return xi; };
  if (name == "heat") return {name, flux, zero, one, zero, zero, zero};
  if (name == "cubic_flux")
    return {name,
            [](double, double xi) { return xi + xi * xi * xi / 3.0; },
            zero,
            [](double, double xi) { return 1.0 + xi * xi; },
            zero, zero, zero};
  if (name == "burgers_react")
    return {name, flux, zero, one,
            [](double u, double xi) { return u * xi; },
            [](double, double xi) { return xi; },
            [](double u, double) { return u; }};
  if (name == "full_quasilinear")
    return {name,
            [](double u, double xi) { return (1.0 + u * u) * xi; },
            [](double u, double xi) { return 2.0 * u * xi; },
            [](double u, double) { return 1.0 + u * u; },
            [](double u, double xi) { return std::sin(u) + 0.1 * xi / (1.0 + xi * xi); },
            [](double u, double) { return std::cos(u); },
            [](double, double xi) {
              const double d = 1.0 + xi * xi;
              return 0.1 * (1.0 - xi * xi) / (d * d);
            }};
  throw RegistryError("unknown problem '" + name + "'");
}

inline ManufacturedSolution lookup_solution(const std::string& name) {
  using std::numbers::pi;
  if (name == "sine_decay")
    return {name,
            [](double x, double t) { return std::exp(-t) * std::sin(pi * x); },
            [](double x, double t) { return -std::exp(-t) * std::sin(pi * x); },
            [](double x, double t) { return pi * std::exp(-t) * std::cos(pi * x); },
            [](double x, double t) { return -pi * pi * std::exp(-t) * std::sin(pi * x); }};
  if (name == "sine_poly") {
    // u = a(t) sin(2 pi x), a = (1+t^2) e^{-t}, a' = -(1-t)^2 e^{-t}
    auto a = [](double t) { return (1.0 + t * t) * std::exp(-t); };
    auto da = [](double t) { return -(1.0 - t) * (1.0 - t) * std::exp(-t); };
    return {name,
            [a](double x, double t) { return a(t) * std::sin(2 * pi * x); },
            [da](double x, double t) { return da(t) * std::sin(2 * pi * x); },
            [a](double x, double t) { return 2 * pi * a(t) * std::cos(2 * pi * x); },
            [a](double x, double t) { return -4 * pi * pi * a(t) * std::sin(2 * pi * x); }};
  }
  if (name == "bump") {
    // u = 16 t e^{-t} x^2 (1-x)^2
    auto a = [](double t) { return 16.0 * t * std::exp(-t); };
    auto da = [](double t) { return 16.0 * (1.0 - t) * std::exp(-t); };
    return {name,
            [a](double x, double t) { return a(t) * x * x * (1 - x) * (1 - x); },
            [da](double x, double t) { return da(t) * x * x * (1 - x) * (1 - x); },
            [a](double x, double t) { return a(t) * 2.0 * x * (1 - x) * (1 - 2 * x); },
            [a](double x, double t) { return a(t) * 2.0 * (1 - 6 * x + 6 * x * x); }};
  }
  throw RegistryError("unknown solution '" + name + "'");
}

/// Source g making s an exact solution: g = u_t - (A_u u_x + A_xi u_xx) + f.
inline double source_term(const NonlinearProblem& p, const ManufacturedSolution& s, double x,
                          double t) {
  const double u = s.u(x, t);
  const double ux = s.u_x(x, t);
  return s.u_t(x, t) - (p.A_u(u, ux) * ux + p.A_xi(u, ux) * s.u_xx(x, t)) + p.f(u, ux);
}

/// Sampled coefficient bounds over the solution range of a study.
struct EllipticityReport {
  double min_A_xi = std::numeric_limits<double>::infinity();
  double max_abs_A_u = 0.0;
  double max_abs_f_u = 0.0;
  double max_abs_f_xi = 0.0;
};

/// Samples A_xi(u,u_x) over [0,1]x[0,T], with (u,u_x) shifted by +-margin.
/// Throws EllipticityViolation when the sampled minimum is not positive.
inline EllipticityReport verify_ellipticity(const NonlinearProblem& p,
                                            const ManufacturedSolution& s, double T,
                                            double margin, int nx = 201, int nt = 41) {
  EllipticityReport rep;
  for (int it = 0; it < nt; ++it) {
    const double t = T * it / (nt - 1);
    for (int ix = 0; ix < nx; ++ix) {
      const double x = static_cast<double>(ix) / (nx - 1);
      const double u0 = s.u(x, t);
      const double xi0 = s.u_x(x, t);
      for (int a = -1; a <= 1; ++a) {
        for (int b = -1; b <= 1; ++b) {
          const double u = u0 + a * margin;
          const double xi = xi0 + b * margin;
          rep.min_A_xi = std::min(rep.min_A_xi, p.A_xi(u, xi));
          rep.max_abs_A_u = std::max(rep.max_abs_A_u, std::abs(p.A_u(u, xi)));
          rep.max_abs_f_u = std::max(rep.max_abs_f_u, std::abs(p.f_u(u, xi)));
          rep.max_abs_f_xi = std::max(rep.max_abs_f_xi, std::abs(p.f_xi(u, xi)));
        }
      }
    }
  }
  if (!(rep.min_A_xi > 0.0))
    throw EllipticityViolation("problem '" + p.name + "' with solution '" + s.name +
                                   "': min A_xi = " + std::to_string(rep.min_A_xi),
                               rep.min_A_xi);
  return rep;
}

}  // namespace qpfem
