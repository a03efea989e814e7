#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "qpfem/assembly.hpp"
#include "qpfem/banded.hpp"
#include "qpfem/fe_space.hpp"

namespace qpfem {

struct NewtonSettings {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_iter = 25;
};

struct NewtonResult {
  std::vector<double> solution;
  int iterations = 0;
  std::vector<double> residual_norms;  ///< one entry per evaluated iterate, starting at the guess
};

inline double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

using ResidualFn = std::function<std::vector<double>(std::span<const double>)>;
using JacobianFn = std::function<BandedMatrix(std::span<const double>)>;

/// Full Newton iteration; stops once ||R(x)||_inf <= abs_tol + rel_tol*||R(guess)||_inf.
inline NewtonResult newton_solve(const ResidualFn& residual, const JacobianFn& jac,
                                 std::vector<double> guess, const NewtonSettings& settings) {
  if (!(settings.abs_tol > 0.0) || !(settings.rel_tol > 0.0) || settings.max_iter < 1)
    throw ParameterError("invalid Newton settings");
  NewtonResult out;
  out.solution = std::move(guess);
  std::vector<double> r = residual(out.solution);
  double rnorm = norm_inf(r);
  out.residual_norms.push_back(rnorm);
  const double tol = settings.abs_tol + settings.rel_tol * rnorm;
  if (rnorm <= tol) return out;
  for (int it = 1; it <= settings.max_iter; ++it) {
    std::vector<double> delta;
    try {
      delta = lu_factor(jac(out.solution)).solve(r);
    } catch (const SingularMatrix& e) {
      throw NonConvergence(std::string("Newton: singular Jacobian (") + e.what() + ")", rnorm);
    }
    for (std::size_t i = 0; i < delta.size(); ++i) out.solution[i] -= delta[i];
    r = residual(out.solution);
    rnorm = norm_inf(r);
    out.residual_norms.push_back(rnorm);
    out.iterations = it;
    if (!std::isfinite(rnorm)) break;
    if (rnorm <= tol) return out;
  }
  std::ostringstream msg;
  msg << "Newton did not converge in " << settings.max_iter << " iterations, residual " << rnorm;
  throw NonConvergence(msg.str(), rnorm);
}

enum class Scheme { implicit_midpoint, gauss2 };

inline std::string to_string(Scheme s) {
  return s == Scheme::gauss2 ? "gauss2" : "implicit_midpoint";
}

struct TimeGrid {
  double t0 = 0.0;
  double T = 1.0;
  double dt = 0.1;
  Scheme scheme = Scheme::gauss2;

  int step_count() const {
    if (!(dt > 0.0)) throw ParameterError("time step must be positive");
    const double steps = (T - t0) / dt;
    const double rounded = std::round(steps);
    if (std::abs(steps - rounded) > 1e-12 * std::max(1.0, rounded) || rounded < 0)
      throw ParameterError("(T - t0)/dt is not an integer");
    return static_cast<int>(rounded);
  }
  double time(int k) const { return k == step_count() ? T : t0 + k * dt; }
};

/// Semidiscrete system M dU/dt = -F(U,t) for a (problem, solution) pair.
class SemidiscreteSystem {
public:
  SemidiscreteSystem(const AssemblyContext& ctx, const NonlinearProblem& p,
                     const ManufacturedSolution& s)
      : ctx_(ctx), p_(p), s_(s), mass_(mass_matrix(ctx)) {}

  const AssemblyContext& context() const noexcept { return ctx_; }
  const BandedMatrix& mass() const noexcept { return mass_; }
  int size() const noexcept { return ctx_.space().dof_count(); }

  std::vector<double> residual(std::span<const double> U, double t) const {
    return nonlinear_residual(ctx_, p_, s_, U, t);
  }
  BandedMatrix jacobian(std::span<const double> U, double t) const {
    return qpfem::jacobian(ctx_, p_, U, t);
  }

private:
  const AssemblyContext& ctx_;
  const NonlinearProblem& p_;
  const ManufacturedSolution& s_;
  BandedMatrix mass_;
};

struct StepResult {
  std::vector<double> state;
  int newton_iterations = 0;
};

namespace detail {

inline StepResult step_midpoint(const SemidiscreteSystem& sys, std::span<const double> U, double t,
                                double dt, const NewtonSettings& settings) {
  const int n = sys.size();
  const double tm = t + 0.5 * dt;
  std::vector<double> mid(n);
  auto midpoint = [&](std::span<const double> Up) {
    for (int i = 0; i < n; ++i) mid[i] = 0.5 * (U[i] + Up[i]);
  };
  auto residual = [&](std::span<const double> Up) {
    midpoint(Up);
    std::vector<double> diff(n);
    for (int i = 0; i < n; ++i) diff[i] = (Up[i] - U[i]) / dt;
    std::vector<double> r = matvec(sys.mass(), diff);
    const std::vector<double> F = sys.residual(mid, tm);
    for (int i = 0; i < n; ++i) r[i] += F[i];
    return r;
  };
  auto jac = [&](std::span<const double> Up) {
    midpoint(Up);
    // M/dt + J/2
    BandedMatrix out = sys.jacobian(mid, tm);
    BandedMatrix scaled(n, out.half_bandwidth());
    scaled.add_scaled(1.0 / dt, sys.mass());
    scaled.add_scaled(0.5, out);
    return scaled;
  };
  NewtonResult res = newton_solve(residual, jac, std::vector<double>(U.begin(), U.end()), settings);
  return {std::move(res.solution), res.iterations};
}

/// Two-stage Gauss-Legendre IRK. Unknowns are the stage slopes K_s, stored
/// interleaved (index 2i+s) so the coupled Jacobian stays banded.
inline StepResult step_gauss2(const SemidiscreteSystem& sys, std::span<const double> U, double t,
                              double dt, const NewtonSettings& settings) {
  const int n = sys.size();
  const double r3 = std::sqrt(3.0) / 6.0;
  const double a[2][2] = {{0.25, 0.25 - r3}, {0.25 + r3, 0.25}};
  const double c[2] = {0.5 - r3, 0.5 + r3};
  const int hb = sys.mass().half_bandwidth();

  std::vector<double> Y0(n), Y1(n);
  auto stages = [&](std::span<const double> K) {
    for (int i = 0; i < n; ++i) {
      const double k0 = K[2 * i], k1 = K[2 * i + 1];
      Y0[i] = U[i] + dt * (a[0][0] * k0 + a[0][1] * k1);
      Y1[i] = U[i] + dt * (a[1][0] * k0 + a[1][1] * k1);
    }
  };
  std::vector<double> Ks(n);
  auto residual = [&](std::span<const double> K) {
    stages(K);
    std::vector<double> r(2 * n);
    for (int s = 0; s < 2; ++s) {
      for (int i = 0; i < n; ++i) Ks[i] = K[2 * i + s];
      const std::vector<double> MK = matvec(sys.mass(), Ks);
      const std::vector<double> F = sys.residual(s == 0 ? Y0 : Y1, t + c[s] * dt);
      for (int i = 0; i < n; ++i) r[2 * i + s] = MK[i] + F[i];
    }
    return r;
  };
  auto jac = [&](std::span<const double> K) {
    stages(K);
    const BandedMatrix J0 = sys.jacobian(Y0, t + c[0] * dt);
    const BandedMatrix J1 = sys.jacobian(Y1, t + c[1] * dt);
    BandedMatrix out(2 * n, 2 * hb + 1);
    for (int i = 0; i < n; ++i) {
      for (int j = std::max(0, i - hb); j <= std::min(n - 1, i + hb); ++j) {
        const double m = sys.mass()(i, j);
        for (int s = 0; s < 2; ++s) {
          const BandedMatrix& Js = s == 0 ? J0 : J1;
          for (int q = 0; q < 2; ++q) {
            const double v = (s == q ? m : 0.0) + dt * a[s][q] * Js(i, j);
            if (v != 0.0) out.add_entry(2 * i + s, 2 * j + q, v);
          }
        }
      }
    }
    return out;
  };
  NewtonResult res = newton_solve(residual, jac, std::vector<double>(2 * n, 0.0), settings);
  std::vector<double> next(U.begin(), U.end());
  for (int i = 0; i < n; ++i)
    next[i] += 0.5 * dt * (res.solution[2 * i] + res.solution[2 * i + 1]);
  return {std::move(next), res.iterations};
}

}  // namespace detail

/// Advance U from t to t+dt.
inline StepResult step(const SemidiscreteSystem& sys, std::span<const double> U, double t, double dt,
                       Scheme scheme, const NewtonSettings& settings) {
  try {
    return scheme == Scheme::gauss2 ? detail::step_gauss2(sys, U, t, dt, settings)
                                    : detail::step_midpoint(sys, U, t, dt, settings);
  } catch (const NonConvergence& e) {
    std::ostringstream msg;
    msg << e.what() << " (step t=" << t << ", dt=" << dt << ")";
    throw NonConvergence(msg.str(), e.last_residual());
  }
}

struct IntegrationResult {
  std::map<double, FEFunction> snapshots;
  int steps = 0;
  int max_newton_iterations = 0;
};

/// March from grid.t0 to grid.T, snapshotting at the requested checkpoints (grid times).
inline IntegrationResult integrate(const FEFunction& U0, const TimeGrid& grid,
                                   const SemidiscreteSystem& sys, const NewtonSettings& settings,
                                   const std::vector<double>& checkpoints) {
  const int nsteps = grid.step_count();
  std::map<int, double> wanted;
  for (double c : checkpoints) {
    const double k = nsteps == 0 ? 0.0 : (c - grid.t0) / grid.dt;
    const double kr = std::round(k);
    if (kr < 0 || kr > nsteps || std::abs(k - kr) > 1e-9)
      throw ParameterError("checkpoint is not a grid time");
    wanted[static_cast<int>(kr)] = c;
  }
  IntegrationResult out;
  std::vector<double> U = U0.coeffs();
  auto snapshot = [&](int k) {
    auto it = wanted.find(k);
    if (it != wanted.end()) out.snapshots.insert_or_assign(it->second, FEFunction(U0.space_ptr(), U));
  };
  snapshot(0);
  for (int k = 0; k < nsteps; ++k) {
    const double t = grid.time(k);
    const double dt = grid.time(k + 1) - t;
    StepResult sr = step(sys, U, t, dt, grid.scheme, settings);
    U = std::move(sr.state);
    out.max_newton_iterations = std::max(out.max_newton_iterations, sr.newton_iterations);
    ++out.steps;
    snapshot(k + 1);
  }
  return out;
}

}  // namespace qpfem
