#pragma once

#include <array>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "qpfem/assembly.hpp"
#include "qpfem/banded.hpp"
#include "qpfem/fe_space.hpp"
#include "qpfem/problem.hpp"

namespace qpfem {

/// Elliptic projection of the exact solution and the quasi-projection sequence z_j.
///
/// u_h(t) solves B(u(t); u_h, v) = B(u(t); u(t), v) for all v in the space, with
/// the coefficients of B frozen at the exact solution. Time derivatives of
/// coefficient paths use the five-point central stencil with step fd_step.
/// Not thread-safe (results are memoized); use one engine per worker.
class ProjectionEngine {
public:
  static constexpr double kDefaultFdStep = 1e-3;

  ProjectionEngine(AssemblyContext ctx, NonlinearProblem p, ManufacturedSolution s, double lambda,
                   double fd_step = kDefaultFdStep)
      : ctx_(std::move(ctx)), p_(std::move(p)), s_(std::move(s)), lambda_(lambda),
        fd_step_(fd_step), mass_(mass_matrix(ctx_)) {
    if (!(fd_step > 0.0)) throw ParameterError("fd_step must be positive");
    if (lambda < 0.0) throw ParameterError("lambda must be non-negative");
  }

  const AssemblyContext& context() const noexcept { return ctx_; }
  const SpacePtr& space_ptr() const noexcept { return ctx_.space_ptr(); }
  const NonlinearProblem& problem() const noexcept { return p_; }
  const ManufacturedSolution& solution() const noexcept { return s_; }
  double lambda() const noexcept { return lambda_; }
  double fd_step() const noexcept { return fd_step_; }

  /// Throws unless fd_step <= 1e-3 and fd_step^4 * scale < 0.01 * smallest_target.
  void check_fd_step(double smallest_target, double scale = 1.0) const {
    const double d4 = fd_step_ * fd_step_ * fd_step_ * fd_step_;
    if (fd_step_ > 1e-3 || !(d4 * scale < 0.01 * smallest_target))
      throw ParameterError("fd_step " + std::to_string(fd_step_) +
                           " too large for target error " + std::to_string(smallest_target));
  }

  FEFunction elliptic_projection(double t) { return {space_ptr(), projection_coeffs(t)}; }

  /// m-th time derivative (m = 0, 1, 2) of the projection's coefficient path.
  FEFunction projection_dt(double t, int order_m) {
    if (order_m < 0 || order_m > 2) throw ParameterError("projection_dt supports orders 0..2");
    if (order_m == 0) return elliptic_projection(t);
    auto path = [this](double tau) { return projection_coeffs(tau); };
    return {space_ptr(), order_m == 1 ? first_derivative(path, t) : second_derivative(path, t)};
  }

  /// z_j(t): B(u; z_j, v) = -(d/dt z_{j-1}, v) with z_0 = u_h - u.
  FEFunction quasi_projection_z(double t, int j) {
    if (j < 1) throw ParameterError("quasi-projection index must be >= 1");
    return {space_ptr(), z_coeffs(t, j)};
  }

  /// U(0) = u_h(t0) + z_1(t0) + ... + z_k(t0), admissible for 2k <= r-1.
  FEFunction superconvergent_iv(int k, double t0 = 0.0) {
    if (k < 0 || 2 * k > ctx_.space().degree() - 1)
      throw InvalidQuasiOrder("superconvergent initial value needs 2k <= r-1 (k=" +
                              std::to_string(k) + ", r=" + std::to_string(ctx_.space().degree()) +
                              ")");
    FEFunction out = elliptic_projection(t0);
    for (int j = 1; j <= k; ++j) out = axpy(1.0, quasi_projection_z(t0, j), out);
    return out;
  }

  /// Factored B(t), memoized on the exact time value.
  const BandedLU& factored_B(double t) {
    auto it = factors_.find(t);
    if (it != factors_.end()) return *it->second;
    try {
      auto lu = std::make_unique<BandedLU>(linearized_B_matrix(ctx_, p_, s_, t, lambda_));
      return *factors_.emplace(t, std::move(lu)).first->second;
    } catch (const SingularMatrix& e) {
      throw ProjectionFailure(std::string("linearized form is singular; increase lambda (") +
                              e.what() + ")");
    }
  }

private:
  using Path = std::vector<double>;

  const Path& projection_coeffs(double t) {
    auto it = projections_.find(t);
    if (it != projections_.end()) return it->second;
    const std::vector<double> b = linearized_B_rhs_exact(ctx_, p_, s_, t, lambda_);
    return projections_.emplace(t, factored_B(t).solve(b)).first->second;
  }

  /// d_i(t) = (u_h(t) - u(t), phi_i); its derivative is (eta_t, phi_i) without
  /// cancellation against the large u_t term.
  Path projection_defect(double t) {
    Path d = matvec(mass_, projection_coeffs(t));
    const Path ul = load_vector(ctx_, s_.u, t);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= ul[i];
    return d;
  }

  const Path& z_coeffs(double t, int j) {
    const auto key = std::make_pair(j, t);
    auto it = zs_.find(key);
    if (it != zs_.end()) return it->second;
    Path rhs;
    if (j == 1) {
      rhs = first_derivative([this](double tau) { return projection_defect(tau); }, t);
    } else {
      const Path dz = first_derivative([this, j](double tau) { return z_coeffs(tau, j - 1); }, t);
      rhs = matvec(mass_, dz);
    }
    for (double& v : rhs) v = -v;
    return zs_.emplace(key, factored_B(t).solve(rhs)).first->second;
  }

  template <class PathFn>
  Path first_derivative(PathFn&& f, double t) {
    const double d = fd_step_;
    const Path m2 = f(t - 2 * d), m1 = f(t - d), p1 = f(t + d), p2 = f(t + 2 * d);
    Path out(m2.size());
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * d);
    return out;
  }

  template <class PathFn>
  Path second_derivative(PathFn&& f, double t) {
    const double d = fd_step_;
    const Path m2 = f(t - 2 * d), m1 = f(t - d), c = f(t), p1 = f(t + d), p2 = f(t + 2 * d);
    Path out(c.size());
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = (-m2[i] + 16.0 * m1[i] - 30.0 * c[i] + 16.0 * p1[i] - p2[i]) / (12.0 * d * d);
    return out;
  }

  AssemblyContext ctx_;
  NonlinearProblem p_;
  ManufacturedSolution s_;
  double lambda_;
  double fd_step_;
  BandedMatrix mass_;
  std::map<double, std::unique_ptr<BandedLU>> factors_;
  std::map<double, Path> projections_;
  std::map<std::pair<int, double>, Path> zs_;
};

}  // namespace qpfem
