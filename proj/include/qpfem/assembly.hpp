#pragma once

#include <span>
#include <vector>

#include "qpfem/banded.hpp"
#include "qpfem/fe_space.hpp"
#include "qpfem/problem.hpp"
#include "qpfem/quadrature.hpp"

namespace qpfem {

/// Quadrature rule and reference basis tables shared by all element loops.
class AssemblyContext {
public:
  /// Default rule: r+2 Gauss points per element.
  explicit AssemblyContext(SpacePtr space, int points = 0)
      : space_(std::move(space)),
        rule_(gauss_legendre(points > 0 ? points : space_->degree() + 2)) {
    const int nb = space_->degree() + 1;
    values_.resize(rule_.size());
    derivs_.resize(rule_.size());
    for (std::size_t q = 0; q < rule_.size(); ++q) {
      space_->basis().eval(rule_.nodes[q], values_[q], derivs_[q]);
      values_[q].resize(nb);
      derivs_[q].resize(nb);
    }
  }

  const FESpace& space() const noexcept { return *space_; }
  const SpacePtr& space_ptr() const noexcept { return space_; }
  const QuadratureRule& rule() const noexcept { return rule_; }
  /// Reference basis values / derivatives at quadrature node q.
  const std::vector<double>& values(std::size_t q) const { return values_[q]; }
  const std::vector<double>& derivs(std::size_t q) const { return derivs_[q]; }

  BandedMatrix make_matrix() const {
    return BandedMatrix(space_->dof_count(), space_->half_bandwidth());
  }

private:
  SpacePtr space_;
  QuadratureRule rule_;
  std::vector<std::vector<double>> values_;
  std::vector<std::vector<double>> derivs_;
};

/// Quadrature point data handed to integrand callbacks.
struct QuadPoint {
  int elem;
  double x;
  double u;   ///< discrete function value (0 when no coefficients are supplied)
  double ux;  ///< discrete function x-derivative
};

/// Coefficients of the element form (c_dd phi' + c_dv phi) psi' + (c_vd phi' + c_vv phi) psi.
struct FormCoefficients {
  double dd = 0.0, dv = 0.0, vd = 0.0, vv = 0.0;
};

/// Integrands of a load functional: a*psi' + b*psi.
struct LoadCoefficients {
  double d = 0.0, v = 0.0;
};

namespace detail {

template <class Visit>
void for_each_quad_point(const AssemblyContext& ctx, std::span<const double> coeffs, Visit&& visit) {
  const FESpace& sp = ctx.space();
  const Partition& part = sp.partition();
  const int nb = sp.degree() + 1;
  std::vector<int> dofs(nb);
  std::vector<double> dphi(nb);
  for (int e = 0; e < sp.element_count(); ++e) {
    for (int l = 0; l < nb; ++l) dofs[l] = sp.dof(e, l);
    const double a = part.knots()[e];
    const double b = part.knots()[e + 1];
    const double jac = 0.5 * (b - a);
    for (std::size_t q = 0; q < ctx.rule().size(); ++q) {
      const auto& phi = ctx.values(q);
      const auto& dref = ctx.derivs(q);
      double u = 0.0, ux = 0.0;
      for (int l = 0; l < nb; ++l) {
        dphi[l] = dref[l] / jac;
        if (!coeffs.empty() && dofs[l] != FESpace::kBoundary) {
          u += coeffs[dofs[l]] * phi[l];
          ux += coeffs[dofs[l]] * dphi[l];
        }
      }
      const double x = 0.5 * (a + b) + ctx.rule().nodes[q] * jac;
      const double w = ctx.rule().weights[q] * jac;
      visit(QuadPoint{e, x, u, ux}, w, dofs, phi, dphi);
    }
  }
}

}  // namespace detail

/// Assemble a bilinear form given pointwise FormCoefficients. `coeffs` (may be
/// empty) is the discrete function whose value/derivative is passed in QuadPoint.
template <class CoefFn>
BandedMatrix assemble_form(const AssemblyContext& ctx, std::span<const double> coeffs, CoefFn&& coef) {
  BandedMatrix m = ctx.make_matrix();
  detail::for_each_quad_point(
      ctx, coeffs,
      [&](const QuadPoint& qp, double w, const std::vector<int>& dofs,
          const std::vector<double>& phi, const std::vector<double>& dphi) {
        const FormCoefficients c = coef(qp);
        const int nb = static_cast<int>(dofs.size());
        for (int i = 0; i < nb; ++i) {
          if (dofs[i] == FESpace::kBoundary) continue;
          for (int j = 0; j < nb; ++j) {
            if (dofs[j] == FESpace::kBoundary) continue;
            const double val = (c.dd * dphi[j] + c.dv * phi[j]) * dphi[i] +
                               (c.vd * dphi[j] + c.vv * phi[j]) * phi[i];
            m.add_entry(dofs[i], dofs[j], w * val);
          }
        }
      });
  return m;
}

/// Assemble l_i = integral of a*phi_i' + b*phi_i.
template <class LoadFn>
std::vector<double> assemble_load(const AssemblyContext& ctx, std::span<const double> coeffs,
                                  LoadFn&& load) {
  std::vector<double> out(ctx.space().dof_count(), 0.0);
  detail::for_each_quad_point(
      ctx, coeffs,
      [&](const QuadPoint& qp, double w, const std::vector<int>& dofs,
          const std::vector<double>& phi, const std::vector<double>& dphi) {
        const LoadCoefficients c = load(qp);
        for (std::size_t i = 0; i < dofs.size(); ++i) {
          if (dofs[i] == FESpace::kBoundary) continue;
          out[dofs[i]] += w * (c.d * dphi[i] + c.v * phi[i]);
        }
      });
  return out;
}

inline BandedMatrix mass_matrix(const AssemblyContext& ctx) {
  return assemble_form(ctx, {}, [](const QuadPoint&) { return FormCoefficients{0, 0, 0, 1}; });
}

inline BandedMatrix stiffness_matrix(const AssemblyContext& ctx) {
  return assemble_form(ctx, {}, [](const QuadPoint&) { return FormCoefficients{1, 0, 0, 0}; });
}

/// Semidiscrete residual F(U)_i = (A(U,U_x), phi_i') + (f(U,U_x), phi_i) - (g(t), phi_i).
inline std::vector<double> nonlinear_residual(const AssemblyContext& ctx, const NonlinearProblem& p,
                                              const ManufacturedSolution& s,
                                              std::span<const double> U, double t) {
  if (static_cast<int>(U.size()) != ctx.space().dof_count())
    throw DimensionError("nonlinear_residual: coefficient length mismatch");
  return assemble_load(ctx, U, [&](const QuadPoint& q) {
    return LoadCoefficients{p.A(q.u, q.ux), p.f(q.u, q.ux) - source_term(p, s, q.x, t)};
  });
}

/// Jacobian of nonlinear_residual with respect to the coefficients of U.
inline BandedMatrix jacobian(const AssemblyContext& ctx, const NonlinearProblem& p,
                             std::span<const double> U, double /*t*/) {
  if (static_cast<int>(U.size()) != ctx.space().dof_count())
    throw DimensionError("jacobian: coefficient length mismatch");
  return assemble_form(ctx, U, [&](const QuadPoint& q) {
    return FormCoefficients{p.A_xi(q.u, q.ux), p.A_u(q.u, q.ux), p.f_xi(q.u, q.ux),
                            p.f_u(q.u, q.ux)};
  });
}

/// Linearized form B(u; phi, psi) + lambda (phi, psi), coefficients frozen at the exact u(.,t).
inline BandedMatrix linearized_B_matrix(const AssemblyContext& ctx, const NonlinearProblem& p,
                                        const ManufacturedSolution& s, double t, double lambda) {
  if (lambda < 0.0) throw ParameterError("lambda must be non-negative");
  return assemble_form(ctx, {}, [&](const QuadPoint& q) {
    const double u = s.u(q.x, t);
    const double ux = s.u_x(q.x, t);
    return FormCoefficients{p.A_xi(u, ux), p.A_u(u, ux), p.f_xi(u, ux), p.f_u(u, ux) + lambda};
  });
}

/// b_i = B(u; u, phi_i) with the analytic u and u_x inserted.
inline std::vector<double> linearized_B_rhs_exact(const AssemblyContext& ctx,
                                                  const NonlinearProblem& p,
                                                  const ManufacturedSolution& s, double t,
                                                  double lambda) {
  return assemble_load(ctx, {}, [&](const QuadPoint& q) {
    const double u = s.u(q.x, t);
    const double ux = s.u_x(q.x, t);
    return LoadCoefficients{p.A_xi(u, ux) * ux + p.A_u(u, ux) * u,
                            p.f_xi(u, ux) * ux + p.f_u(u, ux) * u + lambda * u};
  });
}

/// l_i = (w(., t), phi_i).
template <class Fn>
std::vector<double> load_vector(const AssemblyContext& ctx, Fn&& w, double t) {
  return assemble_load(ctx, {}, [&](const QuadPoint& q) { return LoadCoefficients{0.0, w(q.x, t)}; });
}

/// Shift making B coercive: 1 + sup|f_u| + (sup|A_u| + sup|f_xi|)^2 / (2 rho_min).
inline double default_lambda(const EllipticityReport& rep) {
  const double first_order = rep.max_abs_A_u + rep.max_abs_f_xi;
  return 1.0 + rep.max_abs_f_u + first_order * first_order / (2.0 * rep.min_A_xi);
}

}  // namespace qpfem
