#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "qpfem/error.hpp"
#include "qpfem/mesh.hpp"
#include "qpfem/quadrature.hpp"

namespace qpfem {

/// Degree-r Lagrange basis on the Gauss-Lobatto points of [-1,1].
class LagrangeBasis {
public:
  explicit LagrangeBasis(int degree) : degree_(degree) {
    if (degree < 1) throw InvalidDegree("basis degree must be >= 1");
    nodes_ = gauss_lobatto_nodes(degree);
    weights_.assign(degree + 1, 1.0);
    for (int j = 0; j <= degree; ++j)
      for (int k = 0; k <= degree; ++k)
        if (k != j) weights_[j] /= nodes_[j] - nodes_[k];
  }

  int degree() const noexcept { return degree_; }
  int size() const noexcept { return degree_ + 1; }
  const std::vector<double>& nodes() const noexcept { return nodes_; }

  /// Values and reference derivatives of all r+1 basis functions at xi.
  void eval(double xi, std::vector<double>& values, std::vector<double>& derivs) const {
    const int n = size();
    values.assign(n, 0.0);
    derivs.assign(n, 0.0);
    for (int j = 0; j < n; ++j) {
      double prod = 1.0;
      double dsum = 0.0;
      for (int m = 0; m < n; ++m) {
        if (m == j) continue;
        double term = 1.0;
        for (int k = 0; k < n; ++k)
          if (k != j && k != m) term *= xi - nodes_[k];
        dsum += term;
        prod *= xi - nodes_[m];
      }
      values[j] = weights_[j] * prod;
      derivs[j] = weights_[j] * dsum;
    }
  }

private:
  int degree_;
  std::vector<double> nodes_;
  std::vector<double> weights_;  // barycentric weights
};

struct BasisValues {
  std::vector<double> values;
  std::vector<double> derivs;
};

inline BasisValues eval_basis_ref(int degree, double ref_point) {
  BasisValues out;
  LagrangeBasis(degree).eval(ref_point, out.values, out.derivs);
  return out;
}

/// Continuous piecewise polynomials of degree r on a partition, zero at x=0 and x=1.
///
/// Nodes are numbered left to right (knot, interior Lobatto points, knot, ...);
/// the two boundary nodes are dropped, so global DOF = node index - 1 and
/// dof_count = N*r - 1.
class FESpace {
public:
  static constexpr int kBoundary = -1;

  FESpace(Partition partition, int degree)
      : partition_(std::move(partition)), basis_(degree) {
    dof_count_ = partition_.element_count() * degree - 1;
  }

  const Partition& partition() const noexcept { return partition_; }
  const LagrangeBasis& basis() const noexcept { return basis_; }
  int degree() const noexcept { return basis_.degree(); }
  int dof_count() const noexcept { return dof_count_; }
  int element_count() const noexcept { return partition_.element_count(); }
  int half_bandwidth() const noexcept { return 2 * degree(); }

  /// Global DOF of local node `local` in element `elem`, or kBoundary.
  int dof(int elem, int local) const noexcept {
    const int g = elem * degree() + local - 1;
    return (g < 0 || g >= dof_count_) ? kBoundary : g;
  }

  std::vector<int> element_dofs(int elem) const {
    partition_.check_element(elem);
    std::vector<int> out(degree() + 1);
    for (int l = 0; l <= degree(); ++l) out[l] = dof(elem, l);
    return out;
  }

  /// DOF holding the value at interior knot i (1 <= i <= N-1).
  int knot_dof(int knot) const {
    if (knot < 1 || knot >= element_count())
      throw IndexError("knot index " + std::to_string(knot) + " is not interior");
    return knot * degree() - 1;
  }

  double node_position(int elem, int local) const {
    return map_to_element(partition_, elem, basis_.nodes()[local]).x;
  }

  bool compatible(const FESpace& other) const {
    return this == &other || (degree() == other.degree() && partition_ == other.partition_);
  }

private:
  Partition partition_;
  LagrangeBasis basis_;
  int dof_count_ = 0;
};

using SpacePtr = std::shared_ptr<const FESpace>;

inline SpacePtr build_space(Partition partition, int degree) {
  if (degree < 1) throw InvalidDegree("degree must be >= 1, got " + std::to_string(degree));
  return std::make_shared<const FESpace>(std::move(partition), degree);
}

/// A member of the space, stored as its coefficient vector.
class FEFunction {
public:
  explicit FEFunction(SpacePtr space)
      : space_(std::move(space)), coeffs_(space_->dof_count(), 0.0) {}

  FEFunction(SpacePtr space, std::vector<double> coeffs)
      : space_(std::move(space)), coeffs_(std::move(coeffs)) {
    if (static_cast<int>(coeffs_.size()) != space_->dof_count())
      throw DimensionError("coefficient vector length does not match dof_count");
  }

  const FESpace& space() const noexcept { return *space_; }
  const SpacePtr& space_ptr() const noexcept { return space_; }
  const std::vector<double>& coeffs() const noexcept { return coeffs_; }
  std::vector<double>& coeffs() noexcept { return coeffs_; }

  /// Value and x-derivative inside element elem at reference point xi.
  std::pair<double, double> eval_local(int elem, double xi) const {
    thread_local std::vector<double> values, derivs;
    space_->basis().eval(xi, values, derivs);
    return combine(elem, values, derivs);
  }

  /// Combine precomputed reference basis tables with this function's coefficients.
  std::pair<double, double> combine(int elem, const std::vector<double>& values,
                                    const std::vector<double>& derivs) const {
    const FESpace& sp = *space_;
    double v = 0.0, d = 0.0;
    for (int l = 0; l <= sp.degree(); ++l) {
      const int g = sp.dof(elem, l);
      if (g == FESpace::kBoundary) continue;
      v += coeffs_[g] * values[l];
      d += coeffs_[g] * derivs[l];
    }
    const double jac = 0.5 * sp.partition().element_length(elem);
    return {v, d / jac};
  }

private:
  SpacePtr space_;
  std::vector<double> coeffs_;
};

/// Value and derivative of f at x; the containing element is right-closed at x=1.
inline std::pair<double, double> eval_function(const FEFunction& f, double x) {
  const Partition& part = f.space().partition();
  const int elem = part.locate(x);
  const double a = part.knots()[elem];
  const double b = part.knots()[elem + 1];
  double xi = (2.0 * x - a - b) / (b - a);
  xi = std::clamp(xi, -1.0, 1.0);
  return f.eval_local(elem, xi);
}

/// Nodal interpolant of g at the Lobatto points of every element.
template <class Fn>
FEFunction interpolate(const SpacePtr& space, Fn&& g) {
  constexpr double kTraceTol = 1e-12;
  if (std::abs(g(0.0)) > kTraceTol || std::abs(g(1.0)) > kTraceTol)
    throw BoundaryMismatch("interpolate: function does not vanish at x=0 and x=1");
  FEFunction out(space);
  auto& c = out.coeffs();
  for (int e = 0; e < space->element_count(); ++e) {
    for (int l = 0; l <= space->degree(); ++l) {
      const int dof = space->dof(e, l);
      if (dof == FESpace::kBoundary) continue;
      c[dof] = g(space->node_position(e, l));
    }
  }
  return out;
}

/// alpha*f + g.
inline FEFunction axpy(double alpha, const FEFunction& f, const FEFunction& g) {
  if (!f.space().compatible(g.space()))
    throw IncompatibleSpaces("axpy: functions live in different spaces");
  FEFunction out = g;
  auto& c = out.coeffs();
  const auto& fc = f.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += alpha * fc[i];
  return out;
}

}  // namespace qpfem
