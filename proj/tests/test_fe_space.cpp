#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "qpfem/error_lab.hpp"
#include "qpfem/fe_space.hpp"

using namespace qpfem;
using std::numbers::pi;

TEST(FESpace, DofCountExamples) {
  EXPECT_EQ(build_space(build_uniform_partition(4), 1)->dof_count(), 3);
  EXPECT_EQ(build_space(build_uniform_partition(4), 2)->dof_count(), 7);
  EXPECT_EQ(build_space(build_uniform_partition(2), 3)->dof_count(), 5);
  EXPECT_THROW(build_space(build_uniform_partition(4), 0), InvalidDegree);
}

TEST(FESpace, DofCountFormula) {
  for (int n = 2; n <= 12; ++n)
    for (int r = 1; r <= 6; ++r)
      EXPECT_EQ(build_space(build_uniform_partition(n), r)->dof_count(), n * r - 1);
}

TEST(FESpace, DofSharing) {
  for (int r = 1; r <= 4; ++r) {
    const auto sp = build_space(build_uniform_partition(6), r);
    std::map<int, int> owners;
    for (int e = 0; e < sp->element_count(); ++e) {
      std::set<int> mine;
      for (int l = 0; l <= r; ++l)
        if (sp->dof(e, l) != FESpace::kBoundary) mine.insert(sp->dof(e, l));
      for (int d : mine) ++owners[d];
      if (e + 1 < sp->element_count()) {
        std::set<int> next, two;
        for (int l = 0; l <= r; ++l) {
          if (sp->dof(e + 1, l) != FESpace::kBoundary) next.insert(sp->dof(e + 1, l));
          if (e + 2 < sp->element_count() && sp->dof(e + 2, l) != FESpace::kBoundary)
            two.insert(sp->dof(e + 2, l));
        }
        int shared = 0, shared2 = 0;
        for (int d : mine) shared += next.count(d), shared2 += two.count(d);
        EXPECT_EQ(shared, 1);
        EXPECT_EQ(shared2, 0);
      }
    }
    for (const auto& [d, c] : owners) EXPECT_LE(c, 2);
    EXPECT_EQ(static_cast<int>(owners.size()), sp->dof_count());
  }
}

TEST(Basis, KroneckerAtLobattoNodes) {
  for (int r = 1; r <= 6; ++r) {
    const auto nodes = gauss_lobatto_nodes(r);
    for (int i = 0; i <= r; ++i) {
      const auto b = eval_basis_ref(r, nodes[i]);
      for (int j = 0; j <= r; ++j) EXPECT_NEAR(b.values[j], i == j ? 1.0 : 0.0, 1e-13);
    }
  }
}

TEST(Basis, PartitionOfUnity) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int r = 1; r <= 6; ++r) {
    for (int k = 0; k < 20; ++k) {
      const auto b = eval_basis_ref(r, U(rng));
      double sv = 0.0, sd = 0.0;
      for (int j = 0; j <= r; ++j) sv += b.values[j], sd += b.derivs[j];
      EXPECT_NEAR(sv, 1.0, 1e-13);
      EXPECT_NEAR(sd, 0.0, 1e-11);
    }
  }
}

TEST(FEFunction, InterpolateSineAccuracy) {
  const auto sp = build_space(build_uniform_partition(16), 3);
  const auto f = interpolate(sp, [](double x) { return std::sin(pi * x); });
  EXPECT_NEAR(eval_function(f, 0.3).first, std::sin(0.3 * pi), 1e-6);
}

TEST(FEFunction, ZeroTraceAndZeroFunction) {
  const auto sp = build_space(build_uniform_partition(5), 2);
  const auto f = interpolate(sp, [](double x) { return x * (1 - x) * std::exp(x); });
  EXPECT_EQ(eval_function(f, 0.0).first, 0.0);
  EXPECT_EQ(eval_function(f, 1.0).first, 0.0);
  const FEFunction z(sp);
  for (double x : {0.0, 0.17, 0.5, 0.93, 1.0}) {
    EXPECT_EQ(eval_function(z, x).first, 0.0);
    EXPECT_EQ(eval_function(z, x).second, 0.0);
  }
  EXPECT_THROW(eval_function(f, -0.1), DomainError);
  EXPECT_THROW(eval_function(f, 1.1), DomainError);
}

TEST(FEFunction, InterpolateRejectsBoundaryData) {
  const auto sp = build_space(build_uniform_partition(4), 1);
  EXPECT_THROW(interpolate(sp, [](double x) { return 1.0 + x; }), BoundaryMismatch);
}

TEST(FEFunction, ReproducesSpaceMembers) {
  const auto sp = build_space(build_uniform_partition(6), 2);
  std::vector<double> c(sp->dof_count());
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (auto& v : c) v = U(rng);
  const FEFunction f(sp, c);
  const auto g = interpolate(sp, [&](double x) { return eval_function(f, x).first; });
  for (int i = 0; i < sp->dof_count(); ++i) EXPECT_NEAR(g.coeffs()[i], c[i], 1e-13);
}

TEST(FEFunction, PolynomialReproduction) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> X(0.0, 1.0), C(-2.0, 2.0);
  for (int r = 2; r <= 5; ++r) {
    // p = x(1-x) q(x) with deg q = r-2
    std::vector<double> q(r - 1);
    for (auto& v : q) v = C(rng);
    auto p = [&](double x) {
      double s = 0.0;
      for (int k = r - 2; k >= 0; --k) s = s * x + q[k];
      return x * (1 - x) * s;
    };
    const auto sp = build_space(build_perturbed_partition(7, 0.2, r), r);
    const auto f = interpolate(sp, p);
    for (int k = 0; k < 100; ++k) {
      const double x = X(rng);
      EXPECT_NEAR(eval_function(f, x).first, p(x), 1e-12);
    }
  }
}

TEST(FEFunction, QuadraticExactForRAtLeast2) {
  for (int r = 2; r <= 4; ++r) {
    const auto sp = build_space(build_uniform_partition(3), r);
    const auto f = interpolate(sp, [](double x) { return x * (1 - x); });
    EXPECT_LT(l2_distance(f, [](double x) { return x * (1 - x); }), 1e-14);
  }
}

TEST(FEFunction, InterpolationRateThree) {
  std::vector<double> errs, hs;
  for (int n : {8, 16, 32}) {
    const auto sp = build_space(build_uniform_partition(n), 2);
    const auto f = interpolate(sp, [](double x) { return std::sin(pi * x); });
    errs.push_back(l2_distance(f, [](double x) { return std::sin(pi * x); }));
    hs.push_back(1.0 / n);
  }
  const auto rates = eoc(errs, hs);
  EXPECT_NEAR(*rates.back(), 3.0, 0.05);
}

TEST(FEFunction, ContinuousAcrossKnots) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int r = 1; r <= 4; ++r) {
    const auto sp = build_space(build_perturbed_partition(9, 0.3, 4), r);
    std::vector<double> c(sp->dof_count());
    for (auto& v : c) v = U(rng);
    const FEFunction f(sp, c);
    for (int e = 0; e + 1 < sp->element_count(); ++e) {
      const double left = f.eval_local(e, 1.0).first;
      const double right = f.eval_local(e + 1, -1.0).first;
      EXPECT_NEAR(left, right, 1e-13);
    }
  }
}

TEST(FEFunction, Axpy) {
  const auto sp = build_space(build_uniform_partition(4), 2);
  const auto f = interpolate(sp, [](double x) { return x * (1 - x); });
  const auto g = interpolate(sp, [](double x) { return -x * (1 - x); });
  EXPECT_EQ(axpy(0.0, f, g).coeffs(), g.coeffs());
  const auto self = axpy(-1.0, f, f);
  for (double v : self.coeffs()) EXPECT_EQ(v, 0.0);
  const auto sum = axpy(1.0, f, g);
  for (double v : sum.coeffs()) EXPECT_EQ(v, 0.0);
  const auto other = build_space(build_uniform_partition(5), 2);
  EXPECT_THROW(axpy(1.0, f, FEFunction(other)), IncompatibleSpaces);
}
