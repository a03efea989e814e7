#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "qpfem/error_lab.hpp"
#include "qpfem/projection.hpp"

using namespace qpfem;
using std::numbers::pi;

namespace {

ManufacturedSolution steady_sine() {
  return {"steady", [](double x, double) { return std::sin(pi * x); },
          [](double, double) { return 0.0; },
          [](double x, double) { return pi * std::cos(pi * x); },
          [](double x, double) { return -pi * pi * std::sin(pi * x); }};
}

ManufacturedSolution quadratic_in_space() {
  return {"quad", [](double x, double t) { return (1 + t * t) * x * (1 - x); },
          [](double x, double t) { return 2 * t * x * (1 - x); },
          [](double x, double t) { return (1 + t * t) * (1 - 2 * x); },
          [](double, double t) { return -2 * (1 + t * t); }};
}

ProjectionEngine make_engine(const std::string& prob, const ManufacturedSolution& s, int n, int r,
                             double fd_step = ProjectionEngine::kDefaultFdStep) {
  const auto p = lookup_problem(prob);
  const double lambda = default_lambda(verify_ellipticity(p, s, 1.0, 0.1));
  return ProjectionEngine(AssemblyContext(build_space(build_uniform_partition(n), r)), p, s, lambda,
                          fd_step);
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST(EllipticProjection, ReproducesSpaceMembers) {
  const auto s = quadratic_in_space();
  for (const auto& name : problem_names()) {
    auto eng = make_engine(name, s, 6, 2);
    const auto uh = eng.elliptic_projection(0.4);
    EXPECT_LT(l2_error(uh, s, 0.4), 1e-12) << name;
  }
}

TEST(EllipticProjection, HeatLinearRates) {
  const auto s = lookup_solution("sine_decay");
  std::vector<double> l2, h1, hs;
  for (int n : {8, 16, 32, 64}) {
    auto eng = make_engine("heat", s, n, 1);
    const auto uh = eng.elliptic_projection(0.5);
    l2.push_back(l2_error(uh, s, 0.5));
    h1.push_back(h1_error(uh, s, 0.5));
    hs.push_back(1.0 / n);
  }
  EXPECT_NEAR(*eoc(l2, hs).back(), 2.0, 0.1);
  EXPECT_NEAR(*eoc(h1, hs).back(), 1.0, 0.1);
}

TEST(EllipticProjection, GalerkinOrthogonality) {
  for (const auto& pn : problem_names()) {
    const auto p = lookup_problem(pn);
    const auto s = lookup_solution("sine_poly");
    auto eng = make_engine(pn, s, 16, 2);
    for (double t : {0.25, 0.5, 0.75, 1.0}) {
      const auto c = eng.elliptic_projection(t).coeffs();
      const auto B = linearized_B_matrix(eng.context(), p, s, t, eng.lambda());
      const auto b = linearized_B_rhs_exact(eng.context(), p, s, t, eng.lambda());
      auto Bc = matvec(B, c);
      for (std::size_t i = 0; i < Bc.size(); ++i) Bc[i] -= b[i];
      EXPECT_LE(max_abs(Bc), 1e-11 * max_abs(b)) << pn << " t=" << t;
    }
  }
}

TEST(EllipticProjection, SingularFormReported) {
  const NonlinearProblem degenerate{"degenerate", [](double, double) { return 0.0; },
                                    [](double, double) { return 0.0; },
                                    [](double, double) { return 0.0; },
                                    [](double, double) { return 0.0; },
                                    [](double, double) { return 0.0; },
                                    [](double, double) { return 0.0; }};
  ProjectionEngine eng(AssemblyContext(build_space(build_uniform_partition(4), 1)), degenerate,
                       lookup_solution("sine_decay"), 0.0);
  EXPECT_THROW(eng.elliptic_projection(0.0), ProjectionFailure);
}

TEST(ProjectionDt, SeparableHeatSolution) {
  auto eng = make_engine("heat", lookup_solution("sine_decay"), 16, 2);
  for (double t : {0.0, 0.5, 1.0}) {
    const auto d = eng.projection_dt(t, 1).coeffs();
    const auto u = eng.elliptic_projection(t).coeffs();
    const auto d2 = eng.projection_dt(t, 2).coeffs();
    for (std::size_t i = 0; i < d.size(); ++i) {
      EXPECT_NEAR(d[i], -u[i], 1e-8);
      EXPECT_NEAR(d2[i], u[i], 1e-6);
    }
  }
}

TEST(ProjectionDt, SteadySolutionHasZeroDerivative) {
  auto eng = make_engine("cubic_flux", steady_sine(), 8, 2);
  EXPECT_LT(max_abs(eng.projection_dt(0.3, 1).coeffs()), 1e-10);
}

TEST(ProjectionDt, FourthOrderRichardson) {
  const auto s = lookup_solution("sine_poly");
  std::vector<std::vector<double>> d;
  for (double delta : {0.1, 0.05, 0.025}) {
    auto eng = make_engine("cubic_flux", s, 8, 2, delta);
    d.push_back(eng.projection_dt(0.5, 1).coeffs());
  }
  double e1 = 0, e2 = 0;
  for (std::size_t i = 0; i < d[0].size(); ++i) {
    e1 = std::max(e1, std::abs(d[0][i] - d[1][i]));
    e2 = std::max(e2, std::abs(d[1][i] - d[2][i]));
  }
  const double ratio = e1 / e2;  // 2^4 for a fourth-order stencil
  EXPECT_GT(ratio, 14.0);
  EXPECT_LT(ratio, 18.0);
}

TEST(ProjectionDt, RejectsOrder) {
  auto eng = make_engine("heat", lookup_solution("sine_decay"), 4, 1);
  EXPECT_THROW(eng.projection_dt(0.0, 3), ParameterError);
  EXPECT_THROW(eng.quasi_projection_z(0.0, 0), ParameterError);
}

TEST(QuasiProjection, SteadyGivesZero) {
  auto eng = make_engine("full_quasilinear", steady_sine(), 8, 3);
  for (int j = 1; j <= 2; ++j) EXPECT_LT(max_abs(eng.quasi_projection_z(0.5, j).coeffs()), 1e-10);
}

TEST(QuasiProjection, SuccessiveCorrectionsShrink) {
  const auto s = lookup_solution("sine_decay");
  for (int n : {16, 32, 64}) {
    auto eng = make_engine("cubic_flux", s, n, 2);
    const double z1 = l2_norm(eng.quasi_projection_z(0.5, 1));
    const double z2 = l2_norm(eng.quasi_projection_z(0.5, 2));
    EXPECT_LE(z2, z1) << "n=" << n;
  }
}

TEST(SuperconvergentIv, OrderConstraint) {
  auto eng1 = make_engine("heat", lookup_solution("sine_decay"), 8, 1);
  EXPECT_THROW(eng1.superconvergent_iv(1), InvalidQuasiOrder);
  EXPECT_EQ(eng1.superconvergent_iv(0).coeffs(), eng1.elliptic_projection(0.0).coeffs());
  auto eng2 = make_engine("heat", lookup_solution("sine_decay"), 8, 2);
  EXPECT_THROW(eng2.superconvergent_iv(1), InvalidQuasiOrder);
}

TEST(SuperconvergentIv, CubicWithOneCorrectionKeepsOptimalRate) {
  const auto s = lookup_solution("sine_decay");
  std::vector<double> errs, hs;
  for (int n : {4, 8, 16}) {
    auto eng = make_engine("cubic_flux", s, n, 3);
    errs.push_back(l2_error(eng.superconvergent_iv(1), s, 0.0));
    hs.push_back(1.0 / n);
  }
  EXPECT_NEAR(*eoc(errs, hs).back(), 4.0, 0.2);
}

TEST(FdStep, Admissibility) {
  auto ok = make_engine("heat", lookup_solution("sine_decay"), 4, 1);
  EXPECT_NO_THROW(ok.check_fd_step(1e-8));
  EXPECT_THROW(ok.check_fd_step(1e-12), ParameterError);
  auto coarse = make_engine("heat", lookup_solution("sine_decay"), 4, 1, 1e-2);
  EXPECT_THROW(coarse.check_fd_step(1.0), ParameterError);
}
