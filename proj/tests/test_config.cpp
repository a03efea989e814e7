#include <gtest/gtest.h>

#include "qpfem/config.hpp"
#include "qpfem/suites.hpp"

using namespace qpfem;

namespace {

const char* kMinimal = R"(# minimal study
[problem]
problem = heat
solution = sine_decay

[discretization]
degree = 1
meshes = 8 16 32 64
)";

int parse_error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST(ParseConfig, MinimalFillsDefaults) {
  const auto c = parse_config(kMinimal);
  EXPECT_EQ(c.problem, "heat");
  EXPECT_EQ(c.solution, "sine_decay");
  EXPECT_EQ(c.degree, 1);
  EXPECT_EQ(c.meshes, (std::vector<int>{8, 16, 32, 64}));
  EXPECT_EQ(c.T, 1.0);
  EXPECT_EQ(c.scheme, Scheme::gauss2);
  EXPECT_EQ(c.dt_rule.kind, DtRule::Kind::h);
  EXPECT_FALSE(c.lambda.has_value());
  EXPECT_EQ(c.initial_condition, InitialCondition::interpolant);
  EXPECT_EQ(c.neg_norm_modes, 512);
  EXPECT_EQ(c.norms.size(), kAllNorms.size());
  EXPECT_EQ(c.mode, StudyMode::evolve);
}

TEST(ParseConfig, FullDocument) {
  const auto c = parse_config(R"(
[problem]
problem = cubic_flux   # trailing comment
solution = sine_poly
lambda = 2.5
[discretization]
degree = 3
meshes = 4 8
perturb_amplitude = 0.2
seed = 42
[time]
scheme = implicit_midpoint
dt_rule = fixed:0.01
T = 0.5
dt_refine = 2
[study]
mode = projection
initial_condition = superconvergent(1)
theta_k = 1
norms = L2 knot_mid
neg_norm_modes = 256
fd_step = 5e-4
ellipticity_margin = 0.2
[output]
path = out.csv
)");
  EXPECT_EQ(*c.lambda, 2.5);
  EXPECT_EQ(c.degree, 3);
  EXPECT_EQ(c.perturb_amplitude, 0.2);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.scheme, Scheme::implicit_midpoint);
  EXPECT_EQ(c.dt_rule.kind, DtRule::Kind::fixed);
  EXPECT_EQ(c.dt_rule.value, 0.01);
  EXPECT_EQ(c.T, 0.5);
  EXPECT_EQ(c.dt_refine, 2);
  EXPECT_EQ(c.mode, StudyMode::projection);
  EXPECT_EQ(c.initial_condition, InitialCondition::superconvergent);
  EXPECT_EQ(c.superconvergent_k, 1);
  EXPECT_EQ(*c.theta_k, 1);
  EXPECT_EQ(c.norms, (std::vector<Norm>{Norm::L2, Norm::knot_mid}));
  EXPECT_EQ(c.neg_norm_modes, 256);
  EXPECT_EQ(c.fd_step, 5e-4);
  EXPECT_EQ(c.ellipticity_margin, 0.2);
  EXPECT_EQ(c.output, "out.csv");
}

TEST(ParseConfig, QuasiOrderConstraint) {
  EXPECT_EQ(parse_error_line(R"([problem]
problem = heat
solution = sine_decay
[discretization]
degree = 2
meshes = 8 16
[study]
initial_condition = superconvergent(1)
)"),
            8);
}

TEST(ParseConfig, DuplicateKey) {
  EXPECT_EQ(parse_error_line(R"([problem]
problem = heat
solution = sine_decay
problem = heat
)"),
            4);
}

TEST(ParseConfig, UnknownKeyAndSection) {
  EXPECT_EQ(parse_error_line(std::string(kMinimal) + "colour = blue\n"), 9);
  EXPECT_EQ(parse_error_line(std::string(kMinimal) + "[plot]\n"), 9);
  EXPECT_EQ(parse_error_line("degree = 1\n"), 1);
}

TEST(ParseConfig, UnresolvableNames) {
  EXPECT_EQ(parse_error_line(R"([problem]
problem = heat
solution = nosuch
[discretization]
degree = 1
meshes = 8 16
)"),
            3);
}

TEST(ParseConfig, MeshSequenceMustIncrease) {
  EXPECT_EQ(parse_error_line(R"([problem]
problem = heat
solution = sine_decay
[discretization]
degree = 1
meshes = 8 16 16
)"),
            6);
}

TEST(ParseConfig, MissingRequiredKey) {
  EXPECT_EQ(parse_error_line("[problem]\nproblem = heat\nsolution = sine_decay\n"), 0);
}

TEST(ParseConfig, BadValues) {
  const std::string head = "[problem]\nproblem = heat\nsolution = sine_decay\n[discretization]\n";
  EXPECT_EQ(parse_error_line(head + "degree = two\nmeshes = 8\n"), 5);
  EXPECT_EQ(parse_error_line(head + "degree = 1\nmeshes = 8\n[time]\ndt_rule = h2\n"), 8);
  EXPECT_EQ(parse_error_line(head + "degree = 1\nmeshes = 8\n[study]\nnorms = L3\n"), 8);
  EXPECT_EQ(parse_error_line(head + "degree = 1\nmeshes = 8\nperturb_amplitude = 0.5\n"), 7);
}

TEST(Suites, RegistryIsConsistent) {
  for (const auto& s : suite_registry()) {
    EXPECT_EQ(&lookup_suite(s.name), &s);
    EXPECT_FALSE(s.studies.empty());
    for (const auto& st : s.studies) {
      EXPECT_FALSE(st.expectations.empty());
      // expectations only for norms the config computes
      for (const auto& ex : st.expectations) EXPECT_TRUE(st.config.wants(ex.norm)) << s.name;
      if (st.check_negative_norm_bound)
        EXPECT_TRUE(st.config.wants(Norm::Hneg1) && st.config.wants(Norm::L2));
      if (st.check_knot_bound)
        EXPECT_TRUE(st.config.wants(Norm::knot_max) && st.config.wants(Norm::Linf));
    }
  }
  for (const char* name : {"baseline", "optimal_r1", "superconv_zeta", "quasi_theta", "negnorm", "knot"})
    EXPECT_NO_THROW(lookup_suite(name));
  EXPECT_THROW(lookup_suite("nosuch"), RegistryError);
}

TEST(Suites, MissetExpectationFails) {
  SuiteSpec s = lookup_suite("baseline");
  s.studies[0].expectations[0].expected = 3.0;
  const auto out = run_suite(s, false, 2);
  EXPECT_FALSE(out.passed());
  EXPECT_EQ(out.checks[0].verdict, Verdict::fail);
  EXPECT_EQ(out.checks[1].verdict, Verdict::pass);
}
