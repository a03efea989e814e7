#pragma once

#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qpfem/error.hpp"
#include "qpfem/study.hpp"

namespace qpfem {

/// Expected final-pair EOC for one norm. With at_least set only the lower
/// bound expected - tol is enforced.
struct Expectation {
  Norm norm;
  double expected = 0.0;
  double tol = 0.0;
  bool at_least = false;
  std::string claim;
};

struct SuiteStudy {
  std::string label;
  StudyConfig config;
  std::vector<Expectation> expectations;
  bool check_negative_norm_bound = false;  ///< Hneg1 <= L2/pi + 1e-12 on every record
  bool check_knot_bound = false;           ///< knot_max <= Linf on every record
};

struct SuiteSpec {
  std::string name;
  std::string summary;
  std::vector<SuiteStudy> studies;
};

namespace detail {

inline StudyConfig suite_config(const std::string& problem, int r) {
  StudyConfig c;
  c.problem = problem;
  c.solution = "sine_decay";
  c.degree = r;
  c.meshes = {8, 16, 32, 64};
  c.T = 1.0;
  return c;
}

inline StudyConfig with_norms(StudyConfig c, std::vector<Norm> norms) {
  c.norms = std::move(norms);
  return c;
}

}  // namespace detail

inline const std::vector<SuiteSpec>& suite_registry() {
  using detail::suite_config;
  using detail::with_norms;
  static const std::vector<SuiteSpec> suites = [] {
    std::vector<SuiteSpec> out;

    {
      SuiteSpec s{"baseline", "linear heat equation, r=1, interpolant start", {}};
      StudyConfig c = with_norms(suite_config("heat", 1), {Norm::L2, Norm::H1});
      s.studies.push_back({"heat_r1", c,
                           {{Norm::L2, 2.0, 0.1, false, "classical L2 rate h^2 for linear elements"},
                            {Norm::H1, 1.0, 0.1, false, "classical H1 rate h for linear elements"}}});
      out.push_back(std::move(s));
    }
    {
      SuiteSpec s{"optimal_r1", "optimal rates for genuinely quasilinear problems, r=1", {}};
      for (const char* prob : {"full_quasilinear", "burgers_react"}) {
        StudyConfig c = with_norms(suite_config(prob, 1), {Norm::L2, Norm::H1});
        s.studies.push_back(
            {std::string(prob) + "_r1", c,
             {{Norm::L2, 2.0, 0.15, false, "optimal L2 error h^{r+1} already for r=1"},
              {Norm::H1, 1.0, 0.15, false, "optimal H1 error h^r"}}});
      }
      out.push_back(std::move(s));
    }
    {
      SuiteSpec s{"optimal_r2", "optimal global rates, r=2", {}};
      StudyConfig c = with_norms(suite_config("cubic_flux", 2), {Norm::L2, Norm::H1, Norm::Linf});
      s.studies.push_back({"cubic_flux_r2", c,
                           {{Norm::L2, 3.0, 0.15, false, "optimal L2 error h^{r+1}"},
                            {Norm::H1, 2.0, 0.15, false, "optimal H1 error h^r"},
                            {Norm::Linf, 3.0, 0.2, false, "maximum-norm error h^{r+1} in 1D"}}});
      out.push_back(std::move(s));
    }
    {
      SuiteSpec s{"superconv_zeta", "gradient superconvergence of U - u_h", {}};
      for (int r : {1, 2}) {
        StudyConfig c = with_norms(suite_config("cubic_flux", r), {Norm::zeta_H1});
        c.initial_condition = InitialCondition::elliptic_projection;
        c.dt_rule.kind = DtRule::Kind::h32;
        s.studies.push_back({"cubic_flux_r" + std::to_string(r), c,
                             {{Norm::zeta_H1, r + 1.0, 0.2, false,
                               "zeta = u_h - U is one order better than the H1 error (h^{r+1})"}}});
      }
      out.push_back(std::move(s));
    }
    {
      SuiteSpec s{"quasi_theta", "remainder after quasi-projection correction, r=2, k=0", {}};
      StudyConfig c = with_norms(suite_config("cubic_flux", 2), {Norm::theta_L2});
      c.initial_condition = InitialCondition::superconvergent;
      c.dt_rule.kind = DtRule::Kind::h32;
      s.studies.push_back(
          {"cubic_flux_r2_k0", c,
           {{Norm::theta_L2, 4.0, 0.25, false, "theta_k = O(h^{2r}) for r >= 2"}}});
      out.push_back(std::move(s));
    }
    {
      SuiteSpec s{"negnorm", "negative-norm superconvergence, r=2, k=0", {}};
      StudyConfig c = with_norms(suite_config("cubic_flux", 2), {Norm::L2, Norm::Hneg1, Norm::Hneg2});
      c.initial_condition = InitialCondition::superconvergent;
      c.dt_rule.kind = DtRule::Kind::h32;
      SuiteStudy st{"cubic_flux_r2_k0", c,
                    {{Norm::Hneg1, 4.0, 0.25, false, "H^{-1} error h^{q+1} with q = r+1"}}};
      st.check_negative_norm_bound = true;
      s.studies.push_back(std::move(st));
      out.push_back(std::move(s));
    }
    {
      SuiteSpec s{"knot", "pointwise superconvergence at the mesh knot x=1/2, r=2, k=0", {}};
      StudyConfig c =
          with_norms(suite_config("cubic_flux", 2), {Norm::Linf, Norm::knot_max, Norm::knot_mid});
      c.initial_condition = InitialCondition::superconvergent;
      c.dt_rule.kind = DtRule::Kind::h32;
      SuiteStudy st{"cubic_flux_r2_k0", c,
                    {{Norm::knot_mid, 3.3, 0.0, true,
                      "knot error O(h^{2r-1/2}); higher measured rates accepted"}}};
      st.check_knot_bound = true;
      s.studies.push_back(std::move(st));
      out.push_back(std::move(s));
    }
    {
      SuiteSpec s{"projection", "elliptic projection error eta = u_h - u", {}};
      for (int r : {1, 2}) {
        StudyConfig c = suite_config("cubic_flux", r);
        c.mode = StudyMode::projection;
        c.norms = {Norm::L2, Norm::H1, Norm::Hneg1};
        std::vector<Expectation> ex{
            {Norm::L2, r + 1.0, 0.1, false, "projection error h^{r+1} in L2"},
            {Norm::H1, double(r), 0.1, false, "projection error h^r in H1"}};
        if (r == 2) ex.push_back({Norm::Hneg1, 4.0, 0.25, false, "projection error h^{2r} in H^{-1}"});
        s.studies.push_back({"cubic_flux_r" + std::to_string(r), c, ex});
      }
      out.push_back(std::move(s));
    }
    {
      SuiteSpec s{"quasi_z", "first quasi-projection correction z_1, r=2", {}};
      StudyConfig c = with_norms(suite_config("cubic_flux", 2), {Norm::theta_L2});
      // Projection mode sets U = u_h, so theta_1 reduces to z_1.
      c.mode = StudyMode::projection;
      c.theta_k = 1;
      s.studies.push_back({"cubic_flux_r2_z1", c,
                           {{Norm::theta_L2, 5.0, 0.3, false, "||z_j|| = O(h^{s+q+2j}), j=1"}}});
      out.push_back(std::move(s));
    }
    return out;
  }();
  return suites;
}

inline const SuiteSpec& lookup_suite(const std::string& name) {
  for (const auto& s : suite_registry())
    if (s.name == name) return s;
  std::string known;
  for (const auto& s : suite_registry()) known += " " + s.name;
  throw RegistryError("unknown suite '" + name + "' (known:" + known + ")");
}

enum class Verdict { pass, fail, skipped };

struct CheckLine {
  std::string study;
  std::string what;
  Verdict verdict = Verdict::fail;
  std::string detail;
};

struct SuiteOutcome {
  std::string suite;
  std::vector<CheckLine> checks;
  std::vector<StudyResult> results;

  bool passed() const {
    for (const auto& c : checks)
      if (c.verdict == Verdict::fail) return false;
    return !checks.empty();
  }
};

inline constexpr double kAuditLimit = 0.10;

inline const char* verdict_name(Verdict v) {
  return v == Verdict::pass ? "PASS" : v == Verdict::fail ? "FAIL" : "SKIP";
}

namespace detail {

inline std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

}  // namespace detail

/// Check one study against its expectations on the final two refinement pairs;
/// strict adds the dt-halving audit.
inline void check_study(const SuiteStudy& st, const StudyResult& res, bool strict, int jobs,
                        std::vector<CheckLine>& out) {
  for (const auto& rec : res.records)
    if (!rec.ok)
      out.push_back({st.label, "level n=" + std::to_string(rec.n), Verdict::fail, rec.reason});

  for (const Expectation& ex : st.expectations) {
    CheckLine line{st.label, std::string(norm_name(ex.norm)) + " EOC", Verdict::fail, {}};
    const auto it = res.eoc.find(ex.norm);
    const std::string target =
        ex.at_least ? detail::fmt(">= %.2f", ex.expected)
                    : detail::fmt("%.2f +- %.2f", ex.expected, ex.tol);
    // rates of the final two refinement pairs; exact pairs (no rate) are excluded
    const std::size_t available = it == res.eoc.end() ? 0 : it->second.size();
    std::vector<double> rates;
    for (std::size_t k = available >= 2 ? available - 2 : 0; k < available; ++k)
      if (it->second[k]) rates.push_back(*it->second[k]);
    if (available < 2) {
      line.detail = "fewer than two rates available; expected " + target;
    } else if (rates.empty()) {
      line.verdict = Verdict::skipped;
      line.detail = "exact reproduction, excluded; expected " + target;
    } else {
      bool ok = true;
      std::string measured = "measured";
      for (double rate : rates) {
        ok = ok && (ex.at_least ? rate >= ex.expected - ex.tol : std::abs(rate - ex.expected) <= ex.tol);
        measured += detail::fmt(" %.4f", rate);
      }
      line.verdict = ok ? Verdict::pass : Verdict::fail;
      line.detail = measured + ", expected " + target;
    }
    line.detail += " [" + ex.claim + "]";
    out.push_back(std::move(line));
  }

  if (st.check_negative_norm_bound) {
    CheckLine line{st.label, "Hneg1 <= L2/pi", Verdict::pass, "all records"};
    for (const auto& rec : res.records) {
      const auto neg = rec.get(Norm::Hneg1), l2 = rec.get(Norm::L2);
      if (!neg || !l2 || *neg > *l2 / std::numbers::pi + 1e-12) {
        line.verdict = Verdict::fail;
        line.detail = "violated at n=" + std::to_string(rec.n);
        break;
      }
    }
    out.push_back(std::move(line));
  }
  if (st.check_knot_bound) {
    CheckLine line{st.label, "knot_max <= Linf", Verdict::pass, "all records"};
    for (const auto& rec : res.records) {
      const auto k = rec.get(Norm::knot_max), li = rec.get(Norm::Linf);
      if (!k || !li || *k > *li) {
        line.verdict = Verdict::fail;
        line.detail = "violated at n=" + std::to_string(rec.n);
        break;
      }
    }
    out.push_back(std::move(line));
  }

  if (strict && st.config.mode == StudyMode::evolve) {
    std::vector<Norm> norms;
    for (const auto& ex : st.expectations) norms.push_back(ex.norm);
    const auto change = dt_halving_probe(st.config, res, norms, jobs);
    for (const auto& [nm, v] : change) {
      out.push_back({st.label, std::string("dt audit ") + norm_name(nm),
                     v < kAuditLimit ? Verdict::pass : Verdict::fail,
                     detail::fmt("max relative change %.3g under dt halving (limit %.2f)", v,
                                 kAuditLimit)});
    }
  }
}

/// Run every study of a suite. Invalid configurations propagate as exceptions.
inline SuiteOutcome run_suite(const SuiteSpec& suite, bool strict, int jobs = 1) {
  SuiteOutcome out;
  out.suite = suite.name;
  for (const auto& st : suite.studies) {
    out.results.push_back(run_study(st.config, jobs));
    check_study(st, out.results.back(), strict, jobs, out.checks);
  }
  return out;
}

inline void print_outcome(std::ostream& os, const SuiteOutcome& o) {
  for (const auto& c : o.checks)
    os << verdict_name(c.verdict) << "  " << o.suite << '/' << c.study << "  " << c.what << ": "
       << c.detail << '\n';
}

}  // namespace qpfem
