#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qpfem/assembly.hpp"
#include "qpfem/error_lab.hpp"
#include "qpfem/fe_space.hpp"
#include "qpfem/mesh.hpp"
#include "qpfem/problem.hpp"
#include "qpfem/projection.hpp"
#include "qpfem/timestepper.hpp"

namespace qpfem {

/// Measured quantities, in CSV column order.
enum class Norm { L2, H1, Linf, Hneg1, Hneg2, knot_max, knot_mid, zeta_H1, theta_L2 };

inline constexpr std::array<Norm, 9> kAllNorms{Norm::L2,       Norm::H1,       Norm::Linf,
                                               Norm::Hneg1,    Norm::Hneg2,    Norm::knot_max,
                                               Norm::knot_mid, Norm::zeta_H1,  Norm::theta_L2};

inline const char* norm_name(Norm n) {
  static constexpr const char* names[] = {"L2",       "H1",       "Linf",    "Hneg1",   "Hneg2",
                                          "knot_max", "knot_mid", "zeta_H1", "theta_L2"};
  return names[static_cast<int>(n)];
}

inline std::optional<Norm> norm_from_name(const std::string& s) {
  for (Norm n : kAllNorms)
    if (s == norm_name(n)) return n;
  return std::nullopt;
}

enum class StudyMode { evolve, projection };

enum class InitialCondition { interpolant, elliptic_projection, superconvergent };

struct DtRule {
  enum class Kind { h, h32, fixed } kind = Kind::h;
  double value = 0.0;  ///< step for Kind::fixed

  std::string describe() const {
    if (kind == Kind::h) return "h";
    if (kind == Kind::h32) return "h32";
    std::ostringstream os;
    os << "fixed:" << value;
    return os.str();
  }
};

struct StudyConfig {
  std::string problem;
  std::string solution;
  int degree = 1;
  std::vector<int> meshes;
  double perturb_amplitude = 0.0;
  std::uint64_t seed = 1;
  StudyMode mode = StudyMode::evolve;
  Scheme scheme = Scheme::gauss2;
  DtRule dt_rule;
  int dt_refine = 1;  ///< divides the step chosen by dt_rule
  double T = 1.0;
  std::optional<double> lambda;  ///< nullopt = automatic
  InitialCondition initial_condition = InitialCondition::interpolant;
  int superconvergent_k = 0;
  std::optional<int> theta_k;  ///< nullopt = superconvergent_k
  std::vector<Norm> norms{kAllNorms.begin(), kAllNorms.end()};
  int neg_norm_modes = 512;
  double fd_step = ProjectionEngine::kDefaultFdStep;
  double ellipticity_margin = 0.1;
  std::string output;

  int effective_theta_k() const { return theta_k.value_or(superconvergent_k); }
  bool wants(Norm n) const { return std::find(norms.begin(), norms.end(), n) != norms.end(); }
};

struct ErrorRecord {
  int n = 0;
  double h = 0.0;
  int r = 0;
  std::string scheme;
  std::optional<double> dt;  ///< nullopt in projection mode
  std::array<std::optional<double>, kAllNorms.size()> errors{};
  std::map<double, double> knot_table;  ///< per-knot max over checkpoints
  std::vector<double> checkpoints;
  int steps = 0;
  int max_newton_iterations = 0;
  double wall_ms = 0.0;
  bool ok = true;
  std::string reason;

  std::optional<double> get(Norm n) const { return errors[static_cast<int>(n)]; }
};

struct StudyResult {
  StudyConfig config;
  double lambda = 0.0;
  EllipticityReport ellipticity;
  std::vector<ErrorRecord> records;
  /// Rates over consecutive successful levels, per norm.
  std::map<Norm, std::vector<std::optional<double>>> eoc;

  std::vector<const ErrorRecord*> successful() const {
    std::vector<const ErrorRecord*> out;
    for (const auto& r : records)
      if (r.ok) out.push_back(&r);
    return out;
  }

  /// Rate on the final refinement pair, if available.
  std::optional<double> final_rate(Norm n) const {
    auto it = eoc.find(n);
    if (it == eoc.end() || it->second.empty()) return std::nullopt;
    return it->second.back();
  }
};

inline std::vector<double> study_checkpoints(double T) { return {T / 4, T / 2, 3 * T / 4, T}; }

/// Time step for a level: the dt_rule target, shrunk so every quarter of
/// [0,T] holds an integer number of steps.
inline double level_time_step(const StudyConfig& cfg, double h) {
  double target = h;
  if (cfg.dt_rule.kind == DtRule::Kind::h32) target = std::pow(h, 1.5);
  if (cfg.dt_rule.kind == DtRule::Kind::fixed) target = cfg.dt_rule.value;
  target /= cfg.dt_refine;
  const double quarter = cfg.T / 4;
  const double steps = std::ceil(quarter / target - 1e-9);
  return quarter / steps;
}

namespace detail {

inline ErrorRecord run_level(const StudyConfig& cfg, const NonlinearProblem& p,
                             const ManufacturedSolution& s, double lambda, int n) {
  const auto start = std::chrono::steady_clock::now();
  ErrorRecord rec;
  rec.n = n;
  rec.r = cfg.degree;
  rec.scheme = cfg.mode == StudyMode::projection ? "none" : to_string(cfg.scheme);
  try {
    Partition part = cfg.perturb_amplitude > 0.0
                         ? build_perturbed_partition(n, cfg.perturb_amplitude, cfg.seed)
                         : build_uniform_partition(n);
    rec.h = part.h_max();
    const SpacePtr space = build_space(std::move(part), cfg.degree);
    AssemblyContext ctx(space);
    ProjectionEngine engine(ctx, p, s, lambda, cfg.fd_step);
    rec.checkpoints = study_checkpoints(cfg.T);

    std::map<double, FEFunction> states;
    if (cfg.mode == StudyMode::evolve) {
      TimeGrid grid{0.0, cfg.T, level_time_step(cfg, rec.h), cfg.scheme};
      rec.dt = grid.dt;
      FEFunction U0(space);
      switch (cfg.initial_condition) {
        case InitialCondition::interpolant:
          U0 = interpolate(space, [&](double x) { return s.u(x, 0.0); });
          break;
        case InitialCondition::elliptic_projection:
          U0 = engine.elliptic_projection(0.0);
          break;
        case InitialCondition::superconvergent:
          U0 = engine.superconvergent_iv(cfg.superconvergent_k);
          break;
      }
      SemidiscreteSystem sys(ctx, p, s);
      IntegrationResult res = integrate(U0, grid, sys, NewtonSettings{}, rec.checkpoints);
      rec.steps = res.steps;
      rec.max_newton_iterations = res.max_newton_iterations;
      states = std::move(res.snapshots);
    } else {
      for (double t : rec.checkpoints) states.insert_or_assign(t, engine.elliptic_projection(t));
    }

    auto bump = [&](Norm nm, double v) {
      auto& slot = rec.errors[static_cast<int>(nm)];
      slot = std::max(slot.value_or(0.0), v);
    };
    const bool want_neg = cfg.wants(Norm::Hneg1) || cfg.wants(Norm::Hneg2);
    const bool want_knots = cfg.wants(Norm::knot_max) || cfg.wants(Norm::knot_mid);
    const bool want_zt = cfg.wants(Norm::zeta_H1) || cfg.wants(Norm::theta_L2);
    for (double t : rec.checkpoints) {
      const FEFunction& U = states.at(t);
      if (cfg.wants(Norm::L2)) bump(Norm::L2, l2_error(U, s, t));
      if (cfg.wants(Norm::H1)) bump(Norm::H1, h1_error(U, s, t));
      if (cfg.wants(Norm::Linf)) bump(Norm::Linf, linf_error(U, s, t));
      if (want_neg) {
        const auto coeffs =
            sine_coefficients(U, [&](double x) { return s.u(x, t); }, cfg.neg_norm_modes);
        if (cfg.wants(Norm::Hneg1)) bump(Norm::Hneg1, negative_norm_from_coefficients(coeffs, 1));
        if (cfg.wants(Norm::Hneg2)) bump(Norm::Hneg2, negative_norm_from_coefficients(coeffs, 2));
      }
      if (want_knots) {
        const auto knots = knot_errors(U, s, t);
        for (const auto& [x, v] : knots) rec.knot_table[x] = std::max(rec.knot_table[x], v);
        if (cfg.wants(Norm::knot_max)) bump(Norm::knot_max, max_value(knots));
        if (cfg.wants(Norm::knot_mid)) {
          auto it = knots.find(0.5);
          if (it != knots.end()) bump(Norm::knot_mid, it->second);
        }
      }
      if (want_zt) {
        const ZetaTheta zt = zeta_theta_diagnostics(U, engine, t, cfg.effective_theta_k());
        if (cfg.wants(Norm::zeta_H1)) bump(Norm::zeta_H1, zt.zeta_H1);
        if (cfg.wants(Norm::theta_L2)) bump(Norm::theta_L2, zt.theta_L2);
      }
    }
  } catch (const Error& e) {
    rec.ok = false;
    rec.reason = e.what();
    rec.errors.fill(std::nullopt);
  }
  rec.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

}  // namespace detail

/// Throws RegistryError, EllipticityViolation or InvalidQuasiOrder on an
/// invalid configuration; per-level failures are recorded, not thrown.
inline StudyResult run_study(const StudyConfig& cfg, int jobs = 1) {
  const NonlinearProblem p = lookup_problem(cfg.problem);
  const ManufacturedSolution s = lookup_solution(cfg.solution);
  if (cfg.initial_condition == InitialCondition::superconvergent &&
      (cfg.superconvergent_k < 0 || 2 * cfg.superconvergent_k > cfg.degree - 1))
    throw InvalidQuasiOrder("superconvergent initial condition needs 2k <= r-1");

  StudyResult result;
  result.config = cfg;
  result.ellipticity = verify_ellipticity(p, s, cfg.T, cfg.ellipticity_margin);
  result.lambda = cfg.lambda.value_or(default_lambda(result.ellipticity));
  result.records.resize(cfg.meshes.size());

  const int workers = std::clamp(jobs, 1, std::max<int>(1, static_cast<int>(cfg.meshes.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cfg.meshes.size(); i = next++)
      result.records[i] = detail::run_level(cfg, p, s, result.lambda, cfg.meshes[i]);
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  const auto ok = result.successful();
  std::vector<double> hs;
  for (const auto* r : ok) hs.push_back(r->h);
  for (Norm nm : cfg.norms) {
    std::vector<double> errs;
    bool complete = true;
    for (const auto* r : ok) {
      if (!r->get(nm)) complete = false;
      errs.push_back(r->get(nm).value_or(0.0));
    }
    if (complete && errs.size() >= 2) result.eoc[nm] = eoc(errs, hs);
  }
  return result;
}

inline std::string format_number(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16g", v);
  return buf;
}

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_number(*v) : "nan";
}

inline void write_csv(std::ostream& os, const StudyResult& result) {
  os << "n,h,r,scheme,dt";
  for (Norm nm : kAllNorms) os << ',' << norm_name(nm);
  os << ",wall_ms\n";
  for (const auto& r : result.records) {
    os << r.n << ',' << format_number(r.h) << ',' << r.r << ',' << r.scheme << ','
       << format_optional(r.dt);
    for (Norm nm : kAllNorms) os << ',' << format_optional(r.get(nm));
    os << ',' << format_number(r.wall_ms) << '\n';
  }
}

inline void write_eoc_table(std::ostream& os, const StudyResult& result) {
  const StudyConfig& c = result.config;
  os << "study: problem=" << c.problem << " solution=" << c.solution << " r=" << c.degree
     << " mode=" << (c.mode == StudyMode::evolve ? "evolve" : "projection");
  if (c.mode == StudyMode::evolve)
    os << " scheme=" << to_string(c.scheme) << " dt_rule=" << c.dt_rule.describe();
  os << " lambda=" << format_number(result.lambda) << '\n';
  for (const auto& r : result.records)
    if (!r.ok) os << "  level n=" << r.n << " failed: " << r.reason << '\n';
  const auto ok = result.successful();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-10s", "norm");
  os << buf;
  for (std::size_t i = 1; i < ok.size(); ++i) {
    std::snprintf(buf, sizeof buf, " %9s", (std::to_string(ok[i - 1]->n) + "->" + std::to_string(ok[i]->n)).c_str());
    os << buf;
  }
  os << '\n';
  for (const auto& [nm, rates] : result.eoc) {
    std::snprintf(buf, sizeof buf, "%-10s", norm_name(nm));
    os << buf;
    for (const auto& rate : rates) {
      if (rate)
        std::snprintf(buf, sizeof buf, " %9.4f", *rate);
      else
        std::snprintf(buf, sizeof buf, " %9s", "exact");
      os << buf;
    }
    os << '\n';
  }
}

/// Largest relative change of each listed norm over all levels when dt is halved.
inline std::map<Norm, double> dt_halving_probe(const StudyConfig& cfg, const StudyResult& base,
                                               const std::vector<Norm>& norms, int jobs = 1) {
  StudyConfig fine = cfg;
  fine.dt_refine = cfg.dt_refine * 2;
  const StudyResult refined = run_study(fine, jobs);
  std::map<Norm, double> out;
  for (Norm nm : norms) {
    double worst = 0.0;
    for (std::size_t i = 0; i < base.records.size(); ++i) {
      const auto a = base.records[i].get(nm);
      const auto b = refined.records[i].get(nm);
      if (!a || !b) {
        worst = std::numeric_limits<double>::infinity();
        continue;
      }
      if (*b == 0.0) continue;
      worst = std::max(worst, std::abs(*a - *b) / *b);
    }
    out[nm] = worst;
  }
  return out;
}

}  // namespace qpfem
