#pragma once

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qpfem/error.hpp"
#include "qpfem/problem.hpp"
#include "qpfem/study.hpp"

namespace qpfem {

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_words(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

inline double parse_double(const std::string& v, int line) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    throw ParseError(line, "expected a number, got '" + v + "'");
  return out;
}

inline long long parse_int(const std::string& v, int line) {
  long long out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    throw ParseError(line, "expected an integer, got '" + v + "'");
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
};

inline const std::map<std::string, std::vector<std::string>>& config_schema() {
  static const std::map<std::string, std::vector<std::string>> schema{
      {"problem", {"problem", "solution", "lambda"}},
      {"discretization", {"degree", "meshes", "perturb_amplitude", "seed"}},
      {"time", {"scheme", "dt_rule", "T", "dt_refine"}},
      {"study",
       {"mode", "initial_condition", "theta_k", "norms", "neg_norm_modes", "fd_step",
        "ellipticity_margin"}},
      {"output", {"path"}},
  };
  return schema;
}

}  // namespace detail

/// Parse a study configuration. Grammar (one statement per line):
///   `# comment`, `[section]`, `key = value`; blank lines ignored.
/// Keys are qualified by their section; see the README for the full table.
inline StudyConfig parse_config(const std::string& text) {
  using detail::Entry;
  std::map<std::string, Entry> entries;  // "section.key"
  std::string section;
  std::istringstream in(text);
  int lineno = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(lineno, "malformed section header");
      section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
      if (!detail::config_schema().count(section))
        throw ParseError(lineno, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected 'key = value'");
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (section.empty()) throw ParseError(lineno, "key '" + key + "' outside any section");
    const auto& keys = detail::config_schema().at(section);
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ParseError(lineno, "unknown key '" + key + "' in [" + section + "]");
    if (value.empty()) throw ParseError(lineno, "empty value for '" + key + "'");
    const std::string full = section + "." + key;
    if (entries.count(full)) throw ParseError(lineno, "duplicate key '" + key + "'");
    entries[full] = Entry{value, lineno};
  }

  auto find = [&](const std::string& k) -> const Entry* {
    auto it = entries.find(k);
    return it == entries.end() ? nullptr : &it->second;
  };
  auto require = [&](const std::string& k) -> const Entry& {
    const Entry* e = find(k);
    if (!e) throw ParseError(0, "missing required key '" + k + "'");
    return *e;
  };

  StudyConfig cfg;
  {
    const Entry& e = require("problem.problem");
    try {
      lookup_problem(e.value);
    } catch (const RegistryError& err) {
      throw ParseError(e.line, err.what());
    }
    cfg.problem = e.value;
  }
  {
    const Entry& e = require("problem.solution");
    try {
      lookup_solution(e.value);
    } catch (const RegistryError& err) {
      throw ParseError(e.line, err.what());
    }
    cfg.solution = e.value;
  }
  if (const Entry* e = find("problem.lambda"); e && e->value != "auto") {
    cfg.lambda = detail::parse_double(e->value, e->line);
    if (*cfg.lambda < 0.0) throw ParseError(e->line, "lambda must be non-negative");
  }

  const Entry& deg = require("discretization.degree");
  cfg.degree = static_cast<int>(detail::parse_int(deg.value, deg.line));
  if (cfg.degree < 1 || cfg.degree > 8) throw ParseError(deg.line, "degree must be in 1..8");

  const Entry& meshes = require("discretization.meshes");
  for (const auto& w : detail::split_words(meshes.value)) {
    const long long n = detail::parse_int(w, meshes.line);
    if (n < 2) throw ParseError(meshes.line, "mesh sizes must be >= 2");
    if (!cfg.meshes.empty() && n <= cfg.meshes.back())
      throw ParseError(meshes.line, "mesh sequence must be strictly increasing");
    cfg.meshes.push_back(static_cast<int>(n));
  }
  if (cfg.meshes.empty()) throw ParseError(meshes.line, "empty mesh sequence");

  if (const Entry* e = find("discretization.perturb_amplitude")) {
    cfg.perturb_amplitude = detail::parse_double(e->value, e->line);
    if (cfg.perturb_amplitude < 0.0 || cfg.perturb_amplitude >= 0.5)
      throw ParseError(e->line, "perturb_amplitude must lie in [0, 0.5)");
  }
  if (const Entry* e = find("discretization.seed")) {
    const long long v = detail::parse_int(e->value, e->line);
    if (v < 0) throw ParseError(e->line, "seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(v);
  }

  if (const Entry* e = find("time.scheme")) {
    if (e->value == "gauss2")
      cfg.scheme = Scheme::gauss2;
    else if (e->value == "implicit_midpoint")
      cfg.scheme = Scheme::implicit_midpoint;
    else
      throw ParseError(e->line, "unknown scheme '" + e->value + "'");
  }
  if (const Entry* e = find("time.dt_rule")) {
    if (e->value == "h") {
      cfg.dt_rule.kind = DtRule::Kind::h;
    } else if (e->value == "h32") {
      cfg.dt_rule.kind = DtRule::Kind::h32;
    } else if (e->value.rfind("fixed:", 0) == 0) {
      cfg.dt_rule.kind = DtRule::Kind::fixed;
      cfg.dt_rule.value = detail::parse_double(e->value.substr(6), e->line);
      if (!(cfg.dt_rule.value > 0.0)) throw ParseError(e->line, "fixed step must be positive");
    } else {
      throw ParseError(e->line, "dt_rule must be h, h32 or fixed:<value>");
    }
  }
  if (const Entry* e = find("time.T")) {
    cfg.T = detail::parse_double(e->value, e->line);
    if (!(cfg.T > 0.0)) throw ParseError(e->line, "T must be positive");
  }
  if (const Entry* e = find("time.dt_refine")) {
    cfg.dt_refine = static_cast<int>(detail::parse_int(e->value, e->line));
    if (cfg.dt_refine < 1) throw ParseError(e->line, "dt_refine must be >= 1");
  }

  if (const Entry* e = find("study.mode")) {
    if (e->value == "evolve")
      cfg.mode = StudyMode::evolve;
    else if (e->value == "projection")
      cfg.mode = StudyMode::projection;
    else
      throw ParseError(e->line, "mode must be evolve or projection");
  }
  if (const Entry* e = find("study.initial_condition")) {
    const std::string& v = e->value;
    if (v == "interpolant") {
      cfg.initial_condition = InitialCondition::interpolant;
    } else if (v == "elliptic_projection") {
      cfg.initial_condition = InitialCondition::elliptic_projection;
    } else if (v.rfind("superconvergent(", 0) == 0 && v.back() == ')') {
      cfg.initial_condition = InitialCondition::superconvergent;
      const std::string k = detail::trim(std::string_view(v).substr(16, v.size() - 17));
      cfg.superconvergent_k = static_cast<int>(detail::parse_int(k, e->line));
      if (cfg.superconvergent_k < 0 || 2 * cfg.superconvergent_k > cfg.degree - 1)
        throw ParseError(e->line, "superconvergent(k) needs 0 <= 2k <= r-1");
    } else {
      throw ParseError(e->line,
                       "initial_condition must be interpolant, elliptic_projection or "
                       "superconvergent(k)");
    }
  }
  if (const Entry* e = find("study.theta_k")) {
    cfg.theta_k = static_cast<int>(detail::parse_int(e->value, e->line));
    if (*cfg.theta_k < 0) throw ParseError(e->line, "theta_k must be >= 0");
  }
  if (const Entry* e = find("study.norms"); e && e->value != "all") {
    cfg.norms.clear();
    for (const auto& w : detail::split_words(e->value)) {
      const auto nm = norm_from_name(w);
      if (!nm) throw ParseError(e->line, "unknown norm '" + w + "'");
      if (!cfg.wants(*nm)) cfg.norms.push_back(*nm);
    }
  }
  if (const Entry* e = find("study.neg_norm_modes")) {
    cfg.neg_norm_modes = static_cast<int>(detail::parse_int(e->value, e->line));
    if (cfg.neg_norm_modes < 1) throw ParseError(e->line, "neg_norm_modes must be >= 1");
  }
  if (const Entry* e = find("study.fd_step")) {
    cfg.fd_step = detail::parse_double(e->value, e->line);
    if (!(cfg.fd_step > 0.0)) throw ParseError(e->line, "fd_step must be positive");
  }
  if (const Entry* e = find("study.ellipticity_margin")) {
    cfg.ellipticity_margin = detail::parse_double(e->value, e->line);
    if (cfg.ellipticity_margin < 0.0)
      throw ParseError(e->line, "ellipticity_margin must be non-negative");
  }
  if (const Entry* e = find("output.path")) cfg.output = e->value;
  return cfg;
}

}  // namespace qpfem
