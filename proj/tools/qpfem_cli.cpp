#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qpfem/qpfem.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitRateFailure = 1;
constexpr int kExitInfrastructure = 2;

int cmd_study(const std::string& config_path, std::string output, int jobs) {
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "study: cannot read config '" << config_path << "'\n";
    return kExitInfrastructure;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    const qpfem::StudyConfig cfg = qpfem::parse_config(buf.str());
    if (output.empty()) output = cfg.output;
    const qpfem::StudyResult res = qpfem::run_study(cfg, jobs);
    for (const auto& rec : res.records)
      if (!rec.ok) std::cerr << "study: level n=" << rec.n << " aborted: " << rec.reason << '\n';
    if (!output.empty()) {
      std::ofstream out(output);
      if (!out) {
        std::cerr << "study: cannot write '" << output << "'\n";
        return kExitInfrastructure;
      }
      qpfem::write_csv(out, res);
      if (!out) {
        std::cerr << "study: write to '" << output << "' failed\n";
        return kExitInfrastructure;
      }
    } else {
      qpfem::write_csv(std::cout, res);
    }
    // keep stdout pure CSV when it carries the data
    qpfem::write_eoc_table(output.empty() ? std::cerr : std::cout, res);
    if (res.successful().size() != res.records.size()) return kExitInfrastructure;
  } catch (const qpfem::Error& e) {
    std::cerr << "study: " << e.what() << '\n';
    return kExitInfrastructure;
  }
  return kExitPass;
}

int cmd_verify(const std::string& suite_name, bool strict, int jobs,
               const std::vector<std::string>& overrides) {
  try {
    qpfem::SuiteSpec suite = qpfem::lookup_suite(suite_name);
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      const auto norm = qpfem::norm_from_name(o.substr(0, eq));
      if (eq == std::string::npos || !norm) {
        std::cerr << "verify: bad --expect '" << o << "' (use NORM=RATE)\n";
        return kExitInfrastructure;
      }
      const double rate = std::stod(o.substr(eq + 1));
      bool used = false;
      for (auto& st : suite.studies)
        for (auto& ex : st.expectations)
          if (ex.norm == *norm) {
            ex.expected = rate;
            used = true;
          }
      if (!used) {
        std::cerr << "verify: suite has no expectation for " << qpfem::norm_name(*norm) << '\n';
        return kExitInfrastructure;
      }
    }
    std::cout << "suite " << suite.name << ": " << suite.summary << '\n';
    const qpfem::SuiteOutcome outcome = qpfem::run_suite(suite, strict, jobs);
    qpfem::print_outcome(std::cout, outcome);
    const bool ok = outcome.passed();
    std::cout << (ok ? "suite PASSED" : "suite FAILED") << '\n';
    return ok ? kExitPass : kExitRateFailure;
  } catch (const qpfem::Error& e) {
    std::cerr << "verify: " << e.what() << '\n';
    return kExitInfrastructure;
  } catch (const std::exception& e) {
    std::cerr << "verify: " << e.what() << '\n';
    return kExitInfrastructure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convergence studies for 1D quasilinear parabolic Galerkin schemes"};
  app.require_subcommand(1);

  std::string config_path, output;
  int jobs = 1;
  auto* study = app.add_subcommand("study", "run a convergence study and emit CSV");
  study->add_option("--config", config_path, "study configuration file")->required();
  study->add_option("--output", output, "CSV path (default: [output] path, else stdout)");
  study->add_option("--jobs", jobs, "mesh levels run concurrently")->check(CLI::PositiveNumber);

  std::string suite;
  bool strict = false;
  int verify_jobs = 1;
  std::vector<std::string> overrides;
  auto* verify = app.add_subcommand("verify", "check a shipped suite against its expected rates");
  verify->add_option("suite", suite, "suite name")->required();
  verify->add_flag("--strict", strict, "also require the dt-halving audit to pass");
  verify->add_option("--jobs", verify_jobs, "mesh levels run concurrently")
      ->check(CLI::PositiveNumber);
  verify->add_option("--expect", overrides, "override an expected rate, NORM=RATE");
  auto* list = app.add_subcommand("list", "list suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInfrastructure;
  }

  if (*study) return cmd_study(config_path, output, jobs);
  if (*verify) return cmd_verify(suite, strict, verify_jobs, overrides);
  if (*list) {
    for (const auto& s : qpfem::suite_registry()) std::cout << s.name << "  " << s.summary << '\n';
    return kExitPass;
  }
  return kExitInfrastructure;
}
