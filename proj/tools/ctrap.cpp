#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ctrap/ctrap.hpp"

namespace fs = std::filesystem;
using namespace ctrap;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failed = 1;
constexpr int exit_usage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void log_header(const char* command, const json& raw, const RunConfig* cfg) {
  std::cerr << "ctrap " << CTRAP_VERSION << " " << command << " config-hash " << config_hash(raw) << "\n";
  if (cfg) {
    std::cerr << "h ladder:";
    for (double h : cfg->h_ladder) std::cerr << " " << h;
    std::cerr << "\n";
  }
}

std::pair<json, RunConfig> load_config(const std::string& path) {
  try {
    json raw = read_json_file(path);
    return {raw, parse_config(raw)};
  } catch (const error& e) {
    throw UsageError(e.what());
  }
}

KernelSpec kernel_from(const RunConfig& c) {
  try {
    return make_monomial_kernel(MultiIndex(c.kernel.alpha), c.kernel.r);
  } catch (const error& e) {
    throw UsageError(e.what());
  }
}

SolveOptions solve_options(const RunConfig& c) {
  SolveOptions o;
  o.gate = c.gate;
  o.enforce_gate = false;
  o.force = c.force;
  o.lattice.threads = c.threads;
  o.on_level = [](double h, double s) {
    std::fprintf(stderr, "  c(h) at h=%-10g %8.2f s\n", h, s);
  };
  return o;
}

WeightTable compute_table(const RunConfig& c, const KernelSpec& k) {
  const auto grid = enumerate_grid(k.n, c.p, k.kappa);
  std::cerr << "weights for " << k.id << " p=" << c.p << " (" << grid.size() << " grid points), h_base "
            << c.h_base << "\n";
  return solve_weights(k, grid, c.h_base, solve_options(c));
}

int cmd_weights(const std::string& path) {
  auto [raw, cfg] = load_config(path);
  log_header("weights", raw, &cfg);
  const auto k = kernel_from(cfg);
  const auto t = compute_table(cfg, k);

  fs::create_directories(cfg.output);
  write_text_file((fs::path(cfg.output) / "weights.json").string(), table_to_json(t).dump(2) + "\n");
  write_text_file((fs::path(cfg.output) / "weights.csv").string(), table_to_csv(t));

  std::printf("est_error %.3e (gate %.1e: %s)\n", t.est_error, cfg.gate, t.gate_passed ? "passed" : "FAILED");
  std::printf("residual  %.3e\n", t.residual);
  for (std::size_t i = 0; i < t.grid.size(); ++i) {
    const auto [fam, orb] = family_labels(t, i);
    std::printf("  %-14s %-22s % .17g\n", fam.c_str(), orb.c_str(), t.weights[i]);
  }
  if (!t.gate_passed) {
    std::cerr << "error: " << to_string(errc::not_converged) << ": Richardson consistency " << t.est_error
              << " exceeds gate " << cfg.gate << "\n";
    return exit_failed;
  }
  return exit_ok;
}

std::optional<double> builtin_reference(const RunConfig& c) {
  if (c.n != 3) return std::nullopt;
  if (c.kernel.alpha == std::vector<int>{2, 0, 0} && c.kernel.r == 3.5) return reference_J1();
  if (c.kernel.alpha == std::vector<int>{1, 0, 0} && c.kernel.r == 2.0) return reference_J2();
  return std::nullopt;
}

int cmd_converge(const std::string& path) {
  auto [raw, cfg] = load_config(path);
  log_header("converge", raw, &cfg);
  const auto k = kernel_from(cfg);
  if (k.n != 3) throw UsageError("the builtin regular part is three-dimensional");
  const auto exact = cfg.exact ? cfg.exact : builtin_reference(cfg);
  if (!exact) throw UsageError("no reference value: set \"exact\" in the config");

  WeightTable table;
  if (cfg.table) {
    if (!fs::exists(*cfg.table)) {
      std::cerr << "error: missing-table: " << *cfg.table << "\n";
      return exit_failed;
    }
    table = table_from_json(read_json_file(*cfg.table));
  } else {
    table = compute_table(cfg, k);
  }

  ConvergenceOptions opts;
  opts.tolerance = cfg.tolerance;
  opts.budget_seconds = cfg.budget_seconds;
  opts.lattice.threads = cfg.threads;
  opts.on_point = [](const ConvergencePoint& pt) {
    std::fprintf(stderr, "  h=%-10g Q=% .17g err=%.3e %8.2f s%s\n", pt.h, pt.value, pt.abs_error, pt.seconds,
                 pt.below_floor ? " (roundoff floor)" : "");
  };
  const auto rep = convergence_study(builtin_regular_part(), k, table, *exact, cfg.h_ladder, opts);

  fs::create_directories(cfg.output);
  std::ostringstream csv;
  csv << "h,Q,abs_error\n" << std::setprecision(17);
  for (const auto& pt : rep.points) csv << pt.h << "," << pt.value << "," << pt.abs_error << "\n";
  write_text_file((fs::path(cfg.output) / "converge.csv").string(), csv.str());

  std::printf("kernel %s p=%d\n", rep.kernel_id.c_str(), rep.p);
  std::printf("slope %.4f vs theory %.4f (tolerance %.2f, %d points above floor %.2e)%s\n", rep.slope,
              rep.theoretical_order, rep.tolerance, rep.points_in_fit, rep.floor, rep.monotone ? "" : " NOT MONOTONE");
  for (const auto& pt : rep.points) {
    if (pt.below_floor) std::printf("  h=%g below roundoff floor, excluded from fit\n", pt.h);
  }
  if (rep.budget_exceeded) {
    std::cerr << "error: runtime-budget-exceeded after " << rep.points.size() << " mesh sizes\n";
    return exit_failed;
  }
  std::printf("%s\n", rep.pass ? "PASS" : "FAIL");
  return rep.pass ? exit_ok : exit_failed;
}

struct VerifyArgs {
  int max_n = 3;
  int max_p = 3;
  bool inject_fault = false;
  bool skip_parity = false;
  std::string output = ".";
};

json suite_json(const SuiteResult& r) {
  return {{"name", r.name},       {"passed", r.passed},   {"cases", r.cases},
          {"worst", r.worst},     {"seconds", r.seconds}, {"failures", r.failures}};
}

int cmd_verify(const VerifyArgs& a) {
  const json scope = {{"max_n", a.max_n}, {"max_p", a.max_p}, {"inject_fault", a.inject_fault}};
  log_header("verify", scope, nullptr);
  if (a.max_n < 1 || a.max_n > max_dimension || a.max_p < 0 || a.max_p > max_order) {
    throw UsageError("scope out of range");
  }

  std::vector<SuiteResult> results;
  StructureSuiteOptions so;
  so.max_n = a.max_n;
  so.max_p = a.max_p;
  so.inject_sign_fault = a.inject_fault;
  results.push_back(structure_suite(so));
  results.push_back(determinant_suite(std::min(a.max_n, 3), std::min(a.max_p, 3)));
  results.push_back(enumeration_suite(std::max(a.max_n, 4), std::max(2 * a.max_p, 8)));
  if (!a.skip_parity) {
    const auto s1 = make_monomial_kernel({2, 0, 0}, 3.5);
    const auto s2 = make_monomial_kernel({1, 0, 0}, 2.0);
    SolveOptions o;
    o.enforce_gate = false;
    const auto t1 = solve_weights(s1, enumerate_grid(3, 1, 0), 0.125, o);
    const auto t2 = solve_weights(s2, enumerate_grid(3, 1, 1), 0.125, o);
    results.push_back(parity_suite({{&s1, &t1}, {&s2, &t2}}));
  }

  json out = {{"version", CTRAP_VERSION}, {"scope", scope}, {"suites", json::array()}};
  bool all = true;
  for (const auto& r : results) {
    all = all && r.passed;
    out["suites"].push_back(suite_json(r));
    std::printf("%-28s %s  cases=%zu worst=%.2e %.2fs\n", r.name.c_str(), r.passed ? "pass" : "FAIL", r.cases,
                r.worst, r.seconds);
    for (std::size_t i = 0; i < std::min<std::size_t>(r.failures.size(), 5); ++i) {
      std::printf("    %s\n", r.failures[i].c_str());
    }
  }
  out["passed"] = all;
  fs::create_directories(a.output);
  write_text_file((fs::path(a.output) / "verify.json").string(), out.dump(2) + "\n");
  return all ? exit_ok : exit_failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corrected trapezoidal rules for weakly singular integrals"};
  app.set_version_flag("--version", CTRAP_VERSION);
  app.require_subcommand(1);

  std::string config;
  auto* weights = app.add_subcommand("weights", "solve for correction weights; writes weights.json and weights.csv");
  weights->add_option("config", config, "JSON config")->required()->check(CLI::ExistingFile);
  auto* converge = app.add_subcommand("converge", "convergence study on the builtin regular part; writes converge.csv");
  converge->add_option("config", config, "JSON config")->required()->check(CLI::ExistingFile);

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "structural and combinatorial property suites; writes verify.json");
  verify->add_option("--max-n", va.max_n, "largest dimension for the structure suite");
  verify->add_option("--max-p", va.max_p, "largest order for the structure suite");
  verify->add_flag("--inject-fault", va.inject_fault, "assemble K with a deliberate sign error");
  verify->add_flag("--skip-parity", va.skip_parity, "skip the lattice parity suite");
  verify->add_option("-o,--output", va.output, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*weights) return cmd_weights(config);
    if (*converge) return cmd_converge(config);
    return cmd_verify(va);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return exit_usage;
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_failed;
  }
}
