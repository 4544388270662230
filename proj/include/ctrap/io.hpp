#pragma once

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctrap/error.hpp"
#include "ctrap/kernel.hpp"
#include "ctrap/multiindex.hpp"
#include "ctrap/weights.hpp"

namespace ctrap {

using json = nlohmann::json;

inline json grid_to_json(const CorrectionGrid& g) {
  json pts = json::array();
  for (const auto& xi : g.points) pts.push_back(xi.entries());
  return {{"n", g.n}, {"p", g.p}, {"kappa", g.kappa}, {"points", pts}};
}

/// Re-enumerates from (n, p, kappa) and requires the stored points to match in order.
inline CorrectionGrid grid_from_json(const json& j) {
  const auto grid = enumerate_grid(j.at("n").get<int>(), j.at("p").get<int>(), j.at("kappa").get<int>());
  const auto& pts = j.at("points");
  if (pts.size() != grid.size()) {
    throw error(errc::invalid_argument, "stored grid has " + std::to_string(pts.size()) + " points, expected " +
                                            std::to_string(grid.size()));
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (MultiIndex(pts[i].get<std::vector<int>>()) != grid.points[i]) {
      throw error(errc::invalid_argument, "stored grid point " + std::to_string(i) + " is out of canonical order");
    }
  }
  return grid;
}

inline json table_to_json(const WeightTable& t) {
  return {{"kernel", t.kernel_id},     {"n", t.n},
          {"p", t.p},                  {"kappa", t.kappa},
          {"delta", t.delta},          {"h_base", t.h_base},
          {"est_error", t.est_error},  {"gate_passed", t.gate_passed},
          {"residual", t.residual},    {"mollifier_m", t.mollifier_m},
          {"axis_order", t.axis_order}, {"grid", grid_to_json(t.grid)["points"]},
          {"weights", t.weights}};
}

inline WeightTable table_from_json(const json& j) {
  WeightTable t;
  t.kernel_id = j.at("kernel").get<std::string>();
  t.n = j.at("n").get<int>();
  t.p = j.at("p").get<int>();
  t.kappa = j.at("kappa").get<int>();
  t.delta = j.at("delta").get<double>();
  t.h_base = j.value("h_base", 0.0);
  t.est_error = j.value("est_error", 0.0);
  t.gate_passed = j.value("gate_passed", true);
  t.residual = j.value("residual", 0.0);
  t.mollifier_m = j.value("mollifier_m", 0);
  t.grid = grid_from_json({{"n", t.n}, {"p", t.p}, {"kappa", t.kappa}, {"points", j.at("grid")}});
  if (j.contains("axis_order")) {
    t.axis_order = j.at("axis_order").get<std::vector<int>>();
  } else {
    for (int i = 0; i < t.n; ++i) t.axis_order.push_back(i);
  }
  t.weights = j.at("weights").get<std::vector<double>>();
  if (t.weights.size() != t.grid.size()) throw error(errc::invalid_argument, "weight count does not match grid");
  return t;
}

/// Natural-axis point, e.g. (1,0,0), and its orbit in +- notation, e.g. (±1,0,0).
inline std::pair<std::string, std::string> family_labels(const WeightTable& t, std::size_t i) {
  std::vector<int> nat(t.n);
  for (int c = 0; c < t.n; ++c) nat[t.axis_order[c]] = t.grid.points[i][c];
  std::string fam = "(", orb = "(";
  for (int c = 0; c < t.n; ++c) {
    if (c) {
      fam += ",";
      orb += ",";
    }
    fam += std::to_string(nat[c]);
    orb += (nat[c] ? "±" : "") + std::to_string(nat[c]);
  }
  return {fam + ")", orb + ")"};
}

inline std::string table_to_csv(const WeightTable& t) {
  std::ostringstream out;
  out << "family,orbit,weight\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < t.grid.size(); ++i) {
    const auto [fam, orb] = family_labels(t, i);
    out << '"' << fam << "\",\"" << orb << "\"," << t.weights[i] << "\n";
  }
  return out.str();
}

struct KernelConfig {
  std::string type = "monomial";
  std::vector<int> alpha;
  double r = 0.0;
};

struct RunConfig {
  KernelConfig kernel;
  int n = 0;
  int p = 0;
  double h_base = 0.125;
  std::vector<double> h_ladder{0.125, 0.0625, 0.03125, 0.015625};
  std::string output = ".";
  double gate = 1e-11;
  bool force = false;
  std::optional<std::string> table;  // converge: existing weights.json
  std::optional<double> exact;       // converge: reference integral
  double tolerance = 0.25;
  double budget_seconds = 0.0;       // converge: 0 disables the cap
  unsigned threads = 0;
};

/// Parses and validates a run configuration; throws invalid_argument with the offending field.
inline RunConfig parse_config(const json& j) {
  auto bad = [](const std::string& what) { throw error(errc::invalid_argument, "config: " + what); };
  if (!j.is_object()) bad("top level must be an object");
  RunConfig c;
  try {
    const auto& k = j.at("kernel");
    c.kernel.type = k.value("type", std::string("monomial"));
    if (c.kernel.type != "monomial") bad("only monomial kernels can be configured from a file");
    c.kernel.alpha = k.at("alpha").get<std::vector<int>>();
    c.kernel.r = k.at("r").get<double>();
    c.n = j.value("n", static_cast<int>(c.kernel.alpha.size()));
    c.p = j.at("p").get<int>();
    c.h_base = j.value("h_base", c.h_base);
    c.h_ladder = j.value("h_ladder", c.h_ladder);
    c.output = j.value("output", c.output);
    c.gate = j.value("gate", c.gate);
    c.force = j.value("force", c.force);
    if (j.contains("table")) c.table = j.at("table").get<std::string>();
    if (j.contains("exact")) c.exact = j.at("exact").get<double>();
    c.tolerance = j.value("tolerance", c.tolerance);
    c.budget_seconds = j.value("budget_seconds", c.budget_seconds);
    c.threads = j.value("threads", c.threads);
  } catch (const json::exception& e) {
    bad(e.what());
  }
  if (static_cast<int>(c.kernel.alpha.size()) != c.n) bad("n does not match the length of kernel.alpha");
  if (!(c.h_base > 0.0)) bad("h_base must be positive");
  if (c.h_ladder.empty()) bad("h_ladder is empty");
  for (double h : c.h_ladder) {
    if (!(h > 0.0)) bad("h_ladder entries must be positive");
  }
  return c;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::invalid_argument, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw error(errc::invalid_argument, path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw error(errc::invalid_argument, "cannot write " + path);
  out << text;
}

/// FNV-1a of the canonical JSON dump, as 16 hex digits.
inline std::string config_hash(const json& j) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

}  // namespace ctrap
