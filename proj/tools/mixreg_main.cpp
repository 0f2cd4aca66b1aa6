// Command-line front end: generate | solve | refine | certify | oracle | sweep.
// Configuration files are line-oriented `key = value` text; see README.md.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "mixreg/experiments.hpp"
#include "mixreg/instance.hpp"
#include "mixreg/oracle.hpp"
#include "mixreg/solver.hpp"
#include "mixreg/witness.hpp"
#include "mixreg/csv.hpp"

namespace {

using mixreg::Vector;

class Config {
 public:
  Config() = default;
  explicit Config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::string line;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      values_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
  }

  std::optional<std::string> get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }
  double get_double(const std::string& key, double fallback) const {
    auto v = get(key);
    return v ? std::stod(*v) : fallback;
  }
  long long get_int(const std::string& key, long long fallback) const {
    auto v = get(key);
    return v ? std::stoll(*v) : fallback;
  }
  bool get_bool(const std::string& key, bool fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    return *v == "1" || *v == "true" || *v == "yes";
  }
  std::vector<double> get_list(const std::string& key,
                               std::vector<double> fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    std::vector<double> out;
    std::stringstream ss(*v);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(trim(tok)));
    return out;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  }
  std::map<std::string, std::string> values_;
};

mixreg::CovSpec parse_cov(const Config& cfg) {
  const auto v = cfg.get("cov");
  if (!v || *v == "identity") return mixreg::CovSpec::identity();
  if (v->rfind("diagonal:", 0) == 0) {
    std::vector<double> diag;
    std::stringstream ss(v->substr(9));
    std::string tok;
    while (std::getline(ss, tok, ';')) diag.push_back(std::stod(tok));
    Vector d = Eigen::Map<Vector>(diag.data(), static_cast<Eigen::Index>(diag.size()));
    return mixreg::CovSpec::diagonal(d);
  }
  if (v->rfind("dense:", 0) == 0)
    return mixreg::CovSpec::dense(mixreg::csv::read_matrix(v->substr(6)));
  throw std::runtime_error("unknown cov spec: " + *v);
}

mixreg::SolverConfig solver_config(const Config& cfg, double lambda1, double lambda2,
                                   std::uint64_t seed) {
  mixreg::SolverConfig sc;
  sc.lambda1 = lambda1;
  sc.lambda2 = lambda2;
  sc.step0 = cfg.get_double("step0", 0.0);
  sc.max_iters = static_cast<int>(cfg.get_int("max_iters", sc.max_iters));
  sc.dykstra_iters = static_cast<int>(cfg.get_int("dykstra_iters", sc.dykstra_iters));
  sc.dykstra_tol = cfg.get_double("dykstra_tol", sc.dykstra_tol);
  sc.stop_tol = cfg.get_double("stop_tol", sc.stop_tol);
  sc.restart_period = static_cast<int>(cfg.get_int("restart_period", sc.restart_period));
  sc.t_init_range = cfg.get_double("t_init_range", sc.t_init_range);
  sc.seed = seed;
  if (cfg.get("step_rule") && *cfg.get("step_rule") == "constant")
    sc.step_rule = mixreg::SolverConfig::StepRule::constant;
  return sc;
}

double require_lambda(const Config& cfg, const char* key) {
  auto v = cfg.get(key);
  if (!v) throw std::runtime_error(std::string("config key required: ") + key);
  return std::stod(*v);
}

void write_labels(const std::string& path, const mixreg::Labels& z) {
  std::ofstream out(path);
  for (int v : z) out << v << '\n';
}

mixreg::Labels read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open labels: " + path);
  mixreg::Labels z;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) z.push_back(std::stoi(line));
  return z;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse mixed linear regression via a lifted relaxation"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", in_dir;
  std::uint64_t seed = 0;
  bool seed_set = false, check = false;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--in", in_dir, "instance directory (X.csv, y.csv[, truth.csv])");
  app.add_flag("--check", check, "exit 2 when the subcommand's validation fails");
  auto* seed_opt = app.add_option("--seed", seed, "seed override");

  auto* cmd_generate = app.add_subcommand("generate", "draw a synthetic instance");
  auto* cmd_solve = app.add_subcommand("solve", "run the projected subgradient solver");
  auto* cmd_refine = app.add_subcommand("refine", "per-component penalized regressions");
  auto* cmd_certify = app.add_subcommand("certify", "construct and verify the certificate");
  auto* cmd_oracle = app.add_subcommand("oracle", "exhaustive-labeling reference solution");
  auto* cmd_sweep = app.add_subcommand("sweep", "sample-size sweep with recovery metrics");
  std::string labels_path;
  cmd_refine->add_option("--labels", labels_path, "labels file (one 0/1 per line)");

  CLI11_PARSE(app, argc, argv);
  seed_set = seed_opt->count() > 0;

  try {
    Config cfg = config_path.empty() ? Config() : Config(config_path);
    std::filesystem::create_directories(out_dir);

    if (cmd_generate->parsed()) {
      const int d = static_cast<int>(cfg.get_int("d", 10));
      const mixreg::Instance inst = mixreg::generate(
          d, static_cast<int>(cfg.get_int("s1", 4)), static_cast<int>(cfg.get_int("s2", 4)),
          static_cast<int>(cfg.get_int("n1", 100)), static_cast<int>(cfg.get_int("n2", 100)),
          cfg.get_double("noise_sigma", 0.1), parse_cov(cfg),
          seed_set ? seed : static_cast<std::uint64_t>(cfg.get_int("seed", 0)));
      mixreg::save_instance(inst, out_dir);
      const mixreg::AssumptionAudit a = mixreg::audit(inst);
      std::cout << "n=" << inst.n() << " d=" << inst.d()
                << " eps_identifiability=" << a.eps_identifiability
                << " cmin_hat=" << a.cmin_hat << " incoherence_hat=" << a.incoherence_hat
                << " pass=" << (a.all_pass() ? "yes" : "no") << '\n';
      if (check && !a.all_pass()) return 2;
      return 0;
    }

    if (cmd_sweep->parsed()) {
      mixreg::SweepConfig sw;
      std::vector<double> dl = cfg.get_list("d_list", {10, 20, 50});
      sw.d_list.clear();
      for (double d : dl) sw.d_list.push_back(static_cast<int>(d));
      sw.cp_grid = cfg.get_list("cp_grid", sw.cp_grid);
      sw.s = static_cast<int>(cfg.get_int("s", sw.s));
      sw.noise_sigma = cfg.get_double("noise_sigma", sw.noise_sigma);
      sw.trials = static_cast<int>(cfg.get_int("trials", sw.trials));
      sw.lambda_scale = cfg.get_double("lambda_scale", sw.lambda_scale);
      sw.seed0 = seed_set ? seed : static_cast<std::uint64_t>(cfg.get_int("seed0", 1));
      sw.max_iters = static_cast<int>(cfg.get_int("max_iters", sw.max_iters));
      sw.write_traces = cfg.get_bool("write_traces", sw.write_traces);
      const mixreg::SweepSummary summary = mixreg::run_sweep(sw, out_dir);
      int failed = 0;
      for (const auto& r : summary.rows) failed += r.failed;
      std::cout << "cells=" << summary.rows.size() << " failed=" << failed << '\n';
      if (check && failed > 0) return 2;
      return 0;
    }

    if (in_dir.empty()) throw std::runtime_error("--in <dir> required");
    const mixreg::Instance inst = mixreg::load_instance(in_dir);

    if (cmd_solve->parsed()) {
      const double l1 = require_lambda(cfg, "lambda1");
      const double l2 = cfg.get_double("lambda2", l1);
      mixreg::SolverConfig sc = solver_config(
          cfg, l1, l2, seed_set ? seed : static_cast<std::uint64_t>(cfg.get_int("seed", 0)));
      const mixreg::SolveTrace trace = mixreg::solve(inst, sc);
      mixreg::write_trace_csv(trace, out_dir + "/trace.csv");
      mixreg::save_state(trace.best_state, out_dir);
      const mixreg::ExtractedSolution ext = mixreg::extract_solution(trace.best_state);
      write_labels(out_dir + "/labels.csv", ext.z);
      mixreg::csv::write_vector(out_dir + "/beta1.csv", ext.beta1);
      mixreg::csv::write_vector(out_dir + "/beta2.csv", ext.beta2);
      std::cout << "iterations=" << trace.iterations_run
                << " best_objective=" << mixreg::csv::format(trace.best_objective)
                << " converged=" << (trace.converged ? "yes" : "no") << '\n';
      if (check && !(trace.converged && mixreg::is_feasible(trace.best_state))) return 2;
      return 0;
    }

    if (cmd_refine->parsed()) {
      const double l1 = require_lambda(cfg, "lambda1");
      const double l2 = cfg.get_double("lambda2", l1);
      if (labels_path.empty()) labels_path = in_dir + "/labels.csv";
      const mixreg::Labels z = read_labels(labels_path);
      mixreg::SolverConfig sc = solver_config(cfg, l1, l2, 0);
      const mixreg::RefineResult r = mixreg::refine(inst, z, sc);
      mixreg::csv::write_vector(out_dir + "/beta1.csv", r.beta1);
      mixreg::csv::write_vector(out_dir + "/beta2.csv", r.beta2);
      std::cout << "degenerate1=" << r.degenerate1 << " degenerate2=" << r.degenerate2 << '\n';
      if (check && (r.degenerate1 || r.degenerate2)) return 2;
      return 0;
    }

    if (cmd_certify->parsed()) {
      const double l1 = require_lambda(cfg, "lambda1");
      const double l2 = cfg.get_double("lambda2", l1);
      const mixreg::WitnessCertificate cert = mixreg::construct_witness(inst, l1, l2);
      const mixreg::KktReport report = mixreg::verify_kkt(inst, cert);
      mixreg::write_kkt_report_csv(report, out_dir + "/kkt_report.csv");
      std::cout << "kkt_pass=" << (report.kkt_pass() ? "yes" : "no")
                << " strict_dual_max="
                << mixreg::csv::format(std::max(report.strict_dual_1, report.strict_dual_2))
                << '\n';
      if (check && !report.kkt_pass()) return 2;
      return 0;
    }

    if (cmd_oracle->parsed()) {
      const double l1 = require_lambda(cfg, "lambda1");
      const double l2 = cfg.get_double("lambda2", l1);
      const mixreg::OracleResult res = mixreg::brute_force(
          inst, l1, l2, static_cast<int>(cfg.get_int("n_cap", 14)));
      std::cout << mixreg::oracle_csv_string(res);
      return 0;
    }

  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
