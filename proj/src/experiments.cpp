#include "mixreg/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <stdexcept>

#include "mixreg/csv.hpp"
#include "mixreg/witness.hpp"

namespace mixreg {

namespace {

std::set<int> estimated_support(const Vector& beta) {
  const double supp_tol = 1e-4 * std::max(1.0, beta.size() ? beta.cwiseAbs().maxCoeff() : 0.0);
  std::set<int> s;
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    if (std::abs(beta[j]) > supp_tol) s.insert(static_cast<int>(j));
  return s;
}

double iou(const std::set<int>& a, const std::set<int>& b) {
  if (a.empty() && b.empty()) return 1.0;
  int inter = 0;
  for (int x : a) inter += b.count(x);
  const int uni = static_cast<int>(a.size() + b.size()) - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

bool signs_agree(const Vector& est, const Vector& truth, const std::set<int>& est_supp,
                 const std::set<int>& true_supp) {
  for (int j : true_supp) {
    if (!est_supp.count(j)) continue;
    if ((est[j] > 0) != (truth[j] > 0)) return false;
  }
  return true;
}

}  // namespace

RecoveryReport score(const Instance& inst, const Vector& beta1,
                     const Vector& beta2, const Labels& labels) {
  if (!inst.truth) throw std::invalid_argument("score: ground truth required");
  const GroundTruth& t = *inst.truth;
  const int n = inst.n();
  if (static_cast<int>(labels.size()) != n)
    throw std::invalid_argument("score: labels length mismatch");

  int direct = 0, swapped = 0;
  for (int i = 0; i < n; ++i) {
    const int truth_z = t.z[static_cast<std::size_t>(i)];
    const int est = labels[static_cast<std::size_t>(i)];
    direct += est != truth_z;
    swapped += (1 - est) != truth_z;
  }
  RecoveryReport r;
  r.swapped = swapped < direct;
  r.mislabel_ratio = static_cast<double>(std::min(direct, swapped)) / n;

  const Vector& est1 = r.swapped ? beta2 : beta1;
  const Vector& est2 = r.swapped ? beta1 : beta2;
  const std::set<int> s1 = estimated_support(est1);
  const std::set<int> s2 = estimated_support(est2);
  const std::vector<int> p_vec = t.support1();
  const std::vector<int> q_vec = t.support2();
  const std::set<int> p(p_vec.begin(), p_vec.end());
  const std::set<int> q(q_vec.begin(), q_vec.end());
  r.support_iou_1 = iou(s1, p);
  r.support_iou_2 = iou(s2, q);
  r.l2_err_1 = (est1 - t.beta1).norm();
  r.l2_err_2 = (est2 - t.beta2).norm();
  r.sign_consistent_1 = signs_agree(est1, t.beta1, s1, p);
  r.sign_consistent_2 = signs_agree(est2, t.beta2, s2, q);
  return r;
}

int sweep_samples(double cp, int d) {
  const double ld = std::log(static_cast<double>(d));
  return static_cast<int>(std::ceil(std::pow(10.0, cp) * ld * ld));
}

namespace {

struct Cell {
  int d;
  double cp;
  int cp_index;
  int trial;
  std::uint64_t seed;
};

SweepRow run_cell(const Cell& cell, const SweepConfig& config,
                  const std::string& out_dir) {
  SweepRow row;
  row.d = cell.d;
  row.cp = cell.cp;
  row.trial = cell.trial;
  row.seed = cell.seed;
  row.n1 = row.n2 = sweep_samples(cell.cp, cell.d);
  try {
    const Instance inst = generate(cell.d, config.s, config.s, row.n1, row.n2,
                                   config.noise_sigma, CovSpec::identity(), cell.seed);
    double scale = config.lambda_scale;
    if (scale <= 0.0) {
      // rho_hat = max column standard deviation of X.
      double rho_hat = 0.0;
      for (int j = 0; j < inst.d(); ++j) {
        const double mean = inst.X.col(j).mean();
        const double var =
            (inst.X.col(j).array() - mean).square().sum() / (inst.n() - 1);
        rho_hat = std::max(rho_hat, std::sqrt(var));
      }
      scale = 4.0 * config.noise_sigma * rho_hat;
      if (scale <= 0.0) scale = 0.05;  // noiseless fallback keeps lambda > 0
    }
    const double lambda =
        scale * std::sqrt(static_cast<double>(row.n1) * std::log(cell.d));
    row.lambda1 = lambda;

    SolverConfig sc;
    sc.lambda1 = sc.lambda2 = lambda;
    sc.max_iters = config.max_iters;
    sc.seed = cell.seed + 1;
    // Trials may run inside an outer parallel loop; keep the kernels serial
    // there (nested parallelism would be wasted) and parallel otherwise.
    sc.exec = config.parallel_trials ? kernels::Exec::serial : kernels::Exec::parallel;

    const SolveTrace trace = solve(inst, sc);
    if (config.write_traces) {
      write_trace_csv(trace, out_dir + "/trace_d" + std::to_string(cell.d) + "_cp" +
                                 std::to_string(cell.cp_index) + "_t" +
                                 std::to_string(cell.trial) + ".csv");
    }
    const ExtractedSolution ext = extract_solution(trace.best_state);
    const RefineResult ref = refine(inst, ext.z, sc);
    row.report = score(inst, ref.beta1, ref.beta2, ext.z);

    const WitnessCertificate cert = construct_witness(inst, lambda, lambda);
    const KktReport kkt = verify_kkt(inst, cert);
    row.report.certificate_pass = kkt.kkt_pass();
  } catch (const std::exception& e) {
    row.failed = true;
    row.error = e.what();
  }
  return row;
}

}  // namespace

SweepSummary run_sweep(const SweepConfig& config, const std::string& out_dir) {
  if (config.cp_grid.empty()) throw std::invalid_argument("run_sweep: empty cp grid");
  for (std::size_t i = 1; i < config.cp_grid.size(); ++i)
    if (config.cp_grid[i] <= config.cp_grid[i - 1])
      throw std::invalid_argument("run_sweep: cp grid must be increasing");
  if (config.trials < 1) throw std::invalid_argument("run_sweep: trials must be >= 1");
  std::filesystem::create_directories(out_dir);

  std::vector<Cell> cells;
  std::uint64_t counter = 0;
  for (int d : config.d_list)
    for (std::size_t c = 0; c < config.cp_grid.size(); ++c)
      for (int trial = 0; trial < config.trials; ++trial) {
        Cell cell;
        cell.d = d;
        cell.cp = config.cp_grid[c];
        cell.cp_index = static_cast<int>(c);
        cell.trial = trial;
        cell.seed = config.seed0 + 1000003ull * counter++;
        cells.push_back(cell);
      }

  SweepSummary summary;
  summary.rows.resize(cells.size());
#pragma omp parallel for schedule(dynamic) if (config.parallel_trials)
  for (long long i = 0; i < static_cast<long long>(cells.size()); ++i)
    summary.rows[static_cast<std::size_t>(i)] =
        run_cell(cells[static_cast<std::size_t>(i)], config, out_dir);

  // Rows come out in the fixed (d, cp, trial) order regardless of scheduling.
  {
    csv::Writer w(out_dir + "/sweep.csv");
    w.raw_line(
        "d,cp,trial,seed,n1,n2,lambda1,mislabel_ratio,iou1,iou2,l2err1,l2err2,"
        "cert_pass,status");
    for (const SweepRow& r : summary.rows) {
      w.field(static_cast<long long>(r.d));
      w.field(r.cp);
      w.field(static_cast<long long>(r.trial));
      w.field(static_cast<long long>(r.seed));
      w.field(static_cast<long long>(r.n1));
      w.field(static_cast<long long>(r.n2));
      w.field(r.lambda1);
      if (r.failed) {
        for (int k = 0; k < 6; ++k) w.field(std::string());
        w.field(std::string("failed"));
      } else {
        w.field(r.report.mislabel_ratio);
        w.field(r.report.support_iou_1);
        w.field(r.report.support_iou_2);
        w.field(r.report.l2_err_1);
        w.field(r.report.l2_err_2);
        w.field(std::string(r.report.certificate_pass ? "1" : "0"));
        w.field(std::string("ok"));
      }
      w.end_row();
    }
  }

  {
    csv::Writer w(out_dir + "/summary.csv");
    w.raw_line(
        "d,cp,n1,trials_ok,mislabel_mean,mislabel_sd,iou1_mean,iou1_sd,iou2_mean,"
        "iou2_sd,l2err1_mean,l2err1_sd,l2err2_mean,l2err2_sd,cert_pass_rate");
    for (int d : config.d_list)
      for (double cp : config.cp_grid) {
        std::vector<const SweepRow*> cell_rows;
        for (const SweepRow& r : summary.rows)
          if (r.d == d && r.cp == cp && !r.failed) cell_rows.push_back(&r);
        auto stats = [&](auto get) {
          double mean = 0.0, sd = 0.0;
          for (auto* r : cell_rows) mean += get(*r);
          if (!cell_rows.empty()) mean /= static_cast<double>(cell_rows.size());
          for (auto* r : cell_rows) sd += std::pow(get(*r) - mean, 2);
          sd = cell_rows.size() > 1
                   ? std::sqrt(sd / static_cast<double>(cell_rows.size() - 1))
                   : 0.0;
          return std::pair<double, double>(mean, sd);
        };
        const auto mis = stats([](const SweepRow& r) { return r.report.mislabel_ratio; });
        const auto i1 = stats([](const SweepRow& r) { return r.report.support_iou_1; });
        const auto i2 = stats([](const SweepRow& r) { return r.report.support_iou_2; });
        const auto e1 = stats([](const SweepRow& r) { return r.report.l2_err_1; });
        const auto e2 = stats([](const SweepRow& r) { return r.report.l2_err_2; });
        double cert_rate = 0.0;
        for (auto* r : cell_rows) cert_rate += r->report.certificate_pass ? 1.0 : 0.0;
        if (!cell_rows.empty()) cert_rate /= static_cast<double>(cell_rows.size());
        w.field(static_cast<long long>(d));
        w.field(cp);
        w.field(static_cast<long long>(sweep_samples(cp, d)));
        w.field(static_cast<long long>(cell_rows.size()));
        w.field(mis.first); w.field(mis.second);
        w.field(i1.first); w.field(i1.second);
        w.field(i2.first); w.field(i2.second);
        w.field(e1.first); w.field(e1.second);
        w.field(e2.first); w.field(e2.second);
        w.field(cert_rate);
        w.end_row();
      }
  }
  return summary;
}

}  // namespace mixreg
