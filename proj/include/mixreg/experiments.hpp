#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixreg/instance.hpp"
#include "mixreg/solver.hpp"

namespace mixreg {

struct RecoveryReport {
  double mislabel_ratio = 0.0;
  double support_iou_1 = 0.0;
  double support_iou_2 = 0.0;
  double l2_err_1 = 0.0;
  double l2_err_2 = 0.0;
  bool sign_consistent_1 = false;
  bool sign_consistent_2 = false;
  bool certificate_pass = false;  // filled by the sweep pipeline, not score()
  bool swapped = false;           // global swap chosen by the label alignment
};

// Scores estimates against ground truth. All metrics are aligned by the
// global label swap that minimizes the mislabel count.
RecoveryReport score(const Instance& inst, const Vector& beta1,
                     const Vector& beta2, const Labels& labels);

struct SweepConfig {
  std::vector<int> d_list = {10, 20, 50};
  std::vector<double> cp_grid = {0.5, 1.0, 1.5, 2.0};
  int s = 4;                  // s1 = s2
  double noise_sigma = 0.1;
  int trials = 3;
  // lambda = lambda_scale * sqrt(n1 * log d); <= 0 selects the per-instance
  // default 4 * noise_sigma * rho_hat (rho_hat = max column stddev of X).
  double lambda_scale = 0.0;
  std::uint64_t seed0 = 1;
  int max_iters = 4000;
  bool write_traces = false;
  bool parallel_trials = true;
};

struct SweepRow {
  int d = 0;
  double cp = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  int n1 = 0, n2 = 0;
  double lambda1 = 0.0;
  RecoveryReport report;
  bool failed = false;
  std::string error;
};

struct SweepSummary {
  std::vector<SweepRow> rows;
};

// n1 = n2 = ceil(10^cp * log(d)^2), natural log.
int sweep_samples(double cp, int d);

// Full pipeline per cell: generate -> solve -> refine -> score -> certify.
// Writes sweep.csv and summary.csv under out_dir; trial failures are recorded
// with status=failed and the sweep continues.
SweepSummary run_sweep(const SweepConfig& config, const std::string& out_dir);

}  // namespace mixreg
