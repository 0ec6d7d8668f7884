#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "roughfpca/bulk.hpp"
#include "roughfpca/fpca.hpp"
#include "roughfpca/simulate.hpp"

namespace roughfpca {

/// max_{k <= K1} (l_k - l_{k+1}) / (l_{k+1} - l_{k+2}) for a descending spectrum.
/// Throws DegenerateSpectrumError unless the first K1 + 2 values are strictly decreasing.
double eigengap_ratio(const std::vector<double>& eigenvalues, int K1);
double eigengap_ratio(const Eigen::VectorXd& eigenvalues, int K1);

/// Quantile of the chi-square law with df degrees of freedom, by bisection on the regularized
/// lower incomplete gamma function to 1e-9 in probability.
double chi2_quantile(double prob, int df);

struct TestResult {
  double statistic;
  double quantile;
  double alpha;
  bool reject;
  int K1;
  int reps_bootstrap;
};

struct BootstrapSpec {
  int reps = 1000;
  int goe_dim = 1000;
};

/// Eigengap-ratio test for supercritical components against the GOE bootstrap quantile.
TestResult test_supercritical(const SampleView& data, int K1, double alpha, int reps, int goe_dim,
                              std::uint64_t seed, bool center = true);

/// Same test with a precomputed quantile (shared across many data sets).
TestResult test_supercritical_with_quantile(const SampleView& data, int K1, double alpha, double quantile,
                                            int reps_bootstrap, bool center = true);

struct ExperimentCell {
  std::string label;
  ModelSpec model;
};

struct RejectionRate {
  int cell;
  std::string label;
  double lead_spike;  // 0 for a pure bulk
  int K1;
  int rejections;
  int sims;
  double quantile;

  double rate() const { return sims > 0 ? static_cast<double>(rejections) / sims : 0.0; }
};

struct LevelPowerConfig {
  std::vector<ExperimentCell> cells;
  int N = 100;
  int p = 0;  // 0 means 5N
  std::vector<int> K1s{2, 3};
  double alpha = 0.05;
  int sims = 500;
  BootstrapSpec bootstrap;
  std::uint64_t seed = 1;
  bool center = false;
};

/// Rejection rates for every (cell, K1), ordered by K1 then cell. Samples are drawn in the
/// coefficient representation, which carries the same spectrum as the curves. Each K1 uses a
/// single bootstrap quantile; replicate r of cell c uses stream split_seed(seed, c) / r, so the
/// same data serve every K1.
std::vector<RejectionRate> level_power_experiment(const LevelPowerConfig& cfg);

/// Table layout: one row per K1, one column per cell.
std::string rejection_table_csv(const std::vector<RejectionRate>& rates);
/// Long layout: cell, label, spike, K1, rejections, sims, rate, quantile.
std::string rejection_long_csv(const std::vector<RejectionRate>& rates);

struct MeanTestResult {
  double statistic;
  double chi2_quantile;
  int k;
  bool reject;
};

/// S_k = sum_{j <= k} <N^{-1/2} sum_i (X_i - mu0), e_j>^2 / lambda_j with the eigenpairs of the
/// centred empirical covariance, compared with the 95% chi-square_k quantile.
MeanTestResult mean_test(const CurveSet& data, const Eigen::VectorXd& mu0, int k, double level = 0.95);
MeanTestResult mean_test(const CurveSet& data, const std::function<double(double)>& mu0, int k,
                         double level = 0.95);

struct MeanLevelRow {
  int sample_size;
  int k;
  double rejection_rate;
  int sims;
};

/// Resamples curves with replacement from a fixed population whose mean is the population
/// average, and records the rejection rate of mean_test per (sample size, k).
std::vector<MeanLevelRow> mean_test_levels(const CurveSet& population, const std::vector<int>& sample_sizes,
                                           const std::vector<int>& ks, int sims, std::uint64_t seed);

/// Symmetric moving average of width t along the grid, truncated at the boundaries.
Eigen::MatrixXd moving_average(const Eigen::MatrixXd& curves, int t);

struct SmoothScan {
  std::vector<int> windows;
  std::vector<double> statistics;
  double quantile;
  std::vector<bool> significant;
};

SmoothScan smooth_scan(const CurveSet& data, const std::vector<int>& windows, int K1, double alpha, int reps,
                       int goe_dim, std::uint64_t seed, bool center = true);

}  // namespace roughfpca
