#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "roughfpca/simulate.hpp"

namespace roughfpca {

/// A set of functions stored as rows of coordinates with a constant quadrature weight:
/// <f, g> = weight * sum_d f_d g_d. Grid data use weight 1/G; orthonormal-basis coefficients
/// use weight 1.
struct SampleView {
  const Eigen::MatrixXd* rows;
  double weight;

  SampleView(const Eigen::MatrixXd& m, double w) : rows(&m), weight(w) {}
  SampleView(const CurveSet& c) : rows(&c.values), weight(c.weight()) {}  // NOLINT(implicit)

  int size() const { return static_cast<int>(rows->rows()); }
  int dim() const { return static_cast<int>(rows->cols()); }
};

/// Eigenpairs of C_hat = (1/N) sum_i X_i (x) X_i, largest first.
struct EigenSystem {
  Eigen::VectorXd eigenvalues;     // length min(N, dim), non-increasing, >= 0
  Eigen::MatrixXd eigenfunctions;  // row k = e_hat_{k+1}, L2-normalised under `weight`
  double weight = 1.0;
  int sample_size = 0;

  int rank() const { return static_cast<int>(eigenfunctions.rows()); }
};

/// Decomposes the smaller of the primal (dim x dim) and dual (N x N Gram) forms. In the dual
/// form only eigenfunctions with a numerically positive eigenvalue are reconstructed.
/// Centering subtracts the sample mean and keeps the divisor N.
EigenSystem empirical_covariance_eigen(const SampleView& data, bool center);

/// Eigenvalues only; same spectrum as empirical_covariance_eigen.
Eigen::VectorXd empirical_eigenvalues(const SampleView& data, bool center);

double inner(const Eigen::Ref<const Eigen::VectorXd>& f, const Eigen::Ref<const Eigen::VectorXd>& g, double weight);

/// Angle in degrees in [0, 90]; the sign of either argument is irrelevant.
double angle_between(const Eigen::Ref<const Eigen::VectorXd>& f, const Eigen::Ref<const Eigen::VectorXd>& g,
                     double weight = 1.0);

enum class SamplingMode { WithoutReplacement, WithReplacement };

struct AngleSummary {
  int order_k;
  int sample_size;
  double mean_angle_deg;
  double median_angle_deg;
  int replicates;
};

/// Draws two subsamples of size n_sub per replicate and records the angle between their k-th
/// eigenfunctions for k = 1..k_max. One summary per (n_sub, k), ordered by n_sub then k.
std::vector<AngleSummary> split_stability(const SampleView& data, const std::vector<int>& sample_sizes, int k_max,
                                          int reps, SamplingMode mode, std::uint64_t seed, bool center = true);

/// Sample autocorrelation of the sequence at lags 0..max_lag.
std::vector<double> eigenfunction_acf(const Eigen::Ref<const Eigen::VectorXd>& e, int max_lag);

enum class ProjectionBasis { EmpiricalEigen, Fourier };

/// L2 projection of the sample mean curve onto the first k basis functions. The empirical basis
/// comes from the centred covariance of the same data.
Eigen::VectorXd project_mean(const CurveSet& data, ProjectionBasis basis, int k);

/// Projection of f onto span of the rows of basis (rows need not be orthonormal).
Eigen::VectorXd project_onto_rows(const Eigen::Ref<const Eigen::VectorXd>& f, const Eigen::MatrixXd& basis);

Eigen::VectorXd sample_mean(const SampleView& data);

struct LeadingEstimate {
  double eigenvalue;  // lambda_hat_k
  double angle_deg;   // angle(e_hat_k, e_k)
};

/// Monte Carlo for the k-th empirical eigenpair of the model at sample size N and truncation p.
/// Works in the coefficient representation, where e_k is the k-th unit vector. Replicate r
/// draws from stream (seed, r).
std::vector<LeadingEstimate> eigenpair_experiment(const ModelSpec& model, int N, int p, int k, int sims,
                                                  std::uint64_t seed, bool center = false);

}  // namespace roughfpca
