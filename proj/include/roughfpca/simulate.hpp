#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "roughfpca/bulk.hpp"

namespace roughfpca {

class Rng;

/// N curves sampled on the midpoint grid t_g = (g - 1/2) / G of [0, 1]. Inner products use
/// the midpoint rule <f, g> = (1/G) sum_g f(t_g) g(t_g).
struct CurveSet {
  Eigen::MatrixXd values;  // N x G, row i = curve i
  std::vector<std::string> labels;

  int size() const { return static_cast<int>(values.rows()); }
  int grid_size() const { return static_cast<int>(values.cols()); }
  double weight() const { return 1.0 / static_cast<double>(values.cols()); }
  double grid_point(int g) const { return (g + 0.5) / static_cast<double>(values.cols()); }
};

/// Midpoint-rule inner product on a grid with G points.
double grid_inner(const Eigen::Ref<const Eigen::VectorXd>& f, const Eigen::Ref<const Eigen::VectorXd>& g);

struct SimConfig {
  ModelSpec model;
  int N;
  int p;  // basis truncation, 5N by default
  int grid_size;
  std::uint64_t seed;
  bool center_empirically = false;

  void validate() const;
};

struct SimulatedSample {
  CurveSet curves;
  /// N x p. Row i holds the L2 coordinates of curve i in the Fourier basis f_1..f_p, so e_k is
  /// the k-th unit vector in this representation.
  Eigen::MatrixXd coefficients;
};

/// Fourier basis of L2[0,1]: f_1 = 1, f_{2m}(t) = sqrt(2) sin(2 pi m t),
/// f_{2m+1}(t) = sqrt(2) cos(2 pi m t).
double fourier_basis(int j, double t);

/// p x G matrix of f_1..f_p evaluated on the midpoint grid.
Eigen::MatrixXd fourier_design(int p, int grid_size);

/// Coefficient matrix Z_ij sqrt(lambda_j) for a SpectrumView, drawn row by row from rng.
Eigen::MatrixXd draw_coefficients(const SpectrumView& spectrum, Rng& rng);

/// Number of leading population eigenvalues that are positive; the remaining coefficient
/// columns are identically zero.
int positive_truncation(const SpectrumView& spectrum);

/// Subtracts the column means in place.
void center_columns(Eigen::MatrixXd& m);

SimulatedSample draw_sample(const SimConfig& cfg);

}  // namespace roughfpca
