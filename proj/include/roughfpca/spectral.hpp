#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "roughfpca/bulk.hpp"
#include "roughfpca/fpca.hpp"
#include "roughfpca/rmt.hpp"

namespace roughfpca {

/// Lipschitz test function with h(0) = 0.
class TestFunction {
 public:
  enum class Kind { Power, PiecewiseLinear, Custom };

  /// h(x) = x^k. Lipschitz only on bounded sets; the constant refers to [0, 1].
  static TestFunction power(int k);
  /// Linear interpolation through (x, h) knots, constant beyond the last knot. Needs a knot at
  /// x = 0 with value 0 when the knots start at 0, otherwise h is continued linearly to (0, 0).
  static TestFunction piecewise_linear(std::vector<std::pair<double, double>> knots);
  /// Arbitrary callable with a declared Lipschitz constant; h(0) must vanish.
  static TestFunction custom(std::function<double(double)> h, double lipschitz, std::string name = "custom");

  double operator()(double x) const { return h_(x); }
  Kind kind() const { return kind_; }
  double lipschitz() const { return lipschitz_; }
  const std::string& name() const { return name_; }

 private:
  TestFunction(Kind kind, std::function<double(double)> h, double lipschitz, std::string name);
  Kind kind_;
  std::function<double(double)> h_;
  double lipschitz_;
  std::string name_;
};

/// (1/N) sum_i h(lambda_i) over the min(N, dim) empirical eigenvalues.
double spectral_statistic(const EigenSystem& eigs, const TestFunction& h);
double spectral_statistic(const Eigen::VectorXd& eigenvalues, int sample_size, const TestFunction& h);

/// Push-forward of Uniform[0, gamma] by b, discretised at the midpoints of `atoms` cells.
AtomicMeasure bulk_spectral_measure(const BulkFunction& b, double gamma, int atoms);

struct SpectralLimit {
  double value;
  double gamma;
  int atoms;
  bool gamma_small;  // b(gamma) above 1% of b(0)
};

/// gamma * int h dF_{gamma, s(gamma)}, with the deformed MP law computed numerically. Spikes do
/// not contribute in the limit. For compactly supported b, gamma is capped at the support end.
SpectralLimit spectral_limit(const ModelSpec& model, const TestFunction& h, double gamma, int atoms = 2000,
                             int grid_points = 4001);

}  // namespace roughfpca
