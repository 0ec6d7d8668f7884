#pragma once

#include <cmath>
#include <functional>
#include <limits>

namespace roughfpca::numerics {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Adaptive Gauss-Kronrod integral of f over [lo, hi]; hi may be +inf, in which case
/// the range is mapped onto [0, 1) by x = lo + t / (1 - t).
double integrate(const std::function<double(double)>& f, double lo, double hi, double rel_tol = 1e-10);

struct BisectResult {
  double root;
  double residual;
  int iterations;
};

/// Bisection for a sign change of f on [lo, hi]. Requires f(lo) and f(hi) of opposite sign
/// (or zero). Stops when the bracket is narrower than x_tol or after max_iter halvings.
BisectResult bisect(const std::function<double(double)>& f, double lo, double hi, double x_tol = 0.0,
                    int max_iter = 200);

}  // namespace roughfpca::numerics
