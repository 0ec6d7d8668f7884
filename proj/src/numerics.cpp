#include "roughfpca/numerics.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "roughfpca/errors.hpp"

namespace roughfpca::numerics {

namespace {

constexpr unsigned kMaxDepth = 15;

/// Adaptive Gauss-Kronrod on [lo, hi] after splitting geometrically towards lo, where the
/// integrands of this library peak.
template <class F>
double graded(const F& f, double lo, double hi, double rel_tol) {
  double total = 0.0;
  double err = 0.0;
  double left = lo;
  for (int k = 12; k >= 0; --k) {
    const double right = k == 0 ? hi : lo + (hi - lo) * std::pow(10.0, -k);
    if (right > left) {
      // integrate on [0, 1]: the error estimate misbehaves on very short intervals
      const double width = right - left;
      auto unit = [&](double u) { return f(left + width * u); };
      total += width * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(unit, 0.0, 1.0, kMaxDepth,
                                                                                     rel_tol, &err);
    }
    left = right;
  }
  return total;
}

}  // namespace

double integrate(const std::function<double(double)>& f, double lo, double hi, double rel_tol) {
  if (!(hi > lo)) return 0.0;
  if (std::isinf(hi)) {
    auto mapped = [&](double t) {
      if (t >= 1.0) return 0.0;
      const double one_minus = 1.0 - t;
      return f(lo + t / one_minus) / (one_minus * one_minus);
    };
    return graded(mapped, 0.0, 1.0, rel_tol);
  }
  return graded(f, lo, hi, rel_tol);
}

BisectResult bisect(const std::function<double(double)>& f, double lo, double hi, double x_tol, int max_iter) {
  double f_lo = f(lo);
  double f_hi = f(hi);
  if (f_lo == 0.0) return {lo, 0.0, 0};
  if (f_hi == 0.0) return {hi, 0.0, 0};
  if (std::signbit(f_lo) == std::signbit(f_hi)) {
    throw NoSolutionError("bisect: no sign change on the bracket");
  }
  double mid = 0.5 * (lo + hi);
  double f_mid = f(mid);
  int it = 0;
  for (; it < max_iter; ++it) {
    mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    f_mid = f(mid);
    if (f_mid == 0.0) break;
    if (std::signbit(f_mid) == std::signbit(f_lo)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= x_tol) break;
  }
  return {mid, f_mid, it};
}

}  // namespace roughfpca::numerics
