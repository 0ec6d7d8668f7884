#pragma once

#include <vector>

#include "roughfpca/bulk.hpp"
#include "roughfpca/numerics.hpp"

namespace roughfpca {

/// xi(gamma): the root in (0, 1/b(0)) of  int_0^gamma (b xi / (1 - b xi))^2 dx = 1.
/// gamma = +inf gives the criticality constant xi(inf). Throws NoSolutionError if the
/// left side stays below 1 on the whole interval.
double solve_xi(const BulkFunction& b, double gamma = numerics::kInf);

/// Left side of the xi equation, exposed for residual checks.
double xi_equation_lhs(const BulkFunction& b, double xi, double gamma = numerics::kInf);

/// psi(y) = y (1 + int_0^gamma b / (y - b) dx) for y > b(0). The default gamma = inf is the
/// eigenvalue bias map; a finite gamma gives its projected counterpart.
double psi(const BulkFunction& b, double y, double gamma = numerics::kInf);

/// psi'(y) = 1 - int_0^gamma (b / (y - b))^2 dx.
double psi_prime(const BulkFunction& b, double y, double gamma = numerics::kInf);

enum class Regime { Sub, Super };

struct SpikeLimit {
  int index;  // 1-based
  double spike;
  Regime regime;
  double limit_eigenvalue;
  /// Limit of |<e_hat_k, e_k>|. Super: sqrt(s psi'(s) / psi(s)); Sub: 0.
  double limit_abs_cosine;
  double limit_angle_deg() const;
};

struct CriticalityReport {
  double xi_inf;
  double threshold;  // 1 / xi_inf
  /// psi(1 / xi_inf): limit of every empirical eigenvalue past the supercritical ones.
  double subcritical_limit;
  int M;
  std::vector<SpikeLimit> per_spike;
};

/// Splits the spikes into super- and subcritical ones and attaches their limits. A spike with
/// |s xi(inf) - 1| <= 1e-10 raises BoundaryError.
CriticalityReport classify(const ModelSpec& model);

}  // namespace roughfpca
