#include "roughfpca/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "roughfpca/errors.hpp"

namespace roughfpca {

namespace {

constexpr double kPsiBoundaryGap = 1e-9;
constexpr double kBoundaryTol = 1e-10;

void check_gamma(const BulkFunction& b, double gamma) {
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  if (std::isinf(gamma) && !b.integrable()) {
    throw IntegrabilityError("bulk function is not integrable on [0, inf)");
  }
}

void check_psi_arg(const BulkFunction& b, double y, const char* who) {
  if (!(y - b.b0() >= kPsiBoundaryGap)) {
    std::ostringstream os;
    os << who << ": argument " << y << " must exceed b(0) = " << b.b0();
    throw DomainError(os.str());
  }
}

}  // namespace

double xi_equation_lhs(const BulkFunction& b, double xi, double gamma) {
  return integrate_over_bulk(
      b,
      [&](double x) {
        const double bx = b(x) * xi;
        const double r = bx / (1.0 - bx);
        return r * r;
      },
      0.0, gamma);
}

double solve_xi(const BulkFunction& b, double gamma) {
  check_gamma(b, gamma);
  const double upper = 1.0 / b.b0();
  auto f = [&](double xi) { return xi_equation_lhs(b, xi, gamma) - 1.0; };
  // walk towards the singular end until the left side crosses 1
  double lo = 0.0;
  double hi = 0.0;
  bool bracketed = false;
  for (int k = 1; k <= 45; ++k) {
    const double candidate = upper * (1.0 - std::ldexp(1.0, -k));
    if (f(candidate) >= 0.0) {
      hi = candidate;
      bracketed = true;
      break;
    }
    lo = candidate;
  }
  if (!bracketed) {
    std::ostringstream os;
    os << "solve_xi: no root in (0, 1/b(0)) for gamma = " << gamma;
    throw NoSolutionError(os.str());
  }
  return numerics::bisect(f, lo, hi, 0.0, 200).root;
}

double psi(const BulkFunction& b, double y, double gamma) {
  check_gamma(b, gamma);
  check_psi_arg(b, y, "psi");
  const double mass = integrate_over_bulk(
      b,
      [&](double x) {
        const double bx = b(x);
        return bx / (y - bx);
      },
      0.0, gamma);
  return y * (1.0 + mass);
}

double psi_prime(const BulkFunction& b, double y, double gamma) {
  check_gamma(b, gamma);
  check_psi_arg(b, y, "psi_prime");
  const double mass = integrate_over_bulk(
      b,
      [&](double x) {
        const double r = b(x) / (y - b(x));
        return r * r;
      },
      0.0, gamma);
  return 1.0 - mass;
}

double SpikeLimit::limit_angle_deg() const {
  return std::acos(std::min(1.0, limit_abs_cosine)) * 180.0 / std::numbers::pi;
}

CriticalityReport classify(const ModelSpec& model) {
  const BulkFunction& b = model.bulk();
  CriticalityReport report{};
  report.xi_inf = solve_xi(b);
  report.threshold = 1.0 / report.xi_inf;
  report.subcritical_limit = psi(b, report.threshold);
  report.M = 0;
  const auto& spikes = model.spikes();
  for (std::size_t k = 0; k < spikes.size(); ++k) {
    const double s = spikes[k];
    const double margin = s * report.xi_inf - 1.0;
    if (std::abs(margin) <= kBoundaryTol) {
      std::ostringstream os;
      os << "spike " << k + 1 << " = " << s << " sits on the criticality threshold " << report.threshold;
      throw BoundaryError(os.str());
    }
    SpikeLimit lim{static_cast<int>(k + 1), s, Regime::Sub, report.subcritical_limit, 0.0};
    if (margin > 0.0) {
      const double value = psi(b, s);
      const double ratio = s * psi_prime(b, s) / value;
      lim.regime = Regime::Super;
      lim.limit_eigenvalue = value;
      lim.limit_abs_cosine = std::sqrt(std::clamp(ratio, 0.0, 1.0));
      report.M = static_cast<int>(k + 1);
    }
    report.per_spike.push_back(lim);
  }
  return report;
}

}  // namespace roughfpca
