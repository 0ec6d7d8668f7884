#include "roughfpca/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "roughfpca/diagnostics.hpp"
#include "roughfpca/errors.hpp"
#include "roughfpca/numerics.hpp"
#include "roughfpca/parallel.hpp"
#include "roughfpca/rng.hpp"

namespace roughfpca {

using cd = std::complex<double>;

AtomicMeasure::AtomicMeasure(std::vector<double> locations, std::vector<double> weights)
    : locations_(std::move(locations)), weights_(std::move(weights)) {
  if (locations_.empty()) throw ConfigError("atomic measure needs at least one atom");
  if (locations_.size() != weights_.size()) throw ConfigError("atomic measure: locations/weights size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < locations_.size(); ++i) {
    if (!std::isfinite(locations_[i]) || locations_[i] < 0.0) {
      throw ConfigError("atomic measure: locations must be finite and non-negative");
    }
    if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i])) {
      throw ConfigError("atomic measure: weights must be positive");
    }
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("atomic measure: weights must sum to 1");
}

AtomicMeasure AtomicMeasure::uniform(std::vector<double> locations) {
  const std::size_t n = locations.size();
  return AtomicMeasure(std::move(locations), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

double AtomicMeasure::max_location() const { return *std::max_element(locations_.begin(), locations_.end()); }

double AtomicMeasure::mass_at_zero() const {
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    if (locations_[i] == 0.0) m += weights_[i];
  }
  return m;
}

double AtomicMeasure::moment(int k) const {
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i) m += weights_[i] * std::pow(locations_[i], k);
  return m;
}

// ---------------------------------------------------------------------------------------
// GOE

namespace {

/// Number of eigenvalues of the symmetric tridiagonal (diag, off) strictly below x.
int sturm_count(const std::vector<double>& diag, const std::vector<double>& off2, double x) {
  int count = 0;
  double q = diag[0] - x;
  if (q < 0.0) ++count;
  for (std::size_t i = 1; i < diag.size(); ++i) {
    if (q == 0.0) q = 1e-300;
    q = diag[i] - x - off2[i - 1] / q;
    if (q < 0.0) ++count;
  }
  return count;
}

std::vector<double> tridiagonal_top(const std::vector<double>& diag, const std::vector<double>& off, int k) {
  const int n = static_cast<int>(diag.size());
  std::vector<double> off2(off.size());
  double lo = diag[0];
  double hi = diag[0];
  for (int i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::abs(off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(off[i]) : 0.0);
    lo = std::min(lo, diag[i] - r);
    hi = std::max(hi, diag[i] + r);
  }
  for (std::size_t i = 0; i < off.size(); ++i) off2[i] = off[i] * off[i];
  std::vector<double> out(k);
  double upper = hi;
  for (int j = 0; j < k; ++j) {
    // j-th largest eigenvalue: the smallest x with count(< x) >= n - j
    const int target = n - j;
    double a = lo;
    double b = upper;
    for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(b)); ++it) {
      const double mid = 0.5 * (a + b);
      if (sturm_count(diag, off2, mid) >= target) {
        b = mid;
      } else {
        a = mid;
      }
    }
    out[j] = 0.5 * (a + b);
    upper = b;
  }
  return out;
}

}  // namespace

std::vector<double> sample_goe_top_eigs(int dim, int k, Rng& rng) {
  if (dim < 1) throw ConfigError("GOE dimension must be positive");
  if (k < 1 || k > dim) throw ConfigError("GOE: k must lie in [1, dim]");
  std::vector<double> diag(dim);
  std::vector<double> off(dim - 1);
  for (int i = 0; i < dim; ++i) diag[i] = std::numbers::sqrt2 * rng.normal();
  for (int i = 0; i + 1 < dim; ++i) off[i] = rng.chi(static_cast<double>(dim - 1 - i));
  std::vector<double> top = tridiagonal_top(diag, off, k);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (double& v : top) v *= scale;
  return top;
}

std::vector<double> sample_goe_top_eigs(int dim, int k, std::uint64_t seed) {
  Rng rng(seed);
  return sample_goe_top_eigs(dim, k, rng);
}

std::vector<double> sample_goe_top_eigs_dense(int dim, int k, Rng& rng) {
  if (dim < 1) throw ConfigError("GOE dimension must be positive");
  if (k < 1 || k > dim) throw ConfigError("GOE: k must lie in [1, dim]");
  Eigen::MatrixXd g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) g(i, j) = rng.normal();
  }
  const Eigen::MatrixXd w = (g + g.transpose()) / (std::numbers::sqrt2 * std::sqrt(static_cast<double>(dim)));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(w, Eigen::EigenvaluesOnly);
  std::vector<double> out(k);
  for (int j = 0; j < k; ++j) out[j] = solver.eigenvalues()(dim - 1 - j);
  return out;
}

double empirical_quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw ConfigError("quantile of an empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw DomainError("quantile probability must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<double> tw_ratio_samples(int K1, int reps, int dim, std::uint64_t seed) {
  if (K1 < 1) throw ConfigError("K1 must be >= 1");
  if (dim < K1 + 2) throw ConfigError("GOE dimension must be at least K1 + 2");
  std::vector<double> out(static_cast<std::size_t>(std::max(reps, 0)));
  parallel_for(out.size(), [&](std::size_t r) {
    Rng rng(seed, r);
    for (int attempt = 0;; ++attempt) {
      const auto top = sample_goe_top_eigs(dim, K1 + 2, rng);
      try {
        out[r] = eigengap_ratio(top, K1);
        return;
      } catch (const DegenerateSpectrumError&) {
        if (attempt >= 100) throw NumericError("tw_ratio_samples: repeated degenerate GOE draws");
      }
    }
  });
  return out;
}

double tw_ratio_quantile(int K1, double alpha, int reps, int dim, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (reps < 100) throw ConfigError("tw_ratio_quantile: at least 100 bootstrap replicates required");
  return empirical_quantile(tw_ratio_samples(K1, reps, dim, seed), 1.0 - alpha);
}

// ---------------------------------------------------------------------------------------
// Marchenko-Pastur

namespace {

constexpr double kDamping = 0.5;
constexpr int kMaxIterations = 10000;
constexpr double kNewtonSwitch = 1e-4;

struct CompanionEquation {
  double y;
  const AtomicMeasure& H;
  cd z;

  /// y int t / (1 + t m) dH and y int t^2 / (1 + t m)^2 dH
  std::pair<cd, cd> sums(cd m) const {
    cd s1 = 0.0;
    cd s2 = 0.0;
    const auto& t = H.locations();
    const auto& w = H.weights();
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] == 0.0) continue;
      const cd q = 1.0 / (1.0 + t[i] * m);
      const cd a = t[i] * q;
      s1 += w[i] * a;
      s2 += w[i] * a * a;
    }
    return {y * s1, y * s2};
  }
  cd fixed_point(cd m) const { return -1.0 / (z - sums(m).first); }
};

cd to_s(double y, cd z, cd m) { return (m + (1.0 - y) / z) / y; }

double original_residual(double y, const AtomicMeasure& H, cd z, cd s) {
  cd rhs = 0.0;
  const cd factor = 1.0 - y - y * z * s;
  for (std::size_t i = 0; i < H.size(); ++i) rhs += H.weights()[i] / (H.locations()[i] * factor - z);
  return std::abs(s - rhs);
}

struct CoreResult {
  bool ok;
  cd m;
  int iterations;
  double last_step;
};

CoreResult solve_core(const CompanionEquation& eq, cd m) {
  bool newton = false;
  int newton_steps = 0;
  double step = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= kMaxIterations; ++it) {
    if (newton) {
      const auto [s1, s2] = eq.sums(m);
      const cd f = -1.0 / m + s1 - eq.z;
      const cd df = 1.0 / (m * m) - s2;
      cd delta = f / df;
      cd next = m - delta;
      for (int halve = 0; halve < 60 && !(next.imag() > 0.0); ++halve) {
        delta *= 0.5;
        next = m - delta;
      }
      if (!(next.imag() > 0.0) || !std::isfinite(next.real())) return {false, m, it, step};
      step = std::abs(next - m);
      m = next;
      if (step <= 1e-13 * std::abs(m)) return {true, m, it, step};
      if (++newton_steps > 200) return {step <= 1e-10 * std::abs(m), m, it, step};
    } else {
      const cd next = kDamping * m + (1.0 - kDamping) * eq.fixed_point(m);
      step = std::abs(next - m);
      m = next;
      if (step < kNewtonSwitch * std::max(1.0, std::abs(m))) newton = true;
    }
  }
  return {false, m, kMaxIterations, step};
}

bool physical(cd z, cd m) { return m.imag() > 0.0 && (z * m).imag() >= -1e-12 * std::abs(z * m); }

}  // namespace

MpSolution solve_mp_stieltjes(double y, const AtomicMeasure& H, cd z, std::optional<cd> start) {
  if (!(y > 0.0)) throw DomainError("MP solver: y must be positive");
  if (!(z.imag() > 0.0)) throw DomainError("MP solver: Im z must be positive");
  auto finish = [&](const CoreResult& r, int iterations) -> std::optional<MpSolution> {
    if (!r.ok || !physical(z, r.m)) return std::nullopt;
    const cd s = to_s(y, z, r.m);
    const double res = original_residual(y, H, z, s);
    if (!(res <= 1e-10 * std::max(1.0, std::abs(s)))) return std::nullopt;
    return MpSolution{s, r.m, res, iterations};
  };
  if (start) {
    const CoreResult r = solve_core({y, H, z}, *start);
    if (auto sol = finish(r, r.iterations)) return *sol;
  }
  // continuation from far above the real axis down to Im z
  const double scale = 1.0 + H.max_location() * (1.0 + std::sqrt(y)) * (1.0 + std::sqrt(y));
  double eta = std::max(z.imag(), scale);
  cd m = -1.0 / cd(z.real(), eta);
  int total = 0;
  CoreResult r{};
  for (;;) {
    const cd zz(z.real(), eta);
    r = solve_core({y, H, zz}, m);
    total += r.iterations;
    if (!r.ok || !physical(zz, r.m)) {
      std::ostringstream os;
      os << "MP solver did not converge at z = " << zz << " (target " << z << ", y = " << y
         << ", atoms = " << H.size() << ", last step " << r.last_step << ", iterations " << total << ")";
      throw NumericError(os.str());
    }
    m = r.m;
    if (eta == z.imag()) break;
    eta = std::max(eta * 0.1, z.imag());
  }
  if (auto sol = finish(r, total)) return *sol;
  std::ostringstream os;
  os << "MP solver residual check failed at z = " << z << " (y = " << y << ")";
  throw NumericError(os.str());
}

double MPLaw::bulk_mass() const {
  return integrate([](double) { return 1.0; });
}

double MPLaw::cdf(double x) const {
  if (x < 0.0) return 0.0;
  double total = atom_at_zero;
  for (std::size_t i = 1; i < density_grid.size(); ++i) {
    const auto& [e0, f0] = density_grid[i - 1];
    const auto& [e1, f1] = density_grid[i];
    if (e1 <= x) {
      total += 0.5 * (f0 + f1) * (e1 - e0);
    } else {
      if (e0 < x) {
        const double fx = f0 + (f1 - f0) * (x - e0) / (e1 - e0);
        total += 0.5 * (f0 + fx) * (x - e0);
      }
      break;
    }
  }
  return total;
}

MPLaw mp_density(double y, const AtomicMeasure& H, const std::vector<double>& E_grid, double eta) {
  if (!(eta >= 1e-6 && eta <= 1e-2)) throw DomainError("mp_density: eta must lie in [1e-6, 1e-2]");
  if (E_grid.empty()) throw ConfigError("mp_density: empty energy grid");
  constexpr double kFloor = 1e-12;
  constexpr double kRecheck = 1e-2;
  MPLaw law{y, H, {}, {}, std::max(H.mass_at_zero(), std::max(0.0, 1.0 - 1.0 / y))};
  law.density_grid.reserve(E_grid.size());
  auto density_at = [&](double e, double h, std::optional<cd>& warm) {
    MpSolution sol;
    try {
      sol = solve_mp_stieltjes(y, H, cd(e, h), warm);
    } catch (const NumericError&) {
      sol = solve_mp_stieltjes(y, H, cd(e, h), std::nullopt);
    }
    warm = sol.companion;
    const double lorentz = law.atom_at_zero * h / (e * e + h * h);
    return std::max(0.0, (sol.s.imag() - lorentz) / std::numbers::pi);
  };
  // Inside the support Im s converges as eta -> 0; outside it is O(eta). Small values are
  // re-solved at eta / 10 to tell the two apart, and smoothing tails are set to zero.
  std::optional<cd> warm, warm_fine;
  std::vector<bool> inside;
  inside.reserve(E_grid.size());
  for (double e : E_grid) {
    double f = density_at(e, eta, warm);
    bool in = f > kFloor;
    if (in && f < kRecheck) {
      const double fine = density_at(e, 0.1 * eta, warm_fine);
      in = fine > 0.5 * f;
    } else {
      warm_fine = warm;
    }
    if (!in) f = 0.0;
    law.density_grid.emplace_back(e, f);
    inside.push_back(in);
  }
  const auto& d = law.density_grid;
  std::optional<double> open;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (inside[i] && !open) {
      open = i == 0 ? d[0].first : 0.5 * (d[i - 1].first + d[i].first);
    } else if (!inside[i] && open) {
      law.support_edges.emplace_back(*open, 0.5 * (d[i - 1].first + d[i].first));
      open.reset();
    }
  }
  if (open) law.support_edges.emplace_back(*open, d.back().first);
  return law;
}

std::vector<double> mp_default_grid(double y, const AtomicMeasure& H, int points) {
  if (points < 2) throw ConfigError("grid needs at least two points");
  const double root = 1.0 + std::sqrt(y);
  const double upper = 1.1 * H.max_location() * root * root;
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) grid[i] = upper * i / (points - 1);
  return grid;
}

double mp_classical_density(double y, double sigma2, double x) {
  const double lo = sigma2 * (1.0 - std::sqrt(y)) * (1.0 - std::sqrt(y));
  const double hi = sigma2 * (1.0 + std::sqrt(y)) * (1.0 + std::sqrt(y));
  if (!(x > lo && x < hi)) return 0.0;
  return std::sqrt((hi - x) * (x - lo)) / (2.0 * std::numbers::pi * sigma2 * y * x);
}

EdgeParams finite_sample_edge(const AtomicMeasure& H_n, int p, int n) {
  if (p < 1 || n < 1) throw ConfigError("finite_sample_edge: p and n must be positive");
  const double top = H_n.max_location();
  if (!(top > 0.0)) throw NoSolutionError("finite_sample_edge: measure has no positive atom");
  const double y = static_cast<double>(p) / n;
  const auto& t = H_n.locations();
  const auto& w = H_n.weights();
  auto integral = [&](double xi, int power) {
    double total = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double r = t[i] * xi / (1.0 - t[i] * xi);
      total += w[i] * std::pow(r, power);
    }
    return total;
  };
  const double target = 1.0 / y;
  auto f = [&](double xi) { return integral(xi, 2) - target; };
  double lo = 0.0;
  double hi = 0.0;
  bool bracketed = false;
  for (int k = 1; k <= 52; ++k) {
    const double c = (1.0 - std::ldexp(1.0, -k)) / top;
    if (f(c) >= 0.0) {
      hi = c;
      bracketed = true;
      break;
    }
    lo = c;
  }
  if (!bracketed) throw NoSolutionError("finite_sample_edge: no root for xi_n in (0, 1/max atom)");
  const double xi = numerics::bisect(f, lo, hi, 0.0, 200).root;
  EdgeParams out{};
  out.xi_n = xi;
  out.y_n = y;
  out.r_n = (1.0 + y * integral(xi, 1)) / xi;
  out.sigma_n = std::cbrt((1.0 + y * integral(xi, 3)) / (xi * xi * xi));
  return out;
}

}  // namespace roughfpca
