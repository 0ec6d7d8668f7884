#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace roughfpca {

class Rng;

/// Probability measure with finitely many atoms.
class AtomicMeasure {
 public:
  /// Weights must be positive and sum to 1 within 1e-9.
  AtomicMeasure(std::vector<double> locations, std::vector<double> weights);
  /// Equal weights 1/n on the given locations.
  static AtomicMeasure uniform(std::vector<double> locations);
  static AtomicMeasure dirac(double location) { return uniform({location}); }

  const std::vector<double>& locations() const { return locations_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return locations_.size(); }
  double max_location() const;
  double mass_at_zero() const;
  /// int t^k dH(t)
  double moment(int k) const;

 private:
  std::vector<double> locations_;
  std::vector<double> weights_;
};

// ---------------------------------------------------------------------------------------
// GOE edge sampling

/// Top-k eigenvalues (descending) of W / sqrt(dim) with W = (G + G^T) / sqrt(2), G having iid
/// N(0,1) entries, so that the spectral edge sits at 2. Uses the Dumitriu-Edelman tridiagonal
/// form, which has exactly the GOE eigenvalue law, and Sturm-sequence bisection.
std::vector<double> sample_goe_top_eigs(int dim, int k, Rng& rng);
std::vector<double> sample_goe_top_eigs(int dim, int k, std::uint64_t seed);

/// Same law by building and diagonalising the dense matrix. O(dim^3); used to cross-check.
std::vector<double> sample_goe_top_eigs_dense(int dim, int k, Rng& rng);

/// (1 - alpha)-quantile (linear interpolation between order statistics) of
/// max_{k <= K1} (z_k - z_{k+1}) / (z_{k+1} - z_{k+2}) over reps GOE draws of dimension dim.
/// Location and scale normalisations cancel in the ratio, so raw eigenvalues are used.
double tw_ratio_quantile(int K1, double alpha, int reps, int dim, std::uint64_t seed);

/// The reps bootstrap ratios themselves, in replicate order.
std::vector<double> tw_ratio_samples(int K1, int reps, int dim, std::uint64_t seed);

/// Linear-interpolation quantile (R type 7) of a sample.
double empirical_quantile(std::vector<double> values, double prob);

// ---------------------------------------------------------------------------------------
// Deformed Marchenko-Pastur law

struct MpSolution {
  std::complex<double> s;          // Stieltjes transform of F_{y,H} at z
  std::complex<double> companion;  // Stieltjes transform of (1 - y) delta_0 + y F_{y,H}
  double residual;                 // |s - int dH(t) / (t (1 - y - y z s) - z)|
  int iterations;
};

/// Solves s = int dH(t) / (t (1 - y - y z s) - z) for Im z > 0. Internally iterates the
/// companion form m = -1 / (z - y int t / (1 + t m) dH) with damping 0.5, switches to Newton
/// once the step falls below 1e-4, and checks the original equation to 1e-10. `start` warm
/// starts the companion iterate. Throws NumericError with diagnostics on failure.
MpSolution solve_mp_stieltjes(double y, const AtomicMeasure& H, std::complex<double> z,
                              std::optional<std::complex<double>> start = std::nullopt);

struct MPLaw {
  double y;
  AtomicMeasure H;
  std::vector<std::pair<double, double>> density_grid;  // (E, f(E)) of the continuous part
  std::vector<std::pair<double, double>> support_edges;
  /// Mass of the atom of F_{y,H} at zero, max(H({0}), 1 - 1/y); removed from density_grid.
  double atom_at_zero;

  /// Trapezoid integral of the density column.
  double bulk_mass() const;
  /// Trapezoid integral of h(E) f(E).
  template <class F>
  double integrate(F&& h) const {
    double total = 0.0;
    for (std::size_t i = 1; i < density_grid.size(); ++i) {
      const auto& [e0, f0] = density_grid[i - 1];
      const auto& [e1, f1] = density_grid[i];
      total += 0.5 * (h(e0) * f0 + h(e1) * f1) * (e1 - e0);
    }
    return total;
  }
  /// CDF of F_{y,H} (atom at zero included) at x, by trapezoid accumulation.
  double cdf(double x) const;
};

/// f(E) = Im s(E + i eta) / pi on an increasing grid, with the Lorentzian of the zero atom
/// subtracted. Points where f stays O(eta) when eta shrinks tenfold lie outside the support and
/// get f = 0; support intervals are the runs of the remaining points.
MPLaw mp_density(double y, const AtomicMeasure& H, const std::vector<double>& E_grid, double eta = 1e-4);

/// Uniform grid on [0, upper] with `points` nodes, upper covering the whole support of F_{y,H}.
std::vector<double> mp_default_grid(double y, const AtomicMeasure& H, int points = 4001);

/// Closed-form Marchenko-Pastur density for H = delta_{sigma2}.
double mp_classical_density(double y, double sigma2, double x);

struct EdgeParams {
  double xi_n;
  double r_n;      // location of the largest bulk eigenvalue
  double sigma_n;  // Tracy-Widom scale
  double y_n;      // p / n
};

/// Finite-sample edge: xi_n solves int (t xi / (1 - t xi))^2 dH_n = n / p on (0, 1/max atom),
/// then r_n = (1/xi)(1 + y int t xi/(1 - t xi) dH_n) and
/// sigma_n^3 = (1/xi^3)(1 + y int (t xi/(1 - t xi))^3 dH_n).
EdgeParams finite_sample_edge(const AtomicMeasure& H_n, int p, int n);

}  // namespace roughfpca
