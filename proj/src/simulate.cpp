#include "roughfpca/simulate.hpp"

#include <cmath>
#include <numbers>

#include "roughfpca/errors.hpp"
#include "roughfpca/rng.hpp"

namespace roughfpca {

double grid_inner(const Eigen::Ref<const Eigen::VectorXd>& f, const Eigen::Ref<const Eigen::VectorXd>& g) {
  if (f.size() != g.size()) throw DomainError("grid_inner: size mismatch");
  return f.dot(g) / static_cast<double>(f.size());
}

void SimConfig::validate() const {
  if (N < 1) throw ConfigError("N must be positive");
  if (p < 1) throw ConfigError("p must be positive");
  if (static_cast<std::size_t>(p) < model.K()) throw ConfigError("p must be at least the number of spikes");
  if (grid_size < 2) throw ConfigError("grid size must be at least 2");
  if (center_empirically && N < 2) throw ConfigError("centering needs N >= 2");
}

double fourier_basis(int j, double t) {
  if (j < 1) throw DomainError("fourier_basis: index must be >= 1");
  if (j == 1) return 1.0;
  const int m = j / 2;
  const double arg = 2.0 * std::numbers::pi * m * t;
  return std::numbers::sqrt2 * (j % 2 == 0 ? std::sin(arg) : std::cos(arg));
}

Eigen::MatrixXd fourier_design(int p, int grid_size) {
  Eigen::MatrixXd out(p, grid_size);
  for (int g = 0; g < grid_size; ++g) {
    const double t = (g + 0.5) / grid_size;
    for (int j = 0; j < p; ++j) out(j, g) = fourier_basis(j + 1, t);
  }
  return out;
}

Eigen::MatrixXd draw_coefficients(const SpectrumView& spectrum, Rng& rng) {
  const int n = spectrum.sample_size();
  const int p = spectrum.truncation();
  const std::vector<double> lambda = spectrum.eigenvalues();
  Eigen::VectorXd scale(p);
  for (int j = 0; j < p; ++j) scale(j) = std::sqrt(lambda[j]);
  Eigen::MatrixXd z(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) z(i, j) = rng.normal() * scale(j);
  }
  return z;
}

int positive_truncation(const SpectrumView& spectrum) {
  int q = spectrum.truncation();
  while (q > 0 && !(spectrum.eigenvalue(q) > 0.0)) --q;
  return q;
}

void center_columns(Eigen::MatrixXd& m) {
  if (m.rows() == 0) return;
  const Eigen::RowVectorXd mean = m.colwise().mean();
  m.rowwise() -= mean;
}

SimulatedSample draw_sample(const SimConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  SimulatedSample out;
  out.coefficients = draw_coefficients(SpectrumView(cfg.model, cfg.N, cfg.p), rng);
  if (cfg.center_empirically) center_columns(out.coefficients);
  out.curves.values = out.coefficients * fourier_design(cfg.p, cfg.grid_size);
  return out;
}

}  // namespace roughfpca
