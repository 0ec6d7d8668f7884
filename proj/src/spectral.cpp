#include "roughfpca/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "roughfpca/errors.hpp"

namespace roughfpca {

TestFunction::TestFunction(Kind kind, std::function<double(double)> h, double lipschitz, std::string name)
    : kind_(kind), h_(std::move(h)), lipschitz_(lipschitz), name_(std::move(name)) {
  if (!(lipschitz_ >= 0.0) || !std::isfinite(lipschitz_)) throw ConfigError("Lipschitz constant must be finite");
  if ((*this)(0.0) != 0.0) throw ConfigError("test function must satisfy h(0) = 0");
}

TestFunction TestFunction::power(int k) {
  if (k < 1) throw ConfigError("power test function needs k >= 1");
  return TestFunction(Kind::Power, [k](double x) { return std::pow(x, k); }, static_cast<double>(k),
                      "power:" + std::to_string(k));
}

TestFunction TestFunction::piecewise_linear(std::vector<std::pair<double, double>> knots) {
  if (knots.empty()) throw ConfigError("piecewise-linear test function needs knots");
  std::sort(knots.begin(), knots.end());
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (knots[i].first == knots[i - 1].first) throw ConfigError("duplicate knot location");
  }
  if (knots.front().first < 0.0) throw ConfigError("knots must be non-negative");
  if (knots.front().first > 0.0) knots.insert(knots.begin(), {0.0, 0.0});
  double lip = 0.0;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    lip = std::max(lip, std::abs((knots[i].second - knots[i - 1].second) / (knots[i].first - knots[i - 1].first)));
  }
  auto h = [knots](double x) {
    if (x <= knots.front().first) {
      if (knots.size() == 1) return knots.front().second;
      const auto& [x0, y0] = knots[0];
      const auto& [x1, y1] = knots[1];
      return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    }
    if (x >= knots.back().first) return knots.back().second;
    const auto it = std::upper_bound(knots.begin(), knots.end(), std::make_pair(x, -HUGE_VAL));
    const auto& [x1, y1] = *it;
    const auto& [x0, y0] = *(it - 1);
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
  };
  return TestFunction(Kind::PiecewiseLinear, h, lip, "table");
}

TestFunction TestFunction::custom(std::function<double(double)> h, double lipschitz, std::string name) {
  if (!h) throw ConfigError("custom test function is empty");
  return TestFunction(Kind::Custom, std::move(h), lipschitz, std::move(name));
}

double spectral_statistic(const Eigen::VectorXd& eigenvalues, int sample_size, const TestFunction& h) {
  if (sample_size < 1) throw ConfigError("sample size must be positive");
  double total = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) total += h(std::max(0.0, eigenvalues(i)));
  return total / sample_size;
}

double spectral_statistic(const EigenSystem& eigs, const TestFunction& h) {
  return spectral_statistic(eigs.eigenvalues, eigs.sample_size, h);
}

AtomicMeasure bulk_spectral_measure(const BulkFunction& b, double gamma, int atoms) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be positive and finite");
  if (atoms < 1) throw ConfigError("atom count must be positive");
  std::vector<double> loc(atoms);
  for (int i = 0; i < atoms; ++i) loc[i] = b(gamma * (i + 0.5) / atoms);
  return AtomicMeasure::uniform(std::move(loc));
}

SpectralLimit spectral_limit(const ModelSpec& model, const TestFunction& h, double gamma, int atoms,
                             int grid_points) {
  if (atoms < 2000) throw ConfigError("spectral_limit needs at least 2000 atoms");
  const BulkFunction& b = model.bulk();
  // dimensions past the support only add zero eigenvalues, and h(0) = 0
  const double g = std::min(gamma, b.support_end());
  const AtomicMeasure H = bulk_spectral_measure(b, g, atoms);
  const MPLaw law = mp_density(g, H, mp_default_grid(g, H, grid_points));
  const double value = g * (law.integrate([&](double x) { return h(x); }) + law.atom_at_zero * h(0.0));
  return {value, gamma, atoms, b(gamma) > 0.01 * b(0.0)};
}

}  // namespace roughfpca
