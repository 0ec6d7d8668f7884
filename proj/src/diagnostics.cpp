#include "roughfpca/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "roughfpca/errors.hpp"
#include "roughfpca/numerics.hpp"
#include "roughfpca/parallel.hpp"
#include "roughfpca/rmt.hpp"
#include "roughfpca/rng.hpp"

namespace roughfpca {

double eigengap_ratio(const std::vector<double>& l, int K1) {
  if (K1 < 1) throw ConfigError("K1 must be >= 1");
  if (static_cast<int>(l.size()) < K1 + 2) {
    throw ConfigError("eigengap_ratio needs at least K1 + 2 eigenvalues");
  }
  for (int k = 0; k + 1 < K1 + 2; ++k) {
    if (!(l[k] > l[k + 1])) {
      std::ostringstream os;
      os << "eigenvalues " << k + 1 << " and " << k + 2 << " are not strictly decreasing (" << l[k] << ", "
         << l[k + 1] << ")";
      throw DegenerateSpectrumError(os.str());
    }
  }
  double best = 0.0;
  for (int k = 0; k < K1; ++k) best = std::max(best, (l[k] - l[k + 1]) / (l[k + 1] - l[k + 2]));
  return best;
}

double eigengap_ratio(const Eigen::VectorXd& eigenvalues, int K1) {
  return eigengap_ratio(std::vector<double>(eigenvalues.data(), eigenvalues.data() + eigenvalues.size()), K1);
}

double chi2_quantile(double prob, int df) {
  if (df < 1) throw ConfigError("chi-square degrees of freedom must be >= 1");
  if (!(prob > 0.0 && prob < 1.0)) throw DomainError("chi-square quantile needs prob in (0, 1)");
  const double shape = 0.5 * df;
  auto cdf = [&](double x) { return boost::math::gamma_p(shape, 0.5 * x); };
  double hi = std::max(1.0, static_cast<double>(df));
  while (cdf(hi) < prob) hi *= 2.0;
  double lo = 0.0;
  while (hi - lo > 1e-14 * hi) {
    const double mid = 0.5 * (lo + hi);
    const double c = cdf(mid);
    if (std::abs(c - prob) < 1e-12) return mid;
    (c < prob ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TestResult test_supercritical_with_quantile(const SampleView& data, int K1, double alpha, double quantile,
                                            int reps_bootstrap, bool center) {
  if (K1 + 2 > std::min(data.size(), data.dim())) throw ConfigError("test needs K1 + 2 <= min(N, dim)");
  const Eigen::VectorXd eigs = empirical_eigenvalues(data, center);
  const double stat = eigengap_ratio(eigs, K1);
  return {stat, quantile, alpha, stat > quantile, K1, reps_bootstrap};
}

TestResult test_supercritical(const SampleView& data, int K1, double alpha, int reps, int goe_dim,
                              std::uint64_t seed, bool center) {
  if (K1 + 2 > std::min(data.size(), data.dim())) throw ConfigError("test needs K1 + 2 <= min(N, dim)");
  const double q = tw_ratio_quantile(K1, alpha, reps, goe_dim, seed);
  return test_supercritical_with_quantile(data, K1, alpha, q, reps, center);
}

std::vector<RejectionRate> level_power_experiment(const LevelPowerConfig& cfg) {
  if (cfg.sims < 1) throw ConfigError("sims must be >= 1");
  if (cfg.cells.empty()) throw ConfigError("experiment needs at least one model");
  if (cfg.K1s.empty()) throw ConfigError("experiment needs at least one K1");
  const int p = cfg.p > 0 ? cfg.p : 5 * cfg.N;
  const int max_k1 = *std::max_element(cfg.K1s.begin(), cfg.K1s.end());
  if (max_k1 + 2 > std::min(cfg.N, p)) throw ConfigError("experiment needs K1 + 2 <= min(N, p)");

  std::vector<double> quantiles;
  for (int K1 : cfg.K1s) {
    quantiles.push_back(tw_ratio_quantile(K1, cfg.alpha, cfg.bootstrap.reps, cfg.bootstrap.goe_dim,
                                          split_seed(cfg.seed, 1'000'000 + static_cast<std::uint64_t>(K1))));
  }

  const std::size_t cells = cfg.cells.size();
  const std::size_t sims = static_cast<std::size_t>(cfg.sims);
  // ratio[(c * sims + r) * nk + j]
  const std::size_t nk = cfg.K1s.size();
  std::vector<char> reject(cells * sims * nk, 0);
  std::vector<SpectrumView> spectra;
  spectra.reserve(cells);
  std::vector<int> active_cols;
  for (const auto& cell : cfg.cells) {
    spectra.emplace_back(cell.model, cfg.N, p);
    active_cols.push_back(positive_truncation(spectra.back()));
  }
  parallel_for(cells * sims, [&](std::size_t idx) {
    const std::size_t c = idx / sims;
    const std::size_t r = idx % sims;
    Rng rng(split_seed(cfg.seed, c), r);
    const Eigen::MatrixXd coef = draw_coefficients(spectra[c], rng);
    const Eigen::MatrixXd active = coef.leftCols(std::max(active_cols[c], 1));
    const Eigen::VectorXd eigs = empirical_eigenvalues(SampleView(active, 1.0), cfg.center);
    for (std::size_t j = 0; j < nk; ++j) reject[idx * nk + j] = eigengap_ratio(eigs, cfg.K1s[j]) > quantiles[j];
  });

  std::vector<RejectionRate> out;
  for (std::size_t j = 0; j < nk; ++j) {
    for (std::size_t c = 0; c < cells; ++c) {
      int count = 0;
      for (std::size_t r = 0; r < sims; ++r) count += reject[(c * sims + r) * nk + j];
      const auto& spikes = cfg.cells[c].model.spikes();
      out.push_back({static_cast<int>(c), cfg.cells[c].label, spikes.empty() ? 0.0 : spikes.front(), cfg.K1s[j],
                     count, cfg.sims, quantiles[j]});
    }
  }
  return out;
}

std::string rejection_table_csv(const std::vector<RejectionRate>& rates) {
  std::vector<std::string> labels;
  std::vector<int> k1s;
  for (const auto& r : rates) {
    if (std::find(labels.begin(), labels.end(), r.label) == labels.end()) labels.push_back(r.label);
    if (std::find(k1s.begin(), k1s.end(), r.K1) == k1s.end()) k1s.push_back(r.K1);
  }
  std::ostringstream os;
  os << "K1";
  for (const auto& l : labels) os << ',' << l;
  os << '\n';
  os.precision(10);
  for (int k : k1s) {
    os << k;
    for (const auto& l : labels) {
      os << ',';
      for (const auto& r : rates) {
        if (r.K1 == k && r.label == l) os << 100.0 * r.rate();
      }
    }
    os << '\n';
  }
  return os.str();
}

std::string rejection_long_csv(const std::vector<RejectionRate>& rates) {
  std::ostringstream os;
  os.precision(17);
  os << "cell,label,spike,K1,rejections,sims,rate,quantile\n";
  for (const auto& r : rates) {
    os << r.cell << ',' << r.label << ',' << r.lead_spike << ',' << r.K1 << ',' << r.rejections << ',' << r.sims
       << ',' << r.rate() << ',' << r.quantile << '\n';
  }
  return os.str();
}

MeanTestResult mean_test(const CurveSet& data, const Eigen::VectorXd& mu0, int k, double level) {
  if (mu0.size() != data.grid_size()) throw ConfigError("mu0 must have one value per grid point");
  if (k < 1) throw ConfigError("mean_test: k must be >= 1");
  const EigenSystem es = empirical_covariance_eigen(data, true);
  if (k > es.rank()) throw ConfigError("mean_test: k exceeds the number of available components");
  const Eigen::VectorXd diff =
      (data.values.colwise().sum().transpose() - data.size() * mu0) / std::sqrt(static_cast<double>(data.size()));
  double stat = 0.0;
  for (int j = 0; j < k; ++j) {
    const double lam = es.eigenvalues(j);
    if (!(lam > 0.0)) throw DegenerateSpectrumError("mean_test: zero eigenvalue among the first k");
    const double c = inner(diff, es.eigenfunctions.row(j).transpose(), es.weight);
    stat += c * c / lam;
  }
  const double q = chi2_quantile(level, k);
  return {stat, q, k, stat > q};
}

MeanTestResult mean_test(const CurveSet& data, const std::function<double(double)>& mu0, int k, double level) {
  Eigen::VectorXd m(data.grid_size());
  for (int g = 0; g < data.grid_size(); ++g) m(g) = mu0(data.grid_point(g));
  return mean_test(data, m, k, level);
}

std::vector<MeanLevelRow> mean_test_levels(const CurveSet& population, const std::vector<int>& sample_sizes,
                                           const std::vector<int>& ks, int sims, std::uint64_t seed) {
  if (sims < 1) throw ConfigError("sims must be >= 1");
  const Eigen::VectorXd mu = sample_mean(population);
  std::vector<MeanLevelRow> out;
  for (std::size_t si = 0; si < sample_sizes.size(); ++si) {
    const int n = sample_sizes[si];
    if (n < 2) throw ConfigError("resample size must be >= 2");
    std::vector<std::vector<char>> rej(sims, std::vector<char>(ks.size(), 0));
    parallel_for(static_cast<std::size_t>(sims), [&](std::size_t r) {
      Rng rng(split_seed(seed, si), r);
      CurveSet sample;
      sample.values.resize(n, population.grid_size());
      for (int i = 0; i < n; ++i) sample.values.row(i) = population.values.row(static_cast<int>(rng.below(population.size())));
      for (std::size_t j = 0; j < ks.size(); ++j) {
        try {
          rej[r][j] = mean_test(sample, mu, ks[j]).reject;
        } catch (const ConfigError&) {
          rej[r][j] = 0;
        } catch (const DegenerateSpectrumError&) {
          rej[r][j] = 0;
        }
      }
    });
    for (std::size_t j = 0; j < ks.size(); ++j) {
      int count = 0;
      for (int r = 0; r < sims; ++r) count += rej[r][j];
      out.push_back({n, ks[j], static_cast<double>(count) / sims, sims});
    }
  }
  return out;
}

Eigen::MatrixXd moving_average(const Eigen::MatrixXd& curves, int t) {
  const int G = static_cast<int>(curves.cols());
  if (t < 1) throw ConfigError("smoothing window must be >= 1");
  if (t > 1 && t >= G) throw ConfigError("smoothing window must be smaller than the grid size");
  if (t == 1) return curves;
  const int left = (t - 1) / 2;
  const int right = t / 2;
  Eigen::MatrixXd out(curves.rows(), G);
  for (int g = 0; g < G; ++g) {
    const int a = std::max(0, g - left);
    const int b = std::min(G - 1, g + right);
    out.col(g) = curves.middleCols(a, b - a + 1).rowwise().mean();
  }
  return out;
}

SmoothScan smooth_scan(const CurveSet& data, const std::vector<int>& windows, int K1, double alpha, int reps,
                       int goe_dim, std::uint64_t seed, bool center) {
  if (windows.empty()) throw ConfigError("smooth_scan needs at least one window");
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (windows[i] < 1) throw ConfigError("smoothing windows must be >= 1");
    if (i > 0 && windows[i] <= windows[i - 1]) throw ConfigError("smoothing windows must be strictly increasing");
  }
  if (windows.back() > 1 && windows.back() >= data.grid_size()) {
    throw ConfigError("largest smoothing window must be smaller than the grid size");
  }
  SmoothScan scan{windows, {}, tw_ratio_quantile(K1, alpha, reps, goe_dim, seed), {}};
  for (int t : windows) {
    const Eigen::MatrixXd smooth = moving_average(data.values, t);
    const TestResult r =
        test_supercritical_with_quantile(SampleView(smooth, data.weight()), K1, alpha, scan.quantile, reps, center);
    scan.statistics.push_back(r.statistic);
    scan.significant.push_back(r.reject);
  }
  return scan;
}

}  // namespace roughfpca
