#include "roughfpca/fpca.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "roughfpca/errors.hpp"
#include "roughfpca/parallel.hpp"
#include "roughfpca/rng.hpp"

namespace roughfpca {

namespace {

void check_finite(const Eigen::MatrixXd& m) {
  if (!m.allFinite()) throw DataError("input contains NaN or infinite values");
}

Eigen::MatrixXd prepared(const SampleView& data, bool center) {
  const int n = data.size();
  if (n < (center ? 2 : 1)) {
    throw DataError(center ? "centred covariance needs at least two curves" : "covariance needs at least one curve");
  }
  check_finite(*data.rows);
  Eigen::MatrixXd x = *data.rows;
  if (center) center_columns(x);
  return x;
}

/// Symmetric matrix for the smaller form, scaled so its spectrum is the operator's.
Eigen::MatrixXd small_form(const Eigen::MatrixXd& x, double weight, bool& dual) {
  const double n = static_cast<double>(x.rows());
  dual = x.rows() <= x.cols();
  Eigen::MatrixXd m;
  if (dual) {
    m.noalias() = x * x.transpose();
  } else {
    m.noalias() = x.transpose() * x;
  }
  m *= weight / n;
  return m;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + mid));
  return m;
}

}  // namespace

EigenSystem empirical_covariance_eigen(const SampleView& data, bool center) {
  const Eigen::MatrixXd x = prepared(data, center);
  bool dual = false;
  const Eigen::MatrixXd m = small_form(x, data.weight, dual);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) throw NumericError("symmetric eigensolver failed");
  const int count = static_cast<int>(m.rows());
  EigenSystem out;
  out.weight = data.weight;
  out.sample_size = data.size();
  out.eigenvalues.resize(count);
  for (int k = 0; k < count; ++k) out.eigenvalues(k) = std::max(0.0, solver.eigenvalues()(count - 1 - k));

  if (!dual) {
    out.eigenfunctions = solver.eigenvectors().rowwise().reverse().transpose() / std::sqrt(data.weight);
    return out;
  }
  const double top = count > 0 ? out.eigenvalues(0) : 0.0;
  const double cutoff = top * 1e-12 * std::max(1, count);
  int rank = 0;
  while (rank < count && out.eigenvalues(rank) > cutoff && out.eigenvalues(rank) > 0.0) ++rank;
  out.eigenfunctions.resize(rank, x.cols());
  for (int k = 0; k < rank; ++k) {
    Eigen::VectorXd e = x.transpose() * solver.eigenvectors().col(count - 1 - k);
    e /= std::sqrt(data.weight * e.squaredNorm());
    out.eigenfunctions.row(k) = e.transpose();
  }
  return out;
}

Eigen::VectorXd empirical_eigenvalues(const SampleView& data, bool center) {
  const Eigen::MatrixXd x = prepared(data, center);
  bool dual = false;
  const Eigen::MatrixXd m = small_form(x, data.weight, dual);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("symmetric eigensolver failed");
  Eigen::VectorXd ev = solver.eigenvalues().reverse();
  return ev.cwiseMax(0.0);
}

double inner(const Eigen::Ref<const Eigen::VectorXd>& f, const Eigen::Ref<const Eigen::VectorXd>& g, double weight) {
  if (f.size() != g.size()) throw DomainError("inner: size mismatch");
  return weight * f.dot(g);
}

double angle_between(const Eigen::Ref<const Eigen::VectorXd>& f, const Eigen::Ref<const Eigen::VectorXd>& g,
                     double weight) {
  const double nf = std::sqrt(inner(f, f, weight));
  const double ng = std::sqrt(inner(g, g, weight));
  if (!(nf > 0.0) || !(ng > 0.0)) throw DomainError("angle_between: zero function");
  // 2 atan2(|a - b|, |a + b|) for unit vectors with <a, b> >= 0; stable near 0 and 90 degrees
  const double sign = inner(f, g, weight) < 0.0 ? -1.0 : 1.0;
  const Eigen::VectorXd a = f / nf;
  const Eigen::VectorXd b = sign * g / ng;
  const double diff = std::sqrt(weight) * (a - b).norm();
  const double sum = std::sqrt(weight) * (a + b).norm();
  return 2.0 * std::atan2(diff, sum) * 180.0 / std::numbers::pi;
}

std::vector<AngleSummary> split_stability(const SampleView& data, const std::vector<int>& sample_sizes, int k_max,
                                          int reps, SamplingMode mode, std::uint64_t seed, bool center) {
  if (k_max < 1) throw ConfigError("split_stability: k_max must be >= 1");
  if (reps < 0) throw ConfigError("split_stability: reps must be >= 0");
  std::vector<AngleSummary> out;
  if (reps == 0) return out;
  const int n = data.size();
  for (std::size_t si = 0; si < sample_sizes.size(); ++si) {
    const int n_sub = sample_sizes[si];
    if (n_sub < (center ? 2 : 1) || n_sub < k_max) {
      throw ConfigError("split_stability: subsample size " + std::to_string(n_sub) + " too small for k_max");
    }
    if (mode == SamplingMode::WithoutReplacement && 2 * n_sub > n) {
      throw ConfigError("split_stability: two disjoint subsamples of " + std::to_string(n_sub) +
                        " need at least " + std::to_string(2 * n_sub) + " curves");
    }
    std::vector<std::vector<double>> angles(k_max, std::vector<double>(reps));
    const std::uint64_t size_seed = split_seed(seed, si);
    parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
      Rng rng(size_seed, r);
      std::vector<int> idx;
      if (mode == SamplingMode::WithoutReplacement) {
        idx.resize(n);
        std::iota(idx.begin(), idx.end(), 0);
        // partial Fisher-Yates for the first 2 n_sub positions
        for (int i = 0; i < 2 * n_sub; ++i) {
          const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
          std::swap(idx[i], idx[j]);
        }
      } else {
        idx.resize(2 * n_sub);
        for (auto& v : idx) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      }
      Eigen::MatrixXd a(n_sub, data.dim());
      Eigen::MatrixXd b(n_sub, data.dim());
      for (int i = 0; i < n_sub; ++i) {
        a.row(i) = data.rows->row(idx[i]);
        b.row(i) = data.rows->row(idx[n_sub + i]);
      }
      const EigenSystem ea = empirical_covariance_eigen(SampleView(a, data.weight), center);
      const EigenSystem eb = empirical_covariance_eigen(SampleView(b, data.weight), center);
      for (int k = 0; k < k_max; ++k) {
        // a rank-deficient resample has no k-th direction; count it as uninformative
        angles[k][r] = (k < ea.rank() && k < eb.rank())
                           ? angle_between(ea.eigenfunctions.row(k).transpose(), eb.eigenfunctions.row(k).transpose(),
                                           data.weight)
                           : 90.0;
      }
    });
    for (int k = 0; k < k_max; ++k) {
      const auto& v = angles[k];
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(reps);
      out.push_back({k + 1, n_sub, mean, median_of(v), reps});
    }
  }
  return out;
}

std::vector<double> eigenfunction_acf(const Eigen::Ref<const Eigen::VectorXd>& e, int max_lag) {
  const auto g = static_cast<int>(e.size());
  if (max_lag < 0 || max_lag >= g) throw DomainError("eigenfunction_acf: max_lag must lie in [0, G)");
  const Eigen::VectorXd d = e.array() - e.mean();
  const double c0 = d.squaredNorm();
  if (!(c0 > 0.0)) throw DataError("eigenfunction_acf: constant sequence has no autocorrelation");
  std::vector<double> acf(max_lag + 1);
  for (int lag = 0; lag <= max_lag; ++lag) {
    acf[lag] = d.head(g - lag).dot(d.tail(g - lag)) / c0;
  }
  return acf;
}

Eigen::VectorXd sample_mean(const SampleView& data) {
  if (data.size() < 1) throw DataError("mean of an empty sample");
  return data.rows->colwise().mean().transpose();
}

Eigen::VectorXd project_onto_rows(const Eigen::Ref<const Eigen::VectorXd>& f, const Eigen::MatrixXd& basis) {
  const Eigen::MatrixXd bt = basis.transpose();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(bt);
  const Eigen::VectorXd coef = qr.solve(f);
  return bt * coef;
}

Eigen::VectorXd project_mean(const CurveSet& data, ProjectionBasis basis, int k) {
  if (k < 1) throw ConfigError("project_mean: k must be >= 1");
  const Eigen::VectorXd mu = sample_mean(data);
  if (basis == ProjectionBasis::Fourier) {
    if (k > data.grid_size()) throw ConfigError("project_mean: k exceeds the grid size");
    return project_onto_rows(mu, fourier_design(k, data.grid_size()));
  }
  const EigenSystem es = empirical_covariance_eigen(data, true);
  if (k > es.rank()) {
    throw ConfigError("project_mean: only " + std::to_string(es.rank()) + " empirical eigenfunctions available");
  }
  return project_onto_rows(mu, es.eigenfunctions.topRows(k));
}

std::vector<LeadingEstimate> eigenpair_experiment(const ModelSpec& model, int N, int p, int k, int sims,
                                                  std::uint64_t seed, bool center) {
  if (sims < 0) throw ConfigError("sims must be non-negative");
  if (k < 1 || k > std::min(N, p)) throw ConfigError("eigenpair index out of range");
  const SpectrumView spectrum(model, N, p);
  const int active_cols = positive_truncation(spectrum);
  std::vector<LeadingEstimate> out(static_cast<std::size_t>(sims));
  parallel_for(out.size(), [&](std::size_t r) {
    Rng rng(seed, r);
    const Eigen::MatrixXd coef = draw_coefficients(spectrum, rng);
    const Eigen::MatrixXd active = coef.leftCols(std::max(std::max(active_cols, k), 1));
    const EigenSystem es = empirical_covariance_eigen(SampleView(active, 1.0), center);
    double angle = 90.0;
    if (es.rank() >= k) {
      const double c = std::min(1.0, std::abs(es.eigenfunctions(k - 1, k - 1)));
      angle = std::acos(c) * 180.0 / std::numbers::pi;
    }
    out[r] = {es.eigenvalues(k - 1), angle};
  });
  return out;
}

}  // namespace roughfpca
