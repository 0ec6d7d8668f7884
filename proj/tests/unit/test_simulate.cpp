#include <doctest.h>

#include <cmath>

#include "../oracles.hpp"
#include "roughfpca/errors.hpp"
#include "roughfpca/fpca.hpp"
#include "roughfpca/rng.hpp"
#include "roughfpca/simulate.hpp"

using namespace roughfpca;

TEST_CASE("Fourier basis values and orthonormality on a fine grid") {
  CHECK(fourier_basis(1, 0.3) == 1.0);
  CHECK(fourier_basis(2, 0.25) == doctest::Approx(std::sqrt(2.0)));
  CHECK(fourier_basis(3, 0.0) == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(fourier_basis(0, 0.1), DomainError);
  const int G = 10000;
  const Eigen::MatrixXd d = fourier_design(50, G);
  for (int j = 0; j < 50; ++j) {
    CHECK(std::abs(grid_inner(d.row(j).transpose(), d.row(j).transpose()) - 1.0) <= 1e-6);
  }
  CHECK(std::abs(grid_inner(d.row(1).transpose(), d.row(2).transpose())) <= 1e-6);
  // against an independent Simpson quadrature of the continuous product
  const long double pi = std::numbers::pi_v<long double>;
  const long double ip = oracle::simpson(
      [&](long double t) { return 2.0L * std::sin(2 * pi * 3 * t) * std::sin(2 * pi * 3 * t); }, 0.0L, 1.0L);
  CHECK(static_cast<double>(ip) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("positive_truncation stops at the support of a compact bulk") {
  const SpectrumView v(ModelSpec({2.0}, BulkFunction::linear(1.0, 2.0)), 10, 50);
  // b((n-1)/10) > 0 iff n - 1 < 5
  CHECK(positive_truncation(v) == 5);
  CHECK(positive_truncation(SpectrumView(ModelSpec({}, BulkFunction::exp(1.0, 1.0)), 10, 50)) == 50);
}

TEST_CASE("draw_sample is deterministic") {
  SimConfig cfg{ModelSpec({2.0}, BulkFunction::poly(1.0, 0.68)), 20, 100, 64, 99, false};
  const auto a = draw_sample(cfg);
  const auto b = draw_sample(cfg);
  CHECK((a.curves.values.array() == b.curves.values.array()).all());
  CHECK((a.coefficients.array() == b.coefficients.array()).all());
  cfg.seed = 100;
  CHECK(!(draw_sample(cfg).coefficients.array() == a.coefficients.array()).all());
}

TEST_CASE("config validation") {
  SimConfig cfg{ModelSpec({}, BulkFunction::poly(1.0, 1.0)), 10, 50, 1, 1, false};
  CHECK_THROWS_AS(draw_sample(cfg), ConfigError);
  cfg.grid_size = 8;
  cfg.N = 1;
  cfg.center_empirically = true;
  CHECK_THROWS_AS(draw_sample(cfg), ConfigError);
}

TEST_CASE("coefficient variances follow the population spectrum") {
  const int N = 400;
  const int reps = 200;
  const ModelSpec model({2.0}, BulkFunction::linear(1.0, 1.0));
  const SpectrumView view(model, N, 40);
  Eigen::VectorXd var = Eigen::VectorXd::Zero(40);
  for (int r = 0; r < reps; ++r) {
    Rng rng(7, r);
    const Eigen::MatrixXd c = draw_coefficients(view, rng);
    var += c.array().square().colwise().mean().matrix().transpose() / reps;
  }
  CHECK(std::abs(var(0) / 2.0 - 1.0) <= 0.2);
  for (int j = 2; j <= 40; ++j) {
    CHECK(std::abs(var(j - 1) / view.eigenvalue(j) - 1.0) <= 0.25);
  }
}

TEST_CASE("centering removes the column means") {
  SimConfig cfg{ModelSpec({}, BulkFunction::exp(1.0, 1.0)), 30, 60, 32, 5, true};
  const auto s = draw_sample(cfg);
  CHECK(s.coefficients.colwise().mean().cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(s.curves.values.colwise().mean().cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("property: E Tr C_hat = Tr C within three standard errors") {
  const int N = 100;
  const int p = 500;
  const ModelSpec model({2.0}, BulkFunction::poly(1.0, 0.68));
  const SpectrumView view(model, N, p);
  double tr = 0.0;
  for (double v : view.eigenvalues()) tr += v;
  const int reps = 500;
  std::vector<double> traces;
  for (int r = 0; r < reps; ++r) {
    Rng rng(11, r);
    const Eigen::MatrixXd c = draw_coefficients(view, rng);
    traces.push_back(c.squaredNorm() / N);
  }
  double mean = 0.0;
  for (double t : traces) mean += t / reps;
  double var = 0.0;
  for (double t : traces) var += (t - mean) * (t - mean) / (reps - 1);
  CHECK(std::abs(mean - tr) <= 3.0 * std::sqrt(var / reps));
  // Tr C / N approaches the integral of b over the truncated range plus s / N
  const auto& b = model.bulk();
  const double bulk_part = integrate_over_bulk(b, [&](double x) { return b(x); }, 0.0, (p - 1.0) / N);
  CHECK(tr / N == doctest::Approx(bulk_part + 2.0 / N).epsilon(0.02));
}

TEST_CASE("property: grid inner products match coefficient inner products") {
  for (int N : {20, 200}) {
    SimConfig cfg{ModelSpec({3.0}, BulkFunction::poly(1.0, 0.68)), N, 5 * N, 2048, 3, false};
    const auto s = draw_sample(cfg);
    for (int i = 0; i + 1 < std::min(N, 10); ++i) {
      const double grid = grid_inner(s.curves.values.row(i).transpose(), s.curves.values.row(i + 1).transpose());
      const double coef = s.coefficients.row(i).dot(s.coefficients.row(i + 1));
      const double scale = s.coefficients.row(i).norm() * s.coefficients.row(i + 1).norm();
      CHECK(std::abs(grid - coef) <= 1e-3 * scale);
    }
  }
}
