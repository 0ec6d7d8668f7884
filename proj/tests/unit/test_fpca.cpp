#include <doctest.h>

#include <cmath>
#include <numbers>

#include "../oracles.hpp"
#include "roughfpca/errors.hpp"
#include "roughfpca/fpca.hpp"
#include "roughfpca/rng.hpp"
#include "roughfpca/simulate.hpp"

using namespace roughfpca;

namespace {

Eigen::MatrixXd gaussian(int n, int d, std::uint64_t seed, double col_decay = 0.0) {
  Rng rng(seed);
  Eigen::MatrixXd m(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) m(i, j) = rng.normal() * std::exp(-col_decay * j);
  }
  return m;
}

/// Eigenvalues of (w / N) X^T X by a dense primal solve.
Eigen::VectorXd primal_spectrum(const Eigen::MatrixXd& x, double w, bool center) {
  Eigen::MatrixXd c = x;
  if (center) c.rowwise() -= c.colwise().mean();
  const Eigen::MatrixXd cov = w * c.transpose() * c / static_cast<double>(x.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s(cov);
  return s.eigenvalues().reverse();
}

}  // namespace

TEST_CASE("rank-one sample") {
  Eigen::MatrixXd x(1, 4);
  x << 1.0, 2.0, -2.0, 4.0;
  const auto es = empirical_covariance_eigen(SampleView(x, 0.25), false);
  CHECK(es.eigenvalues(0) == doctest::Approx(0.25 * 25.0));
  const Eigen::VectorXd e = es.eigenfunctions.row(0).transpose();
  CHECK(angle_between(e, x.row(0).transpose(), 0.25) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(inner(e, e, 0.25) == doctest::Approx(1.0));
}

TEST_CASE("diagonal example with divisor N") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 3);
  x(0, 0) = 2.0;
  x(1, 1) = 1.0;
  const auto es = empirical_covariance_eigen(SampleView(x, 1.0), false);
  CHECK(es.eigenvalues(0) == doctest::Approx(2.0));
  CHECK(es.eigenvalues(1) == doctest::Approx(0.5));
}

TEST_CASE("zero data and NaNs") {
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(5, 8);
  const auto es = empirical_covariance_eigen(SampleView(zero, 1.0), false);
  CHECK(es.eigenvalues.cwiseAbs().maxCoeff() == 0.0);
  Eigen::MatrixXd bad = gaussian(3, 3, 1);
  bad(1, 1) = std::nan("");
  CHECK_THROWS_AS(empirical_covariance_eigen(SampleView(bad, 1.0), false), DataError);
  CHECK_THROWS_AS(empirical_covariance_eigen(SampleView(gaussian(1, 3, 1), 1.0), true), DataError);
}

TEST_CASE("property: dual and primal spectra agree") {
  for (auto [n, d] : {std::pair{20, 50}, std::pair{50, 20}, std::pair{60, 60}, std::pair{7, 33}}) {
    for (bool center : {false, true}) {
      const Eigen::MatrixXd x = gaussian(n, d, 100 + n + d, 0.05);
      const double w = 1.0 / d;
      const auto es = empirical_covariance_eigen(SampleView(x, w), center);
      const Eigen::VectorXd ref = primal_spectrum(x, w, center);
      const int m = std::min(n, d);
      REQUIRE(es.eigenvalues.size() == m);
      CHECK((es.eigenvalues - ref.head(m)).cwiseAbs().maxCoeff() <= 1e-8 * ref(0));
      CHECK(std::is_sorted(es.eigenvalues.data(), es.eigenvalues.data() + m, std::greater<>()));
      CHECK(es.eigenvalues.minCoeff() >= 0.0);
      // orthonormality of reconstructed eigenfunctions
      const Eigen::MatrixXd gram = w * es.eigenfunctions * es.eigenfunctions.transpose();
      CHECK((gram - Eigen::MatrixXd::Identity(es.rank(), es.rank())).cwiseAbs().maxCoeff() <= 1e-8);
      // eigen-equation in the primal space
      Eigen::MatrixXd c = x;
      if (center) c.rowwise() -= c.colwise().mean();
      const Eigen::MatrixXd cov = w * c.transpose() * c / n;
      for (int k = 0; k < std::min(3, es.rank()); ++k) {
        const Eigen::VectorXd v = es.eigenfunctions.row(k).transpose();
        CHECK((cov * v * 1.0 - es.eigenvalues(k) * v / 1.0).norm() <= 1e-8 * ref(0) * v.norm());
      }
    }
  }
}

TEST_CASE("angles follow the sign convention") {
  Eigen::VectorXd f(3), g(3);
  f << 1, 2, 3;
  g << -2, 1, 0;
  CHECK(angle_between(f, f) == doctest::Approx(0.0));
  CHECK(angle_between(f, -f) == doctest::Approx(0.0));
  CHECK(angle_between(f, g) == doctest::Approx(90.0));
  CHECK_THROWS_AS(angle_between(f, Eigen::VectorXd::Zero(3)), DomainError);
  Eigen::VectorXd h(3);
  h << 1, 0, 0;
  Eigen::VectorXd q(3);
  q << 1, 1, 0;
  CHECK(angle_between(h, -q) == doctest::Approx(45.0));
}

TEST_CASE("split stability: near-deterministic rank-3 data") {
  const int G = 64;
  Eigen::MatrixXd x(200, G);
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const double a = 3.0 * rng.normal();
    const double b = 1.0 * rng.normal();
    const double c = 0.3 * rng.normal();
    for (int g = 0; g < G; ++g) {
      const double t = (g + 0.5) / G;
      x(i, g) = a * fourier_basis(2, t) + b * fourier_basis(3, t) + c * fourier_basis(4, t) + 1e-4 * rng.normal();
    }
  }
  const auto s = split_stability(SampleView(x, 1.0 / G), {50}, 1, 30, SamplingMode::WithoutReplacement, 9);
  REQUIRE(s.size() == 1);
  // first-order perturbation: the angle between two independent estimates is about
  // sqrt(2 sum_j l1 lj / (n (l1 - lj)^2)) radians
  const double pert = std::sqrt(2.0 * (9.0 * 1.0 / 64.0 + 9.0 * 0.09 / (8.91 * 8.91)) / 50.0) * 180.0 / std::numbers::pi;
  CHECK(s[0].mean_angle_deg == doctest::Approx(pert).epsilon(0.35));
  CHECK(split_stability(SampleView(x, 1.0 / G), {50}, 1, 0, SamplingMode::WithReplacement, 9).empty());
  CHECK_THROWS_AS(split_stability(SampleView(x, 1.0 / G), {150}, 1, 5, SamplingMode::WithoutReplacement, 9),
                  ConfigError);
  const auto w = split_stability(SampleView(x, 1.0 / G), {150}, 2, 5, SamplingMode::WithReplacement, 9);
  CHECK(w.size() == 2);
  for (const auto& a : w) {
    CHECK(a.mean_angle_deg >= 0.0);
    CHECK(a.median_angle_deg <= 90.0);
  }
}

TEST_CASE("split stability: pure bulk delocalises") {
  const int N = 200;
  const auto b = calibrate_rate(BulkFamily::PolyDecay, 1.0, 1.3);
  Rng rng(17);
  const Eigen::MatrixXd c = draw_coefficients(SpectrumView(ModelSpec({}, b), N, 5 * N), rng);
  const auto s = split_stability(SampleView(c, 1.0), {100}, 1, 50, SamplingMode::WithoutReplacement, 4, false);
  CHECK(s[0].mean_angle_deg > 60.0);
}

TEST_CASE("split stability is reproducible") {
  const Eigen::MatrixXd x = gaussian(40, 10, 8, 0.3);
  const auto a = split_stability(SampleView(x, 1.0), {10, 20}, 3, 20, SamplingMode::WithoutReplacement, 77);
  const auto b = split_stability(SampleView(x, 1.0), {10, 20}, 3, 20, SamplingMode::WithoutReplacement, 77);
  REQUIRE(a.size() == 6);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].mean_angle_deg == b[i].mean_angle_deg);
    CHECK(a[i].order_k == b[i].order_k);
  }
  CHECK(a[0].sample_size == 10);
  CHECK(a[3].sample_size == 20);
}

TEST_CASE("autocorrelation") {
  Rng rng(2);
  const int G = 2000;
  Eigen::VectorXd white(G);
  for (int i = 0; i < G; ++i) white(i) = rng.normal();
  const auto acf = eigenfunction_acf(white, 20);
  CHECK(acf[0] == doctest::Approx(1.0));
  int outside = 0;
  for (int l = 1; l <= 20; ++l) outside += std::abs(acf[l]) > 3.0 / std::sqrt(static_cast<double>(G));
  CHECK(outside <= 2);
  Eigen::VectorXd u(100);
  for (int i = 0; i < 100; ++i) u(i) = std::pow((i - 49.5) / 50.0, 2);
  CHECK(eigenfunction_acf(u, 1)[1] > 0.9);
  CHECK_THROWS_AS(eigenfunction_acf(Eigen::VectorXd::Constant(10, 2.0), 3), DataError);
}

TEST_CASE("mean projection") {
  const int G = 32;
  CurveSet cs;
  cs.values.resize(6, G);
  Rng rng(3);
  for (int i = 0; i < 6; ++i) {
    const double c1 = 1.0 + 0.1 * rng.normal(), c2 = rng.normal(), c5 = 0.5 * rng.normal();
    for (int g = 0; g < G; ++g) {
      const double t = (g + 0.5) / G;
      cs.values(i, g) = c1 * fourier_basis(1, t) + c2 * fourier_basis(2, t) + c5 * fourier_basis(5, t);
    }
  }
  const Eigen::VectorXd mu = sample_mean(cs);
  // the mean lies in span{f1, f2, f5}
  Eigen::MatrixXd basis(3, G);
  for (int g = 0; g < G; ++g) {
    const double t = (g + 0.5) / G;
    basis(0, g) = fourier_basis(1, t);
    basis(1, g) = fourier_basis(2, t);
    basis(2, g) = fourier_basis(5, t);
  }
  CHECK((project_onto_rows(mu, basis) - mu).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((project_mean(cs, ProjectionBasis::Fourier, G) - mu).cwiseAbs().maxCoeff() <= 1e-6);
  double prev = INFINITY;
  for (int k = 1; k <= 8; ++k) {
    const double res = (project_mean(cs, ProjectionBasis::Fourier, k) - mu).norm();
    CHECK(res <= prev + 1e-12);
    prev = res;
  }
  CHECK_THROWS_AS(project_mean(cs, ProjectionBasis::EmpiricalEigen, 10), ConfigError);
}

TEST_CASE("property: Bessel inequality for the empirical basis") {
  const Eigen::MatrixXd x = gaussian(30, 12, 21, 0.2);
  const auto es = empirical_covariance_eigen(SampleView(x, 1.0), false);
  const Eigen::VectorXd mu = x.colwise().mean().transpose() + Eigen::VectorXd::Constant(12, 0.3);
  double sum = 0.0;
  for (int k = 0; k < es.rank(); ++k) {
    const double c = inner(mu, es.eigenfunctions.row(k).transpose(), 1.0);
    sum += c * c;
    CHECK(sum <= mu.squaredNorm() + 1e-12);
  }
  CHECK(sum == doctest::Approx(mu.squaredNorm()).epsilon(1e-10));
}

TEST_CASE("smooth regime: eigenvalue error shrinks like N^-1/2") {
  const ModelSpec model({5.0, 4.0, 3.0, 2.0, 1.5}, BulkFunction::linear(1.0, 1e12));
  auto median_error = [&](int N) {
    std::vector<double> err;
    for (const auto& e : eigenpair_experiment(model, N, 5, 1, 200, 31)) err.push_back(std::abs(e.eigenvalue - 5.0));
    return oracle::median(err);
  };
  const double ratio = median_error(250) / median_error(1000);
  CHECK(ratio >= 2.0 / 1.3);
  CHECK(ratio <= 2.0 * 1.3);
}
