#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "../oracles.hpp"
#include "roughfpca/diagnostics.hpp"
#include "roughfpca/errors.hpp"
#include "roughfpca/rng.hpp"
#include "roughfpca/simulate.hpp"

using namespace roughfpca;

namespace {

CurveSet rough_curves(std::vector<double> spikes, int N, int G, std::uint64_t seed) {
  SimConfig cfg{ModelSpec(std::move(spikes), calibrate_rate(BulkFamily::ExpDecay, 1.0, 1.3)), N, 5 * N, G, seed};
  return draw_sample(cfg).curves;
}

}  // namespace

TEST_CASE("eigengap ratio examples") {
  CHECK(eigengap_ratio(std::vector<double>{4, 3, 2, 1}, 2) == doctest::Approx(1.0));
  CHECK(eigengap_ratio(std::vector<double>{10, 5, 4, 3}, 2) == doctest::Approx(5.0));
  CHECK(eigengap_ratio(std::vector<double>{10, 5, 4}, 1) == doctest::Approx(5.0));
  Eigen::VectorXd v(4);
  v << 10, 5, 4, 3;
  CHECK(eigengap_ratio(v, 2) == doctest::Approx(5.0));
  CHECK_THROWS_AS(eigengap_ratio(std::vector<double>{4, 3, 3, 1}, 2), DegenerateSpectrumError);
  CHECK_THROWS_AS(eigengap_ratio(std::vector<double>{4, 3, 2}, 2), ConfigError);
  CHECK_THROWS_AS(eigengap_ratio(std::vector<double>{4, 3, 2}, 0), ConfigError);
}

TEST_CASE("chi-square quantiles") {
  CHECK(chi2_quantile(0.95, 1) == doctest::Approx(3.841458820694124).epsilon(1e-8));
  for (int df : {1, 2, 5, 12}) {
    for (double prob : {0.05, 0.5, 0.95}) {
      const double q = chi2_quantile(prob, df);
      CHECK(static_cast<double>(oracle::chi2_cdf(q, df)) == doctest::Approx(prob).epsilon(1e-7));
    }
  }
  CHECK_THROWS_AS(chi2_quantile(1.0, 3), DomainError);
}

TEST_CASE("supercritical test: strong spikes are detected") {
  const CurveSet c = rough_curves({60.0}, 100, 256, 21);
  const TestResult r = test_supercritical(c, 2, 0.05, 500, 400, 3);
  CHECK(r.reject);
  CHECK(r.statistic > r.quantile);
  CHECK(r.K1 == 2);
  CHECK(r.reps_bootstrap == 500);
}

TEST_CASE("supercritical test: statistic is invariant to scaling the data") {
  CurveSet c = rough_curves({3.0}, 80, 128, 5);
  const TestResult a = test_supercritical_with_quantile(c, 2, 0.05, 10.0, 0);
  c.values *= 7.3;
  const TestResult b = test_supercritical_with_quantile(c, 2, 0.05, 10.0, 0);
  CHECK(a.statistic == doctest::Approx(b.statistic).epsilon(1e-9));
}

TEST_CASE("supercritical test: constant curves are degenerate") {
  CurveSet c;
  c.values = Eigen::MatrixXd::Constant(20, 16, 2.5);
  CHECK_THROWS_AS(test_supercritical_with_quantile(c, 2, 0.05, 10.0, 0), DegenerateSpectrumError);
}

TEST_CASE("level-power experiment: layout and determinism") {
  LevelPowerConfig cfg;
  const auto b = calibrate_rate(BulkFamily::ExpDecay, 1.0, 1.3);
  cfg.cells = {{"null", ModelSpec({}, b)}, {"alt", ModelSpec({40.0}, b)}};
  cfg.N = 40;
  cfg.sims = 20;
  cfg.bootstrap = {200, 100};
  cfg.seed = 4;
  const auto rates = level_power_experiment(cfg);
  REQUIRE(rates.size() == 4);
  CHECK(rates[0].K1 == 2);
  CHECK(rates[1].K1 == 2);
  CHECK(rates[2].K1 == 3);
  CHECK(rates[0].label == "null");
  CHECK(rates[1].lead_spike == 40.0);
  CHECK(rates[1].rate() >= 0.9);
  const std::string table = rejection_table_csv(rates);
  std::istringstream in(table);
  std::string line;
  std::getline(in, line);
  CHECK(line == "K1,null,alt");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2);
  const auto again = level_power_experiment(cfg);
  CHECK(rejection_long_csv(again) == rejection_long_csv(rates));
}

TEST_CASE("mean test") {
  const CurveSet c = rough_curves({4.0, 2.0}, 60, 64, 8);
  Eigen::VectorXd mean = c.values.colwise().mean().transpose();
  const auto at_mean = mean_test(c, mean, 3);
  CHECK(std::abs(at_mean.statistic) <= 1e-18);
  CHECK_FALSE(at_mean.reject);
  // the statistic is quadratic in mu0 - mean
  Eigen::VectorXd d = Eigen::VectorXd::LinSpaced(64, -1.0, 1.0);
  const double plus = mean_test(c, mean + d, 3).statistic;
  const double minus = mean_test(c, mean - d, 3).statistic;
  CHECK(plus == doctest::Approx(minus).epsilon(1e-10));
  CHECK(mean_test(c, mean + 2.0 * d, 3).statistic == doctest::Approx(4.0 * plus).epsilon(1e-10));
  // scaling data and mu0 together leaves S_k unchanged
  CurveSet scaled = c;
  scaled.values *= 3.0;
  CHECK(mean_test(scaled, 3.0 * (mean + d), 3).statistic == doctest::Approx(plus).epsilon(1e-10));
  CHECK(mean_test(c, mean, 4).chi2_quantile == doctest::Approx(chi2_quantile(0.95, 4)));
  CHECK_THROWS_AS(mean_test(c, Eigen::VectorXd::Zero(3), 2), ConfigError);
  // callable form evaluates at the grid points
  const auto f = mean_test(c, [](double t) { return std::sin(t); }, 2);
  Eigen::VectorXd s(64);
  for (int g = 0; g < 64; ++g) s[g] = std::sin(c.grid_point(g));
  CHECK(f.statistic == doctest::Approx(mean_test(c, s, 2).statistic));
}

TEST_CASE("mean test levels: resampling a rough population is conservative and decreasing in k") {
  SimConfig cfg{ModelSpec({4.0, 2.0}, calibrate_rate(BulkFamily::PolyDecay, 1.0, 1.3)), 235, 5 * 235, 128, 13};
  const CurveSet pop = draw_sample(cfg).curves;
  const auto rows = mean_test_levels(pop, {100}, {1, 3, 10}, 400, 1);
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].sims == 400);
    CHECK(rows[i].rejection_rate <= 0.05);
    if (i > 0) CHECK(rows[i].rejection_rate <= rows[i - 1].rejection_rate + 0.01);
  }
}

TEST_CASE("moving average") {
  Eigen::MatrixXd m(2, 6);
  m << 1, 2, 3, 4, 5, 6, 0, 0, 6, 0, 0, 0;
  CHECK(moving_average(m, 1) == m);
  const Eigen::MatrixXd m3 = moving_average(m, 3);
  CHECK(m3(0, 0) == doctest::Approx(1.5));
  CHECK(m3(0, 2) == doctest::Approx(3.0));
  CHECK(m3(0, 5) == doctest::Approx(5.5));
  CHECK(m3(1, 1) == doctest::Approx(2.0));
  CHECK(m3(1, 3) == doctest::Approx(2.0));
  // even widths reach one further to the right
  const Eigen::MatrixXd m2 = moving_average(m, 2);
  CHECK(m2(0, 0) == doctest::Approx(1.5));
  CHECK(m2(0, 5) == doctest::Approx(6.0));
  // affine functions are preserved away from the boundary
  for (int g = 2; g < 4; ++g) CHECK(moving_average(m, 5)(0, g) == doctest::Approx(m(0, g)));
  CHECK_THROWS_AS(moving_average(m, 6), ConfigError);
  CHECK_THROWS_AS(moving_average(m, 0), ConfigError);
}

TEST_CASE("smooth scan: smoothing removes grid noise and reveals the spike") {
  // one smooth component, subcritical against white noise on a fine grid until smoothed
  Rng rng(30);
  const int N = 100, G = 400;
  CurveSet c;
  c.values.resize(N, G);
  for (int i = 0; i < N; ++i) {
    const double z = 2.0 * rng.normal();
    for (int g = 0; g < G; ++g) c.values(i, g) = z * fourier_basis(2, c.grid_point(g)) + 20.0 * rng.normal();
  }
  const SmoothScan s = smooth_scan(c, {1, 25}, 1, 0.05, 400, 200, 2);
  REQUIRE(s.statistics.size() == 2);
  CHECK(s.windows == std::vector<int>{1, 25});
  CHECK(s.statistics[1] > s.statistics[0]);
  CHECK_FALSE(s.significant[0]);
  CHECK(s.significant[1]);
  CHECK_THROWS_AS(smooth_scan(c, {5, 3}, 1, 0.05, 400, 200, 2), ConfigError);
  // t = 1 is the raw statistic
  CHECK(s.statistics[0] == doctest::Approx(test_supercritical_with_quantile(c, 1, 0.05, s.quantile, 400).statistic));
  CurveSet flat;
  flat.values = Eigen::MatrixXd::Constant(20, 32, 1.5);
  CHECK_THROWS_AS(smooth_scan(flat, {1, 3}, 1, 0.05, 200, 50, 2), DegenerateSpectrumError);
}

TEST_CASE("power: above the level at s = 2, mild loss for K1 = 3") {
  LevelPowerConfig cfg;
  const auto b = calibrate_rate(BulkFamily::PolyDecay, 1.0, 1.3);
  cfg.cells = {{"s2", ModelSpec({2.0}, b)}, {"s3", ModelSpec({3.0}, b)}};
  cfg.N = 100;
  cfg.sims = 400;
  cfg.bootstrap = {2000, 500};
  cfg.seed = 6;
  const auto r = level_power_experiment(cfg);
  REQUIRE(r.size() == 4);
  // binomial standard error at 400 sims is at most 2.5 points
  CHECK(r[0].rate() > 0.05 + 0.05);
  CHECK(r[1].rate() > r[0].rate());
  CHECK(r[2].rate() <= r[0].rate() + 0.05);
  CHECK(r[3].rate() <= r[1].rate() + 0.05);
}
