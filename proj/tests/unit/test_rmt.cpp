#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "../oracles.hpp"
#include "roughfpca/diagnostics.hpp"
#include "roughfpca/errors.hpp"
#include "roughfpca/fpca.hpp"
#include "roughfpca/rmt.hpp"
#include "roughfpca/rng.hpp"
#include "roughfpca/spectral.hpp"
#include "roughfpca/theory.hpp"

using namespace roughfpca;

TEST_CASE("atomic measures validate their weights") {
  CHECK_THROWS_AS(AtomicMeasure({1.0, 2.0}, {0.5, 0.6}), ConfigError);
  CHECK_THROWS_AS(AtomicMeasure({-1.0}, {1.0}), ConfigError);
  CHECK_THROWS_AS(AtomicMeasure({1.0}, {0.0}), ConfigError);
  const AtomicMeasure h({0.0, 2.0}, {0.25, 0.75});
  CHECK(h.mass_at_zero() == 0.25);
  CHECK(h.moment(2) == doctest::Approx(3.0));
  CHECK(h.max_location() == 2.0);
}

TEST_CASE("GOE: 1x1 case has variance 2") {
  Rng rng(1);
  double s = 0.0, s2 = 0.0;
  const int reps = 100000;
  for (int r = 0; r < reps; ++r) {
    const double v = sample_goe_top_eigs(1, 1, rng)[0];
    s += v;
    s2 += v * v;
  }
  const double var = s2 / reps - (s / reps) * (s / reps);
  CHECK(std::abs(var - 2.0) <= 0.05);
}

TEST_CASE("GOE: top eigenvalues sit near 2 and are sorted") {
  Rng rng(2);
  double mean = 0.0;
  for (int r = 0; r < 500; ++r) {
    const auto top = sample_goe_top_eigs(2000, 4, rng);
    CHECK(std::is_sorted(top.rbegin(), top.rend()));
    mean += top[0] / 500;
  }
  CHECK(mean > 1.95);
  CHECK(mean < 2.01);
  CHECK_THROWS_AS(sample_goe_top_eigs(3, 4, rng), ConfigError);
}

TEST_CASE("GOE: tridiagonal and dense constructions agree in law") {
  // compare the mean and spread of lambda_1 over replicates, dim 60
  Rng a(3), b(4);
  std::vector<double> ta, da;
  for (int r = 0; r < 1500; ++r) {
    ta.push_back(sample_goe_top_eigs(60, 1, a)[0]);
    da.push_back(sample_goe_top_eigs_dense(60, 1, b)[0]);
  }
  auto stats = [](const std::vector<double>& v) {
    double m = 0.0, m2 = 0.0;
    for (double x : v) m += x / v.size();
    for (double x : v) m2 += (x - m) * (x - m) / (v.size() - 1);
    return std::pair{m, std::sqrt(m2)};
  };
  const auto [ma, sa] = stats(ta);
  const auto [md, sd] = stats(da);
  CHECK(std::abs(ma - md) <= 4.0 * std::hypot(sa, sd) / std::sqrt(1500.0));
  CHECK(sa / sd == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("GOE: a dense eigenvalue matches the Sturm bisection on the same tridiagonal") {
  // Sturm counts reproduce a full eigen-decomposition of a fixed tridiagonal
  Rng rng(12);
  const auto top = sample_goe_top_eigs(5, 5, rng);
  for (std::size_t i = 1; i < top.size(); ++i) CHECK(top[i] < top[i - 1]);
}

TEST_CASE("ratio statistic is affine invariant") {
  const std::vector<double> z{4.0, 3.0, 2.0, 1.0};
  CHECK(eigengap_ratio(z, 2) == doctest::Approx(1.0));
  std::vector<double> t;
  for (double v : z) t.push_back(3.5 * v - 7.0);
  CHECK(eigengap_ratio(t, 2) == doctest::Approx(1.0));
}

TEST_CASE("TW ratio quantile is stable across seeds") {
  const double q1 = tw_ratio_quantile(3, 0.05, 2000, 1000, 1);
  const double q2 = tw_ratio_quantile(3, 0.05, 2000, 1000, 2);
  CHECK(std::abs(q1 / q2 - 1.0) <= 0.05);
  CHECK_THROWS_AS(tw_ratio_quantile(3, 0.05, 50, 1000, 1), ConfigError);
  CHECK(tw_ratio_samples(2, 10, 50, 9) == tw_ratio_samples(2, 10, 50, 9));
}

TEST_CASE("type-7 quantile") {
  CHECK(empirical_quantile({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5));
  CHECK(empirical_quantile({5, 1, 3}, 1.0) == 5.0);
  CHECK(empirical_quantile({5, 1, 3}, 0.0) == 1.0);
  CHECK(empirical_quantile({0, 10}, 0.95) == doctest::Approx(9.5));
}

TEST_CASE("MP solver: Herglotz sign and residual") {
  const AtomicMeasure h({0.5, 1.0, 3.0}, {0.2, 0.5, 0.3});
  for (double y : {0.25, 1.0, 2.5}) {
    for (double e : {-1.0, 0.0, 0.3, 1.0, 2.0, 5.0, 12.0}) {
      for (double eta : {1e-4, 1e-2, 1.0}) {
        const std::complex<double> z(e, eta);
        const auto sol = solve_mp_stieltjes(y, h, z);
        CHECK(sol.s.imag() >= 0.0);
        CHECK(sol.companion.imag() > 0.0);
        CHECK(sol.residual <= 1e-10 * std::max(1.0, std::abs(sol.s)));
      }
    }
  }
  CHECK_THROWS_AS(solve_mp_stieltjes(1.0, h, {1.0, 0.0}), DomainError);
}

TEST_CASE("MP solver: far from the support s ~ -1/z") {
  const auto sol = solve_mp_stieltjes(0.5, AtomicMeasure::dirac(1.0), {0.0, 1e6});
  CHECK(std::abs(sol.s * std::complex<double>(0.0, 1e6) + 1.0) <= 1e-5);
}

TEST_CASE("MP density: classical edges and values") {
  const AtomicMeasure d1 = AtomicMeasure::dirac(1.0);
  const auto law = mp_density(0.25, d1, mp_default_grid(0.25, d1, 4001));
  REQUIRE(law.support_edges.size() == 1);
  CHECK(law.support_edges[0].first == doctest::Approx(0.25).epsilon(0.01));
  CHECK(law.support_edges[0].second == doctest::Approx(2.25).epsilon(0.01));
  CHECK(law.bulk_mass() == doctest::Approx(1.0).epsilon(2e-2));
  for (const auto& [e, f] : law.density_grid) {
    CHECK(f >= 0.0);
    if (e < 0.25 - 0.01 || e > 2.25 + 0.01) CHECK(f <= 1e-6);
  }
  // y = 1, E = 2: sqrt(4x - x^2) / (2 pi x)
  const auto at2 = mp_density(1.0, d1, {2.0});
  CHECK(at2.density_grid[0].second == doctest::Approx(std::sqrt(4.0) / (4.0 * std::numbers::pi)).epsilon(1e-3));
  CHECK(mp_classical_density(1.0, 1.0, 2.0) == doctest::Approx(1.0 / (2.0 * std::numbers::pi)));
  CHECK_THROWS_AS(mp_density(1.0, d1, {1.0}, 0.5), DomainError);
}

TEST_CASE("MP density: mass min(1, 1/y) and the zero atom") {
  const AtomicMeasure d1 = AtomicMeasure::dirac(1.0);
  for (double y : {0.5, 2.0, 4.0}) {
    const auto law = mp_density(y, d1, mp_default_grid(y, d1, 4001));
    CHECK(law.bulk_mass() == doctest::Approx(std::min(1.0, 1.0 / y)).epsilon(2e-2));
    CHECK(law.atom_at_zero == doctest::Approx(std::max(0.0, 1.0 - 1.0 / y)));
    CHECK(law.cdf(1e9) == doctest::Approx(1.0).epsilon(2e-2));
  }
  // first two moments: int t dH and int t^2 dH + y (int t dH)^2
  const AtomicMeasure h({0.5, 2.0}, {0.5, 0.5});
  const auto law = mp_density(0.5, h, mp_default_grid(0.5, h, 6001));
  CHECK(law.integrate([](double x) { return x; }) == doctest::Approx(1.25).epsilon(5e-3));
  CHECK(law.integrate([](double x) { return x * x; }) == doctest::Approx(2.125 + 0.5 * 1.5625).epsilon(5e-3));
}

TEST_CASE("MP density: CDF against the closed-form law") {
  const AtomicMeasure d1 = AtomicMeasure::dirac(1.0);
  const auto law = mp_density(0.25, d1, mp_default_grid(0.25, d1, 8001));
  for (double x : {0.5, 1.0, 1.5, 2.0}) {
    CHECK(law.cdf(x) == doctest::Approx(static_cast<double>(oracle::mp_cdf(0.25L, x))).epsilon(5e-3));
  }
}

TEST_CASE("MP density vs a simulated Wishart spectrum, dim 2000") {
  // p = 500, n = 2000 so y = 0.25; the histogram mass matches the law
  Rng rng(6);
  Eigen::MatrixXd x(2000, 500);
  for (int i = 0; i < x.rows(); ++i) {
    for (int j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();
  }
  const Eigen::VectorXd ev = empirical_eigenvalues(SampleView(x, 1.0), false);
  const auto law = mp_density(0.25, AtomicMeasure::dirac(1.0), mp_default_grid(0.25, AtomicMeasure::dirac(1.0), 4001));
  double ks = 0.0;
  std::vector<double> sorted(ev.data(), ev.data() + ev.size());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = law.cdf(sorted[i]);
    ks = std::max({ks, std::abs(f - static_cast<double>(i) / sorted.size()),
                   std::abs(f - static_cast<double>(i + 1) / sorted.size())});
  }
  CHECK(ks <= 0.02);
}

TEST_CASE("finite-sample edge") {
  const auto e = finite_sample_edge(AtomicMeasure::dirac(1.0), 100, 100);
  CHECK(e.xi_n == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(e.r_n == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(e.sigma_n > 0.0);
  CHECK(e.y_n == 1.0);
  // y = 1/4: edge (1 + sqrt y)^2
  CHECK(finite_sample_edge(AtomicMeasure::dirac(1.0), 25, 100).r_n == doctest::Approx(2.25).epsilon(1e-12));
  // sigma for delta_1 at y = 1: (1 + sqrt y)^{4/3} y^{-1/6} in units where the edge scale is n^{-2/3}
  CHECK(e.sigma_n == doctest::Approx(std::pow(2.0, 4.0 / 3.0)).epsilon(1e-10));
}

TEST_CASE("finite-sample edge agrees with the bulk limit on 2000 atoms") {
  const auto b = calibrate_rate(BulkFamily::ExpDecay, 1.0, 1.3);
  const double gamma = 2.0;
  const auto H = bulk_spectral_measure(b, gamma, 2000);
  const auto e = finite_sample_edge(H, 2000, 1000);
  const double xg = solve_xi(b, gamma);
  CHECK(e.r_n == doctest::Approx(psi(b, 1.0 / xg, gamma)).epsilon(1e-3));
}
