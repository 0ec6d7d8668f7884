#pragma once

#include <cstdint>
#include <random>

namespace roughfpca {

/// Seed for the index-th independent stream under a master seed.
std::uint64_t split_seed(std::uint64_t master, std::uint64_t index);

/// Reproducible random source. Gaussians use the Marsaglia polar method and gammas the
/// Marsaglia-Tsang squeeze, both written out here so that draws do not depend on the
/// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t master, std::uint64_t stream) : Rng(split_seed(master, stream)) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double normal();
  /// Gamma(shape, 1).
  double gamma(double shape);
  /// Chi distribution with df degrees of freedom, i.e. the norm of a df-dim standard Gaussian.
  double chi(double df);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace roughfpca
