#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace roughfpca {

enum class BulkFamily { PolyDecay, ExpDecay, LinearCutoff, TabulatedMonotone };

std::string_view family_name(BulkFamily family);  // "poly", "exp", "linear", "table"
BulkFamily parse_family(std::string_view name);

/// Non-increasing, integrable eigenvalue density b on [0, inf).
///
///   PolyDecay          b(x) = b0 (1 + a x)^-3
///   ExpDecay           b(x) = b0 exp(-a x)
///   LinearCutoff       b(x) = b0 max(1 - a x, 0)
///   TabulatedMonotone  b(x) = linear interpolation of the table at a x; b0 is the value of
///                      the first knot (which must sit at 0). Past the last knot the last
///                      value is held, so a table whose last value is positive is not
///                      integrable.
class BulkFunction {
 public:
  using Table = std::vector<std::pair<double, double>>;

  static BulkFunction poly(double b0, double a);
  static BulkFunction exp(double b0, double a);
  static BulkFunction linear(double b0, double a);
  static BulkFunction tabulated(Table table, double a = 1.0);
  /// Member of a closed-form family (not TabulatedMonotone).
  static BulkFunction make(BulkFamily family, double b0, double a);

  BulkFunction with_rate(double a) const;

  BulkFamily family() const { return family_; }
  double b0() const { return b0_; }
  double rate() const { return rate_; }
  const Table& table() const { return table_; }

  double operator()(double x) const;

  /// Smallest x with b(x) = 0 for all larger arguments; +inf if b never vanishes.
  double support_end() const;
  /// Points in (0, support_end) where b is not smooth.
  std::vector<double> kinks() const;
  bool integrable() const;

 private:
  BulkFunction(BulkFamily family, double b0, double a, Table table);

  BulkFamily family_;
  double b0_;
  double rate_;
  Table table_;
};

double eval_bulk(const BulkFunction& b, double x);

/// Integral of b over [lo, inf). Closed form for the parametric families, exact trapezoid for
/// tables. Throws IntegrabilityError if b has an infinite tail mass.
double tail_integral(const BulkFunction& b, double lo);

/// Integral over [lo, hi] of an integrand that vanishes wherever b does. The range is cut at
/// the support end and at the kinks of b; an infinite upper limit uses the tail map.
double integrate_over_bulk(const BulkFunction& b, const std::function<double(double)>& integrand, double lo,
                           double hi);

/// Finds the rate a for which the criticality threshold 1/xi(inf) equals target_threshold.
BulkFunction calibrate_rate(BulkFamily family, double b0, double target_threshold);
/// Same search, keeping the shape of prototype (needed for tables).
BulkFunction calibrate_rate(const BulkFunction& prototype, double target_threshold);

/// Spikes s_1 > ... > s_K > b(0) on top of a bulk.
class ModelSpec {
 public:
  ModelSpec(std::vector<double> spikes, BulkFunction bulk);

  const std::vector<double>& spikes() const { return spikes_; }
  const BulkFunction& bulk() const { return bulk_; }
  std::size_t K() const { return spikes_.size(); }

 private:
  std::vector<double> spikes_;
  BulkFunction bulk_;
};

/// Population spectrum at sample size N truncated to p eigenvalues:
/// lambda_n = s_n for n <= K and b((n - K) / N) for K < n <= p.
class SpectrumView {
 public:
  SpectrumView(ModelSpec model, int sample_size, int truncation);

  /// 1-based index n in [1, p].
  double eigenvalue(int n) const;
  std::vector<double> eigenvalues() const;

  const ModelSpec& model() const { return model_; }
  int sample_size() const { return n_; }
  int truncation() const { return p_; }

 private:
  ModelSpec model_;
  int n_;
  int p_;
};

}  // namespace roughfpca
