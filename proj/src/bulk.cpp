#include "roughfpca/bulk.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "roughfpca/errors.hpp"
#include "roughfpca/numerics.hpp"
#include "roughfpca/theory.hpp"

namespace roughfpca {

std::string_view family_name(BulkFamily family) {
  switch (family) {
    case BulkFamily::PolyDecay: return "poly";
    case BulkFamily::ExpDecay: return "exp";
    case BulkFamily::LinearCutoff: return "linear";
    case BulkFamily::TabulatedMonotone: return "table";
  }
  return "?";
}

BulkFamily parse_family(std::string_view name) {
  if (name == "poly") return BulkFamily::PolyDecay;
  if (name == "exp") return BulkFamily::ExpDecay;
  if (name == "linear") return BulkFamily::LinearCutoff;
  if (name == "table") return BulkFamily::TabulatedMonotone;
  throw ConfigError("unknown bulk family '" + std::string(name) + "' (expected poly|exp|linear|table)");
}

namespace {

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << what << " must be positive and finite, got " << v;
    throw ConfigError(os.str());
  }
}

void check_table(const BulkFunction::Table& table) {
  if (table.size() < 2) throw ConfigError("tabulated bulk needs at least two knots");
  if (table.front().first != 0.0) throw ConfigError("tabulated bulk must start at x = 0");
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto [x, v] = table[i];
    if (!std::isfinite(x) || !std::isfinite(v) || v < 0.0) {
      throw ConfigError("tabulated bulk: knot " + std::to_string(i) + " is not finite and non-negative");
    }
    if (i > 0) {
      if (!(x > table[i - 1].first)) throw ConfigError("tabulated bulk: knots must be strictly increasing");
      if (v > table[i - 1].second) throw ConfigError("tabulated bulk: values must be non-increasing");
    }
  }
  if (!(table.front().second > 0.0)) throw ConfigError("tabulated bulk: b(0) must be positive");
}

}  // namespace

BulkFunction::BulkFunction(BulkFamily family, double b0, double a, Table table)
    : family_(family), b0_(b0), rate_(a), table_(std::move(table)) {}

BulkFunction BulkFunction::poly(double b0, double a) { return make(BulkFamily::PolyDecay, b0, a); }
BulkFunction BulkFunction::exp(double b0, double a) { return make(BulkFamily::ExpDecay, b0, a); }
BulkFunction BulkFunction::linear(double b0, double a) { return make(BulkFamily::LinearCutoff, b0, a); }

BulkFunction BulkFunction::make(BulkFamily family, double b0, double a) {
  if (family == BulkFamily::TabulatedMonotone) {
    throw ConfigError("tabulated bulk functions are built from a table");
  }
  check_positive(b0, "b0");
  check_positive(a, "rate a");
  return BulkFunction(family, b0, a, {});
}

BulkFunction BulkFunction::tabulated(Table table, double a) {
  check_table(table);
  check_positive(a, "rate a");
  const double b0 = table.front().second;
  return BulkFunction(BulkFamily::TabulatedMonotone, b0, a, std::move(table));
}

BulkFunction BulkFunction::with_rate(double a) const {
  check_positive(a, "rate a");
  BulkFunction out = *this;
  out.rate_ = a;
  return out;
}

double BulkFunction::operator()(double x) const {
  const double u = rate_ * x;
  switch (family_) {
    case BulkFamily::PolyDecay: {
      const double d = 1.0 + u;
      return b0_ / (d * d * d);
    }
    case BulkFamily::ExpDecay: return b0_ * std::exp(-u);
    case BulkFamily::LinearCutoff: return b0_ * std::max(1.0 - u, 0.0);
    case BulkFamily::TabulatedMonotone: {
      if (u <= 0.0) return table_.front().second;
      if (u >= table_.back().first) return table_.back().second;
      auto it = std::upper_bound(table_.begin(), table_.end(), u,
                                 [](double v, const auto& knot) { return v < knot.first; });
      const auto& [x1, v1] = *it;
      const auto& [x0, v0] = *(it - 1);
      return v0 + (v1 - v0) * (u - x0) / (x1 - x0);
    }
  }
  return 0.0;
}

double BulkFunction::support_end() const {
  switch (family_) {
    case BulkFamily::LinearCutoff: return 1.0 / rate_;
    case BulkFamily::TabulatedMonotone: {
      if (table_.back().second > 0.0) return numerics::kInf;
      for (const auto& [x, v] : table_) {
        if (v == 0.0) return x / rate_;
      }
      return numerics::kInf;
    }
    default: return numerics::kInf;
  }
}

std::vector<double> BulkFunction::kinks() const {
  std::vector<double> out;
  if (family_ != BulkFamily::TabulatedMonotone) return out;
  const double end = support_end();
  for (std::size_t i = 1; i < table_.size(); ++i) {
    const double x = table_[i].first / rate_;
    if (x < end) out.push_back(x);
  }
  return out;
}

bool BulkFunction::integrable() const {
  return family_ != BulkFamily::TabulatedMonotone || table_.back().second == 0.0;
}

double eval_bulk(const BulkFunction& b, double x) {
  if (!(x >= 0.0)) throw DomainError("eval_bulk: x must be non-negative");
  return b(x);
}

double tail_integral(const BulkFunction& b, double lo) {
  if (!(lo >= 0.0)) throw DomainError("tail_integral: lower limit must be non-negative");
  const double a = b.rate();
  const double b0 = b.b0();
  switch (b.family()) {
    case BulkFamily::PolyDecay: {
      const double d = 1.0 + a * lo;
      return b0 / (2.0 * a * d * d);
    }
    case BulkFamily::ExpDecay: return b0 * std::exp(-a * lo) / a;
    case BulkFamily::LinearCutoff: {
      const double r = std::max(1.0 - a * lo, 0.0);
      return b0 * r * r / (2.0 * a);
    }
    case BulkFamily::TabulatedMonotone: {
      if (!b.integrable()) {
        throw IntegrabilityError("tabulated bulk has a positive last value; its integral diverges");
      }
      // exact for piecewise-linear b, in the knot variable u = a x
      const auto& t = b.table();
      const double u_lo = a * lo;
      double total = 0.0;
      for (std::size_t i = 1; i < t.size(); ++i) {
        double x0 = t[i - 1].first;
        const double x1 = t[i].first;
        if (x1 <= u_lo) continue;
        double v0 = t[i - 1].second;
        if (x0 < u_lo) {
          v0 = b(lo);
          x0 = u_lo;
        }
        total += 0.5 * (v0 + t[i].second) * (x1 - x0);
      }
      return total / a;
    }
  }
  return 0.0;
}

double integrate_over_bulk(const BulkFunction& b, const std::function<double(double)>& integrand, double lo,
                           double hi) {
  const double end = std::min(hi, b.support_end());
  if (!(end > lo)) return 0.0;
  if (std::isinf(end) && !b.integrable()) {
    throw IntegrabilityError("integral over an infinite range of a non-integrable tabulated bulk");
  }
  std::vector<double> cuts{lo};
  for (double k : b.kinks()) {
    if (k > lo && k < end) cuts.push_back(k);
  }
  cuts.push_back(end);
  double total = 0.0;
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    total += numerics::integrate(integrand, cuts[i - 1], cuts[i]);
  }
  return total;
}

BulkFunction calibrate_rate(BulkFamily family, double b0, double target_threshold) {
  if (family == BulkFamily::TabulatedMonotone) {
    throw ConfigError("calibrate_rate: pass a tabulated prototype instead of the bare family");
  }
  return calibrate_rate(BulkFunction::make(family, b0, 1.0), target_threshold);
}

BulkFunction calibrate_rate(const BulkFunction& prototype, double target_threshold) {
  const double b0 = prototype.b0();
  if (!(target_threshold > b0)) {
    throw CalibrationError("calibrate_rate: target threshold must exceed b(0)");
  }
  // 1/xi(inf) decreases in a: larger a means less bulk mass and a lower threshold.
  auto excess = [&](double log_a) {
    const double threshold = 1.0 / solve_xi(prototype.with_rate(std::exp(log_a)), numerics::kInf);
    return threshold - target_threshold;
  };
  double lo = std::log(1e-2);
  double hi = std::log(1e2);
  double f_lo = excess(lo);
  double f_hi = excess(hi);
  try {
    for (int expand = 0; expand < 12 && f_lo < 0.0; ++expand) {
      hi = lo;
      f_hi = f_lo;
      lo -= std::log(10.0);
      f_lo = excess(lo);
    }
    for (int expand = 0; expand < 12 && f_hi > 0.0; ++expand) {
      lo = hi;
      f_lo = f_hi;
      hi += std::log(10.0);
      f_hi = excess(hi);
    }
  } catch (const NoSolutionError&) {
  }
  if (f_lo < 0.0 || f_hi > 0.0) {
    std::ostringstream os;
    os << "calibrate_rate: threshold " << target_threshold << " is unattainable for family "
       << family_name(prototype.family());
    throw CalibrationError(os.str());
  }
  const auto root = numerics::bisect(excess, lo, hi, 1e-15, 200);
  return prototype.with_rate(std::exp(root.root));
}

ModelSpec::ModelSpec(std::vector<double> spikes, BulkFunction bulk) : spikes_(std::move(spikes)), bulk_(std::move(bulk)) {
  for (std::size_t i = 0; i < spikes_.size(); ++i) {
    if (!std::isfinite(spikes_[i]) || !(spikes_[i] > bulk_.b0())) {
      throw ConfigError("spike " + std::to_string(i + 1) + " must exceed b(0)");
    }
    if (i > 0 && !(spikes_[i] < spikes_[i - 1])) {
      throw ConfigError("spikes must be strictly descending");
    }
  }
}

SpectrumView::SpectrumView(ModelSpec model, int sample_size, int truncation)
    : model_(std::move(model)), n_(sample_size), p_(truncation) {
  if (n_ < 1) throw ConfigError("sample size N must be positive");
  if (p_ < 1) throw ConfigError("truncation p must be positive");
  if (static_cast<std::size_t>(p_) < model_.K()) throw ConfigError("truncation p must be at least K");
}

double SpectrumView::eigenvalue(int n) const {
  if (n < 1 || n > p_) throw DomainError("eigenvalue index out of range");
  const auto K = static_cast<int>(model_.K());
  if (n <= K) return model_.spikes()[n - 1];
  return model_.bulk()(static_cast<double>(n - K) / n_);
}

std::vector<double> SpectrumView::eigenvalues() const {
  std::vector<double> out(p_);
  for (int n = 1; n <= p_; ++n) out[n - 1] = eigenvalue(n);
  return out;
}

}  // namespace roughfpca
