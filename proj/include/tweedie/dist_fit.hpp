#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tweedie/distribution.hpp"

namespace tweedie {

enum class NormalizationMethod {
  /// (x - mean) / sd, shifted so the smallest value lands on 0.
  kZScoreShifted,
  /// x / sd.
  kScaleOnly,
};

struct NormalizationSpec {
  NormalizationMethod method = NormalizationMethod::kZScoreShifted;
  /// Values above this cap are truncated to it.
  double upper_bound = 10.0;
};

std::string to_string(NormalizationMethod method);
NormalizationMethod parse_normalization(const std::string& name);

/// Population standard deviation is used in both methods. Throws
/// kEmptySample / kZeroVariance.
std::vector<double> normalize(std::span<const double> raw,
                              const NormalizationSpec& spec);

/// Sorted distinct values with cumulative counts; reused across every grid
/// point of a search.
class EmpiricalDistribution {
 public:
  explicit EmpiricalDistribution(std::span<const double> sample);

  std::size_t size() const { return n_; }
  const std::vector<double>& values() const { return values_; }
  /// Right-continuous ECDF at values()[k].
  double at(std::size_t k) const;
  /// Left limit at values()[k].
  double before(std::size_t k) const;
  double operator()(double x) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
  std::vector<std::size_t> cumulative_;
};

/// sup |ECDF - F| comparing both one-sided ECDF limits at every jump point.
/// Exact: blocks of jump points are skipped only when a monotonicity bound
/// proves they cannot raise the supremum.
double ks_statistic(const EmpiricalDistribution& ecdf, const TweedieParams& params);
double ks_statistic(std::span<const double> sample, const TweedieParams& params);

/// Reference implementation evaluating F at every jump point.
double ks_statistic_exhaustive(const EmpiricalDistribution& ecdf,
                               const TweedieParams& params);

struct GridRange {
  double lo = 0.0;
  double hi = 0.0;
  double step = 1.0;

  /// lo, lo + step, ... up to hi inclusive (with a 1e-9 step tolerance).
  std::vector<double> values() const;
};

struct GridSpec {
  GridRange mu{0.05, 0.5, 0.05};
  GridRange p{1.05, 1.95, 0.05};
  GridRange phi{0.5, 2.5, 0.05};

  void validate() const;
};

struct GridPoint {
  TweedieParams params;
  double ks = 0.0;
};

struct FitResult {
  TweedieParams best;
  double best_ks = 1.0;
  /// Ordered by mu, then p, then phi.
  std::vector<GridPoint> table;
};

/// Exhaustive search; ties go to smaller p, then smaller mu, then smaller phi.
FitResult grid_search(std::span<const double> sample, const GridSpec& grid,
                      unsigned threads = 1);

/// One nonnegative value per line; blank lines and '#' comments skipped.
/// Errors name the offending line.
std::vector<double> read_sample(std::istream& in);

void write_fit(std::ostream& out, const FitResult& fit, std::uint64_t seed,
               const std::string& normalization);

}  // namespace tweedie
