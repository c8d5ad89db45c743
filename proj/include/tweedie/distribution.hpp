#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tweedie/random.hpp"

namespace tweedie {

/// Tweedie law in (mean, dispersion, power) form, restricted to the compound
/// Poisson-gamma regime 1 < p < 2. Var = phi * mu^p.
struct TweedieParams {
  double mu = 1.0;
  double phi = 1.0;
  double p = 1.5;

  /// Throws Error(kInvalidParams) unless mu > 0, phi > 0 and 1 < p < 2.
  void validate() const;
};

/// Poisson(lambda) count of Gamma(alpha, scale) summands.
struct CompoundParams {
  double lambda = 0.0;
  double alpha = 0.0;
  double scale = 0.0;
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

CompoundParams to_compound(const TweedieParams& params);

/// (mu, phi * mu^p).
Moments mean_variance(const TweedieParams& params);

/// Moments of the compound law itself: (lambda*alpha*scale,
/// lambda*alpha*(alpha+1)*scale^2). Independent of the Tweedie form.
Moments compound_moments(const CompoundParams& compound);

/// Poisson draw. Sequential-search inversion for lambda < 30; larger rates
/// are split into equal sub-30 pieces, each inverted the same way.
std::uint64_t sample_poisson(Stream& stream, double lambda);

/// Gamma(shape, scale) draw by Marsaglia-Tsang squeeze rejection; shapes
/// below one use the U^(1/shape) boost.
double sample_gamma(Stream& stream, double shape, double scale);

/// One compound Poisson-gamma draw. A sum of M gamma(alpha) variables is
/// drawn directly as a single gamma(M * alpha).
double sample_one(const CompoundParams& compound, Stream& stream);

/// n independent draws; identical for identical (params, n, seed).
std::vector<double> sample(const TweedieParams& params, std::size_t n,
                           std::uint64_t seed);

/// CDF of the compound law as a Poisson mixture of gamma CDFs. The Poisson
/// weights are computed once at construction so the evaluator can be reused
/// across many x (the grid search relies on this).
class CompoundCdf {
 public:
  /// Series truncated once the remaining Poisson tail mass is below this.
  static constexpr double kTailMass = 1e-12;

  explicit CompoundCdf(const TweedieParams& params);

  /// Throws Error(kNegativeX) for x < 0.
  double operator()(double x) const;

  double zero_mass() const { return zero_mass_; }
  const CompoundParams& compound() const { return compound_; }
  std::size_t terms() const { return weights_.size(); }

 private:
  CompoundParams compound_;
  double zero_mass_ = 0.0;
  // (shape m*alpha, Poisson weight) for the m >= 1 terms kept.
  std::vector<std::pair<double, double>> weights_;
};

double cdf(const TweedieParams& params, double x);

}  // namespace tweedie
