#pragma once

#include <span>

namespace tweedie {

struct WelchResult {
  double t = 0.0;
  double dof = 0.0;
  /// Two-sided.
  double p = 1.0;
};

/// Welch's unequal-variance t-test with Satterthwaite degrees of freedom.
/// Needs at least two values per sample; throws kDegenerateVariance when
/// both sample variances are zero.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> values);
/// Unbiased (n - 1) sample variance.
double sample_variance(std::span<const double> values);

}  // namespace tweedie
