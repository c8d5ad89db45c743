#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tweedie {

inline constexpr double kGradientTolerance = 1e-5;

struct GradientRow {
  std::string name;  // "loss:<kind>" or "ranker:<kind>"
  int configurations = 0;
  double max_relative_error = 0.0;
  bool pass = false;
};

struct GradientSuiteOptions {
  int configurations = 100;
  std::uint64_t seed = 0;
  /// Added to one analytic derivative per configuration; a negative control.
  double corrupt = 0.0;
};

/// Finite-difference checks of the four losses' derivatives in pred and of
/// every ranker parameter under each kind, over random configurations.
std::vector<GradientRow> run_gradient_suite(const GradientSuiteOptions& options);

}  // namespace tweedie
