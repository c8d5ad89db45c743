#include "tweedie/statistics.hpp"

#include <cmath>
#include <numeric>

#include "tweedie/error.hpp"
#include "tweedie/special_functions.hpp"

namespace tweedie {

double mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kEmptySample, "mean of empty sample");
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) {
    throw Error(ErrorCode::kEmptySample, "variance needs at least two values");
  }
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return ss / static_cast<double>(values.size() - 1);
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorCode::kEmptySample, "welch test needs two values per sample");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = sample_variance(a) / na;
  const double vb = sample_variance(b) / nb;
  if (va == 0.0 && vb == 0.0) {
    throw Error(ErrorCode::kDegenerateVariance, "both samples have zero variance");
  }
  WelchResult r;
  r.t = (mean(a) - mean(b)) / std::sqrt(va + vb);
  r.dof = (va + vb) * (va + vb) /
          (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  r.p = student_t_two_sided_p(r.t, r.dof);
  return r;
}

}  // namespace tweedie
