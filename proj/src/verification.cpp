#include "tweedie/verification.hpp"

#include <algorithm>
#include <cmath>

#include "tweedie/losses.hpp"
#include "tweedie/random.hpp"
#include "tweedie/ranker.hpp"

namespace tweedie {
namespace {

const LossKind kAllKinds[] = {loss::TweediePow{1.5}, loss::LogLoss{},
                              loss::WeightedLogLoss{}, loss::MeanSquared{}};

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), kGradCheckFloor});
}

Sample random_sample(Stream& stream, std::uint32_t n_titles) {
  Sample s;
  s.title_id = static_cast<std::uint32_t>(stream.below(n_titles));
  s.click_label = stream.bernoulli(0.5) ? 1 : 0;
  s.watch = s.click_label ? 0.05 + 2.0 * stream.uniform() : 0.0;
  s.weight = s.click_label ? s.watch : 1.0;
  return s;
}

// A prediction inside the kind's domain, away from the clamps.
LossKind with_random_power(const LossKind& kind, Stream& stream) {
  if (std::holds_alternative<loss::TweediePow>(kind)) {
    return loss::TweediePow{1.1 + 0.8 * stream.uniform()};
  }
  return kind;
}

double random_pred(const LossKind& kind, Stream& stream) {
  if (std::holds_alternative<loss::TweediePow>(kind)) return 0.05 + 3.0 * stream.uniform();
  if (std::holds_alternative<loss::MeanSquared>(kind)) return -3.0 + 6.0 * stream.uniform();
  return 0.02 + 0.96 * stream.uniform();
}

}  // namespace

std::vector<GradientRow> run_gradient_suite(const GradientSuiteOptions& options) {
  std::vector<GradientRow> rows;
  for (const LossKind& base : kAllKinds) {
    GradientRow row{"loss:" + kind_name(base), options.configurations, 0.0, false};
    Stream stream = Stream::derive(options.seed, "gradcheck.loss",
                                   {static_cast<std::uint64_t>(base.index())});
    for (int i = 0; i < options.configurations; ++i) {
      const LossKind kind = with_random_power(base, stream);
      const Sample s = random_sample(stream, 1);
      const double pred = random_pred(kind, stream);
      const double h = 1e-5 * std::max(std::abs(pred), 1e-2);
      const double numeric = (loss_and_grad(kind, pred + h, s).loss -
                              loss_and_grad(kind, pred - h, s).loss) /
                             (2.0 * h);
      const double analytic = loss_and_grad(kind, pred, s).grad + options.corrupt;
      row.max_relative_error =
          std::max(row.max_relative_error, relative_error(analytic, numeric));
    }
    row.pass = row.max_relative_error < kGradientTolerance;
    rows.push_back(row);
  }

  constexpr std::uint32_t kTitles = 4;
  for (const LossKind& base : kAllKinds) {
    GradientRow row{"ranker:" + kind_name(base), options.configurations, 0.0, false};
    Stream stream = Stream::derive(options.seed, "gradcheck.ranker",
                                   {static_cast<std::uint64_t>(base.index())});
    for (int i = 0; i < options.configurations; ++i) {
      const LossKind kind = with_random_power(base, stream);
      const RankerModel model =
          RankerModel::random(kTitles, kind, stream(), /*scale=*/0.5);
      const Sample s = random_sample(stream, kTitles);
      const GradCheckResult r = grad_check(model, s, kind, options.corrupt);
      row.max_relative_error = std::max(row.max_relative_error, r.max_relative_error);
    }
    row.pass = row.max_relative_error < kGradientTolerance;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace tweedie
