#pragma once

#include <cstdint>
#include <string>
#include <variant>

namespace tweedie {

/// Predictions are floored here before entering the Tweedie power terms or
/// the logarithms of the log-losses.
inline constexpr double kEpsilonPred = 1e-6;

/// One training example for the ranker.
struct Sample {
  std::uint32_t title_id = 0;
  std::uint8_t click_label = 0;
  /// Normalized watch units (watch seconds / watch scale).
  double watch = 0.0;
  double weight = 1.0;
};

namespace loss {
struct TweediePow {
  double p = 1.5;
};
struct LogLoss {};
struct WeightedLogLoss {};
struct MeanSquared {};
}  // namespace loss

using LossKind = std::variant<loss::TweediePow, loss::LogLoss,
                              loss::WeightedLogLoss, loss::MeanSquared>;

/// Short name used in configs, reports and CLI flags: "tweedie", "logloss",
/// "weighted", "mse".
std::string kind_name(const LossKind& kind);

/// Inverse of kind_name; `p` is used for "tweedie". Throws kInvalidConfig.
LossKind parse_kind(const std::string& name, double p = 1.5);

/// Throws kInvalidParams when a TweediePow carries p outside (1, 2).
void validate_kind(const LossKind& kind);

struct LossGrad {
  double loss = 0.0;
  double grad = 0.0;  // d loss / d pred
};

// Tweedie negative log-likelihood without the normalizer:
//   -target * pred^(1-p) / (1-p) + pred^(2-p) / (2-p)
double tweedie_loss(double pred, double target, double p);
double tweedie_grad(double pred, double target, double p);

double logloss(double pred, int click_label);
double logloss_grad(double pred, int click_label);

double weighted_logloss(double pred, int click_label, double weight);
double weighted_logloss_grad(double pred, int click_label, double weight);

double mse_loss(double pred, double target);
double mse_grad(double pred, double target);

/// Dispatches on kind. Regression kinds regress on sample.watch; the
/// classification kinds use sample.click_label, and the weighted variant
/// multiplies by sample.weight. Predictions are floored into the kind's
/// domain ([eps, inf) or [eps, 1 - eps]) before evaluation, so this never
/// throws on finite input; the clamped derivative is passed through.
LossGrad loss_and_grad(const LossKind& kind, double pred, const Sample& sample);

/// Sufficient statistics of a group of samples that share one prediction
/// (all four losses are linear in these).
struct SampleMoments {
  double count = 0.0;
  double watch = 0.0;
  double watch_sq = 0.0;
  double clicks = 0.0;
  double click_weight = 0.0;
  double no_click_weight = 0.0;

  void add(const Sample& s) {
    count += 1.0;
    watch += s.watch;
    watch_sq += s.watch * s.watch;
    clicks += s.click_label;
    (s.click_label ? click_weight : no_click_weight) += s.weight;
  }
};

/// Sum of loss_and_grad over the group summarized by `moments`, with the
/// same flooring.
LossGrad loss_and_grad_sum(const LossKind& kind, double pred,
                           const SampleMoments& moments);

}  // namespace tweedie
