#include "tweedie/losses.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tweedie/error.hpp"

namespace tweedie {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void check_positive_pred(double pred) {
  if (!(pred >= kEpsilonPred)) {
    std::ostringstream msg;
    msg << "prediction " << pred << " below floor " << kEpsilonPred;
    throw Error(ErrorCode::kDomainError, msg.str());
  }
}

void check_probability(double pred) {
  if (!(pred >= kEpsilonPred && pred <= 1.0 - kEpsilonPred)) {
    std::ostringstream msg;
    msg << "probability " << pred << " outside [" << kEpsilonPred << ", "
        << 1.0 - kEpsilonPred << "]";
    throw Error(ErrorCode::kDomainError, msg.str());
  }
}

void check_power(double p) {
  if (!(p > 1.0 && p < 2.0)) {
    std::ostringstream msg;
    msg << "tweedie power must lie in (1, 2), got " << p;
    throw Error(ErrorCode::kInvalidParams, msg.str());
  }
}

double clamp_probability(double pred) {
  return std::clamp(pred, kEpsilonPred, 1.0 - kEpsilonPred);
}

}  // namespace

std::string kind_name(const LossKind& kind) {
  return std::visit(
      overloaded{[](const loss::TweediePow&) { return std::string("tweedie"); },
                 [](const loss::LogLoss&) { return std::string("logloss"); },
                 [](const loss::WeightedLogLoss&) {
                   return std::string("weighted");
                 },
                 [](const loss::MeanSquared&) { return std::string("mse"); }},
      kind);
}

LossKind parse_kind(const std::string& name, double p) {
  if (name == "tweedie") {
    check_power(p);
    return loss::TweediePow{p};
  }
  if (name == "logloss" || name == "pointwise") return loss::LogLoss{};
  if (name == "weighted") return loss::WeightedLogLoss{};
  if (name == "mse" || name == "regression") return loss::MeanSquared{};
  throw Error(ErrorCode::kInvalidConfig,
              "unknown loss kind '" + name +
                  "' (expected tweedie, logloss, weighted or mse)");
}

void validate_kind(const LossKind& kind) {
  if (const auto* t = std::get_if<loss::TweediePow>(&kind)) check_power(t->p);
}

double tweedie_loss(double pred, double target, double p) {
  check_positive_pred(pred);
  check_power(p);
  return -target * std::pow(pred, 1.0 - p) / (1.0 - p) +
         std::pow(pred, 2.0 - p) / (2.0 - p);
}

double tweedie_grad(double pred, double target, double p) {
  check_positive_pred(pred);
  check_power(p);
  return -target * std::pow(pred, -p) + std::pow(pred, 1.0 - p);
}

double logloss(double pred, int click_label) {
  check_probability(pred);
  return click_label ? -std::log(pred) : -std::log1p(-pred);
}

double logloss_grad(double pred, int click_label) {
  check_probability(pred);
  return click_label ? -1.0 / pred : 1.0 / (1.0 - pred);
}

double weighted_logloss(double pred, int click_label, double weight) {
  if (!(weight >= 0.0)) {
    throw Error(ErrorCode::kDomainError, "sample weight must be >= 0");
  }
  return weight * logloss(pred, click_label);
}

double weighted_logloss_grad(double pred, int click_label, double weight) {
  if (!(weight >= 0.0)) {
    throw Error(ErrorCode::kDomainError, "sample weight must be >= 0");
  }
  return weight * logloss_grad(pred, click_label);
}

double mse_loss(double pred, double target) {
  const double r = pred - target;
  return r * r;
}

double mse_grad(double pred, double target) { return 2.0 * (pred - target); }

LossGrad loss_and_grad(const LossKind& kind, double pred, const Sample& s) {
  return std::visit(
      overloaded{
          [&](const loss::TweediePow& t) -> LossGrad {
            const double q = std::max(pred, kEpsilonPred);
            return {tweedie_loss(q, s.watch, t.p), tweedie_grad(q, s.watch, t.p)};
          },
          [&](const loss::LogLoss&) -> LossGrad {
            const double q = clamp_probability(pred);
            return {logloss(q, s.click_label), logloss_grad(q, s.click_label)};
          },
          [&](const loss::WeightedLogLoss&) -> LossGrad {
            const double q = clamp_probability(pred);
            return {weighted_logloss(q, s.click_label, s.weight),
                    weighted_logloss_grad(q, s.click_label, s.weight)};
          },
          [&](const loss::MeanSquared&) -> LossGrad {
            return {mse_loss(pred, s.watch), mse_grad(pred, s.watch)};
          }},
      kind);
}

LossGrad loss_and_grad_sum(const LossKind& kind, double pred,
                           const SampleMoments& m) {
  return std::visit(
      overloaded{
          [&](const loss::TweediePow& t) -> LossGrad {
            check_power(t.p);
            const double q = std::max(pred, kEpsilonPred);
            const double q1 = std::pow(q, 1.0 - t.p);
            const double q2 = q1 * q;
            return {-m.watch * q1 / (1.0 - t.p) + m.count * q2 / (2.0 - t.p),
                    -m.watch * q1 / q + m.count * q1};
          },
          [&](const loss::LogLoss&) -> LossGrad {
            const double q = clamp_probability(pred);
            const double negatives = m.count - m.clicks;
            return {-m.clicks * std::log(q) - negatives * std::log1p(-q),
                    -m.clicks / q + negatives / (1.0 - q)};
          },
          [&](const loss::WeightedLogLoss&) -> LossGrad {
            const double q = clamp_probability(pred);
            return {-m.click_weight * std::log(q) -
                        m.no_click_weight * std::log1p(-q),
                    -m.click_weight / q + m.no_click_weight / (1.0 - q)};
          },
          [&](const loss::MeanSquared&) -> LossGrad {
            return {m.count * pred * pred - 2.0 * pred * m.watch + m.watch_sq,
                    2.0 * (m.count * pred - m.watch)};
          }},
      kind);
}

}  // namespace tweedie
