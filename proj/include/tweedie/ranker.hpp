#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "tweedie/losses.hpp"

namespace tweedie {

inline constexpr int kEmbeddingDim = 16;
inline constexpr int kHiddenDim = 8;
/// Raw scores are clamped to +-kScoreClamp before the exponential link.
inline constexpr double kScoreClamp = 30.0;

using EmbeddingTable =
    Eigen::Matrix<double, Eigen::Dynamic, kEmbeddingDim, Eigen::RowMajor>;
using Embedding = Eigen::Matrix<double, kEmbeddingDim, 1>;
/// layer1 maps input row i (embedding dimension) to output column j.
using Layer1Weights =
    Eigen::Matrix<double, kEmbeddingDim, kHiddenDim, Eigen::RowMajor>;
using Hidden = Eigen::Matrix<double, kHiddenDim, 1>;

/// All trainable parameters. Also used to hold gradients.
struct RankerParams {
  EmbeddingTable embeddings;
  Layer1Weights w1;
  Hidden b1;
  Hidden w2;
  double b2 = 0.0;

  static RankerParams zeros(std::size_t n_titles);

  /// Flat ordering used by dumps and finite differences: embeddings
  /// row-major (title, dim), w1 row-major (in, out), b1, w2, b2.
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
  std::size_t size() const;
  bool all_finite() const;
};

struct ForwardCache {
  Embedding embedding;
  Hidden pre_activation;
  Hidden hidden;
  double score = 0.0;
};

/// Maps the raw score to the kind's output domain: sigmoid for the two
/// log-loss kinds, exp(clamp(z, -30, 30)) for Tweedie, identity for MSE.
double apply_link(const LossKind& kind, double score);
/// d pred / d score, zero where the Tweedie clamp is active.
double link_derivative(const LossKind& kind, double score, double pred);

class RankerModel {
 public:
  /// All-zero parameters.
  RankerModel(std::size_t n_titles, LossKind kind);

  /// Embeddings ~ N(0, 0.01^2), layer weights ~ U(+-sqrt(6 / (fan_in +
  /// fan_out))), biases zero.
  static RankerModel initialized(std::size_t n_titles, LossKind kind,
                                 std::uint64_t seed);
  /// Every parameter ~ N(0, scale^2). Used for gradient checks.
  static RankerModel random(std::size_t n_titles, LossKind kind,
                            std::uint64_t seed, double scale = 0.5);

  std::size_t n_titles() const {
    return static_cast<std::size_t>(params_.embeddings.rows());
  }
  const LossKind& kind() const { return kind_; }
  void set_kind(LossKind kind);

  const RankerParams& params() const { return params_; }
  RankerParams& params() { return params_; }

  double forward(std::uint32_t title_id) const;
  ForwardCache forward_cache(std::uint32_t title_id) const;
  double predict(std::uint32_t title_id) const;

  void check_title(std::uint32_t title_id) const;

 private:
  RankerParams params_;
  LossKind kind_;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  int epochs = 100;
  std::size_t batch_size = 256;
  std::uint64_t shuffle_seed = 0;

  void validate() const;
};

struct TrainResult {
  /// Mean per-sample loss of each epoch, evaluated at the parameters in
  /// effect when each mini-batch was processed.
  std::vector<double> loss_trace;
};

/// Mini-batch SGD on the mean batch loss. Samples are reshuffled every epoch
/// from a stream keyed by (shuffle_seed, epoch).
TrainResult train(RankerModel& model, std::span<const Sample> samples,
                  const TrainConfig& config);

/// Per-sample loss and full parameter gradient by backpropagation.
struct SampleGradient {
  double loss = 0.0;
  RankerParams grad;
};
SampleGradient backprop(const RankerModel& model, const Sample& sample);

struct GradCheckResult {
  /// max |analytic - numeric| / max(|analytic|, |numeric|, kGradCheckFloor)
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  std::size_t parameters = 0;
};
inline constexpr double kGradCheckFloor = 1e-4;
inline constexpr double kGradCheckStep = 1e-5;

/// Compares backprop against central differences over every parameter.
/// `corrupt` is added to the first analytic component (negative-control hook).
GradCheckResult grad_check(const RankerModel& model, const Sample& sample,
                           const LossKind& kind, double corrupt = 0.0);

/// Titles by descending prediction, ties by ascending id.
std::vector<std::uint32_t> rank(const RankerModel& model,
                                std::span<const std::uint32_t> title_ids);
/// Ranks the full catalog.
std::vector<std::uint32_t> rank_all(const RankerModel& model);

void write_parameters(const RankerModel& model, std::ostream& out);
void read_parameters(RankerModel& model, std::istream& in);

}  // namespace tweedie
