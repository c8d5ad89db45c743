#include "tweedie/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "tweedie/error.hpp"
#include "tweedie/random.hpp"

namespace tweedie {

RankerParams RankerParams::zeros(std::size_t n_titles) {
  RankerParams p;
  p.embeddings = EmbeddingTable::Zero(static_cast<Eigen::Index>(n_titles),
                                      kEmbeddingDim);
  p.w1.setZero();
  p.b1.setZero();
  p.w2.setZero();
  p.b2 = 0.0;
  return p;
}

std::size_t RankerParams::size() const {
  return static_cast<std::size_t>(embeddings.size() + w1.size() + b1.size() +
                                  w2.size() + 1);
}

std::vector<double> RankerParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(size());
  flat.insert(flat.end(), embeddings.data(),
              embeddings.data() + embeddings.size());
  flat.insert(flat.end(), w1.data(), w1.data() + w1.size());
  flat.insert(flat.end(), b1.data(), b1.data() + b1.size());
  flat.insert(flat.end(), w2.data(), w2.data() + w2.size());
  flat.push_back(b2);
  return flat;
}

void RankerParams::assign(std::span<const double> flat) {
  if (flat.size() != size()) {
    throw Error(ErrorCode::kValidation,
                "parameter vector has " + std::to_string(flat.size()) +
                    " entries, model expects " + std::to_string(size()));
  }
  auto it = flat.begin();
  auto take = [&it](double* dst, Eigen::Index n) {
    std::copy_n(it, n, dst);
    it += n;
  };
  take(embeddings.data(), embeddings.size());
  take(w1.data(), w1.size());
  take(b1.data(), b1.size());
  take(w2.data(), w2.size());
  b2 = *it;
}

bool RankerParams::all_finite() const {
  return embeddings.allFinite() && w1.allFinite() && b1.allFinite() &&
         w2.allFinite() && std::isfinite(b2);
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double apply_link(const LossKind& kind, double score) {
  if (std::holds_alternative<loss::TweediePow>(kind)) {
    return std::exp(std::clamp(score, -kScoreClamp, kScoreClamp));
  }
  if (std::holds_alternative<loss::MeanSquared>(kind)) return score;
  return sigmoid(score);
}

double link_derivative(const LossKind& kind, double score, double pred) {
  if (std::holds_alternative<loss::TweediePow>(kind)) {
    return std::abs(score) < kScoreClamp ? pred : 0.0;
  }
  if (std::holds_alternative<loss::MeanSquared>(kind)) return 1.0;
  return pred * (1.0 - pred);
}

RankerModel::RankerModel(std::size_t n_titles, LossKind kind)
    : params_(RankerParams::zeros(n_titles)), kind_(kind) {
  if (n_titles == 0) {
    throw Error(ErrorCode::kInvalidConfig, "catalog must hold at least one title");
  }
  validate_kind(kind_);
}

RankerModel RankerModel::initialized(std::size_t n_titles, LossKind kind,
                                     std::uint64_t seed) {
  RankerModel model(n_titles, kind);
  Stream stream = Stream::derive(seed, "ranker.init");
  auto& p = model.params_;
  for (Eigen::Index i = 0; i < p.embeddings.size(); ++i) {
    p.embeddings.data()[i] = stream.normal(0.0, 0.01);
  }
  const double limit1 = std::sqrt(6.0 / (kEmbeddingDim + kHiddenDim));
  for (Eigen::Index i = 0; i < p.w1.size(); ++i) {
    p.w1.data()[i] = (2.0 * stream.uniform() - 1.0) * limit1;
  }
  const double limit2 = std::sqrt(6.0 / (kHiddenDim + 1));
  for (Eigen::Index i = 0; i < p.w2.size(); ++i) {
    p.w2[i] = (2.0 * stream.uniform() - 1.0) * limit2;
  }
  return model;
}

RankerModel RankerModel::random(std::size_t n_titles, LossKind kind,
                                std::uint64_t seed, double scale) {
  RankerModel model(n_titles, kind);
  Stream stream = Stream::derive(seed, "ranker.random");
  std::vector<double> flat(model.params_.size());
  for (double& v : flat) v = stream.normal(0.0, scale);
  model.params_.assign(flat);
  return model;
}

void RankerModel::set_kind(LossKind kind) {
  validate_kind(kind);
  kind_ = kind;
}

void RankerModel::check_title(std::uint32_t title_id) const {
  if (title_id >= n_titles()) {
    throw Error(ErrorCode::kUnknownTitle,
                "title " + std::to_string(title_id) + " outside catalog of " +
                    std::to_string(n_titles()));
  }
}

ForwardCache RankerModel::forward_cache(std::uint32_t title_id) const {
  check_title(title_id);
  ForwardCache c;
  c.embedding = params_.embeddings.row(title_id).transpose();
  c.pre_activation = params_.w1.transpose() * c.embedding + params_.b1;
  c.hidden = c.pre_activation.cwiseMax(0.0);
  c.score = params_.w2.dot(c.hidden) + params_.b2;
  return c;
}

double RankerModel::forward(std::uint32_t title_id) const {
  return forward_cache(title_id).score;
}

double RankerModel::predict(std::uint32_t title_id) const {
  return apply_link(kind_, forward(title_id));
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::kInvalidConfig, "learning_rate must be finite and >= 0");
  }
  if (epochs < 1) throw Error(ErrorCode::kInvalidConfig, "epochs must be >= 1");
  if (batch_size < 1) {
    throw Error(ErrorCode::kInvalidConfig, "batch_size must be >= 1");
  }
}

namespace {

// Accumulates d loss / d (layer params) for one title's share of a batch and
// returns d loss / d embedding. `dscore` is the summed, batch-scaled
// derivative with respect to the raw score.
Embedding accumulate_layers(const RankerParams& p, const ForwardCache& c,
                            double dscore, RankerParams& grad) {
  grad.w2 += dscore * c.hidden;
  grad.b2 += dscore;
  const Hidden dpre =
      (dscore * p.w2).cwiseProduct((c.pre_activation.array() > 0.0).cast<double>().matrix());
  grad.b1 += dpre;
  grad.w1.noalias() += c.embedding * dpre.transpose();
  return p.w1 * dpre;
}

}  // namespace

SampleGradient backprop(const RankerModel& model, const Sample& sample) {
  const ForwardCache c = model.forward_cache(sample.title_id);
  const double pred = apply_link(model.kind(), c.score);
  const LossGrad lg = loss_and_grad(model.kind(), pred, sample);
  const double dscore = lg.grad * link_derivative(model.kind(), c.score, pred);

  SampleGradient out{lg.loss, RankerParams::zeros(model.n_titles())};
  const Embedding demb = accumulate_layers(model.params(), c, dscore, out.grad);
  out.grad.embeddings.row(sample.title_id) = demb.transpose();
  return out;
}

TrainResult train(RankerModel& model, std::span<const Sample> samples,
                  const TrainConfig& config) {
  config.validate();
  if (samples.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "cannot train on an empty dataset");
  }
  for (const Sample& s : samples) model.check_title(s.title_id);

  const std::size_t n = samples.size();
  const std::size_t n_titles = model.n_titles();
  RankerParams& p = model.params();
  const LossKind kind = model.kind();
  const double lr = config.learning_rate;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  // Parameters are constant within a mini-batch, so each title's forward
  // pass is computed once per batch and its samples are reduced to moments.
  constexpr std::size_t kNoSlot = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> slot_of(n_titles, kNoSlot);
  std::vector<std::uint32_t> slot_title;
  std::vector<SampleMoments> slot_moments;
  RankerParams grad;
  grad.w1.setZero();

  TrainResult result;
  result.loss_trace.reserve(static_cast<std::size_t>(config.epochs));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Stream shuffle = Stream::derive(config.shuffle_seed, "ranker.shuffle",
                                    {static_cast<std::uint64_t>(epoch)});
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(order[i], order[shuffle.below(i + 1)]);
    }

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t stop = std::min(n, start + config.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(stop - start);

      slot_title.clear();
      slot_moments.clear();
      for (std::size_t k = start; k < stop; ++k) {
        const Sample& s = samples[order[k]];
        std::size_t& slot = slot_of[s.title_id];
        if (slot == kNoSlot) {
          slot = slot_title.size();
          slot_title.push_back(s.title_id);
          slot_moments.emplace_back();
        }
        slot_moments[slot].add(s);
      }

      grad.w1.setZero();
      grad.b1.setZero();
      grad.w2.setZero();
      grad.b2 = 0.0;
      for (std::size_t slot = 0; slot < slot_title.size(); ++slot) {
        const ForwardCache cache = model.forward_cache(slot_title[slot]);
        const double pred = apply_link(kind, cache.score);
        const LossGrad lg = loss_and_grad_sum(kind, pred, slot_moments[slot]);
        epoch_loss += lg.loss;
        const double dscore =
            lg.grad * link_derivative(kind, cache.score, pred) * inv_batch;
        const Embedding demb = accumulate_layers(p, cache, dscore, grad);
        // Each title owns one slot, so its row can be updated right away;
        // layer gradients above already used the pre-update embedding.
        p.embeddings.row(slot_title[slot]) -= lr * demb.transpose();
        slot_of[slot_title[slot]] = kNoSlot;
      }
      p.w1 -= lr * grad.w1;
      p.b1 -= lr * grad.b1;
      p.w2 -= lr * grad.w2;
      p.b2 -= lr * grad.b2;
    }
    result.loss_trace.push_back(epoch_loss / static_cast<double>(n));
  }
  return result;
}

GradCheckResult grad_check(const RankerModel& model, const Sample& sample,
                           const LossKind& kind, double corrupt) {
  RankerModel work = model;
  work.set_kind(kind);
  SampleGradient analytic = backprop(work, sample);
  std::vector<double> analytic_flat = analytic.grad.flatten();
  analytic_flat.front() += corrupt;

  std::vector<double> flat = work.params().flatten();
  auto loss_at = [&](std::size_t i, double value) {
    const double saved = flat[i];
    flat[i] = value;
    work.params().assign(flat);
    flat[i] = saved;
    const double pred = apply_link(kind, work.forward(sample.title_id));
    return loss_and_grad(kind, pred, sample).loss;
  };

  GradCheckResult result;
  result.parameters = flat.size();
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double x = flat[i];
    const double numeric = (loss_at(i, x + kGradCheckStep) -
                            loss_at(i, x - kGradCheckStep)) /
                           (2.0 * kGradCheckStep);
    const double a = analytic_flat[i];
    const double abs_err = std::abs(a - numeric);
    const double denom = std::max({std::abs(a), std::abs(numeric), kGradCheckFloor});
    result.max_absolute_error = std::max(result.max_absolute_error, abs_err);
    result.max_relative_error = std::max(result.max_relative_error, abs_err / denom);
  }
  return result;
}

std::vector<std::uint32_t> rank(const RankerModel& model,
                                std::span<const std::uint32_t> title_ids) {
  std::vector<std::pair<double, std::uint32_t>> scored;
  scored.reserve(title_ids.size());
  for (std::uint32_t id : title_ids) scored.emplace_back(model.predict(id), id);
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::uint32_t> out;
  out.reserve(scored.size());
  for (const auto& [pred, id] : scored) out.push_back(id);
  return out;
}

std::vector<std::uint32_t> rank_all(const RankerModel& model) {
  std::vector<std::uint32_t> ids(model.n_titles());
  std::iota(ids.begin(), ids.end(), 0U);
  return rank(model, ids);
}

void write_parameters(const RankerModel& model, std::ostream& out) {
  out.precision(std::numeric_limits<double>::max_digits10);
  for (double v : model.params().flatten()) out << v << '\n';
}

void read_parameters(RankerModel& model, std::istream& in) {
  std::vector<double> flat;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    std::istringstream field(line);
    double v;
    if (!(field >> v)) {
      throw Error(ErrorCode::kValidation,
                  "parameter dump line " + std::to_string(line_no) +
                      " is not a number");
    }
    flat.push_back(v);
  }
  model.params().assign(flat);
}

}  // namespace tweedie
