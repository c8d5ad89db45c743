#include "tweedie/distribution.hpp"

#include <cmath>
#include <sstream>

#include "tweedie/error.hpp"
#include "tweedie/special_functions.hpp"

namespace tweedie {

void TweedieParams::validate() const {
  if (!(mu > 0.0) || !(phi > 0.0) || !(p > 1.0 && p < 2.0) ||
      !std::isfinite(mu) || !std::isfinite(phi)) {
    std::ostringstream msg;
    msg << "need mu > 0, phi > 0, 1 < p < 2 (mu=" << mu << ", phi=" << phi
        << ", p=" << p << ")";
    throw Error(ErrorCode::kInvalidParams, msg.str());
  }
}

CompoundParams to_compound(const TweedieParams& params) {
  params.validate();
  const auto [mu, phi, p] = params;
  return {std::pow(mu, 2.0 - p) / (phi * (2.0 - p)), (2.0 - p) / (p - 1.0),
          phi * (p - 1.0) * std::pow(mu, p - 1.0)};
}

Moments mean_variance(const TweedieParams& params) {
  params.validate();
  return {params.mu, params.phi * std::pow(params.mu, params.p)};
}

Moments compound_moments(const CompoundParams& c) {
  return {c.lambda * c.alpha * c.scale,
          c.lambda * c.alpha * (c.alpha + 1.0) * c.scale * c.scale};
}

namespace {

std::uint64_t poisson_inversion(Stream& stream, double lambda) {
  const double u = stream.uniform();
  double pmf = std::exp(-lambda);
  double cumulative = pmf;
  std::uint64_t k = 0;
  // The cap only matters if u lands in the last ulp below 1.
  while (u > cumulative && k < 1000) {
    ++k;
    pmf *= lambda / static_cast<double>(k);
    cumulative += pmf;
  }
  return k;
}

}  // namespace

std::uint64_t sample_poisson(Stream& stream, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kDomainError, "poisson rate must be finite and >= 0");
  }
  if (lambda == 0.0) return 0;
  constexpr double kPieceRate = 30.0;
  if (lambda < kPieceRate) return poisson_inversion(stream, lambda);
  const auto pieces = static_cast<std::uint64_t>(std::ceil(lambda / kPieceRate));
  const double piece_rate = lambda / static_cast<double>(pieces);
  std::uint64_t total = 0;
  for (std::uint64_t i = 0; i < pieces; ++i) {
    total += poisson_inversion(stream, piece_rate);
  }
  return total;
}

double sample_gamma(Stream& stream, double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw Error(ErrorCode::kDomainError, "gamma shape and scale must be > 0");
  }
  if (shape < 1.0) {
    const double boost = std::pow(stream.uniform_open(), 1.0 / shape);
    return sample_gamma(stream, shape + 1.0, scale) * boost;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x;
    double v;
    do {
      x = stream.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = stream.uniform_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return d * v * scale;
    }
  }
}

double sample_one(const CompoundParams& compound, Stream& stream) {
  const std::uint64_t events = sample_poisson(stream, compound.lambda);
  if (events == 0) return 0.0;
  return sample_gamma(stream, static_cast<double>(events) * compound.alpha,
                      compound.scale);
}

std::vector<double> sample(const TweedieParams& params, std::size_t n,
                           std::uint64_t seed) {
  const CompoundParams compound = to_compound(params);
  if (n == 0) {
    throw Error(ErrorCode::kInvalidParams, "sample count must be >= 1");
  }
  Stream stream = Stream::derive(seed, "tweedie.sample");
  std::vector<double> draws(n);
  for (double& x : draws) x = sample_one(compound, stream);
  return draws;
}

CompoundCdf::CompoundCdf(const TweedieParams& params)
    : compound_(to_compound(params)) {
  const double lambda = compound_.lambda;
  const double log_lambda = std::log(lambda);
  zero_mass_ = std::exp(-lambda);
  double cumulative = zero_mass_;
  // Terms left of the Poisson bulk with weight below this are dropped; their
  // total mass is far below kTailMass for any rate the sampler can handle.
  constexpr double kNegligible = 1e-20;
  for (std::uint64_t m = 1;; ++m) {
    const double md = static_cast<double>(m);
    const double weight =
        std::exp(-lambda + md * log_lambda - std::lgamma(md + 1.0));
    cumulative += weight;
    if (weight > kNegligible) weights_.emplace_back(md * compound_.alpha, weight);
    if (md > lambda && 1.0 - cumulative < kTailMass) break;
    if (md > lambda && weight < kNegligible) break;
  }
}

double CompoundCdf::operator()(double x) const {
  if (!(x >= 0.0)) {
    std::ostringstream msg;
    msg << "cdf argument must be >= 0 (x=" << x << ")";
    throw Error(ErrorCode::kNegativeX, msg.str());
  }
  if (x == 0.0) return zero_mass_;
  const double scaled = x / compound_.scale;
  double total = zero_mass_;
  for (const auto& [shape, weight] : weights_) {
    total += weight * reg_lower_incomplete_gamma(shape, scaled);
  }
  return std::min(total, 1.0);
}

double cdf(const TweedieParams& params, double x) {
  return CompoundCdf(params)(x);
}

}  // namespace tweedie
