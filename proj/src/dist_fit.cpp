#include "tweedie/dist_fit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "tweedie/error.hpp"

namespace tweedie {

std::string to_string(NormalizationMethod method) {
  return method == NormalizationMethod::kZScoreShifted ? "zscore-shifted"
                                                       : "scale-only";
}

NormalizationMethod parse_normalization(const std::string& name) {
  if (name == "zscore-shifted" || name == "zscore") {
    return NormalizationMethod::kZScoreShifted;
  }
  if (name == "scale-only" || name == "scale") return NormalizationMethod::kScaleOnly;
  throw Error(ErrorCode::kValidation, "unknown normalization '" + name + "'");
}

std::vector<double> normalize(std::span<const double> raw,
                              const NormalizationSpec& spec) {
  if (raw.empty()) throw Error(ErrorCode::kEmptySample, "sample is empty");
  if (!(spec.upper_bound > 0.0)) {
    throw Error(ErrorCode::kValidation, "upper_bound must be > 0");
  }
  const double n = static_cast<double>(raw.size());
  const double mean = std::accumulate(raw.begin(), raw.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : raw) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / n);
  if (!(sd > 0.0)) {
    throw Error(ErrorCode::kZeroVariance, "sample has zero variance");
  }

  std::vector<double> out(raw.size());
  if (spec.method == NormalizationMethod::kZScoreShifted) {
    const double lowest = (*std::min_element(raw.begin(), raw.end()) - mean) / sd;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      out[i] = (raw[i] - mean) / sd - lowest;
    }
  } else {
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] / sd;
  }
  for (double& x : out) x = std::min(x, spec.upper_bound);
  return out;
}

EmpiricalDistribution::EmpiricalDistribution(std::span<const double> sample)
    : n_(sample.size()) {
  if (sample.empty()) throw Error(ErrorCode::kEmptySample, "sample is empty");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (values_.empty() || sorted[i] != values_.back()) {
      values_.push_back(sorted[i]);
      cumulative_.push_back(i + 1);
    } else {
      cumulative_.back() = i + 1;
    }
  }
}

double EmpiricalDistribution::at(std::size_t k) const {
  return static_cast<double>(cumulative_[k]) / static_cast<double>(n_);
}

double EmpiricalDistribution::before(std::size_t k) const {
  return k == 0 ? 0.0 : at(k - 1);
}

double EmpiricalDistribution::operator()(double x) const {
  const auto it = std::upper_bound(values_.begin(), values_.end(), x);
  if (it == values_.begin()) return 0.0;
  return at(static_cast<std::size_t>(it - values_.begin()) - 1);
}

namespace {

void check_nonnegative(const EmpiricalDistribution& ecdf) {
  if (ecdf.values().front() < 0.0) {
    throw Error(ErrorCode::kNegativeX, "sample contains negative values");
  }
}

// Discrepancy contributed by jump point k given F(v_k). The model CDF is
// continuous away from 0, so its left limit equals F(v_k) there; at 0 both
// left limits vanish.
double jump_discrepancy(const EmpiricalDistribution& ecdf, std::size_t k,
                        double f) {
  const double right = std::abs(ecdf.at(k) - f);
  const double left_model = ecdf.values()[k] == 0.0 ? 0.0 : f;
  return std::max(right, std::abs(ecdf.before(k) - left_model));
}

class KsSweep {
 public:
  KsSweep(const EmpiricalDistribution& ecdf, const CompoundCdf& cdf)
      : ecdf_(ecdf), cdf_(cdf), f_(ecdf.values().size(), -1.0) {}

  double run() {
    const std::size_t k_max = f_.size();
    constexpr std::size_t kBlock = 32;
    std::vector<std::size_t> anchors;
    for (std::size_t k = 0; k < k_max; k += kBlock) anchors.push_back(k);
    if (anchors.back() != k_max - 1) anchors.push_back(k_max - 1);
    for (std::size_t k : anchors) eval(k);
    for (std::size_t a = 0; a + 1 < anchors.size(); ++a) {
      refine(anchors[a], anchors[a + 1]);
    }
    return best_;
  }

 private:
  void eval(std::size_t k) {
    f_[k] = cdf_(ecdf_.values()[k]);
    best_ = std::max(best_, jump_discrepancy(ecdf_, k, f_[k]));
  }

  // Interior points i < k < j have F in [F_i, F_j] and ECDF limits in
  // [at(i), at(j - 1)], which bounds every interior discrepancy.
  void refine(std::size_t i, std::size_t j) {
    if (j - i < 2) return;
    const double bound = std::max(ecdf_.at(j - 1) - f_[i], f_[j] - ecdf_.at(i));
    if (bound <= best_) return;
    const std::size_t m = i + (j - i) / 2;
    eval(m);
    refine(i, m);
    refine(m, j);
  }

  const EmpiricalDistribution& ecdf_;
  const CompoundCdf& cdf_;
  std::vector<double> f_;
  double best_ = 0.0;
};

}  // namespace

double ks_statistic(const EmpiricalDistribution& ecdf,
                    const TweedieParams& params) {
  check_nonnegative(ecdf);
  const CompoundCdf cdf(params);
  return KsSweep(ecdf, cdf).run();
}

double ks_statistic(std::span<const double> sample, const TweedieParams& params) {
  return ks_statistic(EmpiricalDistribution(sample), params);
}

double ks_statistic_exhaustive(const EmpiricalDistribution& ecdf,
                               const TweedieParams& params) {
  check_nonnegative(ecdf);
  const CompoundCdf cdf(params);
  double best = 0.0;
  for (std::size_t k = 0; k < ecdf.values().size(); ++k) {
    best = std::max(best, jump_discrepancy(ecdf, k, cdf(ecdf.values()[k])));
  }
  return best;
}

std::vector<double> GridRange::values() const {
  if (!(step > 0.0) || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorCode::kValidation, "grid range needs step > 0 and hi >= lo");
  }
  const auto count =
      static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + static_cast<double>(i) * step;
  return out;
}

void GridSpec::validate() const {
  const auto mus = mu.values();
  const auto ps = p.values();
  const auto phis = phi.values();
  if (mus.front() <= 0.0 || phis.front() <= 0.0) {
    throw Error(ErrorCode::kValidation, "mu and phi grids must be positive");
  }
  if (ps.front() <= 1.0 || ps.back() >= 2.0) {
    throw Error(ErrorCode::kValidation, "p grid must lie inside (1, 2)");
  }
}

FitResult grid_search(std::span<const double> sample, const GridSpec& grid,
                      unsigned threads) {
  grid.validate();
  const EmpiricalDistribution ecdf(sample);
  check_nonnegative(ecdf);

  FitResult result;
  for (double mu : grid.mu.values()) {
    for (double p : grid.p.values()) {
      for (double phi : grid.phi.values()) {
        result.table.push_back({{mu, phi, p}, 0.0});
      }
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < result.table.size(); i = next++) {
      result.table[i].ks = ks_statistic(ecdf, result.table[i].params);
    }
  };
  {
    std::vector<std::jthread> pool;
    const unsigned n = std::max(1U, threads);
    for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
  }

  auto better = [](const GridPoint& a, const GridPoint& b) {
    if (a.ks != b.ks) return a.ks < b.ks;
    if (a.params.p != b.params.p) return a.params.p < b.params.p;
    if (a.params.mu != b.params.mu) return a.params.mu < b.params.mu;
    return a.params.phi < b.params.phi;
  };
  const GridPoint& best =
      *std::min_element(result.table.begin(), result.table.end(), better);
  result.best = best.params;
  result.best_ks = best.ks;
  return result;
}

std::vector<double> read_sample(std::istream& in) {
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream field(line);
    double v;
    std::string rest;
    if (!(field >> v) || (field >> rest)) {
      throw Error(ErrorCode::kValidation,
                  "line " + std::to_string(line_no) + ": not a number: '" +
                      line + "'");
    }
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kValidation,
                  "line " + std::to_string(line_no) +
                      ": value must be finite and >= 0: '" + line + "'");
    }
    values.push_back(v);
  }
  if (values.empty()) throw Error(ErrorCode::kEmptySample, "sample file has no values");
  return values;
}

void write_fit(std::ostream& out, const FitResult& fit, std::uint64_t seed,
               const std::string& normalization) {
  out.precision(std::numeric_limits<double>::max_digits10);
  out << "# master_seed=" << seed << " normalization=" << normalization << '\n';
  out << "mu,p,phi,ks\n";
  for (const GridPoint& g : fit.table) {
    out << g.params.mu << ',' << g.params.p << ',' << g.params.phi << ','
        << g.ks << '\n';
  }
  out << "# best_fit\n";
  out << "# mu=" << fit.best.mu << '\n';
  out << "# p=" << fit.best.p << '\n';
  out << "# phi=" << fit.best.phi << '\n';
  out << "# ks=" << fit.best_ks << '\n';
}

}  // namespace tweedie
