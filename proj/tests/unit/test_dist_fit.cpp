#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "tweedie/dist_fit.hpp"
#include "tweedie/error.hpp"
#include "tweedie/random.hpp"

using namespace tweedie;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kValidation;
}

// Both one-sided ECDF limits at each distinct value, against the series CDF.
double brute_ks(std::vector<double> x, const TweedieParams& t) {
  std::sort(x.begin(), x.end());
  const CompoundCdf f(t);
  const double n = static_cast<double>(x.size());
  double d = 0;
  for (std::size_t i = 0; i < x.size();) {
    std::size_t j = i;
    while (j < x.size() && x[j] == x[i]) ++j;
    const double fx = f(x[i]);
    // F has a jump only at 0, where its left limit is 0.
    const double f_left = x[i] == 0.0 ? 0.0 : fx;
    d = std::max({d, std::abs(i / n - f_left), std::abs(j / n - fx)});
    i = j;
  }
  return d;
}

}  // namespace

TEST_CASE("normalization examples") {
  const std::vector<double> equal{3, 3, 3};
  CHECK(code_of([&] { normalize(equal, {}); }) == ErrorCode::kZeroVariance);
  CHECK(code_of([&] { normalize(std::vector<double>{}, {}); }) == ErrorCode::kEmptySample);

  const std::vector<double> raw{0, 0, 0, 4};
  const auto scaled = normalize(raw, {NormalizationMethod::kScaleOnly, 10.0});
  CHECK(scaled[0] == 0.0);
  CHECK(scaled[3] == doctest::Approx(4.0 / std::sqrt(3.0)));
  CHECK(scaled[3] == doctest::Approx(2.3094).epsilon(1e-4));

  const auto shifted = normalize(raw, {NormalizationMethod::kZScoreShifted, 10.0});
  CHECK(shifted[0] == 0.0);
  CHECK(shifted[3] == doctest::Approx(4.0 / std::sqrt(3.0)));

  const std::vector<double> spread{1, 2, 50};
  const auto capped = normalize(spread, {NormalizationMethod::kScaleOnly, 1.0});
  CHECK(*std::max_element(capped.begin(), capped.end()) == 1.0);
}

TEST_CASE("large cap is a no-op") {
  Stream s = Stream::derive(1, "test.normalize");
  std::vector<double> raw;
  for (int i = 0; i < 500; ++i) raw.push_back(s.bernoulli(0.4) ? 0.0 : 10.0 * s.uniform());
  for (auto method : {NormalizationMethod::kZScoreShifted, NormalizationMethod::kScaleOnly}) {
    const auto a = normalize(raw, {method, 1e300});
    double mean = 0;
    for (double v : raw) mean += v;
    mean /= raw.size();
    double var = 0;
    for (double v : raw) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / raw.size());
    const double shift = method == NormalizationMethod::kScaleOnly ? 0.0 : -mean / sd;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const double expected = method == NormalizationMethod::kScaleOnly
                                  ? raw[i] / sd
                                  : (raw[i] - mean) / sd - shift;
      CHECK(a[i] == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("empirical distribution") {
  const std::vector<double> x{3, 1, 1, 2, 0};
  const EmpiricalDistribution e(x);
  CHECK(e.values() == std::vector<double>{0, 1, 2, 3});
  CHECK(e.at(0) == doctest::Approx(0.2));
  CHECK(e.before(1) == doctest::Approx(0.2));
  CHECK(e.at(1) == doctest::Approx(0.6));
  CHECK(e.at(3) == 1.0);
  CHECK(e(-1.0) == 0.0);
  CHECK(e(1.5) == doctest::Approx(0.6));
  CHECK(e(3.0) == 1.0);
  CHECK(e(100.0) == 1.0);
}

TEST_CASE("ks examples") {
  const TweedieParams t{0.2, 1.5, 1.5};
  const auto x = sample(t, 100'000, 8);
  CHECK(ks_statistic(x, t) < 0.01);

  const std::vector<double> zeros(1000, 0.0);
  CHECK(ks_statistic(zeros, t) == doctest::Approx(1.0 - std::exp(-to_compound(t).lambda)));
  CHECK(ks_statistic(zeros, t) == doctest::Approx(0.4492).epsilon(1e-4));

  auto shuffled = std::vector<double>(x.begin(), x.begin() + 5000);
  const double before = ks_statistic(shuffled, t);
  std::reverse(shuffled.begin(), shuffled.end());
  std::rotate(shuffled.begin(), shuffled.begin() + 1234, shuffled.end());
  CHECK(ks_statistic(shuffled, t) == before);
}

TEST_CASE("fast ks equals exhaustive and brute-force evaluation") {
  const TweedieParams sources[] = {{0.2, 1.5, 1.5}, {1.0, 0.5, 1.2}, {0.05, 2.0, 1.9}};
  const TweedieParams models[] = {{0.2, 1.5, 1.5}, {0.3, 1.0, 1.7}, {0.1, 2.5, 1.1},
                                  {0.45, 0.5, 1.95}};
  std::uint64_t seed = 1;
  for (const auto& src : sources) {
    const auto x = sample(src, 20'000, seed++);
    const EmpiricalDistribution e(x);
    for (const auto& m : models) {
      const double fast = ks_statistic(e, m);
      CHECK(fast == ks_statistic_exhaustive(e, m));
      CHECK(fast == doctest::Approx(brute_ks(x, m)).epsilon(1e-12));
      CHECK(fast >= 0.0);
      CHECK(fast <= 1.0);
    }
  }
}

TEST_CASE("grid ranges") {
  CHECK(GridRange{1.05, 1.95, 0.05}.values().size() == 19);
  CHECK(GridRange{0.2, 0.2, 0.1}.values() == std::vector<double>{0.2});
  GridSpec g;
  g.p = {0.9, 1.5, 0.1};
  CHECK_THROWS_AS(g.validate(), Error);
  g = GridSpec{};
  g.mu.step = 0.0;
  CHECK_THROWS_AS(g.validate(), Error);
  g = GridSpec{};
  g.phi = {2.0, 1.0, 0.1};
  CHECK_THROWS_AS(g.validate(), Error);
}

TEST_CASE("grid search") {
  const TweedieParams truth{0.2, 1.5, 1.5};
  const auto x = sample(truth, 20'000, 4);

  GridSpec single{{0.3, 0.3, 1}, {1.4, 1.4, 1}, {1.0, 1.0, 1}};
  const FitResult one = grid_search(x, single);
  CHECK(one.table.size() == 1);
  CHECK(one.best.mu == 0.3);
  CHECK(one.best_ks == ks_statistic(x, TweedieParams{0.3, 1.0, 1.4}));

  GridSpec small{{0.1, 0.3, 0.1}, {1.3, 1.7, 0.2}, {1.0, 2.0, 0.5}};
  const FitResult a = grid_search(x, small, 1);
  const FitResult b = grid_search(x, small, 3);
  CHECK(a.table.size() == 27);
  REQUIRE(b.table.size() == a.table.size());
  for (std::size_t i = 0; i < a.table.size(); ++i) CHECK(a.table[i].ks == b.table[i].ks);
  CHECK(a.best.mu == doctest::Approx(0.2));
  CHECK(a.best.p == doctest::Approx(1.5));
  CHECK(a.best.phi == doctest::Approx(1.5));
  for (const GridPoint& g : a.table) CHECK(a.best_ks <= g.ks);

  GridSpec wider = small;
  wider.mu = {0.05, 0.4, 0.05};
  CHECK(grid_search(x, wider).best_ks <= a.best_ks);
}

TEST_CASE("grid ties go to smaller p, then mu, then phi") {
  // An all-zero sample scores 1 - exp(-lambda); every point with the same
  // lambda ties.
  const std::vector<double> zeros(10, 0.0);
  GridSpec g{{0.1, 0.2, 0.1}, {1.2, 1.6, 0.2}, {0.5, 1.5, 0.5}};
  const FitResult f = grid_search(zeros, g);
  double best = 1.0;
  for (const auto& pt : f.table) best = std::min(best, pt.ks);
  CHECK(f.best_ks == best);
  for (const auto& pt : f.table) {
    if (pt.ks == best) {
      const bool before = std::tie(pt.params.p, pt.params.mu, pt.params.phi) <
                          std::tie(f.best.p, f.best.mu, f.best.phi);
      CHECK_FALSE(before);
    }
  }
}

TEST_CASE("sample file parsing") {
  std::istringstream ok("# header\n0\n1.5\n\n2e-3\n");
  CHECK(read_sample(ok) == std::vector<double>{0, 1.5, 2e-3});
  std::istringstream neg("0.5\n0.2\n-1\n");
  try {
    read_sample(neg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::istringstream junk("0.5\nabc\n");
  CHECK_THROWS_AS(read_sample(junk), Error);
  std::istringstream empty("# only a comment\n");
  CHECK(code_of([&] { read_sample(empty); }) == ErrorCode::kEmptySample);
  CHECK_THROWS_AS(grid_search(std::vector<double>{}, GridSpec{}), Error);
}
