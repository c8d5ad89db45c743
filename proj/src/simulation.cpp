#include "tweedie/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "tweedie/error.hpp"

namespace tweedie {
namespace {

void check_law(const NormalLaw& law, const char* name) {
  if (!std::isfinite(law.mean) || !std::isfinite(law.sd) || law.sd < 0.0) {
    throw Error(ErrorCode::kInvalidConfig,
                std::string(name) + " needs a finite mean and sd >= 0");
  }
}

double clip_probability(double v) {
  return std::clamp(v, kMinProbability, kMaxProbability);
}

}  // namespace

void WorldConfig::validate() const {
  if (n_users < 1 || n_titles < 1) {
    throw Error(ErrorCode::kInvalidConfig, "n_users and n_titles must be >= 1");
  }
  if (n_titles > std::numeric_limits<std::uint32_t>::max() ||
      n_users > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::kInvalidConfig, "counts exceed 32-bit id range");
  }
  check_law(click_prob_law, "click_prob_law");
  check_law(intention_law, "intention_law");
  check_law(intender_fraction_law, "intender_fraction_law");
  check_law(non_intender_fraction_law, "non_intender_fraction_law");
  check_law(duration_law, "duration_law");
  if (!(stop_prob > 0.0 && stop_prob <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "stop_prob must lie in (0, 1]");
  }
  if (!(watch_scale > 0.0) || !std::isfinite(watch_scale)) {
    throw Error(ErrorCode::kInvalidConfig, "watch_scale must be > 0");
  }
}

World generate_world(const WorldConfig& config) {
  config.validate();
  World world{config, {}};
  world.titles.reserve(config.n_titles);
  for (std::uint32_t id = 0; id < config.n_titles; ++id) {
    Stream stream = Stream::derive(config.master_seed, "world.title", {id});
    TitleProfile t;
    t.title_id = id;
    t.click_prob = clip_probability(
        stream.normal(config.click_prob_law.mean, config.click_prob_law.sd));
    t.completion_intention_prob = clip_probability(
        stream.normal(config.intention_law.mean, config.intention_law.sd));
    t.duration_seconds = std::max(
        kMinDurationSeconds,
        stream.normal(config.duration_law.mean, config.duration_law.sd));
    world.titles.push_back(t);
  }
  return world;
}

void check_ranking(const World& world, std::span<const std::uint32_t> ranking) {
  const std::size_t n = world.n_titles();
  if (ranking.size() != n) {
    throw Error(ErrorCode::kInvalidRanking,
                "ranking has " + std::to_string(ranking.size()) +
                    " entries for a catalog of " + std::to_string(n));
  }
  std::vector<bool> seen(n, false);
  for (std::uint32_t id : ranking) {
    if (id >= n || seen[id]) {
      throw Error(ErrorCode::kInvalidRanking,
                  "ranking is not a permutation (title " + std::to_string(id) +
                      ")");
    }
    seen[id] = true;
  }
}

void simulate_session(std::uint32_t user_id, std::uint32_t day,
                      std::span<const std::uint32_t> ranking,
                      const World& world, Stream& stream,
                      std::vector<SessionEvent>& out) {
  const WorldConfig& cfg = world.config;
  for (std::uint32_t pos = 0; pos < ranking.size(); ++pos) {
    const TitleProfile& title = world.titles[ranking[pos]];
    SessionEvent event{user_id, day, pos, title.title_id, false, 0.0};
    if (stream.bernoulli(title.click_prob)) {
      const bool intends = stream.bernoulli(title.completion_intention_prob);
      const NormalLaw& law = intends ? cfg.intender_fraction_law
                                     : cfg.non_intender_fraction_law;
      const double fraction =
          std::clamp(stream.normal(law.mean, law.sd), kMinWatchFraction, 1.0);
      event.clicked = true;
      event.watch_seconds = title.duration_seconds * fraction;
      out.push_back(event);
      return;
    }
    out.push_back(event);
    if (stream.bernoulli(cfg.stop_prob)) return;
  }
}

std::vector<SessionEvent> simulate_session(
    std::uint32_t user_id, std::uint32_t day,
    std::span<const std::uint32_t> ranking, const World& world, Stream& stream) {
  check_ranking(world, ranking);
  std::vector<SessionEvent> events;
  simulate_session(user_id, day, ranking, world, stream, events);
  return events;
}

Stream session_stream(std::uint64_t seed, std::uint32_t day,
                      std::uint32_t user_id) {
  return Stream::derive(seed, "session", {day, user_id});
}

std::vector<SessionEvent> simulate_day(std::span<const std::uint32_t> ranking,
                                       const World& world, std::uint32_t day,
                                       std::uint64_t seed) {
  check_ranking(world, ranking);
  std::vector<SessionEvent> events;
  events.reserve(world.config.n_users * 8);
  for (std::uint32_t user = 0; user < world.config.n_users; ++user) {
    Stream stream = session_stream(seed, day, user);
    simulate_session(user, day, ranking, world, stream, events);
  }
  return events;
}

std::vector<std::uint32_t> editorial_ranking(const World& world,
                                             std::uint32_t day,
                                             std::uint64_t seed) {
  std::vector<std::uint32_t> order(world.n_titles());
  std::iota(order.begin(), order.end(), 0U);
  Stream stream = Stream::derive(seed, "editorial", {day});
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[stream.below(i)]);
  }
  return order;
}

void write_event_log(std::ostream& out, std::span<const SessionEvent> events,
                     std::uint64_t master_seed) {
  out << "# master_seed=" << master_seed << '\n';
  out << "day,user_id,position,title_id,clicked,watch_seconds\n";
  out.precision(std::numeric_limits<double>::max_digits10);
  for (const SessionEvent& e : events) {
    out << e.day << ',' << e.user_id << ',' << e.position << ',' << e.title_id
        << ',' << (e.clicked ? 1 : 0) << ',' << e.watch_seconds << '\n';
  }
}

}  // namespace tweedie
