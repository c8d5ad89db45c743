#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "tweedie/random.hpp"

namespace tweedie {

struct NormalLaw {
  double mean = 0.0;
  double sd = 0.0;
};

/// Generator hyperparameters of the synthetic user-title world. The law
/// parameters are simulation defaults, not measured quantities.
struct WorldConfig {
  std::size_t n_users = 10000;
  std::size_t n_titles = 1000;
  NormalLaw click_prob_law{0.05, 0.02};
  NormalLaw intention_law{0.5, 0.15};
  NormalLaw intender_fraction_law{0.9, 0.05};
  NormalLaw non_intender_fraction_law{0.2, 0.1};
  NormalLaw duration_law{6000.0, 1800.0};
  double stop_prob = 0.1;
  /// Watch seconds are divided by this to form regression targets.
  double watch_scale = 3600.0;
  std::uint64_t master_seed = 0;

  void validate() const;
};

inline constexpr double kMinProbability = 0.001;
inline constexpr double kMaxProbability = 0.999;
inline constexpr double kMinDurationSeconds = 600.0;
inline constexpr double kMinWatchFraction = 0.01;

struct TitleProfile {
  std::uint32_t title_id = 0;
  double click_prob = 0.0;
  double completion_intention_prob = 0.0;
  double duration_seconds = 0.0;
};

struct World {
  WorldConfig config;
  std::vector<TitleProfile> titles;

  std::size_t n_titles() const { return titles.size(); }
};

struct SessionEvent {
  std::uint32_t user_id = 0;
  std::uint32_t day = 0;
  std::uint32_t position = 0;
  std::uint32_t title_id = 0;
  bool clicked = false;
  double watch_seconds = 0.0;

  bool operator==(const SessionEvent&) const = default;
};

/// One profile per title, each drawn from its own stream keyed by
/// (master_seed, title_id).
World generate_world(const WorldConfig& config);

/// Throws kInvalidRanking unless `ranking` is a permutation of the catalog.
void check_ranking(const World& world, std::span<const std::uint32_t> ranking);

/// One user's scroll through `ranking`. The user examines positions from 0;
/// a click draws a latent intention, a watch fraction from the matching law,
/// and ends the session; a non-click abandons with stop_prob. Does not
/// re-check the ranking.
void simulate_session(std::uint32_t user_id, std::uint32_t day,
                      std::span<const std::uint32_t> ranking,
                      const World& world, Stream& stream,
                      std::vector<SessionEvent>& out);
std::vector<SessionEvent> simulate_session(
    std::uint32_t user_id, std::uint32_t day,
    std::span<const std::uint32_t> ranking, const World& world, Stream& stream);

/// Stream for one (user, day) session under `seed`.
Stream session_stream(std::uint64_t seed, std::uint32_t day,
                      std::uint32_t user_id);

/// Every user's session for `day`, all served the same ranking. Events are
/// ordered by user_id then position.
std::vector<SessionEvent> simulate_day(std::span<const std::uint32_t> ranking,
                                       const World& world, std::uint32_t day,
                                       std::uint64_t seed);

/// Seeded pseudo-random permutation standing in for a human-edited list.
std::vector<std::uint32_t> editorial_ranking(const World& world,
                                             std::uint32_t day,
                                             std::uint64_t seed);

/// day,user_id,position,title_id,clicked,watch_seconds with a leading
/// "# master_seed=<seed>" comment line.
void write_event_log(std::ostream& out, std::span<const SessionEvent> events,
                     std::uint64_t master_seed);

}  // namespace tweedie
