#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "tweedie/error.hpp"
#include "tweedie/simulation.hpp"

using namespace tweedie;

namespace {

struct ScrollExpectation {
  double examined = 0.0;
  double click = 0.0;
};

// Exact expectations of one session: the user reaches position k+1 only by
// not clicking and not abandoning at k.
ScrollExpectation expected_scroll(const World& w, const std::vector<std::uint32_t>& ranking) {
  ScrollExpectation e;
  double reach = 1.0;
  for (std::uint32_t id : ranking) {
    const double c = w.titles[id].click_prob;
    e.examined += reach;
    e.click += reach * c;
    reach *= (1.0 - c) * (1.0 - w.config.stop_prob);
  }
  return e;
}

std::vector<std::uint32_t> identity_ranking(std::size_t n) {
  std::vector<std::uint32_t> r(n);
  std::iota(r.begin(), r.end(), 0u);
  return r;
}

}  // namespace

TEST_CASE("degenerate laws give identical titles") {
  WorldConfig c;
  c.n_titles = 50;
  c.click_prob_law = {0.07, 0.0};
  c.intention_law = {0.4, 0.0};
  c.duration_law = {3000.0, 0.0};
  const World w = generate_world(c);
  REQUIRE(w.n_titles() == 50);
  for (const TitleProfile& t : w.titles) {
    CHECK(t.click_prob == 0.07);
    CHECK(t.completion_intention_prob == 0.4);
    CHECK(t.duration_seconds == 3000.0);
  }
}

TEST_CASE("default world click mean and clipping") {
  const World w = generate_world(WorldConfig{});
  REQUIRE(w.n_titles() == 1000);
  double sum = 0;
  for (const TitleProfile& t : w.titles) {
    sum += t.click_prob;
    CHECK(t.click_prob >= kMinProbability);
    CHECK(t.click_prob <= kMaxProbability);
    CHECK(t.completion_intention_prob >= kMinProbability);
    CHECK(t.completion_intention_prob <= kMaxProbability);
    CHECK(t.duration_seconds >= kMinDurationSeconds);
  }
  CHECK(std::abs(sum / 1000.0 - 0.05) < 3.0 * 0.02 / std::sqrt(1000.0));
}

TEST_CASE("world generation is deterministic") {
  WorldConfig c;
  c.n_titles = 100;
  c.master_seed = 77;
  const World a = generate_world(c);
  const World b = generate_world(c);
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(a.titles[i].click_prob == b.titles[i].click_prob);
    CHECK(a.titles[i].duration_seconds == b.titles[i].duration_seconds);
  }
  c.master_seed = 78;
  CHECK(generate_world(c).titles[0].click_prob != a.titles[0].click_prob);
}

TEST_CASE("invalid world configs") {
  WorldConfig c;
  c.n_users = 0;
  CHECK_THROWS_AS(generate_world(c), Error);
  c = WorldConfig{};
  c.stop_prob = 0.0;
  CHECK_THROWS_AS(generate_world(c), Error);
  c = WorldConfig{};
  c.duration_law.sd = -1;
  CHECK_THROWS_AS(generate_world(c), Error);
}

TEST_CASE("session examples") {
  WorldConfig c;
  c.n_titles = 5;
  c.click_prob_law = {0.0, 0.0};
  c.stop_prob = 1.0;
  World w = generate_world(c);
  for (auto& t : w.titles) t.click_prob = 0.0;
  const auto ranking = identity_ranking(5);
  Stream s = session_stream(1, 1, 0);
  auto events = simulate_session(0, 1, ranking, w, s);
  REQUIRE(events.size() == 1);
  CHECK(events[0].position == 0);
  CHECK_FALSE(events[0].clicked);

  w.titles[3].click_prob = 1.0;
  const std::vector<std::uint32_t> first3{3, 0, 1, 2, 4};
  events = simulate_session(0, 1, first3, w, s);
  REQUIRE(events.size() == 1);
  CHECK(events[0].clicked);
  CHECK(events[0].title_id == 3);
  CHECK(events[0].watch_seconds > 0.0);
}

TEST_CASE("examined positions follow the scroll law") {
  const World w = generate_world(WorldConfig{});
  const auto ranking = editorial_ranking(w, 1, 5);
  const ScrollExpectation e = expected_scroll(w, ranking);
  const int n = 100'000;
  double examined = 0;
  std::vector<SessionEvent> buf;
  for (int u = 0; u < n; ++u) {
    Stream s = session_stream(123, 1, static_cast<std::uint32_t>(u));
    buf.clear();
    simulate_session(static_cast<std::uint32_t>(u), 1, ranking, w, s, buf);
    examined += static_cast<double>(buf.size());
  }
  CHECK(std::abs(examined / n - e.examined) / e.examined < 0.02);

  // With a constant click probability this is the plain geometric mean.
  WorldConfig flat;
  flat.n_titles = 1000;
  flat.click_prob_law = {0.05, 0.0};
  const World wf = generate_world(flat);
  const double q = (1 - 0.05) * (1 - flat.stop_prob);
  CHECK(expected_scroll(wf, identity_ranking(1000)).examined ==
        doctest::Approx((1 - std::pow(q, 1000)) / (1 - q)));
}

TEST_CASE("daily clicks match the expected click rate") {
  const World w = generate_world(WorldConfig{});
  const auto ranking = editorial_ranking(w, 2, 9);
  const double pc = expected_scroll(w, ranking).click;
  const auto events = simulate_day(ranking, w, 2, 31);
  const double clicks = static_cast<double>(
      std::count_if(events.begin(), events.end(), [](const SessionEvent& e) { return e.clicked; }));
  const double n = static_cast<double>(w.config.n_users);
  CHECK(std::abs(clicks - n * pc) < 3.0 * std::sqrt(n * pc * (1 - pc)));
}

TEST_CASE("day simulation structure and invariants") {
  WorldConfig c;
  c.n_users = 1;
  c.n_titles = 40;
  World w = generate_world(c);
  const auto ranking = identity_ranking(40);
  auto one = simulate_day(ranking, w, 1, 4);
  CHECK_FALSE(one.empty());
  for (const auto& e : one) CHECK(e.user_id == 0);

  c.n_users = 2000;
  w = generate_world(c);
  const auto events = simulate_day(ranking, w, 3, 4);
  std::size_t i = 0;
  int sessions = 0;
  while (i < events.size()) {
    const std::uint32_t user = events[i].user_id;
    std::size_t j = i;
    std::uint32_t pos = 0;
    int clicks = 0;
    for (; j < events.size() && events[j].user_id == user; ++j) {
      const SessionEvent& e = events[j];
      CHECK(e.day == 3);
      CHECK(e.position == pos++);
      CHECK(e.title_id == ranking[e.position]);
      if (e.clicked) {
        ++clicks;
        CHECK(e.watch_seconds > 0.0);
        CHECK(e.watch_seconds <= w.titles[e.title_id].duration_seconds);
      } else {
        CHECK(e.watch_seconds == 0.0);
      }
    }
    CHECK(clicks <= 1);
    if (clicks == 1) CHECK(events[j - 1].clicked);
    ++sessions;
    i = j;
  }
  CHECK(sessions == 2000);
}

TEST_CASE("users are order independent") {
  WorldConfig c;
  c.n_users = 300;
  c.n_titles = 60;
  const World w = generate_world(c);
  const auto ranking = editorial_ranking(w, 1, 2);
  const auto forward = simulate_day(ranking, w, 5, 8);
  std::vector<SessionEvent> reversed;
  for (int u = static_cast<int>(c.n_users) - 1; u >= 0; --u) {
    Stream s = session_stream(8, 5, static_cast<std::uint32_t>(u));
    simulate_session(static_cast<std::uint32_t>(u), 5, ranking, w, s, reversed);
  }
  auto key = [](const SessionEvent& a, const SessionEvent& b) {
    return std::tie(a.user_id, a.position) < std::tie(b.user_id, b.position);
  };
  std::sort(reversed.begin(), reversed.end(), key);
  CHECK(forward == reversed);
  CHECK(simulate_day(ranking, w, 5, 8) == forward);
}

TEST_CASE("invalid rankings are rejected") {
  WorldConfig c;
  c.n_titles = 4;
  c.n_users = 3;
  const World w = generate_world(c);
  const std::vector<std::uint32_t> dup{0, 1, 1, 3};
  const std::vector<std::uint32_t> short_r{0, 1, 2};
  const std::vector<std::uint32_t> oob{0, 1, 2, 9};
  for (const auto& r : {dup, short_r, oob}) {
    CHECK_THROWS_AS(simulate_day(r, w, 1, 0), Error);
  }
}

TEST_CASE("editorial rankings") {
  WorldConfig c;
  c.n_titles = 200;
  const World w = generate_world(c);
  const auto a = editorial_ranking(w, 4, 10);
  CHECK(a == editorial_ranking(w, 4, 10));
  std::set<std::uint32_t> seen(a.begin(), a.end());
  CHECK(seen.size() == 200);
  CHECK(*seen.rbegin() == 199);
  int differing = 0;
  for (std::uint32_t d = 1; d <= 100; ++d) {
    differing += editorial_ranking(w, d, 10) != editorial_ranking(w, d + 100, 10);
  }
  CHECK(differing == 100);
}

TEST_CASE("event log format") {
  WorldConfig c;
  c.n_titles = 10;
  c.n_users = 3;
  const World w = generate_world(c);
  const auto events = simulate_day(identity_ranking(10), w, 1, 1);
  std::ostringstream out;
  write_event_log(out, events, 42);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "# master_seed=42");
  std::getline(in, line);
  CHECK(line == "day,user_id,position,title_id,clicked,watch_seconds");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 5);
  }
  CHECK(rows == events.size());
}
