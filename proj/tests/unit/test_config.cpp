#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "tweedie/config.hpp"
#include "tweedie/error.hpp"

using namespace tweedie;
namespace fs = std::filesystem;

namespace {
fs::path write_temp(const std::string& name, const std::string& body) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream(p) << body;
  return p;
}
}  // namespace

TEST_CASE("config round trip") {
  ProtocolConfig c;
  c.world.n_users = 123;
  c.world.click_prob_law = {0.08, 0.01};
  c.train.learning_rate = 0.02;
  c.kinds = {loss::TweediePow{1.3}, loss::LogLoss{}};
  c.warm_start = true;
  const ProtocolConfig back = protocol_from_json(nlohmann::json::parse(to_json(c).dump()));
  CHECK(back.world.n_users == 123);
  CHECK(back.world.click_prob_law.mean == 0.08);
  CHECK(back.train.learning_rate == 0.02);
  CHECK(back.warm_start);
  REQUIRE(back.kinds.size() == 2);
  CHECK(std::get<loss::TweediePow>(back.kinds[0]).p == 1.3);
  CHECK(to_json(back).dump() == to_json(c).dump());
}

TEST_CASE("missing keys keep defaults") {
  const ProtocolConfig c = protocol_from_json(nlohmann::json::parse(R"({"n_runs": 4})"));
  CHECK(c.n_runs == 4);
  CHECK(c.total_days == 13);
  CHECK(c.world.n_titles == 1000);
  CHECK(c.kinds.size() == 4);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(protocol_from_json(nlohmann::json::parse(R"({"n_rums": 4})")), Error);
  CHECK_THROWS_AS(protocol_from_json(nlohmann::json::parse(R"({"world": {"n_users": "x"}})")),
                  Error);
  CHECK_THROWS_AS(protocol_from_json(nlohmann::json::parse(R"({"kinds": ["hinge"]})")), Error);

  try {
    load_protocol_config("/nonexistent/dir/cfg.json");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfigParseError);
    CHECK(std::string(e.what()).find("/nonexistent/dir/cfg.json") != std::string::npos);
  }
  const fs::path broken = write_temp("tweedie_broken.json", "{ not json");
  CHECK_THROWS_AS(load_protocol_config(broken), Error);
  const fs::path invalid = write_temp("tweedie_invalid.json", R"({"total_days": 2})");
  try {
    load_protocol_config(invalid);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidConfig);
  }
}

TEST_CASE("kind lists") {
  const auto kinds = parse_kind_list("tweedie,logloss,weighted,mse", 1.7);
  REQUIRE(kinds.size() == 4);
  CHECK(std::get<loss::TweediePow>(kinds[0]).p == 1.7);
  CHECK(kind_spec(kinds[0]) == "tweedie:1.7");
  CHECK(kind_spec(kinds[1]) == "logloss");
  CHECK(std::get<loss::TweediePow>(parse_kind_list("tweedie:1.2", 1.5)[0]).p == 1.2);
  CHECK_THROWS_AS(parse_kind_list("", 1.5), Error);
  CHECK_THROWS_AS(parse_kind_list("tweedie,foo", 1.5), Error);
}
