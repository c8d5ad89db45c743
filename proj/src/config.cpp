#include "tweedie/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "tweedie/error.hpp"

namespace tweedie {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json law_json(const NormalLaw& law) {
  return {{"mean", law.mean}, {"sd", law.sd}};
}

void reject_unknown(const json& obj, std::initializer_list<const char*> keys,
                    const std::string& where) {
  if (!obj.is_object()) {
    throw Error(ErrorCode::kConfigParseError, where + " must be an object");
  }
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw Error(ErrorCode::kConfigParseError,
                  "unknown key '" + key + "' in " + where);
    }
  }
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigParseError,
                where + "." + key + ": " + e.what());
  }
}

void read_law(const json& obj, const char* key, NormalLaw& law,
              const std::string& where) {
  if (!obj.contains(key)) return;
  const std::string path = where + "." + key;
  reject_unknown(obj.at(key), {"mean", "sd"}, path);
  read(obj.at(key), "mean", law.mean, path);
  read(obj.at(key), "sd", law.sd, path);
}

LossKind parse_kind_spec(const std::string& spec, double default_p) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) return parse_kind(spec, default_p);
  const std::string name = spec.substr(0, colon);
  double p = 0.0;
  try {
    std::size_t used = 0;
    p = std::stod(spec.substr(colon + 1), &used);
    if (used != spec.size() - colon - 1) throw std::invalid_argument(spec);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidConfig, "bad kind spec '" + spec + "'");
  }
  if (name != "tweedie") {
    throw Error(ErrorCode::kInvalidConfig,
                "only tweedie takes a power suffix: '" + spec + "'");
  }
  return parse_kind(name, p);
}

}  // namespace

std::string kind_spec(const LossKind& kind) {
  if (const auto* t = std::get_if<loss::TweediePow>(&kind)) {
    std::ostringstream s;
    s << "tweedie:" << t->p;
    return s.str();
  }
  return kind_name(kind);
}

std::vector<LossKind> parse_kind_list(const std::string& list, double p) {
  std::vector<LossKind> kinds;
  std::stringstream stream(list);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) kinds.push_back(parse_kind_spec(item, p));
  }
  if (kinds.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "kinds list is empty");
  }
  return kinds;
}

ordered_json to_json(const ProtocolConfig& c) {
  const WorldConfig& w = c.world;
  ordered_json kinds = ordered_json::array();
  for (const LossKind& k : c.kinds) kinds.push_back(kind_spec(k));
  return {
      {"editorial_days", c.editorial_days},
      {"total_days", c.total_days},
      {"n_runs", c.n_runs},
      {"warm_start", c.warm_start},
      {"kinds", kinds},
      {"world",
       {{"n_users", w.n_users},
        {"n_titles", w.n_titles},
        {"click_prob_law", law_json(w.click_prob_law)},
        {"intention_law", law_json(w.intention_law)},
        {"intender_fraction_law", law_json(w.intender_fraction_law)},
        {"non_intender_fraction_law", law_json(w.non_intender_fraction_law)},
        {"duration_law", law_json(w.duration_law)},
        {"stop_prob", w.stop_prob},
        {"watch_scale", w.watch_scale},
        {"master_seed", w.master_seed}}},
      {"train",
       {{"learning_rate", c.train.learning_rate},
        {"epochs", c.train.epochs},
        {"batch_size", c.train.batch_size},
        {"shuffle_seed", c.train.shuffle_seed}}},
  };
}

ProtocolConfig protocol_from_json(const json& j) {
  ProtocolConfig c;
  reject_unknown(j,
                 {"editorial_days", "total_days", "n_runs", "warm_start",
                  "kinds", "tweedie_p", "world", "train"},
                 "config");
  read(j, "editorial_days", c.editorial_days, "config");
  read(j, "total_days", c.total_days, "config");
  read(j, "n_runs", c.n_runs, "config");
  read(j, "warm_start", c.warm_start, "config");
  double tweedie_p = 1.5;
  read(j, "tweedie_p", tweedie_p, "config");
  if (j.contains("kinds")) {
    std::vector<std::string> names;
    read(j, "kinds", names, "config");
    c.kinds.clear();
    for (const auto& name : names) c.kinds.push_back(parse_kind_spec(name, tweedie_p));
  } else if (j.contains("tweedie_p")) {
    for (LossKind& k : c.kinds) {
      if (std::holds_alternative<loss::TweediePow>(k)) k = parse_kind("tweedie", tweedie_p);
    }
  }
  if (j.contains("world")) {
    const json& w = j.at("world");
    const std::string where = "config.world";
    reject_unknown(w,
                   {"n_users", "n_titles", "click_prob_law", "intention_law",
                    "intender_fraction_law", "non_intender_fraction_law",
                    "duration_law", "stop_prob", "watch_scale", "master_seed"},
                   where);
    read(w, "n_users", c.world.n_users, where);
    read(w, "n_titles", c.world.n_titles, where);
    read_law(w, "click_prob_law", c.world.click_prob_law, where);
    read_law(w, "intention_law", c.world.intention_law, where);
    read_law(w, "intender_fraction_law", c.world.intender_fraction_law, where);
    read_law(w, "non_intender_fraction_law", c.world.non_intender_fraction_law,
             where);
    read_law(w, "duration_law", c.world.duration_law, where);
    read(w, "stop_prob", c.world.stop_prob, where);
    read(w, "watch_scale", c.world.watch_scale, where);
    read(w, "master_seed", c.world.master_seed, where);
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    const std::string where = "config.train";
    reject_unknown(t, {"learning_rate", "epochs", "batch_size", "shuffle_seed"},
                   where);
    read(t, "learning_rate", c.train.learning_rate, where);
    read(t, "epochs", c.train.epochs, where);
    read(t, "batch_size", c.train.batch_size, where);
    read(t, "shuffle_seed", c.train.shuffle_seed, where);
  }
  return c;
}

ProtocolConfig load_protocol_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kConfigParseError,
                "cannot open config file '" + path.string() + "'");
  }
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigParseError,
                "'" + path.string() + "': " + e.what());
  }
  try {
    ProtocolConfig config = protocol_from_json(j);
    config.validate();
    return config;
  } catch (const Error& e) {
    throw Error(e.code(), "'" + path.string() + "': " + e.message());
  }
}

}  // namespace tweedie
