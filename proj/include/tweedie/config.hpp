#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "tweedie/experiment.hpp"

namespace tweedie {

/// JSON form of ProtocolConfig. Keys mirror the struct fields; nested
/// objects "world" and "train"; laws as {"mean": .., "sd": ..}; kinds as
/// names ("tweedie", "logloss", "weighted", "mse"), where "tweedie:1.3"
/// overrides the power and plain "tweedie" takes "tweedie_p" (default 1.5).
/// Missing keys keep their defaults; unknown keys are rejected.
nlohmann::ordered_json to_json(const ProtocolConfig& config);
ProtocolConfig protocol_from_json(const nlohmann::json& json);

/// Throws kConfigParseError naming the path when the file is missing or
/// malformed, and kInvalidConfig when values violate invariants.
ProtocolConfig load_protocol_config(const std::filesystem::path& path);

/// Parses a comma-separated kinds list such as "tweedie,logloss".
std::vector<LossKind> parse_kind_list(const std::string& list, double p);

std::string kind_spec(const LossKind& kind);

}  // namespace tweedie
