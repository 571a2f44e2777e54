#pragma once

#include <functional>
#include <string>

#include <json.hpp>

#include "popsicle/game.hpp"

namespace popsicle {

// All emitters use nlohmann's ordered_json so field order (and therefore the
// serialized bytes) is stable across runs.
using Json = nlohmann::ordered_json;

// Optional per-node annotation hook, used by the expansion serializer to tag
// commitment nodes and cut descriptors.
using NodeAnnotator = std::function<void(NodeId, Json&)>;
// Per-edge hook: (parent, action index, edge object).
using EdgeAnnotator = std::function<void(NodeId, size_t, Json&)>;

Json game_to_json(const GameTree& tree, const NodeAnnotator& node_hook = nullptr,
                  const EdgeAnnotator& edge_hook = nullptr);
GameTree game_from_json(const Json& j);

Json profile_to_json(const StrategyProfile& profile);
StrategyProfile profile_from_json(const Json& j);

Json utilities_to_json(const UtilityVector& u);
UtilityVector utilities_from_json(const Json& j);

std::string dump_json(const Json& j);  // 2-space indent, trailing newline
Json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// RFC-4180 quoting: wraps the field when it contains a comma, quote or
// newline, doubling embedded quotes.
std::string csv_quote(const std::string& field);

}  // namespace popsicle
