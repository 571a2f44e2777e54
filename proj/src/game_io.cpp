#include "popsicle/game_io.hpp"

#include <fstream>

#include "popsicle/errors.hpp"

namespace popsicle {

namespace {

Json node_to_json(const GameTree& tree, NodeId id, const NodeAnnotator& node_hook,
                  const EdgeAnnotator& edge_hook) {
  const Node& n = tree.node(id);
  Json j;
  if (n.is_leaf()) {
    j["utilities"] = utilities_to_json(n.utilities);
  } else {
    j["owner"] = n.owner;
    j["info_set"] = n.info_set;
    if (node_hook) node_hook(id, j);
    Json children = Json::array();
    for (size_t i = 0; i < n.actions.size(); ++i) {
      Json edge;
      edge["action"] = n.actions[i];
      if (edge_hook) edge_hook(id, i, edge);
      edge["node"] = node_to_json(tree, n.children[i], node_hook, edge_hook);
      children.push_back(std::move(edge));
    }
    j["children"] = std::move(children);
  }
  return j;
}

NodeId node_from_json(const Json& j, GameBuilder& builder) {
  if (j.contains("utilities")) {
    return builder.add_leaf(utilities_from_json(j.at("utilities")));
  }
  std::vector<std::pair<ActionLabel, NodeId>> children;
  for (const Json& edge : j.at("children")) {
    NodeId child = node_from_json(edge.at("node"), builder);
    children.emplace_back(edge.at("action").get<ActionLabel>(), child);
  }
  return builder.add_decision(j.at("owner").get<PlayerId>(),
                              j.at("info_set").get<InfoSetId>(), std::move(children));
}

}  // namespace

Json game_to_json(const GameTree& tree, const NodeAnnotator& node_hook,
                  const EdgeAnnotator& edge_hook) {
  Json j;
  j["players"] = tree.player_count();
  Json sets = Json::array();
  for (const auto& [id, decl] : tree.info_sets()) {
    Json s;
    s["id"] = id;
    s["owner"] = decl.owner;
    s["action_count"] = decl.action_count;
    sets.push_back(std::move(s));
  }
  j["info_sets"] = std::move(sets);
  j["root"] = node_to_json(tree, tree.root(), node_hook, edge_hook);
  return j;
}

GameTree game_from_json(const Json& j) {
  GameBuilder builder;
  NodeId root = node_from_json(j.at("root"), builder);
  GameTree tree = builder.build(j.at("players").get<int>(), root);
  // Cross-check declared info sets against the reconstructed tree.
  if (j.contains("info_sets")) {
    for (const Json& s : j.at("info_sets")) {
      InfoSetId id = s.at("id").get<InfoSetId>();
      if (!tree.has_info_set(id)) {
        throw StructureError("game file declares info set " + std::to_string(id) +
                             " that no node references");
      }
      const InfoSetDecl& decl = tree.info_sets().at(id);
      if (decl.owner != s.at("owner").get<PlayerId>() ||
          decl.action_count != s.at("action_count").get<int>()) {
        throw StructureError("game file info set " + std::to_string(id) +
                             " disagrees with the node structure");
      }
    }
  }
  return tree;
}

Json profile_to_json(const StrategyProfile& profile) {
  Json j;
  Json choices = Json::array();
  for (const auto& [set_id, dist] : profile.choices()) {
    Json entry;
    entry["info_set"] = set_id;
    Json d = Json::array();
    for (const auto& [label, p] : dist) {
      Json cell;
      cell["action"] = label;
      cell["prob"] = rational_to_string(p);
      d.push_back(std::move(cell));
    }
    entry["distribution"] = std::move(d);
    choices.push_back(std::move(entry));
  }
  j["choices"] = std::move(choices);
  return j;
}

StrategyProfile profile_from_json(const Json& j) {
  StrategyProfile profile;
  for (const Json& entry : j.at("choices")) {
    StrategyProfile::Distribution dist;
    for (const Json& cell : entry.at("distribution")) {
      dist.emplace_back(cell.at("action").get<ActionLabel>(),
                        parse_rational(cell.at("prob").get<std::string>()));
    }
    profile.set_mixed(entry.at("info_set").get<InfoSetId>(), std::move(dist));
  }
  return profile;
}

Json utilities_to_json(const UtilityVector& u) {
  Json j = Json::array();
  for (const Rational& r : u) j.push_back(rational_to_string(r));
  return j;
}

UtilityVector utilities_from_json(const Json& j) {
  UtilityVector u;
  for (const Json& cell : j) u.push_back(parse_rational(cell.get<std::string>()));
  return u;
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GridError("cannot open file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw GridError("failed to parse " + path + ": " + e.what());
  }
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw GridError("cannot write file: " + path);
  out << content;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

}  // namespace popsicle
