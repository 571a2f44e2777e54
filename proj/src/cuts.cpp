#include "popsicle/cuts.hpp"

#include <algorithm>

#include "popsicle/errors.hpp"

namespace popsicle {

Cut identity_cut(const GameTree& tree, PlayerId owner) {
  Cut cut;
  cut.owner = owner;
  for (const auto& [set_id, decl] : tree.info_sets()) {
    if (decl.owner != owner) continue;
    const Node& sample = tree.node(tree.members(set_id).front());
    cut.kept[set_id] = sample.actions;
  }
  return cut;
}

void validate_cut(const GameTree& tree, const Cut& cut) {
  if (cut.owner < 0 || cut.owner >= tree.player_count()) {
    throw StructureError("cut owner out of range");
  }
  for (const auto& [set_id, kept] : cut.kept) {
    if (!tree.has_info_set(set_id)) {
      throw StructureError("cut references unknown information set " + std::to_string(set_id));
    }
    const InfoSetDecl& decl = tree.info_sets().at(set_id);
    if (decl.owner != cut.owner) {
      throw StructureError("cut restricts information set " + std::to_string(set_id) +
                           " owned by player " + std::to_string(decl.owner));
    }
    if (kept.empty()) {
      throw StructureError("cut keeps no action at information set " + std::to_string(set_id));
    }
    const Node& sample = tree.node(tree.members(set_id).front());
    for (ActionLabel label : kept) {
      if (sample.action_index(label) < 0) {
        throw StructureError("cut keeps unavailable action " + std::to_string(label) +
                             " at information set " + std::to_string(set_id));
      }
    }
  }
}

BigInt count_cuts(const GameTree& tree, PlayerId player) {
  BigInt total = 1;
  for (const auto& [set_id, decl] : tree.info_sets()) {
    (void)set_id;
    if (decl.owner != player) continue;
    total *= (BigInt(1) << decl.action_count) - 1;
  }
  return total;
}

std::vector<Cut> enumerate_cuts(const GameTree& tree, PlayerId player,
                                const CommitmentBudget& budget) {
  BigInt total = count_cuts(tree, player);
  if (total > budget.max_cuts_per_node) {
    throw BudgetExceededError("cut count for player " + std::to_string(player) + " is " +
                              total.str() + ", budget is " +
                              std::to_string(budget.max_cuts_per_node));
  }

  std::vector<InfoSetId> sets;
  std::vector<std::vector<ActionLabel>> actions;
  for (const auto& [set_id, decl] : tree.info_sets()) {
    if (decl.owner != player) continue;
    sets.push_back(set_id);
    actions.push_back(tree.node(tree.members(set_id).front()).actions);
  }

  std::vector<Cut> cuts;
  cuts.reserve(static_cast<size_t>(total));
  std::vector<uint32_t> masks(sets.size(), 1);
  while (true) {
    Cut cut;
    cut.owner = player;
    for (size_t i = 0; i < sets.size(); ++i) {
      std::vector<ActionLabel> kept;
      for (size_t bit = 0; bit < actions[i].size(); ++bit) {
        if (masks[i] & (1u << bit)) kept.push_back(actions[i][bit]);
      }
      cut.kept[sets[i]] = std::move(kept);
    }
    cuts.push_back(std::move(cut));
    if (sets.empty()) break;
    // Odometer: last set varies fastest, masks run 1 .. 2^k-1.
    size_t i = sets.size();
    while (i > 0) {
      --i;
      uint32_t full = (1u << actions[i].size()) - 1;
      if (masks[i] < full) {
        masks[i]++;
        break;
      }
      masks[i] = 1;
      if (i == 0) return cuts;
    }
  }
  return cuts;
}

namespace {

struct CopyResult {
  NodeId root;
};

NodeId copy_with_cut(const GameTree& tree, NodeId at, const Cut& cut, GameBuilder& builder,
                     std::vector<NodeId>& node_map) {
  const Node& n = tree.node(at);
  if (n.is_leaf()) {
    NodeId id = builder.add_leaf(n.utilities);
    node_map[static_cast<size_t>(at)] = id;
    return id;
  }
  const std::vector<ActionLabel>* kept = nullptr;
  if (n.owner == cut.owner) {
    auto it = cut.kept.find(n.info_set);
    if (it != cut.kept.end()) kept = &it->second;
  }
  std::vector<std::pair<ActionLabel, NodeId>> children;
  for (size_t i = 0; i < n.actions.size(); ++i) {
    if (kept && std::find(kept->begin(), kept->end(), n.actions[i]) == kept->end()) continue;
    children.emplace_back(n.actions[i],
                          copy_with_cut(tree, n.children[i], cut, builder, node_map));
  }
  NodeId id = builder.add_decision(n.owner, n.info_set, std::move(children));
  node_map[static_cast<size_t>(at)] = id;
  return id;
}

}  // namespace

GameTree apply_cut_with_map(const GameTree& tree, const Cut& cut, std::vector<NodeId>& node_map) {
  validate_cut(tree, cut);
  node_map.assign(tree.node_count(), -1);
  GameBuilder builder;
  NodeId root = copy_with_cut(tree, tree.root(), cut, builder, node_map);
  return builder.build(tree.player_count(), root);
}

GameTree apply_cut(const GameTree& tree, const Cut& cut) {
  std::vector<NodeId> node_map;
  return apply_cut_with_map(tree, cut, node_map);
}

std::string cut_to_string(const Cut& cut) {
  std::string s = "{";
  bool first = true;
  for (const auto& [set_id, kept] : cut.kept) {
    if (!first) s += ",";
    first = false;
    s += std::to_string(set_id) + ":[";
    for (size_t i = 0; i < kept.size(); ++i) {
      if (i) s += " ";
      s += std::to_string(kept[i]);
    }
    s += "]";
  }
  s += "}";
  return s;
}

}  // namespace popsicle
