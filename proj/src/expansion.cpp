#include "popsicle/expansion.hpp"

#include <algorithm>

#include "popsicle/errors.hpp"
#include "popsicle/spe_analysis.hpp"

namespace popsicle {

std::set<InfoSetId> ExpandedGame::commitment_sets() const {
  std::set<InfoSetId> sets;
  for (const CommitmentNodeInfo& info : commitment_nodes) {
    sets.insert(tree.node(info.node).info_set);
  }
  return sets;
}

const CommitmentNodeInfo* ExpandedGame::info_for(NodeId node) const {
  for (const CommitmentNodeInfo& info : commitment_nodes) {
    if (info.node == node) return &info;
  }
  return nullptr;
}

ExpandedGame wrap_unexpanded(GameTree tree) {
  ExpandedGame game;
  game.tree = std::move(tree);
  return game;
}

namespace {

// Copies `src` into `builder`, remapping info sets through `set_map` (ids are
// allocated on first sight from `next_set`) and recording node positions.
NodeId copy_renumbered(const GameTree& src, NodeId at, GameBuilder& builder,
                       std::map<InfoSetId, InfoSetId>& set_map, InfoSetId& next_set,
                       std::vector<NodeId>& node_map) {
  const Node& n = src.node(at);
  if (n.is_leaf()) {
    NodeId id = builder.add_leaf(n.utilities);
    node_map[static_cast<size_t>(at)] = id;
    return id;
  }
  std::vector<std::pair<ActionLabel, NodeId>> children;
  children.reserve(n.actions.size());
  for (size_t i = 0; i < n.actions.size(); ++i) {
    children.emplace_back(n.actions[i],
                          copy_renumbered(src, n.children[i], builder, set_map, next_set, node_map));
  }
  auto [it, inserted] = set_map.try_emplace(n.info_set, next_set);
  if (inserted) ++next_set;
  NodeId id = builder.add_decision(n.owner, it->second, std::move(children));
  node_map[static_cast<size_t>(at)] = id;
  return id;
}

std::map<InfoSetId, std::vector<ActionLabel>> relabel_kept(
    const std::map<InfoSetId, std::vector<ActionLabel>>& kept,
    const std::map<InfoSetId, InfoSetId>& set_map) {
  std::map<InfoSetId, std::vector<ActionLabel>> out;
  for (const auto& [set_id, actions] : kept) {
    auto it = set_map.find(set_id);
    if (it == set_map.end()) continue;  // the set vanished with a pruned branch
    out[it->second] = actions;
  }
  return out;
}

}  // namespace

ExpandedGame expand_with_cuts(const ExpandedGame& inner, PlayerId player,
                              const std::vector<LabelledCut>& cuts,
                              const CommitmentBudget& budget) {
  if (cuts.empty()) throw StructureError("expansion needs at least one cut");

  GameBuilder builder;
  InfoSetId next_set = 1;  // 0 is the fresh commitment node's set

  ExpandedGame out;
  out.ordering.push_back(player);
  for (PlayerId p : inner.ordering) out.ordering.push_back(p);

  CommitmentNodeInfo root_info;
  root_info.player = player;

  std::vector<std::pair<ActionLabel, NodeId>> branches;
  int64_t node_count = 1;
  for (size_t b = 0; b < cuts.size(); ++b) {
    const auto& [label, cut] = cuts[b];
    if (cut.owner != player) {
      throw StructureError("commitment branch '" + label + "' carries a cut for player " +
                           std::to_string(cut.owner) + ", expected " + std::to_string(player));
    }
    std::vector<NodeId> cut_map;
    GameTree branch = apply_cut_with_map(inner.tree, cut, cut_map);
    node_count += static_cast<int64_t>(branch.node_count());
    if (node_count > budget.max_nodes) {
      throw BudgetExceededError("expanded tree exceeds node budget of " +
                                std::to_string(budget.max_nodes) + " nodes");
    }
    std::map<InfoSetId, InfoSetId> set_map;
    std::vector<NodeId> copy_map(branch.node_count(), -1);
    NodeId branch_root = copy_renumbered(branch, branch.root(), builder, set_map, next_set, copy_map);
    branches.emplace_back(static_cast<ActionLabel>(b), branch_root);

    CutDescriptor descriptor;
    descriptor.label = label;
    descriptor.kept = relabel_kept(cut.kept, set_map);
    root_info.cuts.push_back(std::move(descriptor));
    root_info.relabel.push_back(set_map);

    // Carry over the inner tree's commitment nodes, one copy per branch.
    for (const CommitmentNodeInfo& old_info : inner.commitment_nodes) {
      NodeId through_cut = cut_map[static_cast<size_t>(old_info.node)];
      if (through_cut < 0) continue;
      CommitmentNodeInfo copy;
      copy.node = copy_map[static_cast<size_t>(through_cut)];
      copy.player = old_info.player;
      for (const CutDescriptor& d : old_info.cuts) {
        copy.cuts.push_back(CutDescriptor{d.label, relabel_kept(d.kept, set_map)});
      }
      copy.relabel.resize(copy.cuts.size());
      out.commitment_nodes.push_back(std::move(copy));
    }
  }

  NodeId root = builder.add_decision(player, 0, std::move(branches));
  root_info.node = root;
  out.commitment_nodes.insert(out.commitment_nodes.begin(), std::move(root_info));
  out.tree = builder.build(inner.tree.player_count(), root);
  return out;
}

ExpandedGame expand(const GameTree& tree, PlayerId player, const CommitmentBudget& budget) {
  std::vector<Cut> cuts = enumerate_cuts(tree, player, budget);
  std::vector<LabelledCut> labelled;
  labelled.reserve(cuts.size());
  for (const Cut& cut : cuts) {
    labelled.emplace_back("cut" + cut_to_string(cut), cut);
  }
  return expand_with_cuts(wrap_unexpanded(tree), player, labelled, budget);
}

Cut constant_price_cut(const GameTree& tree, PlayerId vendor, int price_index) {
  Cut cut;
  cut.owner = vendor;
  for (const auto& [set_id, decl] : tree.info_sets()) {
    if (decl.owner != vendor) continue;
    const Node& sample = tree.node(tree.members(set_id).front());
    if (sample.action_index(price_index) < 0) {
      throw StructureError("constant-price commitment: price index " +
                           std::to_string(price_index) + " unavailable at set " +
                           std::to_string(set_id));
    }
    cut.kept[set_id] = {static_cast<ActionLabel>(price_index)};
  }
  return cut;
}

Cut buyer_pledge_cut(const GameTree& tree, const PopsicleParams& params,
                     const BuyerAction& action) {
  ActionLabel label = encode_buyer_action(params, action);
  Cut cut;
  cut.owner = kBuyer;
  for (const auto& [set_id, decl] : tree.info_sets()) {
    if (decl.owner != kBuyer) continue;
    const Node& sample = tree.node(tree.members(set_id).front());
    if (sample.action_index(label) < 0) {
      throw StructureError("pledge commitment: buyer action unavailable at set " +
                           std::to_string(set_id));
    }
    cut.kept[set_id] = {label};
  }
  return cut;
}

std::string price_label(const Rational& price) { return "price=" + rational_to_string(price); }

std::string pledge_label(const BuyerAction& action) {
  return "pledge(" + std::to_string(action.vendor) + "," + rational_to_string(action.payment) +
         ")";
}

CommitmentSchema default_schema(const PopsicleParams& params) {
  CommitmentSchema schema;
  for (int vendor = 1; vendor <= params.vendor_count; ++vendor) {
    std::vector<SchemaEntry> catalog;
    for (size_t pi = 0; pi < params.price_grid.size(); ++pi) {
      catalog.push_back(SchemaEntry{
          price_label(params.price_grid[pi]),
          [pi](const ExpandedGame& inner, PlayerId player) {
            return constant_price_cut(inner.tree, player, static_cast<int>(pi));
          }});
    }
    catalog.push_back(SchemaEntry{kIdentityLabel, [](const ExpandedGame& inner, PlayerId player) {
                                    return identity_cut(inner.tree, player);
                                  }});
    schema.catalogs[vendor] = std::move(catalog);
  }
  std::vector<SchemaEntry> buyer_catalog;
  for (ActionLabel label : all_buyer_action_labels(params)) {
    BuyerAction action = decode_buyer_action(params, label);
    buyer_catalog.push_back(
        SchemaEntry{pledge_label(action), [action, params](const ExpandedGame& inner, PlayerId) {
                      return buyer_pledge_cut(inner.tree, params, action);
                    }});
  }
  buyer_catalog.push_back(SchemaEntry{kIdentityLabel,
                                      [](const ExpandedGame& inner, PlayerId player) {
                                        return identity_cut(inner.tree, player);
                                      }});
  schema.catalogs[kBuyer] = std::move(buyer_catalog);
  return schema;
}

ExpandedGame expand_sequence(const GameTree& tree, const std::vector<PlayerId>& ordering,
                             const CommitmentBudget& budget, const CommitmentSchema* schema) {
  if (ordering.empty()) throw StructureError("expansion ordering is empty");
  std::set<PlayerId> seen;
  for (PlayerId p : ordering) {
    if (p < 0 || p >= tree.player_count()) {
      throw StructureError("ordering contains unknown player " + std::to_string(p));
    }
    if (!seen.insert(p).second) {
      throw StructureError("ordering repeats player " + std::to_string(p));
    }
  }

  ExpandedGame acc = wrap_unexpanded(tree);
  for (size_t level = ordering.size(); level-- > 0;) {
    PlayerId player = ordering[level];
    std::vector<LabelledCut> cuts;
    if (schema) {
      auto it = schema->catalogs.find(player);
      if (it == schema->catalogs.end()) {
        throw StructureError("schema has no catalog for player " + std::to_string(player));
      }
      for (const SchemaEntry& entry : it->second) {
        cuts.emplace_back(entry.label, entry.build(acc, player));
      }
    } else {
      BigInt total = count_cuts(acc.tree, player);
      if (total > budget.max_cuts_per_node) {
        throw BudgetExceededError("nesting level " + std::to_string(level) + " (player " +
                                  std::to_string(player) + "): cut count " + total.str() +
                                  " exceeds budget " +
                                  std::to_string(budget.max_cuts_per_node));
      }
      for (const Cut& cut : enumerate_cuts(acc.tree, player, budget)) {
        cuts.emplace_back("cut" + cut_to_string(cut), cut);
      }
    }
    acc = expand_with_cuts(acc, player, cuts, budget);
  }
  return acc;
}

std::set<Rational> committed_prices(const GameTree& subgame, PlayerId vendor,
                                    const PopsicleParams& params) {
  StageView view = recover_stage_view(subgame, subgame.root(), params);
  return stage_committed_prices(view, vendor);
}

Json expanded_game_to_json(const ExpandedGame& game) {
  std::map<NodeId, const CommitmentNodeInfo*> by_node;
  for (const CommitmentNodeInfo& info : game.commitment_nodes) by_node[info.node] = &info;

  NodeAnnotator node_hook = [&](NodeId id, Json& j) {
    auto it = by_node.find(id);
    if (it != by_node.end()) j["commitment_for"] = it->second->player;
  };
  EdgeAnnotator edge_hook = [&](NodeId id, size_t index, Json& j) {
    auto it = by_node.find(id);
    if (it == by_node.end()) return;
    const CutDescriptor& d = it->second->cuts[index];
    Json cut;
    cut["label"] = d.label;
    Json kept = Json::array();
    for (const auto& [set_id, actions] : d.kept) {
      Json entry;
      entry["info_set"] = set_id;
      entry["actions"] = actions;
      kept.push_back(std::move(entry));
    }
    cut["kept"] = std::move(kept);
    j["cut"] = std::move(cut);
  };

  Json j = game_to_json(game.tree, node_hook, edge_hook);
  j["ordering"] = game.ordering;
  return j;
}

namespace {

void collect_commitment_nodes(const GameTree& tree, const Json& node_json, NodeId* cursor,
                              std::vector<CommitmentNodeInfo>& out) {
  // Mirrors game_from_json's post-order node numbering.
  if (node_json.contains("utilities")) {
    ++*cursor;
    return;
  }
  for (const Json& edge : node_json.at("children")) {
    collect_commitment_nodes(tree, edge.at("node"), cursor, out);
  }
  NodeId self = (*cursor)++;
  if (!node_json.contains("commitment_for")) return;
  CommitmentNodeInfo info;
  info.node = self;
  info.player = node_json.at("commitment_for").get<PlayerId>();
  for (const Json& edge : node_json.at("children")) {
    CutDescriptor d;
    if (edge.contains("cut")) {
      d.label = edge.at("cut").at("label").get<std::string>();
      for (const Json& entry : edge.at("cut").at("kept")) {
        d.kept[entry.at("info_set").get<InfoSetId>()] =
            entry.at("actions").get<std::vector<ActionLabel>>();
      }
    }
    info.cuts.push_back(std::move(d));
  }
  info.relabel.resize(info.cuts.size());
  out.push_back(std::move(info));
}

}  // namespace

ExpandedGame expanded_game_from_json(const Json& j) {
  ExpandedGame game;
  game.tree = game_from_json(j);
  if (j.contains("ordering")) {
    game.ordering = j.at("ordering").get<std::vector<PlayerId>>();
  }
  NodeId cursor = 0;
  std::vector<CommitmentNodeInfo> infos;
  collect_commitment_nodes(game.tree, j.at("root"), &cursor, infos);
  // Root commitment node first (collection is post-order, parents last).
  std::sort(infos.begin(), infos.end(),
            [](const CommitmentNodeInfo& a, const CommitmentNodeInfo& b) { return a.node > b.node; });
  game.commitment_nodes = std::move(infos);
  return game;
}

}  // namespace popsicle
