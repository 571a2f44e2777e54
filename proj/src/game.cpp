#include "popsicle/game.hpp"

#include <algorithm>
#include <set>

#include "popsicle/errors.hpp"

namespace popsicle {

int Node::action_index(ActionLabel label) const {
  for (size_t i = 0; i < actions.size(); ++i) {
    if (actions[i] == label) return static_cast<int>(i);
  }
  return -1;
}

const std::vector<NodeId>& GameTree::members(InfoSetId id) const {
  auto it = members_.find(id);
  if (it == members_.end()) {
    throw StructureError("unknown information set " + std::to_string(id));
  }
  return it->second;
}

size_t GameTree::decision_count() const {
  size_t k = 0;
  for (const Node& n : nodes_) k += n.is_leaf() ? 0 : 1;
  return k;
}

size_t GameTree::leaf_count() const { return nodes_.size() - decision_count(); }

NodeId GameBuilder::add_leaf(UtilityVector utilities) {
  Node n;
  n.utilities = std::move(utilities);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId GameBuilder::add_decision(PlayerId owner, InfoSetId info_set,
                                 std::vector<std::pair<ActionLabel, NodeId>> children) {
  if (owner < 0) throw StructureError("decision node owner must be >= 0");
  if (children.empty()) throw StructureError("decision node must have >= 1 action");
  Node n;
  n.owner = owner;
  n.info_set = info_set;
  for (auto& [label, child] : children) {
    if (child < 0 || static_cast<size_t>(child) >= nodes_.size()) {
      throw StructureError("child node does not exist yet");
    }
    if (n.action_index(label) >= 0) {
      throw StructureError("duplicate action label " + std::to_string(label));
    }
    n.actions.push_back(label);
    n.children.push_back(child);
  }
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

GameTree GameBuilder::build(int player_count, NodeId root) {
  if (player_count <= 0) throw StructureError("player count must be positive");
  if (root < 0 || static_cast<size_t>(root) >= nodes_.size()) {
    throw StructureError("root node does not exist");
  }
  // Every node must be referenced exactly once (tree shape).
  std::vector<int> indegree(nodes_.size(), 0);
  for (const Node& n : nodes_) {
    for (NodeId c : n.children) indegree[static_cast<size_t>(c)]++;
  }
  for (size_t i = 0; i < nodes_.size(); ++i) {
    int expected = (static_cast<NodeId>(i) == root) ? 0 : 1;
    if (indegree[i] != expected) {
      throw StructureError("node " + std::to_string(i) +
                           " is referenced " + std::to_string(indegree[i]) +
                           " times; the node set must form a tree");
    }
  }
  GameTree tree;
  tree.player_count_ = player_count;
  tree.root_ = root;
  tree.nodes_ = std::move(nodes_);
  for (size_t i = 0; i < tree.nodes_.size(); ++i) {
    const Node& n = tree.nodes_[i];
    if (n.is_leaf()) continue;
    auto [it, inserted] = tree.info_sets_.try_emplace(
        n.info_set, InfoSetDecl{n.owner, static_cast<int>(n.actions.size())});
    (void)inserted;
    tree.members_[n.info_set].push_back(static_cast<NodeId>(i));
  }
  return tree;
}

std::string ValidationReport::summary() const {
  if (ok()) return "pass";
  std::string s = "fail:";
  for (const auto& issue : issues) s += " [" + issue.code + "] " + issue.detail + ";";
  return s;
}

namespace {

// Euler-tour intervals: subtree(v) == [tin[v], tout[v]).
void euler_tour(const GameTree& tree, std::vector<int>& tin, std::vector<int>& tout,
                std::vector<NodeId>& preorder) {
  tin.assign(tree.node_count(), 0);
  tout.assign(tree.node_count(), 0);
  preorder.clear();
  int clock = 0;
  // Iterative DFS preserving child order.
  std::vector<std::pair<NodeId, size_t>> stack;
  stack.emplace_back(tree.root(), 0);
  tin[static_cast<size_t>(tree.root())] = clock++;
  preorder.push_back(tree.root());
  while (!stack.empty()) {
    auto& [id, next] = stack.back();
    const Node& n = tree.node(id);
    if (next < n.children.size()) {
      NodeId c = n.children[next++];
      tin[static_cast<size_t>(c)] = clock++;
      preorder.push_back(c);
      stack.emplace_back(c, 0);
    } else {
      tout[static_cast<size_t>(id)] = clock;
      stack.pop_back();
    }
  }
}

}  // namespace

ValidationReport validate_game(const GameTree& tree) {
  ValidationReport report;
  auto add = [&](const std::string& code, const std::string& detail) {
    report.issues.push_back({code, detail});
  };

  for (size_t i = 0; i < tree.node_count(); ++i) {
    const Node& n = tree.node(static_cast<NodeId>(i));
    if (n.is_leaf()) {
      if (static_cast<int>(n.utilities.size()) != tree.player_count()) {
        add("utility-arity", "leaf " + std::to_string(i) + " has " +
                                 std::to_string(n.utilities.size()) + " utilities, expected " +
                                 std::to_string(tree.player_count()));
      }
      continue;
    }
    if (n.actions.empty()) {
      add("empty-action-set", "decision node " + std::to_string(i));
    }
    std::set<ActionLabel> seen(n.actions.begin(), n.actions.end());
    if (seen.size() != n.actions.size()) {
      add("duplicate-action-label", "decision node " + std::to_string(i));
    }
    if (n.owner >= tree.player_count()) {
      add("owner-out-of-range", "node " + std::to_string(i) + " owner " +
                                    std::to_string(n.owner));
    }
  }

  for (const auto& [set_id, decl] : tree.info_sets()) {
    const auto& members = tree.members(set_id);
    for (NodeId m : members) {
      const Node& n = tree.node(m);
      if (n.owner != decl.owner) {
        add("info-set-owner-mismatch",
            "set " + std::to_string(set_id) + " node " + std::to_string(m));
      }
      if (static_cast<int>(n.actions.size()) != decl.action_count) {
        add("action-count-mismatch",
            "set " + std::to_string(set_id) + ": node " + std::to_string(m) + " has " +
                std::to_string(n.actions.size()) + " actions, set declares " +
                std::to_string(decl.action_count));
      }
    }
  }

  std::vector<int> tin, tout;
  std::vector<NodeId> preorder;
  euler_tour(tree, tin, tout, preorder);
  for (const auto& [set_id, decl] : tree.info_sets()) {
    (void)decl;
    const auto& members = tree.members(set_id);
    for (size_t a = 0; a < members.size(); ++a) {
      for (size_t b = a + 1; b < members.size(); ++b) {
        NodeId x = members[a], y = members[b];
        bool x_anc = tin[x] <= tin[y] && tout[y] <= tout[x];
        bool y_anc = tin[y] <= tin[x] && tout[x] <= tout[y];
        if (x_anc || y_anc) {
          add("same-path-membership", "set " + std::to_string(set_id) + " nodes " +
                                          std::to_string(x) + ", " + std::to_string(y));
        }
      }
    }
  }
  return report;
}

void StrategyProfile::set_pure(InfoSetId set, ActionLabel action) {
  choices_[set] = {{action, Rational(1)}};
}

void StrategyProfile::set_mixed(InfoSetId set, Distribution distribution) {
  choices_[set] = std::move(distribution);
}

const StrategyProfile::Distribution& StrategyProfile::at(InfoSetId set) const {
  auto it = choices_.find(set);
  if (it == choices_.end()) {
    throw StructureError("no assignment for information set " + std::to_string(set));
  }
  return it->second;
}

ActionLabel StrategyProfile::pure_action(InfoSetId set) const {
  const Distribution& d = at(set);
  for (const auto& [label, p] : d) {
    if (p == 1) return label;
    if (p != 0) {
      throw StructureError("information set " + std::to_string(set) +
                           " has a mixed assignment where a pure one is required");
    }
  }
  throw StructureError("information set " + std::to_string(set) +
                       " has an empty distribution");
}

void validate_profile(const GameTree& tree, const StrategyProfile& profile) {
  for (const auto& [set_id, dist] : profile.choices()) {
    if (!tree.has_info_set(set_id)) continue;  // assignments outside the game are inert
    Rational total = 0;
    std::set<ActionLabel> seen;
    const Node& sample = tree.node(tree.members(set_id).front());
    for (const auto& [label, p] : dist) {
      if (p < 0) throw StructureError("negative probability in set " + std::to_string(set_id));
      if (!seen.insert(label).second) {
        throw StructureError("duplicate action in distribution for set " +
                             std::to_string(set_id));
      }
      if (sample.action_index(label) < 0) {
        throw StructureError("distribution for set " + std::to_string(set_id) +
                             " puts weight on unavailable action " + std::to_string(label));
      }
      total += p;
    }
    if (total != 1) {
      throw StructureError("distribution for set " + std::to_string(set_id) +
                           " sums to " + rational_to_string(total));
    }
  }
}

UtilityVector play(const GameTree& tree, const StrategyProfile& profile) {
  NodeId at = tree.root();
  while (true) {
    const Node& n = tree.node(at);
    if (n.is_leaf()) return n.utilities;
    ActionLabel chosen = profile.pure_action(n.info_set);
    int idx = n.action_index(chosen);
    if (idx < 0) {
      throw StructureError("profile picks unavailable action " + std::to_string(chosen) +
                           " at information set " + std::to_string(n.info_set));
    }
    at = n.children[static_cast<size_t>(idx)];
  }
}

namespace {

void accumulate_expected(const GameTree& tree, const StrategyProfile& profile, NodeId at,
                         const Rational& weight, UtilityVector& acc) {
  const Node& n = tree.node(at);
  if (n.is_leaf()) {
    for (size_t i = 0; i < acc.size(); ++i) acc[i] += weight * n.utilities[i];
    return;
  }
  const auto& dist = profile.at(n.info_set);
  for (const auto& [label, p] : dist) {
    if (p == 0) continue;
    int idx = n.action_index(label);
    if (idx < 0) {
      throw StructureError("profile picks unavailable action " + std::to_string(label) +
                           " at information set " + std::to_string(n.info_set));
    }
    accumulate_expected(tree, profile, n.children[static_cast<size_t>(idx)], weight * p, acc);
  }
}

}  // namespace

UtilityVector expected_utility(const GameTree& tree, const StrategyProfile& profile) {
  UtilityVector acc(static_cast<size_t>(tree.player_count()), Rational(0));
  accumulate_expected(tree, profile, tree.root(), Rational(1), acc);
  return acc;
}

std::vector<NodeId> list_subgames(const GameTree& tree) {
  std::vector<int> tin, tout;
  std::vector<NodeId> preorder;
  euler_tour(tree, tin, tout, preorder);

  // Only sets with >= 2 members can be split.
  std::vector<std::pair<InfoSetId, std::vector<int>>> multi;  // sorted member tins
  for (const auto& [set_id, decl] : tree.info_sets()) {
    (void)decl;
    const auto& members = tree.members(set_id);
    if (members.size() < 2) continue;
    std::vector<int> tins;
    tins.reserve(members.size());
    for (NodeId m : members) tins.push_back(tin[m]);
    std::sort(tins.begin(), tins.end());
    multi.emplace_back(set_id, std::move(tins));
  }

  std::vector<NodeId> result;
  for (NodeId v : preorder) {
    bool ok = true;
    for (const auto& [set_id, tins] : multi) {
      (void)set_id;
      auto lo = std::lower_bound(tins.begin(), tins.end(), tin[v]);
      auto hi = std::lower_bound(tins.begin(), tins.end(), tout[v]);
      size_t inside = static_cast<size_t>(hi - lo);
      if (inside != 0 && inside != tins.size()) {
        ok = false;
        break;
      }
    }
    if (ok) result.push_back(v);
  }
  return result;
}

GameTree subgame_at(const GameTree& tree, NodeId at) {
  GameBuilder builder;
  // Post-order copy so children exist before parents.
  struct Frame {
    NodeId id;
    size_t next = 0;
    std::vector<NodeId> copied;
  };
  std::vector<Frame> stack;
  stack.push_back({at});
  NodeId new_root = -1;
  while (!stack.empty()) {
    Frame& f = stack.back();
    const Node& n = tree.node(f.id);
    if (!n.is_leaf() && f.next < n.children.size()) {
      stack.push_back({n.children[f.next++]});
      continue;
    }
    NodeId copied;
    if (n.is_leaf()) {
      copied = builder.add_leaf(n.utilities);
    } else {
      std::vector<std::pair<ActionLabel, NodeId>> children;
      for (size_t i = 0; i < n.actions.size(); ++i) {
        children.emplace_back(n.actions[i], f.copied[i]);
      }
      copied = builder.add_decision(n.owner, n.info_set, std::move(children));
    }
    stack.pop_back();
    if (stack.empty()) {
      new_root = copied;
    } else {
      stack.back().copied.push_back(copied);
    }
  }
  return builder.build(tree.player_count(), new_root);
}

std::string to_string(const UtilityVector& u) {
  std::string s = "(";
  for (size_t i = 0; i < u.size(); ++i) {
    if (i) s += ", ";
    s += rational_to_string(u[i]);
  }
  s += ")";
  return s;
}

}  // namespace popsicle
