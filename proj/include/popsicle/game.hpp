#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "popsicle/rational.hpp"

namespace popsicle {

// Player 0 is the buyer; vendors are 1..n.
using PlayerId = int;
using NodeId = int32_t;
using InfoSetId = int32_t;
using ActionLabel = int32_t;

inline constexpr PlayerId kBuyer = 0;

using UtilityVector = std::vector<Rational>;

struct Node {
  PlayerId owner = -1;  // -1 marks a leaf
  InfoSetId info_set = -1;
  std::vector<ActionLabel> actions;  // unique within the node
  std::vector<NodeId> children;      // parallel to `actions`
  UtilityVector utilities;           // leaves only, one entry per player

  bool is_leaf() const { return owner < 0; }
  int action_index(ActionLabel label) const;  // -1 when absent
};

struct InfoSetDecl {
  PlayerId owner = -1;
  int action_count = 0;
};

// Extensive-form game of imperfect information. Immutable once built; derived
// games (cuts, expansions) copy, they never mutate their input.
class GameTree {
 public:
  GameTree() = default;

  int player_count() const { return player_count_; }
  NodeId root() const { return root_; }
  const Node& node(NodeId id) const { return nodes_[static_cast<size_t>(id)]; }
  size_t node_count() const { return nodes_.size(); }
  const std::map<InfoSetId, InfoSetDecl>& info_sets() const { return info_sets_; }
  const std::vector<NodeId>& members(InfoSetId id) const;
  bool has_info_set(InfoSetId id) const { return info_sets_.count(id) != 0; }

  // Decision/leaf counts over the whole tree.
  size_t decision_count() const;
  size_t leaf_count() const;

 private:
  friend class GameBuilder;
  int player_count_ = 0;
  NodeId root_ = 0;
  std::vector<Node> nodes_;
  std::map<InfoSetId, InfoSetDecl> info_sets_;
  std::map<InfoSetId, std::vector<NodeId>> members_;
};

// Staging area for tree construction. Children must exist before their parent
// is added; build() checks the node set forms a tree rooted at `root`.
class GameBuilder {
 public:
  NodeId add_leaf(UtilityVector utilities);
  NodeId add_decision(PlayerId owner, InfoSetId info_set,
                      std::vector<std::pair<ActionLabel, NodeId>> children);
  GameTree build(int player_count, NodeId root);

 private:
  std::vector<Node> nodes_;
};

struct ValidationIssue {
  std::string code;    // stable identifier, e.g. "action-count-mismatch"
  std::string detail;  // human-readable context
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string summary() const;
};

// Structural invariant check: info-set owner/action-count consistency, no two
// info-set members on one root-to-leaf path, leaf utility arity, action-label
// uniqueness. Returns the violations instead of throwing.
ValidationReport validate_game(const GameTree& tree);

// Behavioral strategy profile: per information set, an exact distribution
// over that set's action labels.
class StrategyProfile {
 public:
  using Distribution = std::vector<std::pair<ActionLabel, Rational>>;

  void set_pure(InfoSetId set, ActionLabel action);
  void set_mixed(InfoSetId set, Distribution distribution);
  bool has(InfoSetId set) const { return choices_.count(set) != 0; }
  const Distribution& at(InfoSetId set) const;
  // Pure action at `set`; throws StructureError if missing or mixed.
  ActionLabel pure_action(InfoSetId set) const;
  const std::map<InfoSetId, Distribution>& choices() const { return choices_; }

  bool operator==(const StrategyProfile& other) const = default;

 private:
  std::map<InfoSetId, Distribution> choices_;
};

// Throws StructureError when a distribution does not sum to 1, has negative
// weight, or puts weight on an unavailable action.
void validate_profile(const GameTree& tree, const StrategyProfile& profile);

// Follows the profile's pure choices from the root and returns the reached
// leaf's utilities. Throws if a reached information set has no assignment.
UtilityVector play(const GameTree& tree, const StrategyProfile& profile);

// Exact expected utilities over the leaf distribution the profile induces.
// Coincides with play() on pure profiles.
UtilityVector expected_utility(const GameTree& tree, const StrategyProfile& profile);

// Nodes whose subtree does not split any information set, in preorder.
// Leaves are (trivial) subgames.
std::vector<NodeId> list_subgames(const GameTree& tree);

// Extracts the subtree rooted at `at` as a standalone game. Information-set
// ids and action labels are preserved; member lists are recomputed.
GameTree subgame_at(const GameTree& tree, NodeId at);

std::string to_string(const UtilityVector& u);

}  // namespace popsicle
