#pragma once

#include <map>
#include <vector>

#include "popsicle/game.hpp"
#include "popsicle/options.hpp"

namespace popsicle {

// A restriction of one player's actions, uniform across each information set
// and leaving at least one action everywhere. Sets the owner does not own are
// untouched; owned sets missing from `kept` keep all actions.
struct Cut {
  PlayerId owner = -1;
  std::map<InfoSetId, std::vector<ActionLabel>> kept;  // nonempty ascending subsets

  bool operator==(const Cut&) const = default;
};

Cut identity_cut(const GameTree& tree, PlayerId owner);

// Throws StructureError when `cut` does not fit `tree` (unknown set, foreign
// owner, empty or unavailable kept actions).
void validate_cut(const GameTree& tree, const Cut& cut);

// Number of cuts for `player`: product of (2^k - 1) over owned information
// sets with k actions. Exact, unbounded.
BigInt count_cuts(const GameTree& tree, PlayerId player);

// All cuts in a fixed deterministic order: information sets ascending by id,
// kept subsets by ascending bitmask over the action list, last set varying
// fastest. Throws BudgetExceededError (naming the product) when the count
// exceeds budget.max_cuts_per_node.
std::vector<Cut> enumerate_cuts(const GameTree& tree, PlayerId player,
                                const CommitmentBudget& budget);

// The subtree with removed actions deleted. The result passes validate_game;
// an identity cut returns a structurally equal tree.
GameTree apply_cut(const GameTree& tree, const Cut& cut);

// As apply_cut, also reporting where each surviving node went (-1 = pruned).
GameTree apply_cut_with_map(const GameTree& tree, const Cut& cut,
                            std::vector<NodeId>& node_map);

std::string cut_to_string(const Cut& cut);

}  // namespace popsicle
