#pragma once

#include <functional>
#include <set>
#include <string>

#include "popsicle/cuts.hpp"
#include "popsicle/game_io.hpp"
#include "popsicle/popsicle_game.hpp"

namespace popsicle {

struct CutDescriptor {
  std::string label;                                   // e.g. "price=1/2", "identity"
  std::map<InfoSetId, std::vector<ActionLabel>> kept;  // in the expanded tree's ids
};

struct CommitmentNodeInfo {
  NodeId node = -1;
  PlayerId player = -1;
  std::vector<CutDescriptor> cuts;  // parallel to the node's actions
  // For the outermost expansion level only: per branch, inner-tree info-set id
  // to branch id. Inner levels carry empty maps after they get duplicated.
  std::vector<std::map<InfoSetId, InfoSetId>> relabel;
};

// A game tree with commitment moves: each commitment node's children enumerate
// the owner's cuts of the subgame below it. Information sets are renumbered
// per branch, so play after different commitments is never pooled.
struct ExpandedGame {
  GameTree tree;
  std::vector<PlayerId> ordering;  // outermost commitment first; empty = no expansion
  std::vector<CommitmentNodeInfo> commitment_nodes;  // root commitment node first

  std::set<InfoSetId> commitment_sets() const;
  const CommitmentNodeInfo* info_for(NodeId node) const;
};

ExpandedGame wrap_unexpanded(GameTree tree);

// One labelled cut per commitment branch.
using LabelledCut = std::pair<std::string, Cut>;

// Core expansion step: new root owned by `player`, one child per cut applied
// to inner.tree, info sets renumbered branch by branch.
ExpandedGame expand_with_cuts(const ExpandedGame& inner, PlayerId player,
                              const std::vector<LabelledCut>& cuts,
                              const CommitmentBudget& budget);

// Exhaustive expansion: every cut of `tree` for `player`, in enumerate_cuts order.
ExpandedGame expand(const GameTree& tree, PlayerId player, const CommitmentBudget& budget);

// Restricted commitment catalogs. Entries build their cut against the
// expansion assembled so far, so an entry can condition on inner commitments
// (that is how compiled contracts hook in).
struct SchemaEntry {
  std::string label;
  std::function<Cut(const ExpandedGame& inner, PlayerId player)> build;
};

struct CommitmentSchema {
  std::map<PlayerId, std::vector<SchemaEntry>> catalogs;
};

// Constant-price commitments (one per grid price) plus the identity for every
// vendor; pledge commitments (one per (vendor, payment)) plus the identity
// for the buyer.
CommitmentSchema default_schema(const PopsicleParams& params);

// Catalog entry labels shared by schema construction and profile builders.
inline constexpr const char* kIdentityLabel = "identity";
std::string price_label(const Rational& price);
std::string pledge_label(const BuyerAction& action);

Cut constant_price_cut(const GameTree& tree, PlayerId vendor, int price_index);
Cut buyer_pledge_cut(const GameTree& tree, const PopsicleParams& params, const BuyerAction& action);

// Nested expansion: the last player in `ordering` is expanded first
// (innermost), the first ends up at the root, so earlier players' cuts range
// over the whole previously expanded tree. With a schema, each commitment
// node's children come from the player's catalog instead of full enumeration.
ExpandedGame expand_sequence(const GameTree& tree, const std::vector<PlayerId>& ordering,
                             const CommitmentBudget& budget,
                             const CommitmentSchema* schema = nullptr);

// Prices v such that fixing the vendor's price to v extends to a supportable
// SPE of the stage `subgame` (which must be popsicle-shaped for `params`).
std::set<Rational> committed_prices(const GameTree& subgame, PlayerId vendor,
                                    const PopsicleParams& params);

// Serialization: the plain game format with commitment nodes annotated
// `commitment_for` and each child edge carrying its cut descriptor.
Json expanded_game_to_json(const ExpandedGame& game);
ExpandedGame expanded_game_from_json(const Json& j);

}  // namespace popsicle
