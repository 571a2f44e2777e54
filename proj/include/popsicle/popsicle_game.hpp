#pragma once

#include <map>
#include <optional>
#include <vector>

#include "popsicle/game.hpp"
#include "popsicle/options.hpp"

namespace popsicle {

enum class DiscountMode { kMultiplicative, kLinear };

// Instance parameters for the discretized vendor/buyer pricing game.
//   - n vendors post prices from grid P simultaneously-in-sequence (vendor j's
//     nodes share one information set, so j cannot condition on earlier prices);
//   - the buyer observes all prices and picks a vendor plus an optional side
//     payment from grid Q.
struct PopsicleParams {
  int vendor_count = 2;                 // n >= 2
  Rational discount = 1;                // d in [0,1]
  Rational tax = 0;                     // alpha in [0,1)
  std::vector<Rational> price_grid;     // sorted, unique, subset of [0,1], contains 0 and 1
  std::vector<Rational> payment_grid;   // sorted, unique, subset of [0,1], contains 0
  DiscountMode mode = DiscountMode::kMultiplicative;
  Rational kappa = 0;                   // linear mode decay slope, > 0
  bool side_payments = true;

  int player_count() const { return vendor_count + 1; }
  void validate() const;  // throws GridError

  int price_index(const Rational& p) const;    // -1 when off-grid
  int payment_index(const Rational& q) const;  // -1 when off-grid
};

struct BuyerAction {
  int vendor = 1;       // 1..n
  Rational payment = 0; // q, in Q (0 when side payments are disabled)
  bool operator==(const BuyerAction&) const = default;
};

// Action labelling shared by the builder, cuts and contracts:
//   vendor node: label = index into price_grid;
//   buyer node:  label = (vendor-1)*|Q| + q_index, or vendor-1 without side payments.
ActionLabel encode_buyer_action(const PopsicleParams& params, const BuyerAction& action);
BuyerAction decode_buyer_action(const PopsicleParams& params, ActionLabel label);
std::vector<ActionLabel> all_buyer_action_labels(const PopsicleParams& params);

// Information-set ids in the built tree: vendor j owns set j; buyer nodes get
// singleton sets n+1+flatten(price indices), price index of vendor 1 varying
// slowest.
InfoSetId buyer_info_set_id(const PopsicleParams& params, const std::vector<int>& price_indices);

GameTree build_popsicle(const PopsicleParams& params, int64_t node_budget = -1);

// One-shot outcome arithmetic (the leaf formulas).
Rational buyer_outcome_value(const PopsicleParams& params, const std::vector<Rational>& prices,
                             const BuyerAction& action);
UtilityVector outcome_utilities(const PopsicleParams& params, const std::vector<Rational>& prices,
                                const BuyerAction& action);

// Pure vendor prices plus a buyer policy mapping observed price vectors
// (as grid-index vectors) to distributions over encoded buyer actions.
struct PopsicleProfile {
  std::vector<Rational> prices;
  std::map<std::vector<int>, StrategyProfile::Distribution> buyer_policy;
};

// Closed-form expected utilities; agrees exactly with
// expected_utility(build_popsicle(params), to_strategy_profile(...)).
UtilityVector evaluate_profile(const PopsicleParams& params, const PopsicleProfile& profile);

// Exact argmax set of the buyer's value over available actions, in
// (vendor, payment) ascending order. With d > 0 every maximizer has q = 0;
// with d = 0 later vendors are worthless and indifference can include q > 0.
std::vector<BuyerAction> buyer_best_response(const PopsicleParams& params,
                                             const std::vector<Rational>& prices);

// Canonical subgame-perfect profile. d = 1: all prices 0, buyer uniform over
// the best-response set everywhere. d < 1: p1 = 1-d (must be on the grid),
// p2 = 0, remaining prices 1, buyer plays the first best response everywhere.
// Multiplicative mode only.
PopsicleProfile vanilla_equilibrium(const PopsicleParams& params);

// Converts to a per-information-set behavioral profile for the built tree.
StrategyProfile to_strategy_profile(const PopsicleParams& params, const PopsicleProfile& profile);

// A (possibly action-restricted) copy of the pricing stage, recovered from a
// subtree of a cut or expanded game, or synthesized from params. This is the
// input shape for the stage equilibrium analysis and for committed-price
// classification.
struct StageBuyerNode {
  InfoSetId info_set = -1;
  std::vector<ActionLabel> labels;  // available buyer actions, ascending
};

struct StageView {
  PopsicleParams params;
  std::vector<InfoSetId> vendor_sets;           // per vendor 1..n
  std::vector<std::vector<int>> vendor_prices;  // per vendor: available price indices
  std::map<std::vector<int>, StageBuyerNode> buyer_nodes;  // keyed by price indices
};

StageView stage_view_from_params(const PopsicleParams& params);

// Walks the subtree rooted at `at`, checks it is a stage copy consistent with
// `params` (owner order, label ranges, leaf formulas) and returns the view.
// Throws StructureError when the subtree is not popsicle-shaped.
StageView recover_stage_view(const GameTree& tree, NodeId at, const PopsicleParams& params);

}  // namespace popsicle
