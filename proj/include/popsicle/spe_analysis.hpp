#pragma once

#include <set>

#include "popsicle/popsicle_game.hpp"

namespace popsicle {

// Exact equilibrium analysis of a pricing stage (a StageView).
//
// Search scope: pure vendor price vectors, buyer policies whose support at
// every node lies in that node's best-response set (for the subgame-perfect
// eq_concept) or is unrestricted off-path (plain Nash), with an arbitrary exact
// mixture allowed at the on-path node. Vendor mixtures are out of scope.
//
// A price vector p is supportable iff there is such a buyer policy under
// which no vendor has a strictly profitable unilateral price change. Because
// distinct unilateral deviations reach distinct buyer nodes, the policy can
// block each deviation independently; the binding quantity per vendor j is
//
//   t_j = max over alternative prices p_j' of
//         min over allowed buyer actions at (p_j', p_-j) of j's payout,
//
// and p is supportable iff some on-path mixture over best responses gives
// every vendor j at least t_j. That feasibility, and the set of utility
// vectors the mixtures can realize, is solved in closed form below: vendor j
// needs mass at least t_j / c on its best-paying best response (payout c),
// and spare mass is absorbed by zero-payout actions.
struct StageRecord {
  std::vector<int> price_indices;           // per vendor, into the price grid
  std::vector<Rational> prices;
  Rational buyer_value;                     // u0; identical for every best response
  std::vector<ActionLabel> br_labels;       // on-path best responses, ascending
  std::vector<Rational> thresholds;         // t_j, index 0 = vendor 1
  std::vector<Rational> min_mass;           // minimum on-path weight toward vendor j
  std::vector<Rational> max_vendor_utility; // max feasible expected payout per vendor
  StrategyProfile::Distribution canonical_distribution;  // a feasible on-path mixture
  UtilityVector canonical_utilities;
};

enum class EquilibriumConcept { kNash, kSubgamePerfect };

struct StageAnalysis {
  EquilibriumConcept eq_concept = EquilibriumConcept::kSubgamePerfect;
  std::vector<StageRecord> records;  // supportable vectors, odometer order
};

StageAnalysis analyze_stage(const StageView& view, EquilibriumConcept eq_concept);

// Whether some feasible on-path mixture of `record` realizes exactly `target`.
bool record_achieves(const StageView& view, const StageRecord& record,
                     const UtilityVector& target);
bool analysis_achieves(const StageView& view, const StageAnalysis& analysis,
                       const UtilityVector& target);

// Prices v such that fixing vendor's price to v extends to a supportable
// subgame-perfect outcome of the stage.
std::set<Rational> stage_committed_prices(const StageView& view, int vendor);

// Full supporting policy for a record: canonical mixture on path, the
// blocking (pessimal) choice at unilateral-deviation nodes, first best
// response elsewhere.
PopsicleProfile materialize_record(const StageView& view, const StageRecord& record,
                                   EquilibriumConcept eq_concept);

}  // namespace popsicle
