#pragma once

#include <optional>

#include "popsicle/expansion.hpp"
#include "popsicle/game.hpp"
#include "popsicle/game_io.hpp"
#include "popsicle/options.hpp"

namespace popsicle {

// Which unilateral deviations an equilibrium check quantifies over. Pure
// deviations suffice for verification: with exact arithmetic and finite
// games a profitable mixed deviation implies a profitable pure one.
//
//   kExhaustive     every pure strategy of the deviating player;
//   kRawActionsOnly every pure strategy agreeing with the profile at
//                   commitment information sets (base-game actions only);
//   kSchema         commitment choices restricted to the allowed catalog,
//                   free base-game actions below.
//
// Deviations are enumerated in reduced form: an information set the deviation
// itself cannot reach is left at the profile's choice, which never changes
// the deviator's payoff.
struct DeviationSpace {
  enum class Kind { kExhaustive, kRawActionsOnly, kSchema };
  Kind kind = Kind::kExhaustive;
  std::set<InfoSetId> commitment_sets;
  std::map<InfoSetId, std::vector<ActionLabel>> allowed;  // kSchema only

  std::string describe() const;

  static DeviationSpace exhaustive();
  static DeviationSpace raw_actions_only(const ExpandedGame& game);
  // Full catalog at every commitment node; pass `labels` to restrict the
  // catalog per player (entries named by their cut-descriptor labels).
  static DeviationSpace schema_catalog(
      const ExpandedGame& game,
      const std::map<PlayerId, std::vector<std::string>>* labels = nullptr);
};

struct DeviationWitness {
  PlayerId player = -1;
  std::map<InfoSetId, ActionLabel> strategy;  // overrides on the reached sets
  Rational gain;                              // strictly positive
  UtilityVector utilities;                    // under the deviation
};

struct EquilibriumReport {
  bool equilibrium = false;
  UtilityVector utilities;
  std::optional<DeviationWitness> witness;
  std::optional<NodeId> failing_subgame;  // subgame-perfection checks only
  std::string scope;
};

Json report_to_json(const EquilibriumReport& report);

// Verdict is positive iff no player has a strictly improving deviation inside
// `space`. The witness is deterministic: lowest player first, then the
// enumeration order of deviations (information sets in discovery order,
// actions ascending).
EquilibriumReport is_equilibrium(const GameTree& tree, const StrategyProfile& profile,
                                 const DeviationSpace& space, const SolverOptions& options = {});

// Positive iff is_equilibrium holds at every subgame root from list_subgames,
// with the profile restricted to that subgame.
EquilibriumReport is_subgame_perfect(const GameTree& tree, const StrategyProfile& profile,
                                     const DeviationSpace& space,
                                     const SolverOptions& options = {});

enum class TieRule { kKeepAll, kFirstIndex, kUniform };

// Perfect-information games only (throws StructureError otherwise).
// kKeepAll materializes every pure subgame-perfect profile; kFirstIndex picks
// the lexicographically first; kUniform returns one behavioral profile mixing
// uniformly over optimal actions at every node.
std::vector<StrategyProfile> solve_backward_induction(const GameTree& tree, TieRule tie_rule,
                                                      const SolverOptions& options = {});

struct EnumerationOptions {
  bool buyer_tie_mixtures = false;  // adds 50/50 two-point options at buyer sets
  PlayerId mixture_player = kBuyer;
  DeviationSpace space = DeviationSpace::exhaustive();
  SolverOptions solver;
};

// Tests every pure profile (optionally extended with two-point mixtures for
// one player) and returns those whose is_equilibrium verdict is positive,
// in enumeration order.
std::vector<std::pair<StrategyProfile, EquilibriumReport>> enumerate_equilibria(
    const GameTree& tree, const EnumerationOptions& options = {});

}  // namespace popsicle
