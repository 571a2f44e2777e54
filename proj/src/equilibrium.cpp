#include "popsicle/equilibrium.hpp"

#include <algorithm>

#include "popsicle/errors.hpp"

namespace popsicle {

std::string DeviationSpace::describe() const {
  switch (kind) {
    case Kind::kExhaustive:
      return "exhaustive pure deviations";
    case Kind::kRawActionsOnly:
      return "raw-action deviations (commitment choices pinned)";
    case Kind::kSchema:
      return "schema-catalog commitment deviations plus raw actions";
  }
  return "?";
}

DeviationSpace DeviationSpace::exhaustive() { return DeviationSpace{}; }

DeviationSpace DeviationSpace::raw_actions_only(const ExpandedGame& game) {
  DeviationSpace space;
  space.kind = Kind::kRawActionsOnly;
  space.commitment_sets = game.commitment_sets();
  return space;
}

DeviationSpace DeviationSpace::schema_catalog(
    const ExpandedGame& game, const std::map<PlayerId, std::vector<std::string>>* labels) {
  DeviationSpace space;
  space.kind = Kind::kSchema;
  space.commitment_sets = game.commitment_sets();
  for (const CommitmentNodeInfo& info : game.commitment_nodes) {
    const Node& node = game.tree.node(info.node);
    std::vector<ActionLabel> allowed;
    for (size_t i = 0; i < node.actions.size(); ++i) {
      if (labels) {
        auto it = labels->find(info.player);
        const std::string& label = info.cuts[i].label;
        bool ok = it != labels->end() &&
                  std::find(it->second.begin(), it->second.end(), label) != it->second.end();
        if (!ok) continue;
      }
      allowed.push_back(node.actions[i]);
    }
    if (allowed.empty()) {
      throw StructureError("schema deviation space leaves no choice at commitment node " +
                           std::to_string(info.node));
    }
    space.allowed[node.info_set] = std::move(allowed);
  }
  return space;
}

namespace {

class DeviationScanner {
 public:
  DeviationScanner(const GameTree& tree, const StrategyProfile& profile,
                   const DeviationSpace& space, PlayerId player, const Rational& baseline,
                   int64_t* budget)
      : tree_(tree),
        profile_(profile),
        space_(space),
        player_(player),
        baseline_(baseline),
        budget_(budget) {}

  std::optional<DeviationWitness> scan() { return scan_rec(); }

 private:
  std::vector<ActionLabel> allowed_at(InfoSetId set) const {
    const Node& sample = tree_.node(tree_.members(set).front());
    if (space_.commitment_sets.count(set)) {
      if (space_.kind == DeviationSpace::Kind::kRawActionsOnly) {
        return {profile_.pure_action(set)};
      }
      if (space_.kind == DeviationSpace::Kind::kSchema) {
        return space_.allowed.at(set);
      }
    }
    return sample.actions;
  }

  // Evaluates the profile with the player's choices overridden by
  // `assignment_`. Stops at the first information set of the player that is
  // reached but unassigned, reporting it as the next choice point.
  void walk(NodeId at, const Rational& weight, UtilityVector& acc,
            std::optional<InfoSetId>& hole) const {
    if (hole) return;
    const Node& n = tree_.node(at);
    if (n.is_leaf()) {
      for (size_t i = 0; i < acc.size(); ++i) acc[i] += weight * n.utilities[i];
      return;
    }
    if (n.owner == player_) {
      auto it = assignment_.find(n.info_set);
      if (it == assignment_.end()) {
        hole = n.info_set;
        return;
      }
      int idx = n.action_index(it->second);
      if (idx < 0) {
        throw StructureError("deviation assigns an action unavailable at set " +
                             std::to_string(n.info_set));
      }
      walk(n.children[static_cast<size_t>(idx)], weight, acc, hole);
      return;
    }
    for (const auto& [label, p] : profile_.at(n.info_set)) {
      if (p == 0) continue;
      int idx = n.action_index(label);
      if (idx < 0) {
        throw StructureError("profile picks unavailable action at set " +
                             std::to_string(n.info_set));
      }
      walk(n.children[static_cast<size_t>(idx)], weight * p, acc, hole);
      if (hole) return;
    }
  }

  std::optional<DeviationWitness> scan_rec() {
    UtilityVector acc(static_cast<size_t>(tree_.player_count()), Rational(0));
    std::optional<InfoSetId> hole;
    walk(tree_.root(), Rational(1), acc, hole);
    if (hole) {
      InfoSetId set = *hole;
      for (ActionLabel a : allowed_at(set)) {
        assignment_[set] = a;
        if (auto witness = scan_rec()) return witness;
        assignment_.erase(set);
      }
      return std::nullopt;
    }
    if (--*budget_ < 0) {
      throw BudgetExceededError("deviation enumeration exceeded the solver budget");
    }
    if (acc[static_cast<size_t>(player_)] > baseline_) {
      DeviationWitness witness;
      witness.player = player_;
      witness.strategy = assignment_;
      witness.gain = acc[static_cast<size_t>(player_)] - baseline_;
      witness.utilities = std::move(acc);
      return witness;
    }
    return std::nullopt;
  }

  const GameTree& tree_;
  const StrategyProfile& profile_;
  const DeviationSpace& space_;
  PlayerId player_;
  Rational baseline_;
  int64_t* budget_;
  std::map<InfoSetId, ActionLabel> assignment_;
};

}  // namespace

EquilibriumReport is_equilibrium(const GameTree& tree, const StrategyProfile& profile,
                                 const DeviationSpace& space, const SolverOptions& options) {
  validate_profile(tree, profile);
  EquilibriumReport report;
  report.utilities = expected_utility(tree, profile);
  report.scope = space.describe();
  int64_t budget = options.max_enumeration;
  for (PlayerId player = 0; player < tree.player_count(); ++player) {
    DeviationScanner scanner(tree, profile, space, player,
                             report.utilities[static_cast<size_t>(player)], &budget);
    if (auto witness = scanner.scan()) {
      report.equilibrium = false;
      report.witness = std::move(witness);
      return report;
    }
  }
  report.equilibrium = true;
  return report;
}

EquilibriumReport is_subgame_perfect(const GameTree& tree, const StrategyProfile& profile,
                                     const DeviationSpace& space, const SolverOptions& options) {
  validate_profile(tree, profile);
  EquilibriumReport top;
  top.utilities = expected_utility(tree, profile);
  top.scope = space.describe() + ", every subgame";
  for (NodeId at : list_subgames(tree)) {
    if (tree.node(at).is_leaf()) continue;  // trivial subgame
    GameTree sub = subgame_at(tree, at);
    EquilibriumReport local = is_equilibrium(sub, profile, space, options);
    if (!local.equilibrium) {
      top.equilibrium = false;
      top.witness = std::move(local.witness);
      top.failing_subgame = at;
      return top;
    }
  }
  top.equilibrium = true;
  return top;
}

namespace {

struct Partial {
  StrategyProfile profile;
  UtilityVector value;
};

void merge_into(StrategyProfile& target, const StrategyProfile& source) {
  for (const auto& [set, dist] : source.choices()) target.set_mixed(set, dist);
}

std::vector<Partial> backward_induction_rec(const GameTree& tree, NodeId at, TieRule rule,
                                            int64_t* budget) {
  const Node& n = tree.node(at);
  if (n.is_leaf()) return {Partial{{}, n.utilities}};

  std::vector<std::vector<Partial>> child_solutions;
  child_solutions.reserve(n.children.size());
  for (NodeId child : n.children) {
    child_solutions.push_back(backward_induction_rec(tree, child, rule, budget));
  }

  std::vector<Partial> results;
  if (rule == TieRule::kKeepAll) {
    std::vector<size_t> pick(n.children.size(), 0);
    while (true) {
      Rational best;
      bool first = true;
      for (size_t i = 0; i < n.children.size(); ++i) {
        const Rational& v =
            child_solutions[i][pick[i]].value[static_cast<size_t>(n.owner)];
        if (first || v > best) {
          best = v;
          first = false;
        }
      }
      StrategyProfile merged;
      for (size_t i = 0; i < n.children.size(); ++i) {
        merge_into(merged, child_solutions[i][pick[i]].profile);
      }
      for (size_t i = 0; i < n.children.size(); ++i) {
        if (child_solutions[i][pick[i]].value[static_cast<size_t>(n.owner)] != best) continue;
        if (--*budget < 0) {
          throw BudgetExceededError("backward-induction profile set exceeded the solver budget");
        }
        Partial p;
        p.profile = merged;
        p.profile.set_pure(n.info_set, n.actions[i]);
        p.value = child_solutions[i][pick[i]].value;
        results.push_back(std::move(p));
      }
      size_t i = n.children.size();
      bool done = true;
      while (i > 0) {
        --i;
        if (pick[i] + 1 < child_solutions[i].size()) {
          pick[i]++;
          std::fill(pick.begin() + static_cast<long>(i) + 1, pick.end(), 0);
          done = false;
          break;
        }
      }
      if (done) break;
    }
    return results;
  }

  // Single-solution rules.
  Rational best;
  bool first = true;
  std::vector<size_t> best_children;
  for (size_t i = 0; i < n.children.size(); ++i) {
    const Rational& v = child_solutions[i][0].value[static_cast<size_t>(n.owner)];
    if (first || v > best) {
      best = v;
      best_children.assign(1, i);
      first = false;
    } else if (v == best) {
      best_children.push_back(i);
    }
  }
  Partial p;
  for (size_t i = 0; i < n.children.size(); ++i) {
    merge_into(p.profile, child_solutions[i][0].profile);
  }
  if (rule == TieRule::kFirstIndex) {
    size_t i = best_children.front();
    p.profile.set_pure(n.info_set, n.actions[i]);
    p.value = child_solutions[i][0].value;
  } else {  // kUniform
    StrategyProfile::Distribution dist;
    Rational w = Rational(1) / static_cast<int>(best_children.size());
    p.value.assign(static_cast<size_t>(tree.player_count()), Rational(0));
    for (size_t i : best_children) {
      dist.emplace_back(n.actions[i], w);
      for (size_t k = 0; k < p.value.size(); ++k) {
        p.value[k] += w * child_solutions[i][0].value[k];
      }
    }
    p.profile.set_mixed(n.info_set, std::move(dist));
  }
  return {std::move(p)};
}

}  // namespace

std::vector<StrategyProfile> solve_backward_induction(const GameTree& tree, TieRule tie_rule,
                                                      const SolverOptions& options) {
  for (const auto& [set_id, decl] : tree.info_sets()) {
    (void)decl;
    if (tree.members(set_id).size() > 1) {
      throw StructureError("backward induction requires perfect information; set " +
                           std::to_string(set_id) + " has " +
                           std::to_string(tree.members(set_id).size()) + " members");
    }
  }
  int64_t budget = options.max_enumeration;
  std::vector<Partial> partials = backward_induction_rec(tree, tree.root(), tie_rule, &budget);
  std::vector<StrategyProfile> out;
  out.reserve(partials.size());
  for (Partial& p : partials) out.push_back(std::move(p.profile));
  return out;
}

std::vector<std::pair<StrategyProfile, EquilibriumReport>> enumerate_equilibria(
    const GameTree& tree, const EnumerationOptions& options) {
  // Per-set option lists: pure actions, plus 50/50 two-point mixtures for the
  // mixture player when requested.
  std::vector<InfoSetId> sets;
  std::vector<std::vector<StrategyProfile::Distribution>> menus;
  BigInt total = 1;
  for (const auto& [set_id, decl] : tree.info_sets()) {
    const Node& sample = tree.node(tree.members(set_id).front());
    std::vector<StrategyProfile::Distribution> menu;
    for (ActionLabel a : sample.actions) {
      menu.push_back({{a, Rational(1)}});
    }
    if (options.buyer_tie_mixtures && decl.owner == options.mixture_player) {
      Rational half(1, 2);
      for (size_t i = 0; i < sample.actions.size(); ++i) {
        for (size_t j = i + 1; j < sample.actions.size(); ++j) {
          menu.push_back({{sample.actions[i], half}, {sample.actions[j], half}});
        }
      }
    }
    total *= menu.size();
    sets.push_back(set_id);
    menus.push_back(std::move(menu));
  }
  if (total > options.solver.max_enumeration) {
    throw BudgetExceededError("profile space has " + total.str() +
                              " profiles, budget is " +
                              std::to_string(options.solver.max_enumeration));
  }

  std::vector<std::pair<StrategyProfile, EquilibriumReport>> found;
  std::vector<size_t> pick(sets.size(), 0);
  while (true) {
    StrategyProfile profile;
    for (size_t i = 0; i < sets.size(); ++i) {
      profile.set_mixed(sets[i], menus[i][pick[i]]);
    }
    EquilibriumReport report = is_equilibrium(tree, profile, options.space, options.solver);
    if (report.equilibrium) found.emplace_back(std::move(profile), std::move(report));

    size_t i = sets.size();
    bool done = true;
    while (i > 0) {
      --i;
      if (pick[i] + 1 < menus[i].size()) {
        pick[i]++;
        std::fill(pick.begin() + static_cast<long>(i) + 1, pick.end(), 0);
        done = false;
        break;
      }
    }
    if (done || sets.empty()) break;
  }
  return found;
}

Json report_to_json(const EquilibriumReport& report) {
  Json j;
  j["verdict"] = report.equilibrium ? "equilibrium" : "not-equilibrium";
  j["utilities"] = utilities_to_json(report.utilities);
  if (report.witness) {
    Json w;
    w["player"] = report.witness->player;
    Json strategy = Json::array();
    for (const auto& [set, action] : report.witness->strategy) {
      Json cell;
      cell["info_set"] = set;
      cell["action"] = action;
      strategy.push_back(std::move(cell));
    }
    w["strategy"] = std::move(strategy);
    w["gain"] = rational_to_string(report.witness->gain);
    w["utilities"] = utilities_to_json(report.witness->utilities);
    j["witness"] = std::move(w);
  } else {
    j["witness"] = nullptr;
  }
  if (report.failing_subgame) j["failing_subgame"] = *report.failing_subgame;
  j["scope"] = report.scope;
  return j;
}

}  // namespace popsicle
