#include "popsicle/resilience.hpp"

#include <algorithm>

#include "popsicle/errors.hpp"

namespace popsicle {

namespace {

constexpr const char* kContractLabel = "contract";

int child_index_by_label(const CommitmentNodeInfo& info, const std::string& label) {
  for (size_t i = 0; i < info.cuts.size(); ++i) {
    if (info.cuts[i].label == label) return static_cast<int>(i);
  }
  return -1;
}

std::optional<BuyerAction> contract_pledge(const ContractAst& contract) {
  for (const ContractRule& rule : contract.rules) {
    if (rule.guard && rule.guard->kind == Predicate::Kind::kBuyerPledges) {
      return BuyerAction{rule.guard->vendor, rule.guard->value};
    }
  }
  return std::nullopt;
}

// Stage-copy behavior: forced moves, the preferred vendor price when free,
// first best response at free buyer nodes.
void assign_copy_default(StrategyProfile& profile, const StageView& view,
                         const std::optional<Rational>& preferred_price) {
  const PopsicleParams& params = view.params;
  for (int j = 0; j < params.vendor_count; ++j) {
    const auto& available = view.vendor_prices[static_cast<size_t>(j)];
    ActionLabel pick = static_cast<ActionLabel>(available.front());
    if (preferred_price) {
      int idx = params.price_index(*preferred_price);
      if (std::find(available.begin(), available.end(), idx) != available.end()) {
        pick = static_cast<ActionLabel>(idx);
      }
    }
    profile.set_pure(view.vendor_sets[static_cast<size_t>(j)], pick);
  }
  for (const auto& [key, node] : view.buyer_nodes) {
    std::vector<Rational> prices;
    for (int idx : key) prices.push_back(params.price_grid[static_cast<size_t>(idx)]);
    ActionLabel best_label = node.labels.front();
    Rational best_value;
    bool first = true;
    for (ActionLabel label : node.labels) {
      Rational v = buyer_outcome_value(params, prices, decode_buyer_action(params, label));
      if (first || v > best_value) {
        best_value = v;
        best_label = label;
        first = false;
      }
    }
    profile.set_pure(node.info_set, best_label);
  }
}

void assign_copy_policy(StrategyProfile& profile, const StageView& view,
                        const PopsicleProfile& policy) {
  const PopsicleParams& params = view.params;
  for (int j = 0; j < params.vendor_count; ++j) {
    int idx = params.price_index(policy.prices[static_cast<size_t>(j)]);
    profile.set_pure(view.vendor_sets[static_cast<size_t>(j)], static_cast<ActionLabel>(idx));
  }
  for (const auto& [key, dist] : policy.buyer_policy) {
    auto it = view.buyer_nodes.find(key);
    if (it == view.buyer_nodes.end()) {
      throw StructureError("stage policy addresses a missing buyer node");
    }
    profile.set_mixed(it->second.info_set, dist);
  }
}

}  // namespace

StrategyProfile build_compliance_profile(const PopsicleParams& params,
                                         const ExpandedGame& expanded,
                                         const ContractAst& contract,
                                         ComplianceReading reading) {
  const Rational reading_price = reading == ComplianceReading::kCommitHigh ? 1 : 0;
  const std::optional<BuyerAction> pledge = contract_pledge(contract);

  StrategyProfile profile;
  auto visit = [&](auto&& self, NodeId at, bool in_contract) -> void {
    const Node& node = expanded.tree.node(at);
    if (const CommitmentNodeInfo* info = expanded.info_for(at)) {
      int choice;
      if (info->player == contract.owner) {
        choice = child_index_by_label(*info, kContractLabel);
        if (choice < 0) choice = child_index_by_label(*info, kIdentityLabel);
        if (choice < 0) {
          throw StructureError("no contract or identity branch for the contract owner");
        }
      } else if (info->player == kBuyer) {
        choice = -1;
        if (in_contract && pledge) choice = child_index_by_label(*info, pledge_label(*pledge));
        if (choice < 0) choice = child_index_by_label(*info, kIdentityLabel);
        if (choice < 0) {
          throw StructureError("no pledge or identity branch for the buyer");
        }
      } else {
        choice = child_index_by_label(*info, price_label(reading_price));
        if (choice < 0) {
          throw StructureError("vendor catalog is missing the compliance price branch");
        }
      }
      profile.set_pure(node.info_set, node.actions[static_cast<size_t>(choice)]);
      for (size_t i = 0; i < node.children.size(); ++i) {
        bool child_in_contract = in_contract;
        if (info->player == contract.owner) {
          child_in_contract = info->cuts[i].label == kContractLabel;
        }
        self(self, node.children[i], child_in_contract);
      }
      return;
    }
    if (node.is_leaf()) return;
    StageView view = recover_stage_view(expanded.tree, at, params);
    assign_copy_default(profile, view, reading_price);
    // The reading price only steers vendors; the contract owner's base action
    // in free copies is the first available (it never matters on path).
  };
  visit(visit, expanded.tree.root(), false);
  return profile;
}

namespace {

NodeId on_path_commitment_node(const ExpandedGame& expanded, const StrategyProfile& profile,
                               PlayerId player) {
  NodeId at = expanded.tree.root();
  while (true) {
    const Node& node = expanded.tree.node(at);
    if (node.is_leaf()) break;
    const CommitmentNodeInfo* info = expanded.info_for(at);
    if (info && info->player == player) return at;
    if (!info) break;  // entered a stage copy
    ActionLabel chosen = profile.pure_action(node.info_set);
    at = node.children[static_cast<size_t>(node.action_index(chosen))];
  }
  throw StructureError("player " + std::to_string(player) +
                       " has no commitment node on the compliance path");
}

}  // namespace

AttackReport verify_attack(const PopsicleParams& params, const ContractAst& contract,
                           const AttackOptions& options) {
  params.validate();
  AttackReport report;
  for (int j = 1; j <= params.vendor_count; ++j) report.ordering.push_back(j);
  report.ordering.push_back(kBuyer);

  CommitmentSchema schema = default_schema(params);
  auto& owner_catalog = schema.catalogs[contract.owner];
  owner_catalog.insert(owner_catalog.begin(),
                       contract_schema_entry(contract, params, kContractLabel));

  GameTree base = build_popsicle(params);
  ExpandedGame expanded = expand_sequence(base, report.ordering, options.budget, &schema);

  StrategyProfile compliance =
      build_compliance_profile(params, expanded, contract, options.reading);

  DeviationSpace space = DeviationSpace::schema_catalog(
      expanded, options.catalog_filter.empty() ? nullptr : &options.catalog_filter);
  report.equilibrium = is_equilibrium(expanded.tree, compliance, space, options.solver);
  report.utilities = report.equilibrium.utilities;

  const std::optional<BuyerAction> pledge = contract_pledge(contract);
  report.expected_utilities.assign(static_cast<size_t>(params.player_count()), Rational(0));
  if (pledge) {
    report.expected_utilities[0] = Rational(1) - pledge->payment;
    report.expected_utilities[static_cast<size_t>(contract.owner)] = pledge->payment;
  } else {
    report.expected_utilities = report.utilities;
    report.narrative.push_back("contract has no pledge clause; utility check is vacuous");
  }
  report.utilities_match = report.utilities == report.expected_utilities;

  report.narrative.push_back("compliance play: u = " + to_string(report.utilities) +
                             (report.equilibrium.equilibrium ? "; equilibrium: yes"
                                                             : "; equilibrium: no"));

  // Check (c): every constant-price commitment below 1 by a vendor j >= 2
  // triggers the undercut branch and leaves j with nothing.
  report.undercut_holds = true;
  for (int j = 1; j <= params.vendor_count; ++j) {
    if (j == contract.owner) continue;
    NodeId node_id = on_path_commitment_node(expanded, compliance, j);
    const Node& node = expanded.tree.node(node_id);
    const CommitmentNodeInfo* info = expanded.info_for(node_id);
    for (const Rational& w : params.price_grid) {
      int idx = child_index_by_label(*info, price_label(w));
      if (idx < 0) continue;
      StrategyProfile deviated = compliance;
      deviated.set_pure(node.info_set, node.actions[static_cast<size_t>(idx)]);
      AttackDeviationRow row;
      row.player = j;
      row.label = price_label(w);
      row.utilities = expected_utility(expanded.tree, deviated);
      if (w < 1 && row.utilities[static_cast<size_t>(j)] != 0) report.undercut_holds = false;
      report.vendor_rows.push_back(std::move(row));
    }
  }

  // Check (d): buyer commitment deviations never beat compliance, and the
  // payment-free options are worth exactly zero.
  report.buyer_capped = true;
  {
    NodeId node_id = on_path_commitment_node(expanded, compliance, kBuyer);
    const Node& node = expanded.tree.node(node_id);
    const CommitmentNodeInfo* info = expanded.info_for(node_id);
    const Rational& compliance_value = report.utilities[0];
    for (size_t i = 0; i < info->cuts.size(); ++i) {
      StrategyProfile deviated = compliance;
      deviated.set_pure(node.info_set, node.actions[i]);
      AttackDeviationRow row;
      row.player = kBuyer;
      row.label = info->cuts[i].label;
      row.utilities = expected_utility(expanded.tree, deviated);
      const Rational& u0 = row.utilities[0];
      if (u0 > compliance_value) report.buyer_capped = false;
      bool zero_payment_option = row.label == kIdentityLabel;
      for (int v = 1; v <= params.vendor_count; ++v) {
        if (row.label == pledge_label(BuyerAction{v, Rational(0)})) zero_payment_option = true;
      }
      if (zero_payment_option && u0 != 0) report.buyer_capped = false;
      report.buyer_rows.push_back(std::move(row));
    }
  }

  report.passed = report.equilibrium.equilibrium && report.utilities_match &&
                  report.undercut_holds && report.buyer_capped;
  report.narrative.push_back(std::string("undercut rows: ") +
                             (report.undercut_holds ? "all deviating vendors end at 0"
                                                    : "an undercut row is nonzero"));
  report.narrative.push_back(std::string("buyer rows: ") +
                             (report.buyer_capped ? "no commitment beats compliance"
                                                  : "a buyer commitment beats compliance"));
  return report;
}

Json attack_report_to_json(const AttackReport& report) {
  Json j;
  j["ordering"] = report.ordering;
  j["equilibrium"] = report_to_json(report.equilibrium);
  j["utilities"] = utilities_to_json(report.utilities);
  j["expected_utilities"] = utilities_to_json(report.expected_utilities);
  j["utilities_match"] = report.utilities_match;
  auto rows = [](const std::vector<AttackDeviationRow>& rows) {
    Json arr = Json::array();
    for (const AttackDeviationRow& row : rows) {
      Json r;
      r["player"] = row.player;
      r["choice"] = row.label;
      r["utilities"] = utilities_to_json(row.utilities);
      arr.push_back(std::move(r));
    }
    return arr;
  };
  j["vendor_rows"] = rows(report.vendor_rows);
  j["undercut_holds"] = report.undercut_holds;
  j["buyer_rows"] = rows(report.buyer_rows);
  j["buyer_capped"] = report.buyer_capped;
  j["narrative"] = report.narrative;
  j["passed"] = report.passed;
  return j;
}

std::vector<std::vector<PlayerId>> default_orderings(const PopsicleParams& params) {
  std::vector<PlayerId> paper;
  for (int j = 1; j <= params.vendor_count; ++j) paper.push_back(j);
  paper.push_back(kBuyer);
  std::vector<PlayerId> reversed(paper.rbegin(), paper.rend());
  return {paper, reversed};
}

ResilienceReport check_resilience(const PopsicleParams& params,
                                  const std::vector<std::vector<PlayerId>>& orderings,
                                  const ResilienceOptions& options) {
  params.validate();
  ResilienceReport report;
  StageView vanilla_view = stage_view_from_params(params);
  report.vanilla_nash = analyze_stage(vanilla_view, EquilibriumConcept::kNash);
  report.vanilla_spe = analyze_stage(vanilla_view, EquilibriumConcept::kSubgamePerfect);
  report.scope =
      "pure commitment paths over the schema catalog; stage play restricted to "
      "supportable stage outcomes; deviations over the full catalog plus raw actions";

  GameTree base = build_popsicle(params);
  int64_t candidates_left = options.max_candidates;

  for (const std::vector<PlayerId>& ordering : orderings) {
    if (ordering.size() != static_cast<size_t>(params.player_count())) {
      throw StructureError("resilience orderings must cover every player");
    }
    CommitmentSchema schema = default_schema(params);
    if (options.contract && !ordering.empty() && ordering.front() == options.contract->owner) {
      auto& catalog = schema.catalogs[options.contract->owner];
      catalog.insert(catalog.begin(),
                     contract_schema_entry(*options.contract, params, kContractLabel));
    }
    ExpandedGame expanded = expand_sequence(base, ordering, options.budget, &schema);
    DeviationSpace space = DeviationSpace::schema_catalog(expanded);

    ResilienceOrderingResult result;
    result.ordering = ordering;

    // Base profile: identity commitments everywhere, canonical stage play.
    std::map<NodeId, StageView> copy_views;
    std::map<NodeId, StageAnalysis> copy_analyses;
    StrategyProfile base_profile;
    auto prepare = [&](auto&& self, NodeId at) -> void {
      const Node& node = expanded.tree.node(at);
      if (const CommitmentNodeInfo* info = expanded.info_for(at)) {
        int choice = child_index_by_label(*info, kIdentityLabel);
        if (choice < 0) choice = 0;
        base_profile.set_pure(node.info_set, node.actions[static_cast<size_t>(choice)]);
        for (NodeId child : node.children) self(self, child);
        return;
      }
      if (node.is_leaf()) return;
      StageView view = recover_stage_view(expanded.tree, at, params);
      StageAnalysis analysis = analyze_stage(view, EquilibriumConcept::kSubgamePerfect);
      if (!analysis.records.empty()) {
        assign_copy_policy(
            base_profile, view,
            materialize_record(view, analysis.records.front(), EquilibriumConcept::kSubgamePerfect));
      } else {
        assign_copy_default(base_profile, view, std::nullopt);
      }
      copy_views.emplace(at, std::move(view));
      copy_analyses.emplace(at, std::move(analysis));
    };
    prepare(prepare, expanded.tree.root());

    // Every pure commitment path, with every supportable outcome of the copy
    // it reaches, forms one candidate.
    std::vector<std::pair<InfoSetId, ActionLabel>> path_choices;
    std::vector<std::string> path_labels;
    auto descend = [&](auto&& self, NodeId at) -> void {
      const Node& node = expanded.tree.node(at);
      if (const CommitmentNodeInfo* info = expanded.info_for(at)) {
        for (size_t i = 0; i < node.children.size(); ++i) {
          path_choices.emplace_back(node.info_set, node.actions[i]);
          path_labels.push_back(info->cuts[i].label);
          self(self, node.children[i]);
          path_choices.pop_back();
          path_labels.pop_back();
        }
        return;
      }
      const StageView& view = copy_views.at(at);
      const StageAnalysis& analysis = copy_analyses.at(at);
      for (const StageRecord& record : analysis.records) {
        if (--candidates_left < 0) {
          throw BudgetExceededError("resilience candidate enumeration exceeded " +
                                    std::to_string(options.max_candidates));
        }
        StrategyProfile candidate = base_profile;
        for (const auto& [set, action] : path_choices) candidate.set_pure(set, action);
        assign_copy_policy(candidate, view,
                           materialize_record(view, record, EquilibriumConcept::kSubgamePerfect));
        ResilienceCandidate row;
        row.path = path_labels;
        row.utilities = expected_utility(expanded.tree, candidate);
        row.verified = is_equilibrium(expanded.tree, candidate, space, options.solver).equilibrium;
        row.matches_vanilla = analysis_achieves(vanilla_view, report.vanilla_nash, row.utilities);
        row.matches_vanilla_spe =
            analysis_achieves(vanilla_view, report.vanilla_spe, row.utilities);
        result.any_verified = result.any_verified || row.verified;
        result.candidates.push_back(std::move(row));
      }
    };
    descend(descend, expanded.tree.root());
    report.orderings.push_back(std::move(result));
  }

  for (size_t o = 0; o < report.orderings.size(); ++o) {
    const ResilienceOrderingResult& result = report.orderings[o];
    for (size_t c = 0; c < result.candidates.size(); ++c) {
      const ResilienceCandidate& candidate = result.candidates[c];
      if (candidate.verified && !candidate.matches_vanilla) {
        report.resilient = false;
        if (!report.witness) report.witness = {o, c};
      }
    }
  }
  return report;
}

Json resilience_report_to_json(const ResilienceReport& report, const PopsicleParams& params) {
  Json j;
  j["scope"] = report.scope;
  Json vanilla = Json::array();
  for (const StageRecord& record : report.vanilla_nash.records) {
    Json r;
    Json prices = Json::array();
    for (const Rational& p : record.prices) prices.push_back(rational_to_string(p));
    r["prices"] = std::move(prices);
    r["utilities"] = utilities_to_json(record.canonical_utilities);
    vanilla.push_back(std::move(r));
  }
  j["vanilla_equilibrium_outcomes"] = std::move(vanilla);
  Json orderings = Json::array();
  for (const ResilienceOrderingResult& result : report.orderings) {
    Json o;
    o["ordering"] = result.ordering;
    o["any_verified"] = result.any_verified;
    Json rows = Json::array();
    for (const ResilienceCandidate& candidate : result.candidates) {
      Json r;
      r["path"] = candidate.path;
      r["utilities"] = utilities_to_json(candidate.utilities);
      r["verified"] = candidate.verified;
      r["matches_vanilla"] = candidate.matches_vanilla;
      r["matches_vanilla_spe"] = candidate.matches_vanilla_spe;
      rows.push_back(std::move(r));
    }
    o["candidates"] = std::move(rows);
    orderings.push_back(std::move(o));
  }
  j["orderings"] = std::move(orderings);
  j["verdict"] = report.resilient ? "resilient (within searched scope)"
                                  : "not resilient (schema-witnessed)";
  if (report.witness) {
    const auto& [o, c] = *report.witness;
    Json w;
    w["ordering"] = report.orderings[o].ordering;
    w["path"] = report.orderings[o].candidates[c].path;
    w["utilities"] = utilities_to_json(report.orderings[o].candidates[c].utilities);
    j["witness"] = std::move(w);
  } else {
    j["witness"] = nullptr;
  }
  (void)params;
  return j;
}

std::string resilience_report_to_csv(const ResilienceReport& report) {
  std::string csv = "ordering,path,utilities,verified,matches_vanilla,matches_vanilla_spe\n";
  for (const ResilienceOrderingResult& result : report.orderings) {
    std::string ordering;
    for (size_t i = 0; i < result.ordering.size(); ++i) {
      if (i) ordering += "->";
      ordering += std::to_string(result.ordering[i]);
    }
    for (const ResilienceCandidate& candidate : result.candidates) {
      std::string path;
      for (size_t i = 0; i < candidate.path.size(); ++i) {
        if (i) path += "|";
        path += candidate.path[i];
      }
      csv += csv_quote(ordering) + "," + csv_quote(path) + "," +
             csv_quote(to_string(candidate.utilities)) + "," +
             (candidate.verified ? "yes" : "no") + "," +
             (candidate.matches_vanilla ? "yes" : "no") + "," +
             (candidate.matches_vanilla_spe ? "yes" : "no") + "\n";
    }
  }
  return csv;
}

}  // namespace popsicle
