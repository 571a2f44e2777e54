#include "popsicle/spe_analysis.hpp"

#include <algorithm>
#include <optional>

#include "popsicle/errors.hpp"

namespace popsicle {

namespace {

struct NodeEval {
  Rational best_value;
  std::vector<ActionLabel> br;  // argmax labels, ascending
};

Rational payout_to(const PopsicleParams& params, const std::vector<Rational>& prices,
                   const BuyerAction& action, int vendor) {
  if (action.vendor != vendor) return 0;
  return (Rational(1) - params.tax) * prices[static_cast<size_t>(vendor - 1)] + action.payment;
}

NodeEval evaluate_node(const StageView& view, const std::vector<Rational>& prices,
                       const StageBuyerNode& node) {
  NodeEval eval;
  bool first = true;
  for (ActionLabel label : node.labels) {
    BuyerAction action = decode_buyer_action(view.params, label);
    Rational value = buyer_outcome_value(view.params, prices, action);
    if (first || value > eval.best_value) {
      eval.best_value = value;
      eval.br.assign(1, label);
      first = false;
    } else if (value == eval.best_value) {
      eval.br.push_back(label);
    }
  }
  if (first) throw StructureError("stage buyer node with no actions");
  return eval;
}

const StageBuyerNode& buyer_node_at(const StageView& view, const std::vector<int>& key) {
  auto it = view.buyer_nodes.find(key);
  if (it == view.buyer_nodes.end()) {
    throw StructureError("stage view is missing a buyer node for a deviation vector");
  }
  return it->second;
}

std::vector<Rational> prices_of(const StageView& view, const std::vector<int>& indices) {
  std::vector<Rational> prices;
  prices.reserve(indices.size());
  for (int idx : indices) prices.push_back(view.params.price_grid[static_cast<size_t>(idx)]);
  return prices;
}

// Blocking value of vendor `j` deviating to `alt` at coordinate j-1: the
// least payout to j the buyer can answer with, within the concept's allowed
// action set at the deviation node.
Rational blocked_deviation_value(const StageView& view, std::vector<int> indices, int vendor,
                                 int alt, EquilibriumConcept eq_concept) {
  indices[static_cast<size_t>(vendor - 1)] = alt;
  const StageBuyerNode& node = buyer_node_at(view, indices);
  std::vector<Rational> prices = prices_of(view, indices);
  std::optional<Rational> worst;
  if (eq_concept == EquilibriumConcept::kSubgamePerfect) {
    NodeEval eval = evaluate_node(view, prices, node);
    for (ActionLabel label : eval.br) {
      Rational w = payout_to(view.params, prices, decode_buyer_action(view.params, label), vendor);
      if (!worst || w < *worst) worst = w;
    }
  } else {
    for (ActionLabel label : node.labels) {
      Rational w = payout_to(view.params, prices, decode_buyer_action(view.params, label), vendor);
      if (!worst || w < *worst) worst = w;
    }
  }
  return *worst;
}

}  // namespace

StageAnalysis analyze_stage(const StageView& view, EquilibriumConcept eq_concept) {
  const int n = view.params.vendor_count;
  StageAnalysis analysis;
  analysis.eq_concept = eq_concept;

  std::vector<size_t> cursor(static_cast<size_t>(n), 0);
  std::vector<int> indices(static_cast<size_t>(n), 0);
  while (true) {
    for (int j = 0; j < n; ++j) {
      indices[static_cast<size_t>(j)] = view.vendor_prices[static_cast<size_t>(j)][cursor[static_cast<size_t>(j)]];
    }

    StageRecord record;
    record.price_indices = indices;
    record.prices = prices_of(view, indices);
    const StageBuyerNode& on_path = buyer_node_at(view, indices);
    NodeEval eval = evaluate_node(view, record.prices, on_path);
    record.buyer_value = eval.best_value;
    record.br_labels = eval.br;

    record.thresholds.assign(static_cast<size_t>(n), Rational(0));
    for (int j = 1; j <= n; ++j) {
      Rational t = 0;
      for (int alt : view.vendor_prices[static_cast<size_t>(j - 1)]) {
        if (alt == indices[static_cast<size_t>(j - 1)]) continue;
        Rational v = blocked_deviation_value(view, indices, j, alt, eq_concept);
        if (v > t) t = v;
      }
      record.thresholds[static_cast<size_t>(j - 1)] = t;
    }

    // Best-paying best response per vendor, and the mass lower bounds.
    std::vector<Rational> c_max(static_cast<size_t>(n), Rational(0));
    std::vector<ActionLabel> best_label(static_cast<size_t>(n), -1);
    for (ActionLabel label : record.br_labels) {
      BuyerAction action = decode_buyer_action(view.params, label);
      Rational w = payout_to(view.params, record.prices, action, action.vendor);
      size_t j = static_cast<size_t>(action.vendor - 1);
      if (best_label[j] < 0 || w > c_max[j]) {
        c_max[j] = w;
        best_label[j] = label;
      }
    }
    bool feasible = true;
    record.min_mass.assign(static_cast<size_t>(n), Rational(0));
    Rational total_mass = 0;
    for (int j = 0; j < n; ++j) {
      const Rational& t = record.thresholds[static_cast<size_t>(j)];
      if (t == 0) continue;
      if (best_label[static_cast<size_t>(j)] < 0 || c_max[static_cast<size_t>(j)] == 0) {
        feasible = false;
        break;
      }
      record.min_mass[static_cast<size_t>(j)] = t / c_max[static_cast<size_t>(j)];
      total_mass += record.min_mass[static_cast<size_t>(j)];
    }
    if (feasible && total_mass <= 1) {
      // Canonical mixture: the required masses, remainder on the first best response.
      std::map<ActionLabel, Rational> weights;
      for (int j = 0; j < n; ++j) {
        if (record.min_mass[static_cast<size_t>(j)] != 0) {
          weights[best_label[static_cast<size_t>(j)]] += record.min_mass[static_cast<size_t>(j)];
        }
      }
      weights[record.br_labels.front()] += Rational(1) - total_mass;
      for (const auto& [label, w] : weights) {
        if (w != 0) record.canonical_distribution.emplace_back(label, w);
      }
      record.canonical_utilities.assign(static_cast<size_t>(n + 1), Rational(0));
      record.canonical_utilities[0] = record.buyer_value;
      for (const auto& [label, w] : record.canonical_distribution) {
        BuyerAction action = decode_buyer_action(view.params, label);
        record.canonical_utilities[static_cast<size_t>(action.vendor)] +=
            w * payout_to(view.params, record.prices, action, action.vendor);
      }
      record.max_vendor_utility.assign(static_cast<size_t>(n), Rational(0));
      for (int j = 0; j < n; ++j) {
        if (best_label[static_cast<size_t>(j)] < 0) continue;
        Rational others = 0;
        for (int k = 0; k < n; ++k) {
          if (k != j) others += record.min_mass[static_cast<size_t>(k)];
        }
        record.max_vendor_utility[static_cast<size_t>(j)] =
            c_max[static_cast<size_t>(j)] * (Rational(1) - others);
      }
      analysis.records.push_back(std::move(record));
    }

    int j = n - 1;
    while (j >= 0 && cursor[static_cast<size_t>(j)] + 1 ==
                         view.vendor_prices[static_cast<size_t>(j)].size()) {
      cursor[static_cast<size_t>(j)] = 0;
      --j;
    }
    if (j < 0) break;
    cursor[static_cast<size_t>(j)]++;
  }
  return analysis;
}

bool record_achieves(const StageView& view, const StageRecord& record,
                     const UtilityVector& target) {
  const int n = view.params.vendor_count;
  if (static_cast<int>(target.size()) != n + 1) return false;
  if (target[0] != record.buyer_value) return false;

  // Payout menu per vendor among on-path best responses.
  std::vector<std::vector<Rational>> payouts(static_cast<size_t>(n));
  bool any_zero_payout_action = false;
  for (ActionLabel label : record.br_labels) {
    BuyerAction action = decode_buyer_action(view.params, label);
    Rational w = payout_to(view.params, record.prices, action, action.vendor);
    payouts[static_cast<size_t>(action.vendor - 1)].push_back(w);
    if (w == 0) any_zero_payout_action = true;
  }

  Rational total_min = 0;
  Rational total_max = 0;
  bool unbounded_max = any_zero_payout_action;
  for (int j = 0; j < n; ++j) {
    const Rational& want = target[static_cast<size_t>(j + 1)];
    if (want < 0) return false;
    if (want < record.thresholds[static_cast<size_t>(j)]) return false;
    if (want == 0) continue;
    const auto& menu = payouts[static_cast<size_t>(j)];
    Rational c_max = 0, c_min_pos = 0;
    for (const Rational& c : menu) {
      if (c > c_max) c_max = c;
      if (c > 0 && (c_min_pos == 0 || c < c_min_pos)) c_min_pos = c;
    }
    if (c_max == 0) return false;  // nobody can pay vendor j
    total_min += want / c_max;
    total_max += want / c_min_pos;
  }
  if (total_min > 1) return false;
  if (!unbounded_max && total_max < 1) return false;
  return true;
}

bool analysis_achieves(const StageView& view, const StageAnalysis& analysis,
                       const UtilityVector& target) {
  for (const StageRecord& record : analysis.records) {
    if (record_achieves(view, record, target)) return true;
  }
  return false;
}

std::set<Rational> stage_committed_prices(const StageView& view, int vendor) {
  if (vendor < 1 || vendor > view.params.vendor_count) {
    throw GridError("vendor index out of range");
  }
  StageAnalysis analysis = analyze_stage(view, EquilibriumConcept::kSubgamePerfect);
  std::set<Rational> prices;
  for (const StageRecord& record : analysis.records) {
    prices.insert(record.prices[static_cast<size_t>(vendor - 1)]);
  }
  return prices;
}

PopsicleProfile materialize_record(const StageView& view, const StageRecord& record,
                                   EquilibriumConcept eq_concept) {
  PopsicleProfile profile;
  profile.prices = record.prices;
  for (const auto& [key, node] : view.buyer_nodes) {
    if (key == record.price_indices) {
      profile.buyer_policy[key] = record.canonical_distribution;
      continue;
    }
    int deviator = 0;
    int diffs = 0;
    for (size_t j = 0; j < key.size(); ++j) {
      if (key[j] != record.price_indices[j]) {
        ++diffs;
        deviator = static_cast<int>(j) + 1;
      }
    }
    std::vector<Rational> prices = prices_of(view, key);
    NodeEval eval = evaluate_node(view, prices, node);
    ActionLabel chosen;
    if (diffs == 1) {
      // The blocking answer to this unilateral deviation.
      const std::vector<ActionLabel>& allowed =
          (eq_concept == EquilibriumConcept::kSubgamePerfect) ? eval.br : node.labels;
      std::optional<Rational> worst;
      chosen = allowed.front();
      for (ActionLabel label : allowed) {
        Rational w =
            payout_to(view.params, prices, decode_buyer_action(view.params, label), deviator);
        if (!worst || w < *worst) {
          worst = w;
          chosen = label;
        }
      }
    } else {
      chosen = eval.br.front();
    }
    profile.buyer_policy[key] = {{chosen, Rational(1)}};
  }
  return profile;
}

}  // namespace popsicle
