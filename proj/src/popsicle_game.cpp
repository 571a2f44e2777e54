#include "popsicle/popsicle_game.hpp"

#include <algorithm>
#include <cstdlib>

#include "popsicle/errors.hpp"

namespace popsicle {

int64_t default_node_budget() {
  if (const char* env = std::getenv("POPSICLE_NODE_BUDGET")) {
    char* end = nullptr;
    long long v = std::strtoll(env, &end, 10);
    if (end && *end == '\0' && v > 0) return static_cast<int64_t>(v);
    throw GridError("POPSICLE_NODE_BUDGET must be a positive integer");
  }
  return 5'000'000;
}

CommitmentBudget::CommitmentBudget()
    : max_nodes(default_node_budget()), max_cuts_per_node(200'000) {}

namespace {

void require_grid(const std::vector<Rational>& grid, const std::string& name,
                  bool needs_one) {
  if (grid.empty()) throw GridError(name + " grid is empty");
  for (size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0 || grid[i] > 1) {
      throw GridError(name + " grid value " + rational_to_string(grid[i]) +
                      " outside [0,1]");
    }
    if (i > 0 && grid[i] <= grid[i - 1]) {
      throw GridError(name + " grid must be strictly increasing");
    }
  }
  if (grid.front() != 0) throw GridError(name + " grid must contain 0");
  if (needs_one && grid.back() != 1) throw GridError(name + " grid must contain 1");
}

}  // namespace

void PopsicleParams::validate() const {
  if (vendor_count < 2) throw GridError("vendor count must be >= 2");
  if (discount < 0 || discount > 1) throw GridError("discount must lie in [0,1]");
  if (tax < 0 || tax >= 1) throw GridError("tax must lie in [0,1)");
  require_grid(price_grid, "price", /*needs_one=*/true);
  require_grid(payment_grid, "payment", /*needs_one=*/false);
  if (mode == DiscountMode::kLinear && kappa <= 0) {
    throw GridError("linear discount mode requires kappa > 0");
  }
}

int PopsicleParams::price_index(const Rational& p) const {
  auto it = std::lower_bound(price_grid.begin(), price_grid.end(), p);
  if (it == price_grid.end() || *it != p) return -1;
  return static_cast<int>(it - price_grid.begin());
}

int PopsicleParams::payment_index(const Rational& q) const {
  auto it = std::lower_bound(payment_grid.begin(), payment_grid.end(), q);
  if (it == payment_grid.end() || *it != q) return -1;
  return static_cast<int>(it - payment_grid.begin());
}

ActionLabel encode_buyer_action(const PopsicleParams& params, const BuyerAction& action) {
  if (action.vendor < 1 || action.vendor > params.vendor_count) {
    throw GridError("buyer action vendor index out of range");
  }
  if (!params.side_payments) {
    if (action.payment != 0) throw GridError("side payments are disabled");
    return action.vendor - 1;
  }
  int qi = params.payment_index(action.payment);
  if (qi < 0) {
    throw GridError("payment " + rational_to_string(action.payment) + " off-grid");
  }
  return static_cast<ActionLabel>((action.vendor - 1) * params.payment_grid.size() + qi);
}

BuyerAction decode_buyer_action(const PopsicleParams& params, ActionLabel label) {
  if (!params.side_payments) {
    if (label < 0 || label >= params.vendor_count) {
      throw GridError("buyer action label out of range");
    }
    return {label + 1, Rational(0)};
  }
  int q_count = static_cast<int>(params.payment_grid.size());
  if (label < 0 || label >= params.vendor_count * q_count) {
    throw GridError("buyer action label out of range");
  }
  return {label / q_count + 1, params.payment_grid[static_cast<size_t>(label % q_count)]};
}

std::vector<ActionLabel> all_buyer_action_labels(const PopsicleParams& params) {
  int count = params.vendor_count *
              (params.side_payments ? static_cast<int>(params.payment_grid.size()) : 1);
  std::vector<ActionLabel> labels(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) labels[static_cast<size_t>(i)] = i;
  return labels;
}

InfoSetId buyer_info_set_id(const PopsicleParams& params, const std::vector<int>& price_indices) {
  int64_t flat = 0;
  for (int idx : price_indices) {
    flat = flat * static_cast<int64_t>(params.price_grid.size()) + idx;
  }
  return static_cast<InfoSetId>(params.vendor_count + 1 + flat);
}

Rational buyer_outcome_value(const PopsicleParams& params, const std::vector<Rational>& prices,
                             const BuyerAction& action) {
  const Rational& price = prices[static_cast<size_t>(action.vendor - 1)];
  if (params.mode == DiscountMode::kMultiplicative) {
    return (Rational(1) - price - action.payment) *
           rational_pow(params.discount, action.vendor - 1);
  }
  // Linear decay, deliberately unclamped: utilities may go negative.
  return Rational(1) - price - action.payment -
         params.kappa * action.vendor * params.discount;
}

UtilityVector outcome_utilities(const PopsicleParams& params, const std::vector<Rational>& prices,
                                const BuyerAction& action) {
  UtilityVector u(static_cast<size_t>(params.player_count()), Rational(0));
  u[0] = buyer_outcome_value(params, prices, action);
  u[static_cast<size_t>(action.vendor)] =
      (Rational(1) - params.tax) * prices[static_cast<size_t>(action.vendor - 1)] +
      action.payment;
  return u;
}

GameTree build_popsicle(const PopsicleParams& params, int64_t node_budget) {
  params.validate();
  if (node_budget < 0) node_budget = default_node_budget();

  const int n = params.vendor_count;
  const size_t p_count = params.price_grid.size();
  const std::vector<ActionLabel> buyer_labels = all_buyer_action_labels(params);

  BigInt total = 0;
  BigInt level = 1;
  for (int depth = 0; depth <= n; ++depth) {
    total += level;  // decision nodes at this depth
    level *= p_count;
    if (depth == n) total += level / static_cast<int>(p_count) * buyer_labels.size();
  }
  // total now counts vendor nodes, buyer nodes, and leaves.
  if (total > node_budget) {
    throw BudgetExceededError("popsicle tree needs " + total.str() +
                              " nodes, budget is " + std::to_string(node_budget));
  }

  GameBuilder builder;
  std::vector<int> price_indices(static_cast<size_t>(n), 0);
  std::vector<Rational> prices(static_cast<size_t>(n), Rational(0));

  // Depth-first over price vectors; vendor j owns information set j.
  auto rec = [&](auto&& self, int depth) -> NodeId {
    if (depth == n) {
      std::vector<std::pair<ActionLabel, NodeId>> children;
      children.reserve(buyer_labels.size());
      for (ActionLabel label : buyer_labels) {
        BuyerAction action = decode_buyer_action(params, label);
        children.emplace_back(label, builder.add_leaf(outcome_utilities(params, prices, action)));
      }
      return builder.add_decision(kBuyer, buyer_info_set_id(params, price_indices),
                                  std::move(children));
    }
    std::vector<std::pair<ActionLabel, NodeId>> children;
    children.reserve(p_count);
    for (size_t pi = 0; pi < p_count; ++pi) {
      price_indices[static_cast<size_t>(depth)] = static_cast<int>(pi);
      prices[static_cast<size_t>(depth)] = params.price_grid[pi];
      children.emplace_back(static_cast<ActionLabel>(pi), self(self, depth + 1));
    }
    return builder.add_decision(depth + 1, static_cast<InfoSetId>(depth + 1),
                                std::move(children));
  };
  NodeId root = rec(rec, 0);
  return builder.build(params.player_count(), root);
}

UtilityVector evaluate_profile(const PopsicleParams& params, const PopsicleProfile& profile) {
  params.validate();
  if (static_cast<int>(profile.prices.size()) != params.vendor_count) {
    throw GridError("profile has wrong price-vector length");
  }
  std::vector<int> indices;
  for (const Rational& p : profile.prices) {
    int idx = params.price_index(p);
    if (idx < 0) throw GridError("price " + rational_to_string(p) + " off-grid");
    indices.push_back(idx);
  }
  auto it = profile.buyer_policy.find(indices);
  if (it == profile.buyer_policy.end()) {
    throw StructureError("buyer policy has no entry for the played price vector");
  }
  UtilityVector u(static_cast<size_t>(params.player_count()), Rational(0));
  Rational total = 0;
  for (const auto& [label, prob] : it->second) {
    if (prob == 0) continue;
    BuyerAction action = decode_buyer_action(params, label);
    UtilityVector out = outcome_utilities(params, profile.prices, action);
    for (size_t i = 0; i < u.size(); ++i) u[i] += prob * out[i];
    total += prob;
  }
  if (total != 1) throw StructureError("buyer policy distribution does not sum to 1");
  return u;
}

std::vector<BuyerAction> buyer_best_response(const PopsicleParams& params,
                                             const std::vector<Rational>& prices) {
  std::optional<Rational> best;
  std::vector<BuyerAction> argmax;
  for (ActionLabel label : all_buyer_action_labels(params)) {
    BuyerAction action = decode_buyer_action(params, label);
    Rational value = buyer_outcome_value(params, prices, action);
    if (!best || value > *best) {
      best = value;
      argmax.assign(1, action);
    } else if (value == *best) {
      argmax.push_back(action);
    }
  }
  return argmax;
}

PopsicleProfile vanilla_equilibrium(const PopsicleParams& params) {
  params.validate();
  if (params.mode != DiscountMode::kMultiplicative) {
    throw GridError("the closed-form vanilla equilibrium is defined for the "
                    "multiplicative discount mode");
  }
  const int n = params.vendor_count;
  PopsicleProfile profile;
  if (params.discount == 1) {
    profile.prices.assign(static_cast<size_t>(n), Rational(0));
  } else {
    Rational p1 = Rational(1) - params.discount;
    if (params.price_index(p1) < 0) {
      throw GridError("grid-compatibility: 1-d = " + rational_to_string(p1) +
                      " is not on the price grid");
    }
    profile.prices.assign(static_cast<size_t>(n), Rational(1));
    profile.prices[0] = p1;
    profile.prices[1] = 0;
  }

  // Total buyer policy: uniform over the best-response set when d = 1, first
  // best response otherwise. Either passes the subgame-perfection check.
  const bool uniform = params.discount == 1;
  std::vector<int> idx(static_cast<size_t>(n), 0);
  std::vector<Rational> vec(static_cast<size_t>(n), Rational(0));
  const size_t p_count = params.price_grid.size();
  while (true) {
    for (int j = 0; j < n; ++j) vec[static_cast<size_t>(j)] = params.price_grid[static_cast<size_t>(idx[static_cast<size_t>(j)])];
    std::vector<BuyerAction> br = buyer_best_response(params, vec);
    StrategyProfile::Distribution dist;
    if (uniform) {
      Rational w = Rational(1) / static_cast<int>(br.size());
      for (const BuyerAction& a : br) dist.emplace_back(encode_buyer_action(params, a), w);
    } else {
      dist.emplace_back(encode_buyer_action(params, br.front()), Rational(1));
    }
    profile.buyer_policy[idx] = std::move(dist);

    int j = n - 1;
    while (j >= 0 && idx[static_cast<size_t>(j)] + 1 == static_cast<int>(p_count)) {
      idx[static_cast<size_t>(j)] = 0;
      --j;
    }
    if (j < 0) break;
    idx[static_cast<size_t>(j)]++;
  }
  return profile;
}

StrategyProfile to_strategy_profile(const PopsicleParams& params, const PopsicleProfile& profile) {
  StrategyProfile out;
  for (int j = 0; j < params.vendor_count; ++j) {
    int idx = params.price_index(profile.prices[static_cast<size_t>(j)]);
    if (idx < 0) {
      throw GridError("price " + rational_to_string(profile.prices[static_cast<size_t>(j)]) +
                      " off-grid");
    }
    out.set_pure(static_cast<InfoSetId>(j + 1), static_cast<ActionLabel>(idx));
  }
  for (const auto& [indices, dist] : profile.buyer_policy) {
    out.set_mixed(buyer_info_set_id(params, indices), dist);
  }
  return out;
}

StageView stage_view_from_params(const PopsicleParams& params) {
  params.validate();
  StageView view;
  view.params = params;
  const int n = params.vendor_count;
  std::vector<int> all_prices;
  for (size_t i = 0; i < params.price_grid.size(); ++i) all_prices.push_back(static_cast<int>(i));
  for (int j = 1; j <= n; ++j) {
    view.vendor_sets.push_back(static_cast<InfoSetId>(j));
    view.vendor_prices.push_back(all_prices);
  }
  std::vector<ActionLabel> labels = all_buyer_action_labels(params);
  std::vector<int> idx(static_cast<size_t>(n), 0);
  while (true) {
    view.buyer_nodes[idx] = StageBuyerNode{buyer_info_set_id(params, idx), labels};
    int j = n - 1;
    while (j >= 0 && idx[static_cast<size_t>(j)] + 1 == static_cast<int>(params.price_grid.size())) {
      idx[static_cast<size_t>(j)] = 0;
      --j;
    }
    if (j < 0) break;
    idx[static_cast<size_t>(j)]++;
  }
  return view;
}

StageView recover_stage_view(const GameTree& tree, NodeId at, const PopsicleParams& params) {
  const int n = params.vendor_count;
  StageView view;
  view.params = params;
  view.vendor_sets.assign(static_cast<size_t>(n), -1);
  view.vendor_prices.assign(static_cast<size_t>(n), {});

  std::vector<int> indices;
  std::vector<Rational> prices;
  auto rec = [&](auto&& self, NodeId id, int depth) -> void {
    const Node& node = tree.node(id);
    if (depth < n) {
      if (node.is_leaf() || node.owner != depth + 1) {
        throw StructureError("stage copy: expected a vendor " + std::to_string(depth + 1) +
                             " node at depth " + std::to_string(depth));
      }
      InfoSetId& set = view.vendor_sets[static_cast<size_t>(depth)];
      if (set == -1) set = node.info_set;
      if (set != node.info_set) {
        throw StructureError("stage copy: vendor " + std::to_string(depth + 1) +
                             " spans several information sets");
      }
      std::vector<int> available;
      for (ActionLabel a : node.actions) {
        if (a < 0 || a >= static_cast<ActionLabel>(params.price_grid.size())) {
          throw StructureError("stage copy: vendor action label off the price grid");
        }
        available.push_back(a);
      }
      auto& declared = view.vendor_prices[static_cast<size_t>(depth)];
      if (declared.empty()) {
        declared = available;
      } else if (declared != available) {
        throw StructureError("stage copy: vendor " + std::to_string(depth + 1) +
                             " has non-uniform action availability");
      }
      for (size_t i = 0; i < node.actions.size(); ++i) {
        indices.push_back(node.actions[i]);
        prices.push_back(params.price_grid[static_cast<size_t>(node.actions[i])]);
        self(self, node.children[i], depth + 1);
        indices.pop_back();
        prices.pop_back();
      }
      return;
    }
    if (node.is_leaf() || node.owner != kBuyer) {
      throw StructureError("stage copy: expected a buyer node below the vendor stages");
    }
    StageBuyerNode buyer;
    buyer.info_set = node.info_set;
    for (size_t i = 0; i < node.actions.size(); ++i) {
      ActionLabel label = node.actions[i];
      BuyerAction action = decode_buyer_action(params, label);
      const Node& leaf = tree.node(node.children[i]);
      if (!leaf.is_leaf()) throw StructureError("stage copy: buyer children must be leaves");
      if (leaf.utilities != outcome_utilities(params, prices, action)) {
        throw StructureError("stage copy: leaf utilities disagree with the stage formulas");
      }
      buyer.labels.push_back(label);
    }
    if (!view.buyer_nodes.emplace(indices, std::move(buyer)).second) {
      throw StructureError("stage copy: duplicate buyer node for one price vector");
    }
  };
  rec(rec, at, 0);
  return view;
}

}  // namespace popsicle
