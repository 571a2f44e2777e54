#pragma once

#include <cstdint>

namespace popsicle {

// Global node budget; POPSICLE_NODE_BUDGET overrides the default so CI tiers
// can tighten or relax it without code changes.
int64_t default_node_budget();

struct SolverOptions {
  // Cap on enumerated profiles/deviations before BudgetExceededError.
  int64_t max_enumeration = 2'000'000;
};

struct CommitmentBudget {
  int64_t max_nodes;
  int64_t max_cuts_per_node;
  CommitmentBudget();
  CommitmentBudget(int64_t nodes, int64_t cuts)
      : max_nodes(nodes), max_cuts_per_node(cuts) {}
};

}  // namespace popsicle
