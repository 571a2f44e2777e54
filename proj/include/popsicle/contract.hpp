#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "popsicle/expansion.hpp"

namespace popsicle {

// Guard language over the commitments observable in one branch of an
// expanded game:
//   exists vendor j != <owner> : committed(j) != <v>
//       some price other than v is committed-consistent for some vendor j
//       (the adversarially safe reading: any commitment that leaves a price
//        below v playable in equilibrium triggers the clause);
//   committed(<j>) == <v>   vendor j's committed-price set is exactly {v};
//   committed(<j>) != <v>   negation of the above;
//   buyer_pledges(i*=<j>, q=<v>)   the branch pins the buyer to (j, v);
// plus not / and / or and parentheses.
struct Predicate {
  enum class Kind {
    kExistsCommittedNe,
    kCommittedEq,
    kCommittedNe,
    kBuyerPledges,
    kNot,
    kAnd,
    kOr,
  };
  Kind kind = Kind::kCommittedEq;
  int vendor = -1;      // kCommittedEq/Ne; kBuyerPledges target vendor
  Rational value;       // price (committed clauses) or payment (pledge clause)
  std::string binder;   // kExistsCommittedNe variable name
  std::vector<Predicate> children;  // kNot (1), kAnd/kOr (2)

  bool operator==(const Predicate&) const = default;
};

struct ContractAction {
  enum class Kind { kCommitPrice, kPledgeBuyer };
  Kind kind = Kind::kCommitPrice;
  Rational price;       // kCommitPrice
  int pledge_vendor = 1;
  Rational pledge_payment;  // kPledgeBuyer

  bool operator==(const ContractAction&) const = default;
};

struct ContractRule {
  std::optional<Predicate> guard;  // nullopt on the final else rule
  ContractAction action;

  bool operator==(const ContractRule&) const = default;
};

// First-match rule chain; the last rule is the mandatory else.
struct ContractAst {
  PlayerId owner = 1;
  std::vector<ContractRule> rules;
  std::optional<Rational> sweetener;  // epsilon of the sweetened variant

  bool operator==(const ContractAst&) const = default;
};

// Parses and type-checks against the instance grids; ParseError carries
// line/column. An optional leading "vendor <j>:" sets the owner.
ContractAst parse_contract(std::string_view source, const PopsicleParams& params,
                           PlayerId default_owner = 1);

std::string pretty_print(const ContractAst& ast);

// The conditional undercut contract for vendor 1: undercut to 0 whenever some
// other vendor's commitment leaves a price != 1 playable, sell at 0 against a
// full-value pledge, price 1 otherwise.
ContractAst builtin_theorem2(const PopsicleParams& params);

// Same contract with the pledge clause demanding q = 1 - epsilon, leaving the
// complying buyer epsilon of surplus. Requires epsilon in (0,1), 1-epsilon in Q.
ContractAst builtin_sweetened(const PopsicleParams& params, const Rational& epsilon);

// What one branch of the expanded game exposes to the guards.
struct BranchFacts {
  std::map<int, std::set<Rational>> committed;  // per vendor != owner
  std::optional<BuyerAction> pledge;
};

bool evaluate_predicate(const Predicate& pred, const ContractAst& ast,
                        const PopsicleParams& params, const BranchFacts& facts);

// Picks each branch's first matching rule and pins the owner's actions there.
// `inner` must already contain the commitment nodes of every player the
// guards reference (the owner is expanded afterwards, on top).
Cut compile_to_cut(const ContractAst& ast, const ExpandedGame& inner,
                   const PopsicleParams& params);

// Schema catalog entry wrapping compile_to_cut, for expand_sequence.
SchemaEntry contract_schema_entry(const ContractAst& ast, const PopsicleParams& params,
                                  const std::string& label = "contract");

}  // namespace popsicle
