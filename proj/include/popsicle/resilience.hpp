#pragma once

#include "popsicle/contract.hpp"
#include "popsicle/equilibrium.hpp"
#include "popsicle/spe_analysis.hpp"

namespace popsicle {

// The compliance narrative fixes what vendors j != owner do with their
// commitment move. The equilibrium argument wants them committed to price 1
// (kCommitHigh); the literal "lets p_j = 0" reading is kCommitZero. Both can
// be verified; only the high reading survives the buyer's deviation check.
enum class ComplianceReading { kCommitHigh, kCommitZero };

struct AttackOptions {
  ComplianceReading reading = ComplianceReading::kCommitHigh;
  SolverOptions solver;
  CommitmentBudget budget;
  // Restrict the deviation catalog (labels per player); empty = full catalog.
  std::map<PlayerId, std::vector<std::string>> catalog_filter;
};

struct AttackDeviationRow {
  PlayerId player = -1;
  std::string label;        // commitment choice tried
  UtilityVector utilities;  // resulting play
};

struct AttackReport {
  std::vector<PlayerId> ordering;
  EquilibriumReport equilibrium;      // compliance vs schema catalog + raw actions
  UtilityVector utilities;            // on the compliance path
  UtilityVector expected_utilities;   // (1-q*, q*, 0, ...) from the pledge clause
  bool utilities_match = false;
  std::vector<AttackDeviationRow> vendor_rows;  // constant-price deviations, per vendor
  bool undercut_holds = false;        // every p_j < 1 deviation leaves vendor j at 0
  std::vector<AttackDeviationRow> buyer_rows;   // buyer commitment deviations
  bool buyer_capped = false;          // no buyer deviation beats compliance
  std::vector<std::string> narrative;
  bool passed = false;
};

Json attack_report_to_json(const AttackReport& report);

// Builds the expansion for ordering 1 -> ... -> n -> 0 with the contract in
// vendor 1's catalog, constructs the compliance profile, and runs the four
// checks: equilibrium, exact utilities, undercut rows, buyer rows.
AttackReport verify_attack(const PopsicleParams& params, const ContractAst& contract,
                           const AttackOptions& options = {});

// The compliance profile alone (for external verification): the owner picks
// the contract branch, other vendors commit per `reading` everywhere, the
// buyer pledges per the contract's pledge clause below the contract branch
// and stays uncommitted elsewhere; stage copies get forced moves, the
// reading's price when free, and first-best-response buyer play.
StrategyProfile build_compliance_profile(const PopsicleParams& params,
                                         const ExpandedGame& expanded,
                                         const ContractAst& contract,
                                         ComplianceReading reading);

struct ResilienceOptions {
  SolverOptions solver;
  CommitmentBudget budget;
  const ContractAst* contract = nullptr;  // added to its owner's catalog when the
                                          // owner heads the ordering
  int64_t max_candidates = 200'000;
};

struct ResilienceCandidate {
  std::vector<std::string> path;  // commitment choices, outermost first
  UtilityVector utilities;
  bool verified = false;          // passed is_equilibrium in the expanded game
  bool matches_vanilla = false;   // exact utility-vector match, Nash scope
  bool matches_vanilla_spe = false;
};

struct ResilienceOrderingResult {
  std::vector<PlayerId> ordering;
  std::vector<ResilienceCandidate> candidates;
  bool any_verified = false;
};

struct ResilienceReport {
  std::string scope;
  StageAnalysis vanilla_nash;
  StageAnalysis vanilla_spe;
  std::vector<ResilienceOrderingResult> orderings;
  bool resilient = true;  // within the searched scope
  std::optional<std::pair<size_t, size_t>> witness;  // (ordering idx, candidate idx)
};

Json resilience_report_to_json(const ResilienceReport& report, const PopsicleParams& params);
std::string resilience_report_to_csv(const ResilienceReport& report);

// Expands the game for each ordering (schema mode), assembles candidate
// profiles from every pure commitment path and every supportable stage
// outcome of the reached copy, verifies each candidate against the schema
// catalog plus raw actions, and compares verified utility vectors against the
// vanilla equilibrium utility set (exact match, Nash scope per Definition-1;
// the subgame-perfect comparison is reported alongside).
ResilienceReport check_resilience(const PopsicleParams& params,
                                  const std::vector<std::vector<PlayerId>>& orderings,
                                  const ResilienceOptions& options = {});

// The paper-order permutation 1..n,0 and its reverse.
std::vector<std::vector<PlayerId>> default_orderings(const PopsicleParams& params);

}  // namespace popsicle
