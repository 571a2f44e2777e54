#pragma once

#include <iosfwd>

#include "popsicle/resilience.hpp"

namespace popsicle {

Json params_to_json(const PopsicleParams& params);
PopsicleParams params_from_json(const Json& j);

struct TheoremCheck {
  std::string name;
  bool holds = false;
  std::string witness;  // first counterexample, when !holds
};

// Vanilla-setting analysis: the exhaustive supportable-SPE enumeration, the
// canonical profile's verification, and the characterization clauses checked
// against every enumerated outcome (exact arithmetic; clauses that the grid
// provably breaks are reported with a witness rather than suppressed).
struct VanillaReport {
  PopsicleParams params;
  StageAnalysis spe;
  bool canonical_verified = false;  // vanilla_equilibrium passes is_subgame_perfect
  UtilityVector canonical_utilities;
  std::vector<TheoremCheck> checks;

  bool all_checks_hold() const;
};

VanillaReport run_vanilla_analysis(const PopsicleParams& params,
                                   const SolverOptions& solver = {});
Json vanilla_report_to_json(const VanillaReport& report);

struct ScenarioConfig {
  std::string mode;  // build | vanilla | attack | resilience | expand | oracle
  PopsicleParams params;
  std::vector<PlayerId> ordering;                 // expand; empty = 1..n,0
  std::vector<std::vector<PlayerId>> orderings;   // resilience; empty = default pair
  std::string contract_source;                    // inline DSL text
  std::string contract_path;                      // file with DSL text
  std::optional<Rational> sweetener;
  bool exhaustive_expand = false;
  ComplianceReading reading = ComplianceReading::kCommitHigh;
  SolverOptions solver;
  CommitmentBudget budget;
  std::string out_path;
  std::string csv_path;
};

ScenarioConfig scenario_from_json(const Json& j);

// Loads the configured contract: explicit source/path, else the built-in
// attack contract (sweetened when a sweetener is set).
ContractAst scenario_contract(const ScenarioConfig& config);

// Exit codes: 0 success, 1 theorem/verification failure, 2 budget exceeded,
// 3 invalid configuration.
int run_scenario(const ScenarioConfig& config, std::ostream& out);

struct SweepConfig {
  std::vector<Rational> discounts;
  std::vector<Rational> taxes;
  std::vector<int> vendor_counts;
  PopsicleParams base;  // grids, mode, side payments
  SolverOptions solver;
  CommitmentBudget budget;
  bool run_resilience = true;
  int jobs = 1;
  std::string out_path;
};

// One CSV row per (d, alpha, n) in ascending lexicographic order; cell
// failures are recorded in-row. Returns the CSV text.
std::string run_sweep(const SweepConfig& config);

}  // namespace popsicle
