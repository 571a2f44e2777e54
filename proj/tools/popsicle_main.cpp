// Command-line front end: builds instances, runs the vanilla analysis, the
// commitment expansion, the attack verification, the resilience checker, and
// parameter sweeps. Rationals on the command line use a/b syntax; decimals
// are rejected to keep everything exact.
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "popsicle/equilibrium.hpp"
#include "popsicle/errors.hpp"
#include "popsicle/scenario.hpp"

namespace {

using popsicle::Rational;

std::vector<Rational> parse_rational_list(const std::string& csv) {
  std::vector<Rational> values;
  std::stringstream stream(csv);
  std::string cell;
  while (std::getline(stream, cell, ',')) {
    if (!cell.empty()) values.push_back(popsicle::parse_rational(cell));
  }
  return values;
}

std::vector<popsicle::PlayerId> parse_player_list(const std::string& csv) {
  std::vector<popsicle::PlayerId> players;
  std::stringstream stream(csv);
  std::string cell;
  while (std::getline(stream, cell, ',')) {
    if (!cell.empty()) players.push_back(std::stoi(cell));
  }
  return players;
}

struct CommonFlags {
  int n = 2;
  std::string d = "1/2";
  std::string alpha = "1/4";
  std::string prices = "0,1/2,1";
  std::string q = "0,1";
  std::string discount_mode = "multiplicative";
  std::string kappa = "0";
  bool no_side_payments = false;
  std::string contract;
  std::string sweetener;
  std::string order;
  std::string out;
  std::string csv;
  std::string reading = "high";
  int64_t budget_nodes = 0;
  int64_t budget_cuts = 0;
  int64_t budget_enumeration = 0;
  std::string config_path;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--n", flags.n, "vendor count (>= 2)");
  cmd->add_option("--d", flags.d, "discount factor, rational a/b");
  cmd->add_option("--alpha", flags.alpha, "tax rate, rational a/b");
  cmd->add_option("--prices", flags.prices, "price grid, comma-separated rationals");
  cmd->add_option("--q", flags.q, "side-payment grid, comma-separated rationals");
  cmd->add_option("--discount-mode", flags.discount_mode, "multiplicative | linear");
  cmd->add_option("--kappa", flags.kappa, "linear-mode decay slope");
  cmd->add_flag("--no-side-payments", flags.no_side_payments, "drop the q move");
  cmd->add_option("--contract", flags.contract, "contract file path");
  cmd->add_option("--sweetener", flags.sweetener, "epsilon for the sweetened contract");
  cmd->add_option("--order", flags.order, "commitment ordering, e.g. 1,2,0");
  cmd->add_option("--out", flags.out, "report/game output path");
  cmd->add_option("--csv", flags.csv, "CSV output path");
  cmd->add_option("--reading", flags.reading, "compliance reading: high | zero");
  cmd->add_option("--budget-nodes", flags.budget_nodes, "node budget override");
  cmd->add_option("--budget-cuts", flags.budget_cuts, "cut-count budget override");
  cmd->add_option("--budget-enumeration", flags.budget_enumeration,
                  "profile/deviation enumeration budget");
}

popsicle::ScenarioConfig to_config(const CommonFlags& flags, const std::string& mode) {
  popsicle::ScenarioConfig config;
  config.mode = mode;
  config.params.vendor_count = flags.n;
  config.params.discount = popsicle::parse_rational(flags.d);
  config.params.tax = popsicle::parse_rational(flags.alpha);
  config.params.price_grid = parse_rational_list(flags.prices);
  config.params.payment_grid = parse_rational_list(flags.q);
  if (flags.discount_mode == "linear") {
    config.params.mode = popsicle::DiscountMode::kLinear;
  } else if (flags.discount_mode != "multiplicative") {
    throw popsicle::GridError("unknown discount mode '" + flags.discount_mode + "'");
  }
  config.params.kappa = popsicle::parse_rational(flags.kappa);
  config.params.side_payments = !flags.no_side_payments;
  config.contract_path = flags.contract;
  if (!flags.sweetener.empty()) config.sweetener = popsicle::parse_rational(flags.sweetener);
  if (!flags.order.empty()) config.ordering = parse_player_list(flags.order);
  config.out_path = flags.out;
  config.csv_path = flags.csv;
  if (flags.reading == "zero") {
    config.reading = popsicle::ComplianceReading::kCommitZero;
  } else if (flags.reading != "high") {
    throw popsicle::GridError("unknown compliance reading '" + flags.reading + "'");
  }
  if (flags.budget_nodes > 0) config.budget.max_nodes = flags.budget_nodes;
  if (flags.budget_cuts > 0) config.budget.max_cuts_per_node = flags.budget_cuts;
  if (flags.budget_enumeration > 0) config.solver.max_enumeration = flags.budget_enumeration;
  return config;
}

int run_verify(const std::string& game_path, const std::string& profile_path,
               const std::string& space_name, bool subgame_perfect) {
  popsicle::ExpandedGame game =
      popsicle::expanded_game_from_json(popsicle::load_json_file(game_path));
  popsicle::StrategyProfile profile =
      popsicle::profile_from_json(popsicle::load_json_file(profile_path));
  popsicle::DeviationSpace space;
  if (space_name == "exhaustive") {
    space = popsicle::DeviationSpace::exhaustive();
  } else if (space_name == "raw") {
    space = popsicle::DeviationSpace::raw_actions_only(game);
  } else if (space_name == "schema") {
    space = popsicle::DeviationSpace::schema_catalog(game);
  } else {
    std::cout << "invalid configuration: unknown deviation space '" << space_name << "'\n";
    return 3;
  }
  popsicle::EquilibriumReport report =
      subgame_perfect ? popsicle::is_subgame_perfect(game.tree, profile, space)
                      : popsicle::is_equilibrium(game.tree, profile, space);
  std::cout << popsicle::dump_json(popsicle::report_to_json(report));
  return report.equilibrium ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"popsicle: a commitment-game analysis engine"};
  app.require_subcommand(1);

  CommonFlags flags;

  CLI::App* build = app.add_subcommand("build", "construct a game instance and write it");
  add_common_flags(build, flags);
  CLI::App* solve =
      app.add_subcommand("solve", "enumerate supportable equilibria of the vanilla game");
  add_common_flags(solve, flags);
  CLI::App* expand = app.add_subcommand("expand", "build the commitment expansion");
  add_common_flags(expand, flags);
  bool exhaustive = false;
  expand->add_flag("--exhaustive", exhaustive, "enumerate all cuts instead of the schema");
  CLI::App* attack = app.add_subcommand("attack", "verify the conditional-contract attack");
  add_common_flags(attack, flags);
  CLI::App* resilience =
      app.add_subcommand("resilience", "compare expanded-game equilibria against vanilla");
  add_common_flags(resilience, flags);
  CLI::App* oracle =
      app.add_subcommand("oracle", "brute-force equilibrium enumeration (micro instances)");
  add_common_flags(oracle, flags);

  CLI::App* verify = app.add_subcommand("verify", "check a profile file against a game file");
  std::string game_path, profile_path, space_name = "exhaustive";
  bool check_spe = false;
  verify->add_option("--game", game_path, "game JSON path")->required();
  verify->add_option("--profile", profile_path, "profile JSON path")->required();
  verify->add_option("--space", space_name, "deviation space: exhaustive | raw | schema");
  verify->add_flag("--spe", check_spe, "require subgame perfection");

  CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep to CSV");
  add_common_flags(sweep, flags);
  std::string d_range = "1/4,1/2,3/4";
  std::string alpha_range = "0,1/4";
  std::string n_range = "2";
  bool skip_resilience = false;
  int jobs = 1;
  sweep->add_option("--d-range", d_range, "comma-separated discount values");
  sweep->add_option("--alpha-range", alpha_range, "comma-separated tax values");
  sweep->add_option("--n-range", n_range, "comma-separated vendor counts");
  sweep->add_flag("--skip-resilience", skip_resilience, "omit the resilience column");
  sweep->add_option("--jobs", jobs, "concurrent sweep cells");

  CLI::App* run = app.add_subcommand("run", "run a scenario from a config file");
  std::string run_config_path;
  run->add_option("--config", run_config_path, "scenario config JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (build->parsed()) return popsicle::run_scenario(to_config(flags, "build"), std::cout);
    if (solve->parsed()) return popsicle::run_scenario(to_config(flags, "vanilla"), std::cout);
    if (expand->parsed()) {
      popsicle::ScenarioConfig config = to_config(flags, "expand");
      config.exhaustive_expand = exhaustive;
      return popsicle::run_scenario(config, std::cout);
    }
    if (attack->parsed()) return popsicle::run_scenario(to_config(flags, "attack"), std::cout);
    if (resilience->parsed()) {
      return popsicle::run_scenario(to_config(flags, "resilience"), std::cout);
    }
    if (oracle->parsed()) return popsicle::run_scenario(to_config(flags, "oracle"), std::cout);
    if (verify->parsed()) return run_verify(game_path, profile_path, space_name, check_spe);
    if (sweep->parsed()) {
      popsicle::ScenarioConfig base = to_config(flags, "sweep");
      popsicle::SweepConfig sweep_config;
      sweep_config.base = base.params;
      sweep_config.discounts = parse_rational_list(d_range);
      sweep_config.taxes = parse_rational_list(alpha_range);
      for (popsicle::PlayerId n : parse_player_list(n_range)) {
        sweep_config.vendor_counts.push_back(n);
      }
      sweep_config.solver = base.solver;
      sweep_config.budget = base.budget;
      sweep_config.run_resilience = !skip_resilience;
      sweep_config.jobs = jobs;
      std::string csv = popsicle::run_sweep(sweep_config);
      if (!base.out_path.empty()) {
        popsicle::write_text_file(base.out_path, csv);
        std::cout << "wrote " << base.out_path << "\n";
      } else {
        std::cout << csv;
      }
      return 0;
    }
    if (run->parsed()) {
      popsicle::Json j = popsicle::load_json_file(run_config_path);
      return popsicle::run_scenario(popsicle::scenario_from_json(j), std::cout);
    }
  } catch (const popsicle::BudgetExceededError& e) {
    std::cout << "budget exceeded: " << e.what() << "\n";
    return 2;
  } catch (const popsicle::ParseError& e) {
    std::cout << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cout << "invalid configuration: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cout << "error: " << e.what() << "\n";
    return 3;
  }
  return 3;
}
