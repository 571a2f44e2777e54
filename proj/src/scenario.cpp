#include "popsicle/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>

#include "popsicle/errors.hpp"

namespace popsicle {

Json params_to_json(const PopsicleParams& params) {
  Json j;
  j["n"] = params.vendor_count;
  j["d"] = rational_to_string(params.discount);
  j["alpha"] = rational_to_string(params.tax);
  Json prices = Json::array();
  for (const Rational& p : params.price_grid) prices.push_back(rational_to_string(p));
  j["prices"] = std::move(prices);
  Json q = Json::array();
  for (const Rational& v : params.payment_grid) q.push_back(rational_to_string(v));
  j["q_grid"] = std::move(q);
  j["discount_mode"] =
      params.mode == DiscountMode::kMultiplicative ? "multiplicative" : "linear";
  j["kappa"] = rational_to_string(params.kappa);
  j["side_payments"] = params.side_payments;
  return j;
}

PopsicleParams params_from_json(const Json& j) {
  PopsicleParams params;
  params.vendor_count = j.at("n").get<int>();
  params.discount = parse_rational(j.at("d").get<std::string>());
  params.tax = parse_rational(j.at("alpha").get<std::string>());
  params.price_grid.clear();
  for (const Json& cell : j.at("prices")) {
    params.price_grid.push_back(parse_rational(cell.get<std::string>()));
  }
  params.payment_grid.clear();
  for (const Json& cell : j.at("q_grid")) {
    params.payment_grid.push_back(parse_rational(cell.get<std::string>()));
  }
  if (j.contains("discount_mode")) {
    std::string mode = j.at("discount_mode").get<std::string>();
    if (mode == "multiplicative") {
      params.mode = DiscountMode::kMultiplicative;
    } else if (mode == "linear") {
      params.mode = DiscountMode::kLinear;
    } else {
      throw GridError("unknown discount_mode '" + mode + "'");
    }
  }
  if (j.contains("kappa")) params.kappa = parse_rational(j.at("kappa").get<std::string>());
  if (j.contains("side_payments")) params.side_payments = j.at("side_payments").get<bool>();
  params.validate();
  return params;
}

bool VanillaReport::all_checks_hold() const {
  for (const TheoremCheck& check : checks) {
    if (!check.holds) return false;
  }
  return canonical_verified;
}

namespace {

std::string record_witness(const StageRecord& record) {
  std::string s = "p = (";
  for (size_t i = 0; i < record.prices.size(); ++i) {
    if (i) s += ", ";
    s += rational_to_string(record.prices[i]);
  }
  s += "), u0 = " + rational_to_string(record.buyer_value);
  return s;
}

}  // namespace

VanillaReport run_vanilla_analysis(const PopsicleParams& params, const SolverOptions& solver) {
  params.validate();
  VanillaReport report;
  report.params = params;

  StageView view = stage_view_from_params(params);
  report.spe = analyze_stage(view, EquilibriumConcept::kSubgamePerfect);

  PopsicleProfile canonical = vanilla_equilibrium(params);
  report.canonical_utilities = evaluate_profile(params, canonical);
  GameTree tree = build_popsicle(params);
  StrategyProfile strategy = to_strategy_profile(params, canonical);
  report.canonical_verified =
      is_subgame_perfect(tree, strategy, DeviationSpace::exhaustive(), solver).equilibrium;

  const bool competitive = params.discount == 1;
  const Rational expected_u0 = competitive ? Rational(1) : params.discount;
  const Rational p1_expected = Rational(1) - params.discount;

  auto add_check = [&](const std::string& name, auto&& predicate_witness) {
    TheoremCheck check;
    check.name = name;
    check.holds = true;
    for (const StageRecord& record : report.spe.records) {
      std::string why = predicate_witness(record);
      if (!why.empty()) {
        check.holds = false;
        check.witness = record_witness(record) + " (" + why + ")";
        break;
      }
    }
    report.checks.push_back(std::move(check));
  };

  TheoremCheck nonempty;
  nonempty.name = "at least one equilibrium found";
  nonempty.holds = !report.spe.records.empty();
  report.checks.push_back(std::move(nonempty));

  add_check("every supportable outcome has u0 = " + rational_to_string(expected_u0),
            [&](const StageRecord& r) {
              return r.buyer_value == expected_u0
                         ? std::string()
                         : "u0 = " + rational_to_string(r.buyer_value);
            });
  add_check("every supportable outcome pays q = 0 on path", [&](const StageRecord& r) {
    for (ActionLabel label : r.br_labels) {
      BuyerAction a = decode_buyer_action(params, label);
      // With side payments and d = 0 later-vendor indifference can admit
      // q > 0 in the best-response set; any such support breaks the clause.
      bool in_support = false;
      for (const auto& [l, w] : r.canonical_distribution) {
        if (l == label && w != 0) in_support = true;
      }
      if (a.payment != 0 && in_support) {
        return std::string("q = ") + rational_to_string(a.payment);
      }
    }
    return std::string();
  });

  if (competitive) {
    add_check("every supportable outcome gives all vendors 0", [&](const StageRecord& r) {
      for (int j = 0; j < params.vendor_count; ++j) {
        if (r.max_vendor_utility[static_cast<size_t>(j)] != 0) {
          return "max u" + std::to_string(j + 1) + " = " +
                 rational_to_string(r.max_vendor_utility[static_cast<size_t>(j)]);
        }
      }
      return std::string();
    });
  } else {
    add_check("every supportable outcome has p1 = " + rational_to_string(p1_expected),
              [&](const StageRecord& r) {
                return r.prices[0] == p1_expected
                           ? std::string()
                           : "p1 = " + rational_to_string(r.prices[0]);
              });
    add_check("every supportable outcome has p2 = 0", [&](const StageRecord& r) {
      return r.prices[1] == 0 ? std::string() : "p2 = " + rational_to_string(r.prices[1]);
    });
    const Rational bound_spec = (Rational(1) - params.tax) * (Rational(1) - params.discount);
    const Rational bound_paper = params.tax * (Rational(1) - params.discount);
    add_check("every supportable outcome has u1 <= (1-alpha)(1-d) = " +
                  rational_to_string(bound_spec),
              [&](const StageRecord& r) {
                return r.max_vendor_utility[0] <= bound_spec
                           ? std::string()
                           : "max u1 = " + rational_to_string(r.max_vendor_utility[0]);
              });
    add_check("printed bound u1 <= alpha(1-d) = " + rational_to_string(bound_paper),
              [&](const StageRecord& r) {
                return r.max_vendor_utility[0] <= bound_paper
                           ? std::string()
                           : "max u1 = " + rational_to_string(r.max_vendor_utility[0]);
              });
  }
  return report;
}

Json vanilla_report_to_json(const VanillaReport& report) {
  Json j;
  j["params"] = params_to_json(report.params);
  j["canonical_verified"] = report.canonical_verified;
  j["canonical_utilities"] = utilities_to_json(report.canonical_utilities);
  Json records = Json::array();
  for (const StageRecord& record : report.spe.records) {
    Json r;
    Json prices = Json::array();
    for (const Rational& p : record.prices) prices.push_back(rational_to_string(p));
    r["prices"] = std::move(prices);
    r["u0"] = rational_to_string(record.buyer_value);
    Json max_u = Json::array();
    for (const Rational& u : record.max_vendor_utility) max_u.push_back(rational_to_string(u));
    r["max_vendor_utilities"] = std::move(max_u);
    r["canonical_utilities"] = utilities_to_json(record.canonical_utilities);
    records.push_back(std::move(r));
  }
  j["supportable_outcomes"] = std::move(records);
  Json checks = Json::array();
  for (const TheoremCheck& check : report.checks) {
    Json c;
    c["name"] = check.name;
    c["holds"] = check.holds;
    if (!check.holds) c["witness"] = check.witness;
    checks.push_back(std::move(c));
  }
  j["checks"] = std::move(checks);
  return j;
}

ScenarioConfig scenario_from_json(const Json& j) {
  ScenarioConfig config;
  config.mode = j.at("mode").get<std::string>();
  config.params = params_from_json(j.at("params"));
  if (j.contains("ordering")) config.ordering = j.at("ordering").get<std::vector<PlayerId>>();
  if (j.contains("orderings")) {
    for (const Json& o : j.at("orderings")) {
      config.orderings.push_back(o.get<std::vector<PlayerId>>());
    }
  }
  if (j.contains("contract")) config.contract_source = j.at("contract").get<std::string>();
  if (j.contains("contract_path")) config.contract_path = j.at("contract_path").get<std::string>();
  if (j.contains("sweetener")) {
    config.sweetener = parse_rational(j.at("sweetener").get<std::string>());
  }
  if (j.contains("exhaustive")) config.exhaustive_expand = j.at("exhaustive").get<bool>();
  if (j.contains("budget_nodes")) config.budget.max_nodes = j.at("budget_nodes").get<int64_t>();
  if (j.contains("budget_cuts")) {
    config.budget.max_cuts_per_node = j.at("budget_cuts").get<int64_t>();
  }
  if (j.contains("budget_enumeration")) {
    config.solver.max_enumeration = j.at("budget_enumeration").get<int64_t>();
  }
  if (j.contains("out")) config.out_path = j.at("out").get<std::string>();
  if (j.contains("csv")) config.csv_path = j.at("csv").get<std::string>();
  if (j.contains("reading")) {
    std::string reading = j.at("reading").get<std::string>();
    if (reading == "high") {
      config.reading = ComplianceReading::kCommitHigh;
    } else if (reading == "zero") {
      config.reading = ComplianceReading::kCommitZero;
    } else {
      throw GridError("unknown compliance reading '" + reading + "'");
    }
  }
  return config;
}

ContractAst scenario_contract(const ScenarioConfig& config) {
  if (!config.contract_path.empty()) {
    std::ifstream in(config.contract_path);
    if (!in) throw GridError("cannot open contract file: " + config.contract_path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_contract(buffer.str(), config.params);
  }
  if (!config.contract_source.empty()) {
    return parse_contract(config.contract_source, config.params);
  }
  if (config.sweetener) return builtin_sweetened(config.params, *config.sweetener);
  return builtin_theorem2(config.params);
}

namespace {

std::vector<PlayerId> paper_ordering(const PopsicleParams& params) {
  std::vector<PlayerId> ordering;
  for (int j = 1; j <= params.vendor_count; ++j) ordering.push_back(j);
  ordering.push_back(kBuyer);
  return ordering;
}

int run_build(const ScenarioConfig& config, std::ostream& out) {
  GameTree tree = build_popsicle(config.params);
  ValidationReport validation = validate_game(tree);
  out << "built game: " << tree.decision_count() << " decision nodes, " << tree.leaf_count()
      << " leaves; validation: " << validation.summary() << "\n";
  if (!config.out_path.empty()) {
    Json j = game_to_json(tree);
    j["params"] = params_to_json(config.params);
    write_text_file(config.out_path, dump_json(j));
    out << "wrote " << config.out_path << "\n";
  }
  return validation.ok() ? 0 : 1;
}

int run_vanilla(const ScenarioConfig& config, std::ostream& out) {
  VanillaReport report = run_vanilla_analysis(config.params, config.solver);
  out << "u0 = " << rational_to_string(report.canonical_utilities[0]) << "\n";
  out << "canonical equilibrium verified: " << (report.canonical_verified ? "yes" : "no")
      << "\n";
  out << "supportable outcomes: " << report.spe.records.size() << "\n";
  for (const TheoremCheck& check : report.checks) {
    out << (check.holds ? "  [ok]   " : "  [fail] ") << check.name;
    if (!check.holds) out << "  <- " << check.witness;
    out << "\n";
  }
  if (!config.out_path.empty()) {
    write_text_file(config.out_path, dump_json(vanilla_report_to_json(report)));
    out << "wrote " << config.out_path << "\n";
  }
  return report.canonical_verified ? 0 : 1;
}

int run_attack(const ScenarioConfig& config, std::ostream& out) {
  ContractAst contract = scenario_contract(config);
  AttackOptions options;
  options.reading = config.reading;
  options.solver = config.solver;
  options.budget = config.budget;
  AttackReport report = verify_attack(config.params, contract, options);
  out << "u = " << to_string(report.utilities)
      << "; equilibrium: " << (report.equilibrium.equilibrium ? "yes" : "no") << "\n";
  for (const std::string& line : report.narrative) out << "  " << line << "\n";
  if (!config.out_path.empty()) {
    write_text_file(config.out_path, dump_json(attack_report_to_json(report)));
    out << "wrote " << config.out_path << "\n";
  }
  return report.passed ? 0 : 1;
}

int run_resilience(const ScenarioConfig& config, std::ostream& out) {
  ContractAst contract = scenario_contract(config);
  ResilienceOptions options;
  options.solver = config.solver;
  options.budget = config.budget;
  options.contract = &contract;
  std::vector<std::vector<PlayerId>> orderings =
      config.orderings.empty() ? default_orderings(config.params) : config.orderings;
  ResilienceReport report = check_resilience(config.params, orderings, options);
  out << "verdict: "
      << (report.resilient ? "resilient (within searched scope)"
                           : "not resilient (schema-witnessed)")
      << "\n";
  if (report.witness) {
    const auto& [o, c] = *report.witness;
    out << "witness ordering:";
    for (PlayerId p : report.orderings[o].ordering) out << " " << p;
    out << "; utilities " << to_string(report.orderings[o].candidates[c].utilities) << "\n";
  }
  for (const ResilienceOrderingResult& result : report.orderings) {
    if (!result.any_verified) {
      out << "note: no verified equilibria for ordering";
      for (PlayerId p : result.ordering) out << " " << p;
      out << " within the searched scope\n";
    }
  }
  if (!config.out_path.empty()) {
    write_text_file(config.out_path,
                    dump_json(resilience_report_to_json(report, config.params)));
    out << "wrote " << config.out_path << "\n";
  }
  if (!config.csv_path.empty()) {
    write_text_file(config.csv_path, resilience_report_to_csv(report));
    out << "wrote " << config.csv_path << "\n";
  }
  return 0;
}

int run_expand(const ScenarioConfig& config, std::ostream& out) {
  GameTree tree = build_popsicle(config.params);
  std::vector<PlayerId> ordering =
      config.ordering.empty() ? paper_ordering(config.params) : config.ordering;
  ExpandedGame expanded;
  if (config.exhaustive_expand) {
    expanded = expand_sequence(tree, ordering, config.budget, nullptr);
  } else {
    CommitmentSchema schema = default_schema(config.params);
    ContractAst contract = scenario_contract(config);
    if (!ordering.empty() && ordering.front() == contract.owner) {
      auto& catalog = schema.catalogs[contract.owner];
      catalog.insert(catalog.begin(), contract_schema_entry(contract, config.params, "contract"));
    }
    expanded = expand_sequence(tree, ordering, config.budget, &schema);
  }
  out << "expanded tree: " << expanded.tree.node_count() << " nodes, "
      << expanded.commitment_nodes.size() << " commitment nodes\n";
  if (!config.out_path.empty()) {
    write_text_file(config.out_path, dump_json(expanded_game_to_json(expanded)));
    out << "wrote " << config.out_path << "\n";
  }
  return 0;
}

int run_oracle(const ScenarioConfig& config, std::ostream& out) {
  GameTree tree = build_popsicle(config.params);
  EnumerationOptions options;
  options.solver = config.solver;
  options.buyer_tie_mixtures = true;
  auto equilibria = enumerate_equilibria(tree, options);
  size_t spe_count = 0;
  Json list = Json::array();
  for (const auto& [profile, report] : equilibria) {
    EquilibriumReport spe =
        is_subgame_perfect(tree, profile, DeviationSpace::exhaustive(), config.solver);
    if (spe.equilibrium) ++spe_count;
    Json entry;
    entry["profile"] = profile_to_json(profile);
    entry["utilities"] = utilities_to_json(report.utilities);
    entry["subgame_perfect"] = spe.equilibrium;
    list.push_back(std::move(entry));
  }
  out << "equilibria: " << equilibria.size() << " (subgame-perfect: " << spe_count << ")\n";
  if (!config.out_path.empty()) {
    Json j;
    j["params"] = params_to_json(config.params);
    j["equilibria"] = std::move(list);
    write_text_file(config.out_path, dump_json(j));
    out << "wrote " << config.out_path << "\n";
  }
  return 0;
}

}  // namespace

int run_scenario(const ScenarioConfig& config, std::ostream& out) {
  try {
    if (config.mode == "build") return run_build(config, out);
    if (config.mode == "vanilla" || config.mode == "solve") return run_vanilla(config, out);
    if (config.mode == "attack") return run_attack(config, out);
    if (config.mode == "resilience") return run_resilience(config, out);
    if (config.mode == "expand") return run_expand(config, out);
    if (config.mode == "oracle") return run_oracle(config, out);
    out << "error: unknown mode '" << config.mode << "'\n";
    return 3;
  } catch (const BudgetExceededError& e) {
    out << "budget exceeded: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    out << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {  // GridError, StructureError
    out << "invalid configuration: " << e.what() << "\n";
    return 3;
  }
}

namespace {

std::string sweep_cell(const SweepConfig& config, const Rational& d, const Rational& alpha,
                       int n) {
  PopsicleParams params = config.base;
  params.vendor_count = n;
  params.discount = d;
  params.tax = alpha;

  std::string row = std::to_string(n) + "," + csv_quote(rational_to_string(d)) + "," +
                    csv_quote(rational_to_string(alpha)) + ",";
  try {
    params.validate();
    VanillaReport vanilla = run_vanilla_analysis(params, config.solver);
    Rational bound_spec = (Rational(1) - alpha) * (Rational(1) - d);
    Rational bound_paper = alpha * (Rational(1) - d);
    Rational u1_max = 0;
    for (const StageRecord& record : vanilla.spe.records) {
      u1_max = std::max(u1_max, record.max_vendor_utility[0]);
    }
    row += csv_quote(to_string(vanilla.canonical_utilities)) + "," +
           csv_quote(rational_to_string(u1_max)) + "," +
           (u1_max <= bound_spec ? "yes" : "no") + "," +
           (u1_max <= bound_paper ? "yes" : "no") + ",";
  } catch (const std::exception& e) {
    row += "error,,,,,," + csv_quote(e.what()) + "\n";
    return row;
  }

  std::string note;
  std::string attack_cell;
  std::string resilience_cell = "skipped";
  try {
    ContractAst contract = builtin_theorem2(params);
    AttackOptions attack_options;
    attack_options.solver = config.solver;
    attack_options.budget = config.budget;
    AttackReport attack = verify_attack(params, contract, attack_options);
    attack_cell = to_string(attack.utilities) + (attack.passed ? " ok" : " FAILED");
    if (config.run_resilience) {
      ResilienceOptions res_options;
      res_options.solver = config.solver;
      res_options.budget = config.budget;
      res_options.contract = &contract;
      ResilienceReport res = check_resilience(params, default_orderings(params), res_options);
      resilience_cell = res.resilient ? "resilient(scope)" : "not-resilient";
    }
  } catch (const std::exception& e) {
    note = e.what();
    if (attack_cell.empty()) attack_cell = "error";
    resilience_cell = "error";
  }
  row += csv_quote(attack_cell) + "," + csv_quote(resilience_cell) + "," + csv_quote(note) + "\n";
  return row;
}

}  // namespace

std::string run_sweep(const SweepConfig& config) {
  std::vector<Rational> discounts = config.discounts;
  std::vector<Rational> taxes = config.taxes;
  std::vector<int> vendor_counts = config.vendor_counts;
  std::sort(discounts.begin(), discounts.end());
  std::sort(taxes.begin(), taxes.end());
  std::sort(vendor_counts.begin(), vendor_counts.end());

  std::string csv =
      "n,d,alpha,vanilla_u,vanilla_u1_max,u1_bound_holds,u1_paper_bound_holds,attack_u,"
      "resilience,note\n";

  struct Cell {
    Rational d, alpha;
    int n;
  };
  std::vector<Cell> cells;
  for (const Rational& d : discounts) {
    for (const Rational& alpha : taxes) {
      for (int n : vendor_counts) cells.push_back({d, alpha, n});
    }
  }

  std::vector<std::string> rows(cells.size());
  if (config.jobs <= 1) {
    for (size_t i = 0; i < cells.size(); ++i) {
      rows[i] = sweep_cell(config, cells[i].d, cells[i].alpha, cells[i].n);
    }
  } else {
    // Bounded fan-out; rows are assembled in order regardless of completion.
    size_t next = 0;
    while (next < cells.size()) {
      size_t batch = std::min(static_cast<size_t>(config.jobs), cells.size() - next);
      std::vector<std::future<std::string>> futures;
      for (size_t k = 0; k < batch; ++k) {
        const Cell& cell = cells[next + k];
        futures.push_back(std::async(std::launch::async, [&config, cell] {
          return sweep_cell(config, cell.d, cell.alpha, cell.n);
        }));
      }
      for (size_t k = 0; k < batch; ++k) rows[next + k] = futures[k].get();
      next += batch;
    }
  }
  for (const std::string& row : rows) csv += row;
  return csv;
}

}  // namespace popsicle
