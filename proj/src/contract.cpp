#include "popsicle/contract.hpp"

#include <cctype>

#include "popsicle/errors.hpp"
#include "popsicle/spe_analysis.hpp"

namespace popsicle {

namespace {

struct Token {
  enum class Kind { kWord, kInteger, kRational, kSymbol, kEnd };
  Kind kind = Kind::kEnd;
  std::string text;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view source) : source_(source) { advance(); }

  const Token& peek() const { return current_; }

  Token next() {
    Token t = current_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < source_.size() &&
           std::isspace(static_cast<unsigned char>(source_[pos_]))) {
      bump();
    }
    current_.line = line_;
    current_.column = column_;
    if (pos_ >= source_.size()) {
      current_.kind = Token::Kind::kEnd;
      current_.text.clear();
      return;
    }
    char c = source_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string word;
      while (pos_ < source_.size() &&
             (std::isalnum(static_cast<unsigned char>(source_[pos_])) ||
              source_[pos_] == '_')) {
        word += source_[pos_];
        bump();
      }
      // "i*" is one token (the pledge keyword).
      if (word == "i" && pos_ < source_.size() && source_[pos_] == '*') {
        word += '*';
        bump();
      }
      current_.kind = Token::Kind::kWord;
      current_.text = std::move(word);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string num;
      while (pos_ < source_.size() && std::isdigit(static_cast<unsigned char>(source_[pos_]))) {
        num += source_[pos_];
        bump();
      }
      if (pos_ < source_.size() && source_[pos_] == '.') {
        throw ParseError(line_, column_, "decimal literals are not allowed; use a/b rationals");
      }
      if (pos_ + 1 < source_.size() && source_[pos_] == '/' &&
          std::isdigit(static_cast<unsigned char>(source_[pos_ + 1]))) {
        num += '/';
        bump();
        while (pos_ < source_.size() &&
               std::isdigit(static_cast<unsigned char>(source_[pos_]))) {
          num += source_[pos_];
          bump();
        }
        current_.kind = Token::Kind::kRational;
      } else {
        current_.kind = Token::Kind::kInteger;
      }
      current_.text = std::move(num);
      return;
    }
    // Multi-char symbols first.
    for (std::string_view sym : {"==", "!="}) {
      if (source_.substr(pos_, sym.size()) == sym) {
        current_.kind = Token::Kind::kSymbol;
        current_.text = std::string(sym);
        bump();
        bump();
        return;
      }
    }
    if (std::string("():,=").find(c) != std::string::npos) {
      current_.kind = Token::Kind::kSymbol;
      current_.text = std::string(1, c);
      bump();
      return;
    }
    throw ParseError(line_, column_, std::string("unexpected character '") + c + "'");
  }

  void bump() {
    if (source_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  std::string_view source_;
  size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
  Token current_;
};

class Parser {
 public:
  Parser(std::string_view source, const PopsicleParams& params, PlayerId default_owner)
      : lexer_(source), params_(params), owner_(default_owner) {}

  ContractAst parse() {
    maybe_owner_decl();
    ContractAst ast;
    ast.owner = owner_;
    bool saw_else = false;
    while (lexer_.peek().kind != Token::Kind::kEnd) {
      if (word_is("if")) {
        if (saw_else) fail("rules after the else rule are not allowed");
        lexer_.next();
        ContractRule rule;
        rule.guard = parse_pred();
        expect_word("then");
        rule.action = parse_action();
        ast.rules.push_back(std::move(rule));
      } else if (word_is("else")) {
        if (saw_else) fail("duplicate else rule");
        lexer_.next();
        ContractRule rule;
        rule.action = parse_action();
        ast.rules.push_back(std::move(rule));
        saw_else = true;
      } else {
        fail("expected 'if' or 'else'");
      }
    }
    if (!saw_else) fail("contract is missing the final else rule");
    type_check(ast);
    return ast;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    const Token& t = lexer_.peek();
    throw ParseError(t.line, t.column, message);
  }

  bool word_is(std::string_view word) const {
    return lexer_.peek().kind == Token::Kind::kWord && lexer_.peek().text == word;
  }

  bool symbol_is(std::string_view sym) const {
    return lexer_.peek().kind == Token::Kind::kSymbol && lexer_.peek().text == sym;
  }

  void expect_word(std::string_view word) {
    if (!word_is(word)) fail("expected '" + std::string(word) + "'");
    lexer_.next();
  }

  void expect_symbol(std::string_view sym) {
    if (!symbol_is(sym)) fail("expected '" + std::string(sym) + "'");
    lexer_.next();
  }

  int parse_integer() {
    if (lexer_.peek().kind != Token::Kind::kInteger) fail("expected an integer");
    return std::stoi(lexer_.next().text);
  }

  Rational parse_rational_token() {
    const Token& t = lexer_.peek();
    if (t.kind != Token::Kind::kInteger && t.kind != Token::Kind::kRational) {
      fail("expected a rational");
    }
    return parse_rational(lexer_.next().text);
  }

  void maybe_owner_decl() {
    if (!word_is("vendor")) return;
    lexer_.next();
    owner_ = parse_integer();
    expect_symbol(":");
  }

  Predicate parse_pred() {
    Predicate left = parse_conj();
    while (word_is("or")) {
      lexer_.next();
      Predicate node;
      node.kind = Predicate::Kind::kOr;
      node.children.push_back(std::move(left));
      node.children.push_back(parse_conj());
      left = std::move(node);
    }
    return left;
  }

  Predicate parse_conj() {
    Predicate left = parse_atom();
    while (word_is("and")) {
      lexer_.next();
      Predicate node;
      node.kind = Predicate::Kind::kAnd;
      node.children.push_back(std::move(left));
      node.children.push_back(parse_atom());
      left = std::move(node);
    }
    return left;
  }

  Predicate parse_atom() {
    if (word_is("not")) {
      lexer_.next();
      Predicate node;
      node.kind = Predicate::Kind::kNot;
      node.children.push_back(parse_atom());
      return node;
    }
    if (symbol_is("(")) {
      lexer_.next();
      Predicate inner = parse_pred();
      expect_symbol(")");
      return inner;
    }
    if (word_is("exists")) {
      lexer_.next();
      expect_word("vendor");
      if (lexer_.peek().kind != Token::Kind::kWord) fail("expected a variable name");
      std::string binder = lexer_.next().text;
      expect_symbol("!=");
      int owner_ref = parse_integer();
      if (owner_ref != owner_) {
        fail("exists clause must range over vendors != the contract owner (" +
             std::to_string(owner_) + ")");
      }
      expect_symbol(":");
      expect_word("committed");
      expect_symbol("(");
      if (lexer_.peek().kind != Token::Kind::kWord || lexer_.peek().text != binder) {
        fail("committed(...) must use the bound variable '" + binder + "'");
      }
      lexer_.next();
      expect_symbol(")");
      expect_symbol("!=");
      Predicate node;
      node.kind = Predicate::Kind::kExistsCommittedNe;
      node.binder = binder;
      node.value = parse_rational_token();
      return node;
    }
    if (word_is("committed")) {
      lexer_.next();
      expect_symbol("(");
      int vendor = parse_integer();
      expect_symbol(")");
      Predicate node;
      if (symbol_is("==")) {
        node.kind = Predicate::Kind::kCommittedEq;
      } else if (symbol_is("!=")) {
        node.kind = Predicate::Kind::kCommittedNe;
      } else {
        fail("expected '==' or '!='");
      }
      lexer_.next();
      node.vendor = vendor;
      node.value = parse_rational_token();
      return node;
    }
    if (word_is("buyer_pledges")) {
      lexer_.next();
      expect_symbol("(");
      expect_word("i*");
      expect_symbol("=");
      Predicate node;
      node.kind = Predicate::Kind::kBuyerPledges;
      node.vendor = parse_integer();
      expect_symbol(",");
      expect_word("q");
      expect_symbol("=");
      node.value = parse_rational_token();
      expect_symbol(")");
      return node;
    }
    fail("expected a guard clause");
  }

  ContractAction parse_action() {
    ContractAction action;
    if (word_is("commit_price")) {
      lexer_.next();
      expect_symbol("(");
      action.kind = ContractAction::Kind::kCommitPrice;
      action.price = parse_rational_token();
      expect_symbol(")");
      return action;
    }
    if (word_is("pledge")) {
      lexer_.next();
      expect_symbol("(");
      action.kind = ContractAction::Kind::kPledgeBuyer;
      action.pledge_vendor = parse_integer();
      expect_symbol(",");
      action.pledge_payment = parse_rational_token();
      expect_symbol(")");
      return action;
    }
    fail("expected 'commit_price(...)' or 'pledge(...)'");
  }

  void check_vendor_index(int vendor, bool must_differ_from_owner) const {
    if (vendor < 1 || vendor > params_.vendor_count) {
      throw ParseError(1, 1, "vendor index " + std::to_string(vendor) + " out of range [1," +
                                 std::to_string(params_.vendor_count) + "]");
    }
    if (must_differ_from_owner && vendor == owner_) {
      throw ParseError(1, 1, "guards may only reference players other than the owner");
    }
  }

  void check_pred(const Predicate& p) const {
    switch (p.kind) {
      case Predicate::Kind::kExistsCommittedNe:
        if (params_.price_index(p.value) < 0) {
          throw ParseError(1, 1, "price " + rational_to_string(p.value) + " off-grid");
        }
        break;
      case Predicate::Kind::kCommittedEq:
      case Predicate::Kind::kCommittedNe:
        check_vendor_index(p.vendor, /*must_differ_from_owner=*/true);
        if (params_.price_index(p.value) < 0) {
          throw ParseError(1, 1, "price " + rational_to_string(p.value) + " off-grid");
        }
        break;
      case Predicate::Kind::kBuyerPledges:
        check_vendor_index(p.vendor, /*must_differ_from_owner=*/false);
        if (!params_.side_payments || params_.payment_index(p.value) < 0) {
          throw ParseError(1, 1, "payment " + rational_to_string(p.value) + " off-grid");
        }
        break;
      default:
        for (const Predicate& child : p.children) check_pred(child);
    }
  }

  void type_check(const ContractAst& ast) const {
    if (owner_ < 0 || owner_ > params_.vendor_count) {
      throw ParseError(1, 1, "contract owner " + std::to_string(owner_) + " out of range");
    }
    for (const ContractRule& rule : ast.rules) {
      if (rule.guard) check_pred(*rule.guard);
      if (rule.action.kind == ContractAction::Kind::kCommitPrice) {
        if (owner_ == kBuyer) {
          throw ParseError(1, 1, "a buyer contract cannot commit to a price");
        }
        if (params_.price_index(rule.action.price) < 0) {
          throw ParseError(1, 1, "price " + rational_to_string(rule.action.price) + " off-grid");
        }
      } else {
        if (owner_ != kBuyer) {
          throw ParseError(1, 1, "only a buyer contract can pledge");
        }
        check_vendor_index(rule.action.pledge_vendor, false);
        if (!params_.side_payments ||
            params_.payment_index(rule.action.pledge_payment) < 0) {
          throw ParseError(1, 1, "payment " + rational_to_string(rule.action.pledge_payment) +
                                     " off-grid");
        }
      }
    }
  }

  Lexer lexer_;
  const PopsicleParams& params_;
  PlayerId owner_;
};

std::string pred_to_string(const Predicate& p, PlayerId owner) {
  switch (p.kind) {
    case Predicate::Kind::kExistsCommittedNe:
      return "exists vendor " + p.binder + " != " + std::to_string(owner) + " : committed(" +
             p.binder + ") != " + rational_to_string(p.value);
    case Predicate::Kind::kCommittedEq:
      return "committed(" + std::to_string(p.vendor) + ") == " + rational_to_string(p.value);
    case Predicate::Kind::kCommittedNe:
      return "committed(" + std::to_string(p.vendor) + ") != " + rational_to_string(p.value);
    case Predicate::Kind::kBuyerPledges:
      return "buyer_pledges(i*=" + std::to_string(p.vendor) +
             ", q=" + rational_to_string(p.value) + ")";
    case Predicate::Kind::kNot:
      return "not (" + pred_to_string(p.children[0], owner) + ")";
    case Predicate::Kind::kAnd:
      return "(" + pred_to_string(p.children[0], owner) + " and " +
             pred_to_string(p.children[1], owner) + ")";
    case Predicate::Kind::kOr:
      return "(" + pred_to_string(p.children[0], owner) + " or " +
             pred_to_string(p.children[1], owner) + ")";
  }
  return "?";
}

std::string action_to_string(const ContractAction& action) {
  if (action.kind == ContractAction::Kind::kCommitPrice) {
    return "commit_price(" + rational_to_string(action.price) + ")";
  }
  return "pledge(" + std::to_string(action.pledge_vendor) + ", " +
         rational_to_string(action.pledge_payment) + ")";
}

}  // namespace

ContractAst parse_contract(std::string_view source, const PopsicleParams& params,
                           PlayerId default_owner) {
  params.validate();
  return Parser(source, params, default_owner).parse();
}

std::string pretty_print(const ContractAst& ast) {
  std::string out = "vendor " + std::to_string(ast.owner) + ":\n";
  for (const ContractRule& rule : ast.rules) {
    if (rule.guard) {
      out += "if " + pred_to_string(*rule.guard, ast.owner) + " then " +
             action_to_string(rule.action) + "\n";
    } else {
      out += "else " + action_to_string(rule.action) + "\n";
    }
  }
  return out;
}

ContractAst builtin_theorem2(const PopsicleParams& params) {
  params.validate();
  if (params.payment_index(Rational(1)) < 0) {
    throw GridError("the attack contract needs payment 1 on the payment grid");
  }
  if (!params.side_payments) {
    throw GridError("the attack contract needs side payments enabled");
  }
  ContractAst ast;
  ast.owner = 1;

  Predicate undercut;
  undercut.kind = Predicate::Kind::kExistsCommittedNe;
  undercut.binder = "j";
  undercut.value = 1;

  Predicate pledge;
  pledge.kind = Predicate::Kind::kBuyerPledges;
  pledge.vendor = 1;
  pledge.value = 1;

  ContractAction price0{ContractAction::Kind::kCommitPrice, Rational(0), 1, Rational(0)};
  ContractAction price1{ContractAction::Kind::kCommitPrice, Rational(1), 1, Rational(0)};

  ast.rules.push_back(ContractRule{undercut, price0});
  ast.rules.push_back(ContractRule{pledge, price0});
  ast.rules.push_back(ContractRule{std::nullopt, price1});
  return ast;
}

ContractAst builtin_sweetened(const PopsicleParams& params, const Rational& epsilon) {
  if (epsilon <= 0 || epsilon >= 1) {
    throw GridError("the sweetener must lie strictly between 0 and 1");
  }
  Rational q = Rational(1) - epsilon;
  if (params.payment_index(q) < 0) {
    throw GridError("sweetened pledge payment " + rational_to_string(q) +
                    " is not on the payment grid");
  }
  ContractAst ast = builtin_theorem2(params);
  for (ContractRule& rule : ast.rules) {
    if (rule.guard && rule.guard->kind == Predicate::Kind::kBuyerPledges) {
      rule.guard->value = q;
    }
  }
  ast.sweetener = epsilon;
  return ast;
}

bool evaluate_predicate(const Predicate& pred, const ContractAst& ast,
                        const PopsicleParams& params, const BranchFacts& facts) {
  switch (pred.kind) {
    case Predicate::Kind::kExistsCommittedNe: {
      for (const auto& [vendor, prices] : facts.committed) {
        if (vendor == ast.owner) continue;
        for (const Rational& p : prices) {
          if (p != pred.value) return true;
        }
      }
      return false;
    }
    case Predicate::Kind::kCommittedEq: {
      auto it = facts.committed.find(pred.vendor);
      if (it == facts.committed.end()) {
        throw StructureError("guard references vendor " + std::to_string(pred.vendor) +
                             " with no commitment information in this branch");
      }
      return it->second.size() == 1 && *it->second.begin() == pred.value;
    }
    case Predicate::Kind::kCommittedNe: {
      Predicate eq = pred;
      eq.kind = Predicate::Kind::kCommittedEq;
      return !evaluate_predicate(eq, ast, params, facts);
    }
    case Predicate::Kind::kBuyerPledges:
      return facts.pledge && facts.pledge->vendor == pred.vendor &&
             facts.pledge->payment == pred.value;
    case Predicate::Kind::kNot:
      return !evaluate_predicate(pred.children[0], ast, params, facts);
    case Predicate::Kind::kAnd:
      return evaluate_predicate(pred.children[0], ast, params, facts) &&
             evaluate_predicate(pred.children[1], ast, params, facts);
    case Predicate::Kind::kOr:
      return evaluate_predicate(pred.children[0], ast, params, facts) ||
             evaluate_predicate(pred.children[1], ast, params, facts);
  }
  return false;
}

namespace {

bool pred_references_buyer(const Predicate& p) {
  if (p.kind == Predicate::Kind::kBuyerPledges) return true;
  for (const Predicate& child : p.children) {
    if (pred_references_buyer(child)) return true;
  }
  return false;
}

bool pred_references_vendors(const Predicate& p, std::set<int>& vendors, bool& any_exists) {
  switch (p.kind) {
    case Predicate::Kind::kExistsCommittedNe:
      any_exists = true;
      return true;
    case Predicate::Kind::kCommittedEq:
    case Predicate::Kind::kCommittedNe:
      vendors.insert(p.vendor);
      return true;
    default:
      for (const Predicate& child : p.children) pred_references_vendors(child, vendors, any_exists);
      return true;
  }
}

}  // namespace

Cut compile_to_cut(const ContractAst& ast, const ExpandedGame& inner,
                   const PopsicleParams& params) {
  // The owner must not already be expanded inside `inner`, and every player a
  // guard references must be.
  std::set<PlayerId> expanded(inner.ordering.begin(), inner.ordering.end());
  if (expanded.count(ast.owner)) {
    throw StructureError("contract owner " + std::to_string(ast.owner) +
                         " already has a commitment node in the inner expansion");
  }
  std::set<int> referenced;
  bool any_exists = false;
  bool references_buyer = false;
  for (const ContractRule& rule : ast.rules) {
    if (!rule.guard) continue;
    pred_references_vendors(*rule.guard, referenced, any_exists);
    if (pred_references_buyer(*rule.guard)) references_buyer = true;
  }
  if (any_exists) {
    for (int j = 1; j <= params.vendor_count; ++j) {
      if (j != ast.owner) referenced.insert(j);
    }
  }
  for (int j : referenced) {
    if (!expanded.count(j)) {
      throw StructureError("guard references vendor " + std::to_string(j) +
                           " with no commitment node below the owner");
    }
  }
  if (references_buyer && !expanded.count(kBuyer)) {
    throw StructureError("guard references a buyer pledge but the buyer has no "
                         "commitment node below the owner");
  }

  Cut cut;
  cut.owner = ast.owner;

  // Walk commitment nodes down to each stage copy, classify the branch, and
  // pin the owner's kept actions there.
  auto visit = [&](auto&& self, NodeId at) -> void {
    if (const CommitmentNodeInfo* info = inner.info_for(at)) {
      for (NodeId child : inner.tree.node(at).children) self(self, child);
      (void)info;
      return;
    }
    StageView view = recover_stage_view(inner.tree, at, params);
    BranchFacts facts;
    StageAnalysis analysis = analyze_stage(view, EquilibriumConcept::kSubgamePerfect);
    for (int j = 1; j <= params.vendor_count; ++j) {
      if (j == ast.owner) continue;
      std::set<Rational> prices;
      for (const StageRecord& record : analysis.records) {
        prices.insert(record.prices[static_cast<size_t>(j - 1)]);
      }
      facts.committed[j] = std::move(prices);
    }
    // Pledge detection: every buyer node pinned to one identical action.
    std::optional<ActionLabel> pinned;
    bool pledged = !view.buyer_nodes.empty();
    for (const auto& [key, node] : view.buyer_nodes) {
      (void)key;
      if (node.labels.size() != 1 || (pinned && *pinned != node.labels.front())) {
        pledged = false;
        break;
      }
      pinned = node.labels.front();
    }
    if (pledged && pinned) facts.pledge = decode_buyer_action(params, *pinned);

    const ContractRule* matched = nullptr;
    for (const ContractRule& rule : ast.rules) {
      if (!rule.guard || evaluate_predicate(*rule.guard, ast, params, facts)) {
        matched = &rule;
        break;
      }
    }
    // The else rule guarantees a match.
    if (matched->action.kind == ContractAction::Kind::kCommitPrice) {
      int idx = params.price_index(matched->action.price);
      InfoSetId set = view.vendor_sets[static_cast<size_t>(ast.owner - 1)];
      const auto& available = view.vendor_prices[static_cast<size_t>(ast.owner - 1)];
      if (std::find(available.begin(), available.end(), idx) == available.end()) {
        throw StructureError("contract commits to price " +
                             rational_to_string(matched->action.price) +
                             " which is unavailable in a branch");
      }
      cut.kept[set] = {static_cast<ActionLabel>(idx)};
    } else {
      ActionLabel label = encode_buyer_action(
          params, BuyerAction{matched->action.pledge_vendor, matched->action.pledge_payment});
      for (const auto& [key, node] : view.buyer_nodes) {
        (void)key;
        if (std::find(node.labels.begin(), node.labels.end(), label) == node.labels.end()) {
          throw StructureError("contract pledge is unavailable in a branch");
        }
        cut.kept[node.info_set] = {label};
      }
    }
  };
  visit(visit, inner.tree.root());
  validate_cut(inner.tree, cut);
  return cut;
}

SchemaEntry contract_schema_entry(const ContractAst& ast, const PopsicleParams& params,
                                  const std::string& label) {
  return SchemaEntry{label, [ast, params](const ExpandedGame& inner, PlayerId player) {
                       if (player != ast.owner) {
                         throw StructureError("contract entry attached to the wrong player");
                       }
                       return compile_to_cut(ast, inner, params);
                     }};
}

}  // namespace popsicle
