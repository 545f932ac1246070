#include "bdl/language.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace bdl {

namespace {

// Active name -> variable slot scope during condition parsing. Slots are
// appended to the owning table permanently; visibility follows the scope.
struct VarScope {
  std::vector<Variable>* table;
  std::unordered_map<std::string, VarId> visible;
};

class Analyzer {
 public:
  explicit Analyzer(std::vector<ParseError>& errors) : errors_(errors) {}

  void error(const SourceSpan& span, const std::string& msg,
             ParseError::Kind kind = ParseError::Kind::Semantic) {
    errors_.push_back({span, msg, kind});
  }

  bool require_list(const SExpr& e, const std::string& what) {
    if (e.is_list()) return true;
    error(e.span, "expected " + what, ParseError::Kind::Syntactic);
    return false;
  }

  bool require_symbol(const SExpr& e, const std::string& what) {
    if (e.is_symbol()) return true;
    error(e.span, "expected " + what, ParseError::Kind::Syntactic);
    return false;
  }

 protected:
  std::vector<ParseError>& errors_;
};

// Parses "name name - type name - type" runs.
template <typename Fn>
void parse_typed_list(Analyzer& a, const std::vector<SExpr>& items, size_t begin,
                      const Domain& domain, Fn emit) {
  std::vector<const SExpr*> pending;
  for (size_t i = begin; i < items.size(); ++i) {
    const SExpr& it = items[i];
    if (!it.is_symbol()) {
      a.error(it.span, "expected a name", ParseError::Kind::Syntactic);
      return;
    }
    if (it.text == "-") {
      if (i + 1 >= items.size() || !items[i + 1].is_symbol()) {
        a.error(it.span, "expected a type after '-'", ParseError::Kind::Syntactic);
        return;
      }
      const SExpr& ty = items[++i];
      auto tid = domain.type_id(ty.text);
      if (!tid) {
        a.error(ty.span, "undeclared type '" + ty.text + "'");
        return;
      }
      if (pending.empty())
        a.error(ty.span, "type '" + ty.text + "' declared with no names");
      for (const SExpr* name : pending) emit(*name, *tid);
      pending.clear();
    } else {
      pending.push_back(&it);
    }
  }
  if (!pending.empty())
    a.error(pending.front()->span, "names are missing a '- type' suffix");
}

class ConditionParser : public Analyzer {
 public:
  ConditionParser(std::vector<ParseError>& errors, const Domain& domain,
                  const std::function<std::optional<ConstId>(const std::string&)>& const_lookup,
                  const std::function<TypeId(ConstId)>& const_type, VarScope& scope)
      : Analyzer(errors),
        domain_(domain),
        const_lookup_(const_lookup),
        const_type_(const_type),
        scope_(scope) {}

  std::optional<Term> parse_term(const SExpr& e, TypeId expected) {
    if (!e.is_symbol()) {
      error(e.span, "expected a variable or constant", ParseError::Kind::Syntactic);
      return std::nullopt;
    }
    if (!e.text.empty() && e.text[0] == '?') {
      std::string name = e.text.substr(1);
      auto it = scope_.visible.find(name);
      if (it == scope_.visible.end()) {
        error(e.span, "variable '?" + name + "' is not bound here");
        return std::nullopt;
      }
      TypeId vt = (*scope_.table)[it->second].type;
      if (expected >= 0 && vt != expected) {
        error(e.span, "variable '?" + name + "' has type '" + domain_.types[vt].name +
                          "', expected '" + domain_.types[expected].name + "'");
        return std::nullopt;
      }
      return Term::make_var(it->second);
    }
    auto cid = const_lookup_(e.text);
    if (!cid) {
      error(e.span, "unknown constant '" + e.text + "'");
      return std::nullopt;
    }
    if (expected >= 0 && const_type_(*cid) != expected) {
      error(e.span, "constant '" + e.text + "' has the wrong type");
      return std::nullopt;
    }
    return Term::make_const(*cid);
  }

  std::optional<Literal> parse_atom(const SExpr& e, bool negated) {
    if (!require_list(e, "an atom")) return std::nullopt;
    if (e.items.empty() || !e.items[0].is_symbol()) {
      error(e.span, "expected a predicate name", ParseError::Kind::Syntactic);
      return std::nullopt;
    }
    auto pid = domain_.pred_id(e.items[0].text);
    if (!pid) {
      error(e.items[0].span, "undeclared predicate '" + e.items[0].text + "'");
      return std::nullopt;
    }
    const Predicate& pred = domain_.predicates[*pid];
    if (e.items.size() - 1 != pred.param_types.size()) {
      error(e.span, "predicate '" + pred.name + "' takes " +
                        std::to_string(pred.param_types.size()) + " arguments");
      return std::nullopt;
    }
    Literal lit;
    lit.pred = *pid;
    lit.negated = negated;
    for (size_t i = 1; i < e.items.size(); ++i) {
      auto t = parse_term(e.items[i], pred.param_types[i - 1]);
      if (!t) return std::nullopt;
      lit.args.push_back(*t);
    }
    return lit;
  }

  // literal := atom | (not atom)
  std::optional<Literal> parse_literal(const SExpr& e) {
    if (e.is_list() && !e.items.empty() && e.items[0].is_symbol("not")) {
      if (e.items.size() != 2) {
        error(e.span, "'not' takes one atom", ParseError::Kind::Syntactic);
        return std::nullopt;
      }
      return parse_atom(e.items[1], true);
    }
    return parse_atom(e, false);
  }

  std::optional<VarId> open_quantifier(const SExpr& binder) {
    if (!require_list(binder, "a quantifier binder like (?x - type)")) return std::nullopt;
    if (binder.items.size() != 3 || !binder.items[0].is_symbol() ||
        !binder.items[1].is_symbol("-") || !binder.items[2].is_symbol() ||
        binder.items[0].text.empty() || binder.items[0].text[0] != '?') {
      error(binder.span, "quantifier binder must be (?x - type)", ParseError::Kind::Syntactic);
      return std::nullopt;
    }
    std::string name = binder.items[0].text.substr(1);
    auto tid = domain_.type_id(binder.items[2].text);
    if (!tid) {
      error(binder.items[2].span, "undeclared type '" + binder.items[2].text + "'");
      return std::nullopt;
    }
    if (scope_.visible.count(name)) {
      error(binder.items[0].span, "variable '?" + name + "' shadows an enclosing binding");
      return std::nullopt;
    }
    VarId id = static_cast<VarId>(scope_.table->size());
    scope_.table->push_back({name, *tid});
    scope_.visible[name] = id;
    return id;
  }

  void close_quantifier(VarId id) { scope_.visible.erase((*scope_.table)[id].name); }

  std::optional<Condition> parse_condition(const SExpr& e) {
    if (!require_list(e, "a condition")) return std::nullopt;
    if (e.items.empty()) return Condition::truth();
    const SExpr& head = e.items[0];
    if (head.is_symbol("and") || head.is_symbol("or")) {
      std::vector<Condition> children;
      for (size_t i = 1; i < e.items.size(); ++i) {
        auto c = parse_condition(e.items[i]);
        if (!c) return std::nullopt;
        children.push_back(std::move(*c));
      }
      return head.is_symbol("and") ? Condition::conj(std::move(children))
                                   : Condition::disj(std::move(children));
    }
    if (head.is_symbol("exists") || head.is_symbol("forall")) {
      if (e.items.size() != 3) {
        error(e.span, "quantifier takes a binder and a body", ParseError::Kind::Syntactic);
        return std::nullopt;
      }
      auto var = open_quantifier(e.items[1]);
      if (!var) return std::nullopt;
      auto body = parse_condition(e.items[2]);
      close_quantifier(*var);
      if (!body) return std::nullopt;
      return head.is_symbol("exists") ? Condition::exists(*var, std::move(*body))
                                      : Condition::forall(*var, std::move(*body));
    }
    if (head.is_symbol("=")) return parse_equality(e, false);
    if (head.is_symbol("not")) {
      if (e.items.size() != 2) {
        error(e.span, "'not' takes one atom or equality", ParseError::Kind::Syntactic);
        return std::nullopt;
      }
      const SExpr& inner = e.items[1];
      if (inner.is_list() && !inner.items.empty() && inner.items[0].is_symbol("="))
        return parse_equality(inner, true);
      auto lit = parse_atom(inner, true);
      if (!lit) return std::nullopt;
      return Condition::literal(std::move(*lit));
    }
    auto lit = parse_atom(e, false);
    if (!lit) return std::nullopt;
    return Condition::literal(std::move(*lit));
  }

 private:
  std::optional<Condition> parse_equality(const SExpr& e, bool negated) {
    if (e.items.size() != 3) {
      error(e.span, "'=' takes two terms", ParseError::Kind::Syntactic);
      return std::nullopt;
    }
    auto lhs = parse_term(e.items[1], -1);
    if (!lhs) return std::nullopt;
    TypeId lt = lhs->kind == Term::Kind::Variable ? (*scope_.table)[lhs->variable].type
                                                  : const_type_(lhs->constant);
    auto rhs = parse_term(e.items[2], lt);
    if (!rhs) return std::nullopt;
    return Condition::equals(*lhs, *rhs, negated);
  }

  const Domain& domain_;
  const std::function<std::optional<ConstId>(const std::string&)>& const_lookup_;
  const std::function<TypeId(ConstId)>& const_type_;
  VarScope& scope_;
};

class DomainParser : public Analyzer {
 public:
  explicit DomainParser(std::vector<ParseError>& errors) : Analyzer(errors) {}

  std::optional<Domain> parse(const SExpr& form) {
    if (!require_list(form, "(define (domain ...) ...)")) return std::nullopt;
    if (form.items.size() < 2 || !form.items[0].is_symbol("define") ||
        !form.items[1].is_list() || form.items[1].items.size() != 2 ||
        !form.items[1].items[0].is_symbol("domain") || !form.items[1].items[1].is_symbol()) {
      error(form.span, "expected (define (domain NAME) ...)", ParseError::Kind::Syntactic);
      return std::nullopt;
    }
    domain_.name = form.items[1].items[1].text;
    for (size_t i = 2; i < form.items.size(); ++i) {
      const SExpr& item = form.items[i];
      if (!require_list(item, "a domain section")) continue;
      if (item.items.empty() || !item.items[0].is_symbol()) {
        error(item.span, "expected a section keyword", ParseError::Kind::Syntactic);
        continue;
      }
      const std::string& key = item.items[0].text;
      if (key == ":types") {
        parse_types(item);
      } else if (key == ":constants") {
        parse_constants(item);
      } else if (key == ":predicates") {
        parse_predicates(item);
      } else if (key == ":action") {
        parse_action(item);
      } else {
        error(item.items[0].span, "unknown domain section '" + key + "'");
      }
    }
    if (!errors_.empty()) return std::nullopt;
    return std::move(domain_);
  }

 private:
  void parse_types(const SExpr& sec) {
    for (size_t i = 1; i < sec.items.size(); ++i) {
      if (!require_symbol(sec.items[i], "a type name")) continue;
      if (domain_.type_id(sec.items[i].text))
        error(sec.items[i].span, "duplicate type '" + sec.items[i].text + "'");
      else
        domain_.types.push_back({sec.items[i].text});
    }
  }

  void parse_constants(const SExpr& sec) {
    parse_typed_list(*this, sec.items, 1, domain_, [&](const SExpr& name, TypeId t) {
      for (const auto& c : domain_.constants)
        if (c.name == name.text) {
          error(name.span, "duplicate constant '" + name.text + "'");
          return;
        }
      domain_.constants.push_back({name.text, t});
    });
  }

  void parse_predicates(const SExpr& sec) {
    for (size_t i = 1; i < sec.items.size(); ++i) {
      const SExpr& decl = sec.items[i];
      if (!require_list(decl, "a predicate declaration")) continue;
      if (decl.items.empty() || !decl.items[0].is_symbol()) {
        error(decl.span, "expected a predicate name", ParseError::Kind::Syntactic);
        continue;
      }
      Predicate p;
      p.name = decl.items[0].text;
      if (domain_.pred_id(p.name)) {
        error(decl.items[0].span, "duplicate predicate '" + p.name + "'");
        continue;
      }
      bool ok = true;
      parse_typed_list(*this, decl.items, 1, domain_, [&](const SExpr& arg, TypeId t) {
        if (arg.text.empty() || arg.text[0] != '?') {
          error(arg.span, "predicate parameters must look like ?name");
          ok = false;
          return;
        }
        p.param_types.push_back(t);
      });
      if (ok) domain_.predicates.push_back(std::move(p));
    }
  }

  void parse_action(const SExpr& sec) {
    if (sec.items.size() < 2 || !sec.items[1].is_symbol()) {
      error(sec.span, "expected an action name", ParseError::Kind::Syntactic);
      return;
    }
    ActionSchema schema;
    schema.name = sec.items[1].text;
    if (domain_.schema_id(schema.name)) {
      error(sec.items[1].span, "duplicate action '" + schema.name + "'");
      return;
    }

    VarScope scope{&schema.variables, {}};
    auto const_lookup = [&](const std::string& n) -> std::optional<ConstId> {
      for (size_t i = 0; i < domain_.constants.size(); ++i)
        if (domain_.constants[i].name == n) return static_cast<ConstId>(i);
      return std::nullopt;
    };
    auto const_type = [&](ConstId c) { return domain_.constants[c].type; };
    std::function<std::optional<ConstId>(const std::string&)> lookup_fn = const_lookup;
    std::function<TypeId(ConstId)> type_fn = const_type;
    ConditionParser cp(errors_, domain_, lookup_fn, type_fn, scope);

    size_t i = 2;
    const SExpr* precondition = nullptr;
    const SExpr* effect = nullptr;
    while (i < sec.items.size()) {
      const SExpr& key = sec.items[i];
      if (!key.is_symbol() || i + 1 >= sec.items.size()) {
        error(key.span, "expected :parameters/:precondition/:effect followed by a form",
              ParseError::Kind::Syntactic);
        return;
      }
      const SExpr& val = sec.items[i + 1];
      if (key.text == ":parameters") {
        if (!require_list(val, "a parameter list")) return;
        parse_typed_list(*this, val.items, 0, domain_, [&](const SExpr& name, TypeId t) {
          if (name.text.empty() || name.text[0] != '?') {
            error(name.span, "parameters must look like ?name");
            return;
          }
          std::string n = name.text.substr(1);
          if (scope.visible.count(n)) {
            error(name.span, "duplicate parameter '?" + n + "'");
            return;
          }
          VarId id = static_cast<VarId>(schema.variables.size());
          schema.variables.push_back({n, t});
          scope.visible[n] = id;
        });
        schema.param_count = static_cast<int32_t>(schema.variables.size());
      } else if (key.text == ":precondition") {
        precondition = &val;
      } else if (key.text == ":effect") {
        effect = &val;
      } else {
        error(key.span, "unknown action keyword '" + key.text + "'");
        return;
      }
      i += 2;
    }

    if (precondition) parse_precondition(*precondition, cp, schema);
    if (!effect) {
      error(sec.span, "action '" + schema.name + "' has no :effect");
      return;
    }
    parse_effect(*effect, cp, schema);
    if (errors_.empty()) domain_.schemas.push_back(std::move(schema));
  }

  void parse_precondition(const SExpr& e, ConditionParser& cp, ActionSchema& schema) {
    if (e.is_list() && e.items.empty()) return;  // ()
    if (e.is_list() && !e.items.empty() &&
        (e.items[0].is_symbol("or") || e.items[0].is_symbol("exists") ||
         e.items[0].is_symbol("forall"))) {
      error(e.span, "preconditions are conjunctions of literals; or/exists/forall are "
                    "only allowed in effect conditions and goals");
      return;
    }
    if (e.is_list() && !e.items.empty() && e.items[0].is_symbol("and")) {
      for (size_t i = 1; i < e.items.size(); ++i) {
        auto lit = cp.parse_literal(e.items[i]);
        if (lit) schema.precondition.push_back(std::move(*lit));
      }
      return;
    }
    auto lit = cp.parse_literal(e);
    if (lit) schema.precondition.push_back(std::move(*lit));
  }

  // effect := item | (and item*)
  // item   := literal | (when cond body) | (forall (?v - t) (when cond body))
  void parse_effect(const SExpr& e, ConditionParser& cp, ActionSchema& schema) {
    if (e.is_list() && !e.items.empty() && e.items[0].is_symbol("and")) {
      for (size_t i = 1; i < e.items.size(); ++i) parse_effect_item(e.items[i], cp, schema);
      return;
    }
    parse_effect_item(e, cp, schema);
  }

  void parse_effect_item(const SExpr& e, ConditionParser& cp, ActionSchema& schema) {
    if (!require_list(e, "an effect")) return;
    ConditionalEffect eff;
    if (!e.items.empty() && e.items[0].is_symbol("forall")) {
      if (e.items.size() != 3) {
        error(e.span, "forall effect takes a binder and a (when ...) body",
              ParseError::Kind::Syntactic);
        return;
      }
      auto var = cp.open_quantifier(e.items[1]);
      if (!var) return;
      eff.forall_var = *var;
      parse_when(e.items[2], cp, eff);
      cp.close_quantifier(*var);
    } else if (!e.items.empty() && e.items[0].is_symbol("when")) {
      parse_when(e, cp, eff);
    } else {
      auto lit = cp.parse_literal(e);
      if (!lit) return;
      eff.condition = Condition::truth();
      eff.literals.push_back(std::move(*lit));
    }
    if (eff.literals.empty()) {
      error(e.span, "effect asserts no literals");
      return;
    }
    schema.effects.push_back(std::move(eff));
  }

  void parse_when(const SExpr& e, ConditionParser& cp, ConditionalEffect& eff) {
    if (!e.is_list() || e.items.size() != 3 || !e.items[0].is_symbol("when")) {
      error(e.span, "expected (when condition literals)", ParseError::Kind::Syntactic);
      return;
    }
    auto cond = cp.parse_condition(e.items[1]);
    if (cond) eff.condition = std::move(*cond);
    const SExpr& body = e.items[2];
    if (body.is_list() && !body.items.empty() && body.items[0].is_symbol("and")) {
      for (size_t i = 1; i < body.items.size(); ++i) {
        auto lit = cp.parse_literal(body.items[i]);
        if (lit) eff.literals.push_back(std::move(*lit));
      }
      return;
    }
    auto lit = cp.parse_literal(body);
    if (lit) eff.literals.push_back(std::move(*lit));
  }

  Domain domain_;
};

class ProblemParser : public Analyzer {
 public:
  ProblemParser(std::vector<ParseError>& errors, const Domain& domain)
      : Analyzer(errors), domain_(domain) {}

  std::optional<ParsedProblem> parse(const SExpr& form) {
    if (!require_list(form, "(define (problem ...) ...)")) return std::nullopt;
    if (form.items.size() < 2 || !form.items[0].is_symbol("define") ||
        !form.items[1].is_list() || form.items[1].items.size() != 2 ||
        !form.items[1].items[0].is_symbol("problem") || !form.items[1].items[1].is_symbol()) {
      error(form.span, "expected (define (problem NAME) ...)", ParseError::Kind::Syntactic);
      return std::nullopt;
    }
    name_ = form.items[1].items[1].text;

    // Objects must be known before init/goals, and sections may appear in any
    // order, so collect section pointers first.
    std::vector<const SExpr*> goals, inits, mappings;
    for (size_t i = 2; i < form.items.size(); ++i) {
      const SExpr& item = form.items[i];
      if (!require_list(item, "a problem section")) continue;
      if (item.items.empty() || !item.items[0].is_symbol()) {
        error(item.span, "expected a section keyword", ParseError::Kind::Syntactic);
        continue;
      }
      const std::string& key = item.items[0].text;
      if (key == ":domain") {
        if (item.items.size() != 2 || !item.items[1].is_symbol())
          error(item.span, "expected (:domain NAME)", ParseError::Kind::Syntactic);
        else if (item.items[1].text != domain_.name)
          error(item.items[1].span, "problem is for domain '" + item.items[1].text +
                                        "', loaded domain is '" + domain_.name + "'");
      } else if (key == ":objects") {
        parse_objects(item);
      } else if (key == ":init") {
        inits.push_back(&item);
      } else if (key == ":goal") {
        goals.push_back(&item);
      } else if (key == ":mapping") {
        mappings.push_back(&item);
      } else {
        error(item.items[0].span, "unknown problem section '" + key + "'");
      }
    }

    build_universe_index();
    for (const SExpr* s : inits) parse_init(*s);
    std::vector<NamedGoal> named_goals;
    for (const SExpr* s : goals) parse_goal(*s, named_goals);
    std::vector<MappingRule> rules;
    for (const SExpr* s : mappings) parse_mapping(*s, rules);

    if (!errors_.empty()) return std::nullopt;
    ParsedProblem out{Problem(domain_, name_, objects_, init_, std::move(named_goals)),
                      std::move(rules)};
    for (const auto& msg : validate_rules(out.mapping, out.problem))
      error(form.span, msg);
    if (!errors_.empty()) return std::nullopt;
    return out;
  }

 private:
  void parse_objects(const SExpr& sec) {
    parse_typed_list(*this, sec.items, 1, domain_, [&](const SExpr& name, TypeId t) {
      for (const auto& c : domain_.constants)
        if (c.name == name.text) {
          error(name.span, "object '" + name.text + "' collides with a domain constant");
          return;
        }
      for (const auto& c : objects_)
        if (c.name == name.text) {
          error(name.span, "duplicate object '" + name.text + "'");
          return;
        }
      objects_.push_back({name.text, t});
    });
  }

  void build_universe_index() {
    universe_ = domain_.constants;
    for (const auto& o : objects_) universe_.push_back(o);
    for (size_t i = 0; i < universe_.size(); ++i) index_[universe_[i].name] = static_cast<ConstId>(i);
  }

  std::optional<ConstId> lookup(const std::string& n) const {
    auto it = index_.find(n);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  void parse_init(const SExpr& sec) {
    std::vector<Variable> no_vars;
    VarScope scope{&no_vars, {}};
    std::function<std::optional<ConstId>(const std::string&)> lookup_fn =
        [&](const std::string& n) { return lookup(n); };
    std::function<TypeId(ConstId)> type_fn = [&](ConstId c) { return universe_[c].type; };
    ConditionParser cp(errors_, domain_, lookup_fn, type_fn, scope);
    for (size_t i = 1; i < sec.items.size(); ++i) {
      if (sec.items[i].is_list() && !sec.items[i].items.empty() &&
          sec.items[i].items[0].is_symbol("not")) {
        error(sec.items[i].span, "init atoms must be positive (closed world)");
        continue;
      }
      auto lit = cp.parse_atom(sec.items[i], false);
      if (lit) init_.push_back(std::move(*lit));
    }
  }

  void parse_goal(const SExpr& sec, std::vector<NamedGoal>& out) {
    if (sec.items.size() != 3 || !sec.items[1].is_symbol()) {
      error(sec.span, "expected (:goal LABEL CONDITION)", ParseError::Kind::Syntactic);
      return;
    }
    NamedGoal goal;
    goal.label = sec.items[1].text;
    for (const auto& g : out)
      if (g.label == goal.label) {
        error(sec.items[1].span, "duplicate goal label '" + goal.label + "'");
        return;
      }
    VarScope scope{&goal.goal_vars, {}};
    std::function<std::optional<ConstId>(const std::string&)> lookup_fn =
        [&](const std::string& n) { return lookup(n); };
    std::function<TypeId(ConstId)> type_fn = [&](ConstId c) { return universe_[c].type; };
    ConditionParser cp(errors_, domain_, lookup_fn, type_fn, scope);
    auto cond = cp.parse_condition(sec.items[2]);
    if (!cond) return;
    goal.condition = std::move(*cond);
    out.push_back(std::move(goal));
  }

  void parse_mapping(const SExpr& sec, std::vector<MappingRule>& out) {
    for (size_t i = 1; i < sec.items.size(); ++i) parse_rule(sec.items[i], out);
  }

  static std::string value_text(const SExpr& e) { return e.text; }

  std::optional<MappingGuard> parse_guard(const SExpr& e) {
    if (!e.is_list() || e.items.empty() || !e.items[0].is_symbol()) {
      error(e.span, "expected a guard expression", ParseError::Kind::Syntactic);
      return std::nullopt;
    }
    MappingGuard g;
    const std::string& head = e.items[0].text;
    if (head == "and") {
      g.kind = MappingGuard::Kind::All;
      for (size_t i = 1; i < e.items.size(); ++i) {
        auto child = parse_guard(e.items[i]);
        if (!child) return std::nullopt;
        g.children.push_back(std::move(*child));
      }
      return g;
    }
    if (head == "arg-is" || head == "arg-contains") {
      if (e.items.size() != 3 || !e.items[1].is_symbol() ||
          (!e.items[2].is_symbol() && !e.items[2].is_string())) {
        error(e.span, "expected (" + head + " ARG VALUE)", ParseError::Kind::Syntactic);
        return std::nullopt;
      }
      g.kind = head == "arg-is" ? MappingGuard::Kind::ArgIs : MappingGuard::Kind::ArgContains;
      g.arg = e.items[1].text;
      g.value = value_text(e.items[2]);
      return g;
    }
    error(e.items[0].span, "unknown guard '" + head + "'");
    return std::nullopt;
  }

  std::optional<ArgExtractor> parse_extractor(const SExpr& e) {
    if (!e.is_list() || e.items.empty() || !e.items[0].is_symbol()) {
      error(e.span, "expected an extractor like (ret-fd)", ParseError::Kind::Syntactic);
      return std::nullopt;
    }
    ArgExtractor x;
    const std::string& head = e.items[0].text;
    auto need_arg = [&]() -> bool {
      if (e.items.size() != 2 || !e.items[1].is_symbol()) {
        error(e.span, "expected (" + head + " ARGNAME)", ParseError::Kind::Syntactic);
        return false;
      }
      x.arg = e.items[1].text;
      return true;
    };
    if (head == "ret-fd") {
      if (e.items.size() != 1) {
        error(e.span, "(ret-fd) takes no arguments", ParseError::Kind::Syntactic);
        return std::nullopt;
      }
      x.kind = ArgExtractor::Kind::ReturnFd;
    } else if (head == "arg-fd") {
      x.kind = ArgExtractor::Kind::ArgFd;
      if (!need_arg()) return std::nullopt;
    } else if (head == "arg") {
      x.kind = ArgExtractor::Kind::ArgName;
      if (!need_arg()) return std::nullopt;
    } else if (head == "const") {
      if (e.items.size() != 2 || !e.items[1].is_symbol()) {
        error(e.span, "expected (const NAME)", ParseError::Kind::Syntactic);
        return std::nullopt;
      }
      x.kind = ArgExtractor::Kind::Constant;
      x.value = e.items[1].text;
    } else {
      error(e.items[0].span, "unknown extractor '" + head + "'");
      return std::nullopt;
    }
    return x;
  }

  void parse_rule(const SExpr& e, std::vector<MappingRule>& out) {
    if (!e.is_list() || e.items.size() < 3 || !e.items[0].is_symbol(":rule") ||
        !e.items[1].is_symbol()) {
      error(e.span, "expected (:rule SYSCALL [(:guard ...)] (:action ...))",
            ParseError::Kind::Syntactic);
      return;
    }
    MappingRule rule;
    rule.syscall = e.items[1].text;
    size_t i = 2;
    if (e.items[i].is_list() && !e.items[i].items.empty() &&
        e.items[i].items[0].is_symbol(":guard")) {
      if (e.items[i].items.size() != 2) {
        error(e.items[i].span, "expected (:guard EXPR)", ParseError::Kind::Syntactic);
        return;
      }
      auto g = parse_guard(e.items[i].items[1]);
      if (!g) return;
      rule.guard = std::move(*g);
      ++i;
    }
    if (i + 1 != e.items.size() || !e.items[i].is_list() || e.items[i].items.size() < 2 ||
        !e.items[i].items[0].is_symbol(":action") || !e.items[i].items[1].is_symbol()) {
      error(e.span, "expected a final (:action SCHEMA (param extractor)*)",
            ParseError::Kind::Syntactic);
      return;
    }
    const SExpr& act = e.items[i];
    rule.schema = act.items[1].text;
    for (size_t k = 2; k < act.items.size(); ++k) {
      const SExpr& b = act.items[k];
      if (!b.is_list() || b.items.size() != 2 || !b.items[0].is_symbol() || b.items[0].text.empty() ||
          b.items[0].text[0] != '?') {
        error(b.span, "expected (?param extractor)", ParseError::Kind::Syntactic);
        return;
      }
      auto x = parse_extractor(b.items[1]);
      if (!x) return;
      rule.extractors.emplace_back(b.items[0].text.substr(1), std::move(*x));
    }
    out.push_back(std::move(rule));
  }

  const Domain& domain_;
  std::string name_;
  std::vector<ObjectConstant> objects_;
  std::vector<ObjectConstant> universe_;
  std::unordered_map<std::string, ConstId> index_;
  std::vector<Literal> init_;
};

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

void write_term(std::ostream& os, const Term& t, const std::vector<Variable>& vars,
                const std::vector<ObjectConstant>& universe) {
  if (t.kind == Term::Kind::Variable)
    os << "?" << vars[t.variable].name;
  else
    os << universe[t.constant].name;
}

void write_literal(std::ostream& os, const Literal& l, const Domain& d,
                   const std::vector<Variable>& vars,
                   const std::vector<ObjectConstant>& universe) {
  if (l.negated) os << "(not ";
  os << "(" << d.predicates[l.pred].name;
  for (const auto& a : l.args) {
    os << " ";
    write_term(os, a, vars, universe);
  }
  os << ")";
  if (l.negated) os << ")";
}

void write_condition(std::ostream& os, const Condition& c, const Domain& d,
                     const std::vector<Variable>& vars,
                     const std::vector<ObjectConstant>& universe) {
  switch (c.kind) {
    case Condition::Kind::Literal:
      write_literal(os, c.lit, d, vars, universe);
      return;
    case Condition::Kind::Equals:
      if (c.negated_eq) os << "(not ";
      os << "(= ";
      write_term(os, c.lhs, vars, universe);
      os << " ";
      write_term(os, c.rhs, vars, universe);
      os << ")";
      if (c.negated_eq) os << ")";
      return;
    case Condition::Kind::And:
    case Condition::Kind::Or: {
      if (c.children.empty() && c.kind == Condition::Kind::And) {
        os << "()";
        return;
      }
      os << (c.kind == Condition::Kind::And ? "(and" : "(or");
      for (const auto& ch : c.children) {
        os << " ";
        write_condition(os, ch, d, vars, universe);
      }
      os << ")";
      return;
    }
    case Condition::Kind::Exists:
    case Condition::Kind::Forall:
      os << (c.kind == Condition::Kind::Exists ? "(exists (?" : "(forall (?")
         << vars[c.var].name << " - " << d.types[vars[c.var].type].name << ") ";
      write_condition(os, c.children[0], d, vars, universe);
      os << ")";
      return;
  }
}

void write_effect_body(std::ostream& os, const std::vector<Literal>& lits, const Domain& d,
                       const std::vector<Variable>& vars,
                       const std::vector<ObjectConstant>& universe) {
  if (lits.size() == 1) {
    write_literal(os, lits[0], d, vars, universe);
    return;
  }
  os << "(and";
  for (const auto& l : lits) {
    os << " ";
    write_literal(os, l, d, vars, universe);
  }
  os << ")";
}

bool is_truth(const Condition& c) {
  return c.kind == Condition::Kind::And && c.children.empty();
}

void write_effect(std::ostream& os, const ConditionalEffect& e, const Domain& d,
                  const std::vector<Variable>& vars,
                  const std::vector<ObjectConstant>& universe) {
  if (e.forall_var) {
    os << "(forall (?" << vars[*e.forall_var].name << " - "
       << d.types[vars[*e.forall_var].type].name << ") ";
  }
  if (!e.forall_var && is_truth(e.condition) && e.literals.size() == 1) {
    write_literal(os, e.literals[0], d, vars, universe);
    return;
  }
  os << "(when ";
  write_condition(os, e.condition, d, vars, universe);
  os << " ";
  write_effect_body(os, e.literals, d, vars, universe);
  os << ")";
  if (e.forall_var) os << ")";
}

void write_typed_group(std::ostream& os, const std::vector<ObjectConstant>& consts,
                       const Domain& d, const std::string& indent) {
  // Group consecutive constants of the same type.
  size_t i = 0;
  while (i < consts.size()) {
    size_t j = i;
    while (j < consts.size() && consts[j].type == consts[i].type) ++j;
    os << indent;
    for (size_t k = i; k < j; ++k) os << consts[k].name << " ";
    os << "- " << d.types[consts[i].type].name << "\n";
    i = j;
  }
}

std::string serialize_guard(const MappingGuard& g) {
  std::ostringstream os;
  switch (g.kind) {
    case MappingGuard::Kind::All:
      os << "(and";
      for (const auto& c : g.children) os << " " << serialize_guard(c);
      os << ")";
      break;
    case MappingGuard::Kind::ArgIs:
      os << "(arg-is " << g.arg << " \"" << g.value << "\")";
      break;
    case MappingGuard::Kind::ArgContains:
      os << "(arg-contains " << g.arg << " \"" << g.value << "\")";
      break;
  }
  return os.str();
}

std::string serialize_extractor(const ArgExtractor& x) {
  switch (x.kind) {
    case ArgExtractor::Kind::ReturnFd: return "(ret-fd)";
    case ArgExtractor::Kind::ArgFd: return "(arg-fd " + x.arg + ")";
    case ArgExtractor::Kind::ArgName: return "(arg " + x.arg + ")";
    case ArgExtractor::Kind::Constant: return "(const " + x.value + ")";
  }
  return "";
}

}  // namespace

ParseResult<Domain> parse_domain(const std::string& text, const std::string& file) {
  ParseResult<Domain> result;
  auto forms = read_sexprs(text, file, result.errors);
  if (!result.errors.empty()) return result;
  if (forms.size() != 1) {
    result.errors.push_back({{file, 1, 1},
                             "expected exactly one (define (domain ...)) form",
                             ParseError::Kind::Syntactic});
    return result;
  }
  DomainParser p(result.errors);
  auto d = p.parse(forms[0]);
  if (d && result.errors.empty()) result.value = std::move(*d);
  return result;
}

ParseResult<ParsedProblem> parse_problem(const std::string& text, const Domain& domain,
                                         const std::string& file) {
  ParseResult<ParsedProblem> result;
  auto forms = read_sexprs(text, file, result.errors);
  if (!result.errors.empty()) return result;
  if (forms.size() != 1) {
    result.errors.push_back({{file, 1, 1},
                             "expected exactly one (define (problem ...)) form",
                             ParseError::Kind::Syntactic});
    return result;
  }
  ProblemParser p(result.errors, domain);
  auto pr = p.parse(forms[0]);
  if (pr && result.errors.empty()) result.value = std::move(*pr);
  return result;
}

std::string serialize(const Domain& d) {
  std::ostringstream os;
  os << "(define (domain " << d.name << ")\n";
  if (!d.types.empty()) {
    os << "  (:types";
    for (const auto& t : d.types) os << " " << t.name;
    os << ")\n";
  }
  if (!d.constants.empty()) {
    os << "  (:constants\n";
    write_typed_group(os, d.constants, d, "    ");
    os << "  )\n";
  }
  if (!d.predicates.empty()) {
    os << "  (:predicates\n";
    for (const auto& p : d.predicates) {
      os << "    (" << p.name;
      for (size_t i = 0; i < p.param_types.size(); ++i)
        os << " ?a" << i << " - " << d.types[p.param_types[i]].name;
      os << ")\n";
    }
    os << "  )\n";
  }
  for (const auto& s : d.schemas) {
    os << "  (:action " << s.name << "\n";
    os << "    :parameters (";
    for (int32_t i = 0; i < s.param_count; ++i) {
      if (i) os << " ";
      os << "?" << s.variables[i].name << " - " << d.types[s.variables[i].type].name;
    }
    os << ")\n";
    if (!s.precondition.empty()) {
      os << "    :precondition ";
      if (s.precondition.size() == 1) {
        write_literal(os, s.precondition[0], d, s.variables, d.constants);
      } else {
        os << "(and";
        for (const auto& l : s.precondition) {
          os << " ";
          write_literal(os, l, d, s.variables, d.constants);
        }
        os << ")";
      }
      os << "\n";
    }
    os << "    :effect ";
    if (s.effects.size() == 1) {
      write_effect(os, s.effects[0], d, s.variables, d.constants);
    } else {
      os << "(and";
      for (const auto& e : s.effects) {
        os << "\n      ";
        write_effect(os, e, d, s.variables, d.constants);
      }
      os << ")";
    }
    os << ")\n";
  }
  os << ")\n";
  return os.str();
}

std::string serialize(const Problem& p, const std::vector<MappingRule>& mapping) {
  const Domain& d = p.domain();
  std::ostringstream os;
  os << "(define (problem " << p.name() << ")\n";
  os << "  (:domain " << d.name << ")\n";
  std::vector<ObjectConstant> objects(p.universe().begin() + d.constants.size(),
                                      p.universe().end());
  if (!objects.empty()) {
    os << "  (:objects\n";
    write_typed_group(os, objects, d, "    ");
    os << "  )\n";
  }
  os << "  (:init";
  for (PropId prop : p.initial().props) os << " " << p.prop_name(prop);
  os << ")\n";
  for (const auto& g : p.goals()) {
    os << "  (:goal " << g.label << " ";
    write_condition(os, g.condition, d, g.goal_vars, p.universe());
    os << ")\n";
  }
  if (!mapping.empty()) {
    os << "  (:mapping\n";
    for (const auto& r : mapping) {
      os << "    (:rule " << r.syscall;
      bool trivial_guard = r.guard.kind == MappingGuard::Kind::All && r.guard.children.empty();
      if (!trivial_guard) os << " (:guard " << serialize_guard(r.guard) << ")";
      os << " (:action " << r.schema;
      for (const auto& [param, x] : r.extractors)
        os << " (?" << param << " " << serialize_extractor(x) << ")";
      os << "))\n";
    }
    os << "  )\n";
  }
  os << ")\n";
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace bdl
