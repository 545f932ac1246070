#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

// Core planning formalism: typed objects, predicates, conditions,
// conditional effects, action schemas, grounding, states, and the
// well-definedness check. Everything here is immutable after
// construction and safe to share across threads.

namespace bdl {

using TypeId = int32_t;
using PredId = int32_t;
using ConstId = int32_t;
using VarId = int32_t;
using SchemaId = int32_t;
using PropId = int32_t;

constexpr ConstId kNoConst = -1;

struct ObjectType {
  std::string name;
  bool operator==(const ObjectType&) const = default;
};

struct ObjectConstant {
  std::string name;
  TypeId type = -1;
  bool operator==(const ObjectConstant&) const = default;
};

struct Predicate {
  std::string name;
  std::vector<TypeId> param_types;
  bool operator==(const Predicate&) const = default;
};

// A parameter of an action schema or a quantifier-bound variable.
// Variables live in a per-schema table; parameters occupy the first
// slots, quantified variables are appended in parse order.
struct Variable {
  std::string name;
  TypeId type = -1;
  bool operator==(const Variable&) const = default;
};

// Either a constant or a reference into the owning schema's variable table.
struct Term {
  enum class Kind { Constant, Variable };
  Kind kind = Kind::Constant;
  ConstId constant = kNoConst;
  VarId variable = -1;

  static Term make_const(ConstId c) { return {Kind::Constant, c, -1}; }
  static Term make_var(VarId v) { return {Kind::Variable, kNoConst, v}; }
  bool operator==(const Term&) const = default;
};

// An atom or its negation, over a declared predicate.
struct Literal {
  PredId pred = -1;
  std::vector<Term> args;
  bool negated = false;
  bool operator==(const Literal&) const = default;
};

// Condition language: literals, constant-identity equality tests,
// and/or, and bounded quantification over a declared type.
struct Condition {
  enum class Kind { Literal, Equals, And, Or, Exists, Forall };
  Kind kind = Kind::And;

  Literal lit;                      // Kind::Literal
  Term lhs, rhs;                    // Kind::Equals
  bool negated_eq = false;          // Kind::Equals
  std::vector<Condition> children;  // And/Or (empty And = true), quantifiers (1 child)
  VarId var = -1;                   // Exists/Forall

  static Condition literal(Literal l);
  static Condition equals(Term a, Term b, bool negated = false);
  static Condition conj(std::vector<Condition> cs);
  static Condition disj(std::vector<Condition> cs);
  static Condition exists(VarId v, Condition c);
  static Condition forall(VarId v, Condition c);
  static Condition truth() { return conj({}); }

  bool operator==(const Condition&) const = default;
};

// (c, e) pair; when `forall_var` is set the whole pair is expanded over
// every constant of that variable's type.
struct ConditionalEffect {
  std::optional<VarId> forall_var;
  Condition condition = Condition::truth();
  std::vector<Literal> literals;
  bool operator==(const ConditionalEffect&) const = default;
};

struct ActionSchema {
  std::string name;
  std::vector<Variable> variables;  // params first, then quantifier vars
  int32_t param_count = 0;
  std::vector<Literal> precondition;  // conjunction of literals, may be empty
  std::vector<ConditionalEffect> effects;
  bool operator==(const ActionSchema&) const = default;
};

struct Domain {
  std::string name;
  std::vector<ObjectType> types;
  std::vector<ObjectConstant> constants;  // domain-level constants
  std::vector<Predicate> predicates;
  std::vector<ActionSchema> schemas;

  std::optional<TypeId> type_id(const std::string& name) const;
  std::optional<PredId> pred_id(const std::string& name) const;
  std::optional<SchemaId> schema_id(const std::string& name) const;
  bool operator==(const Domain&) const = default;
};

struct GroundAction {
  SchemaId schema = -1;
  std::vector<ConstId> binding;  // one constant per schema parameter
  bool operator==(const GroundAction&) const = default;
};

// Closed-world state: the set of true ground propositions, kept sorted.
struct State {
  std::vector<PropId> props;

  bool contains(PropId p) const;
  void add(PropId p);
  void remove(PropId p);
  size_t size() const { return props.size(); }
  bool operator==(const State&) const = default;
};

struct NamedGoal {
  std::string label;
  Condition condition;  // closed (no free schema params; quantifiers allowed)
  std::vector<Variable> goal_vars;  // variable table for quantifiers in `condition`
  bool operator==(const NamedGoal&) const = default;
};

// A problem fixes the universe, pre-interns every ground proposition,
// and carries the initial state plus named goal formulas.
class Problem {
 public:
  Problem() = default;
  Problem(Domain domain, std::string name,
          std::vector<ObjectConstant> objects,
          std::vector<Literal> init_atoms,  // ground, positive
          std::vector<NamedGoal> goals);

  const Domain& domain() const { return domain_; }
  const std::string& name() const { return name_; }
  const std::vector<ObjectConstant>& universe() const { return universe_; }
  const std::vector<ConstId>& constants_of_type(TypeId t) const;
  std::optional<ConstId> const_id(const std::string& name) const;
  const ObjectConstant& constant(ConstId c) const { return universe_.at(c); }

  const State& initial() const { return initial_; }
  const std::vector<NamedGoal>& goals() const { return goals_; }
  const NamedGoal* goal(const std::string& label) const;

  // Ground proposition interning. All propositions over the universe are
  // pre-interned at construction; lookups never mutate.
  PropId prop_id(PredId pred, const std::vector<ConstId>& args) const;
  int32_t prop_count() const { return prop_count_; }
  std::string prop_name(PropId p) const;
  // Constants appearing as arguments of proposition `p`.
  std::vector<ConstId> prop_args(PropId p) const;
  PredId prop_pred(PropId p) const;

  std::string state_to_string(const State& s) const;

  bool operator==(const Problem& o) const {
    return domain_ == o.domain_ && name_ == o.name_ && universe_ == o.universe_ &&
           initial_ == o.initial_ && goals_ == o.goals_;
  }

 private:
  Domain domain_;
  std::string name_;
  std::vector<ObjectConstant> universe_;  // domain constants then objects
  std::vector<std::vector<ConstId>> by_type_;
  std::unordered_map<std::string, ConstId> const_index_;
  std::vector<int32_t> const_type_index_;  // position of constant within its type pool
  std::vector<int64_t> pred_base_;         // prop id layout: per-predicate blocks
  int32_t prop_count_ = 0;
  State initial_;
  std::vector<NamedGoal> goals_;
};

// Environment for evaluating lifted conditions: one slot per variable in
// the owning schema's (or goal's) variable table.
using Binding = std::vector<ConstId>;

class ModelError : public std::runtime_error {
 public:
  enum class Kind {
    UnknownParameter,
    TypeMismatch,
    MissingBinding,
    UnboundVariable,
    ConflictingEffects,
    UnknownGoalLabel,
  };
  ModelError(Kind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Binds a schema's parameters by name. Throws ModelError on unknown
// parameter names, type mismatches, or missing bindings.
GroundAction ground(const Domain& domain, const Problem& problem,
                    SchemaId schema,
                    const std::unordered_map<std::string, std::string>& binding);
GroundAction ground(const Domain& domain, const Problem& problem,
                    const std::string& schema_name,
                    const std::unordered_map<std::string, std::string>& binding);

// Closed-world evaluation of `cond` under `env` (one entry per variable of
// the owning variable table; kNoConst marks unbound). Quantifiers expand
// over the problem universe in declaration order.
bool eval_condition(const State& state, const Condition& cond,
                    const std::vector<Variable>& vars, Binding& env,
                    const Problem& problem);

// Convenience for closed goal formulas.
bool eval_goal(const State& state, const NamedGoal& goal, const Problem& problem);

struct WellDefinednessViolation {
  enum class Kind { PreconditionIncompatible, ConflictingPair };
  Kind kind;
  std::string schema;
  std::vector<std::string> binding;  // constant names, parameter order
  int effect_a = -1;
  int effect_b = -1;  // -1 for precondition violations
  std::string message;
  std::vector<std::string> witness;  // propositions of a jointly satisfying state
};

struct WellDefinednessReport {
  std::vector<WellDefinednessViolation> violations;
  int64_t instances_checked = 0;
  bool ok() const { return violations.empty(); }
};

// Exhaustive check over all ground instances of every schema:
//   (i) each effect condition is satisfiable together with the precondition;
//  (ii) effect pairs whose conditions can hold together never assert
//       contradictory literals.
WellDefinednessReport check_well_defined(const Problem& problem);
WellDefinednessReport check_well_defined(const Domain& domain,
                                         const std::vector<ObjectConstant>& objects);

}  // namespace bdl
