#include "bdl/model.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace bdl {

Condition Condition::literal(Literal l) {
  Condition c;
  c.kind = Kind::Literal;
  c.lit = std::move(l);
  return c;
}

Condition Condition::equals(Term a, Term b, bool negated) {
  Condition c;
  c.kind = Kind::Equals;
  c.lhs = a;
  c.rhs = b;
  c.negated_eq = negated;
  return c;
}

Condition Condition::conj(std::vector<Condition> cs) {
  Condition c;
  c.kind = Kind::And;
  c.children = std::move(cs);
  return c;
}

Condition Condition::disj(std::vector<Condition> cs) {
  Condition c;
  c.kind = Kind::Or;
  c.children = std::move(cs);
  return c;
}

Condition Condition::exists(VarId v, Condition inner) {
  Condition c;
  c.kind = Kind::Exists;
  c.var = v;
  c.children.push_back(std::move(inner));
  return c;
}

Condition Condition::forall(VarId v, Condition inner) {
  Condition c;
  c.kind = Kind::Forall;
  c.var = v;
  c.children.push_back(std::move(inner));
  return c;
}

std::optional<TypeId> Domain::type_id(const std::string& n) const {
  for (size_t i = 0; i < types.size(); ++i)
    if (types[i].name == n) return static_cast<TypeId>(i);
  return std::nullopt;
}

std::optional<PredId> Domain::pred_id(const std::string& n) const {
  for (size_t i = 0; i < predicates.size(); ++i)
    if (predicates[i].name == n) return static_cast<PredId>(i);
  return std::nullopt;
}

std::optional<SchemaId> Domain::schema_id(const std::string& n) const {
  for (size_t i = 0; i < schemas.size(); ++i)
    if (schemas[i].name == n) return static_cast<SchemaId>(i);
  return std::nullopt;
}

bool State::contains(PropId p) const {
  return std::binary_search(props.begin(), props.end(), p);
}

void State::add(PropId p) {
  auto it = std::lower_bound(props.begin(), props.end(), p);
  if (it == props.end() || *it != p) props.insert(it, p);
}

void State::remove(PropId p) {
  auto it = std::lower_bound(props.begin(), props.end(), p);
  if (it != props.end() && *it == p) props.erase(it);
}

Problem::Problem(Domain domain, std::string name,
                 std::vector<ObjectConstant> objects,
                 std::vector<Literal> init_atoms,
                 std::vector<NamedGoal> goals)
    : domain_(std::move(domain)), name_(std::move(name)), goals_(std::move(goals)) {
  universe_ = domain_.constants;
  for (auto& o : objects) universe_.push_back(o);

  by_type_.assign(domain_.types.size(), {});
  const_type_index_.assign(universe_.size(), -1);
  for (size_t i = 0; i < universe_.size(); ++i) {
    const auto& c = universe_[i];
    if (const_index_.count(c.name))
      throw ModelError(ModelError::Kind::TypeMismatch,
                       "duplicate constant '" + c.name + "' in universe");
    const_index_[c.name] = static_cast<ConstId>(i);
    const_type_index_[i] = static_cast<int32_t>(by_type_[c.type].size());
    by_type_[c.type].push_back(static_cast<ConstId>(i));
  }

  // Dense proposition ids: one block per predicate, row-major over the
  // argument positions, indexed by each constant's position in its type pool.
  pred_base_.assign(domain_.predicates.size() + 1, 0);
  int64_t total = 0;
  for (size_t p = 0; p < domain_.predicates.size(); ++p) {
    pred_base_[p] = total;
    int64_t block = 1;
    for (TypeId t : domain_.predicates[p].param_types)
      block *= static_cast<int64_t>(by_type_[t].size());
    total += block;
  }
  pred_base_[domain_.predicates.size()] = total;
  if (total > (1u << 30))
    throw ModelError(ModelError::Kind::TypeMismatch,
                     "universe grounds to too many propositions");
  prop_count_ = static_cast<int32_t>(total);

  for (const auto& atom : init_atoms) {
    std::vector<ConstId> args;
    args.reserve(atom.args.size());
    for (const auto& t : atom.args) {
      assert(t.kind == Term::Kind::Constant);
      args.push_back(t.constant);
    }
    initial_.add(prop_id(atom.pred, args));
  }
}

const std::vector<ConstId>& Problem::constants_of_type(TypeId t) const {
  return by_type_.at(t);
}

std::optional<ConstId> Problem::const_id(const std::string& n) const {
  auto it = const_index_.find(n);
  if (it == const_index_.end()) return std::nullopt;
  return it->second;
}

const NamedGoal* Problem::goal(const std::string& label) const {
  for (const auto& g : goals_)
    if (g.label == label) return &g;
  return nullptr;
}

PropId Problem::prop_id(PredId pred, const std::vector<ConstId>& args) const {
  const auto& types = domain_.predicates.at(pred).param_types;
  assert(args.size() == types.size());
  int64_t idx = 0;
  for (size_t i = 0; i < args.size(); ++i) {
    assert(universe_[args[i]].type == types[i]);
    idx = idx * static_cast<int64_t>(by_type_[types[i]].size()) +
          const_type_index_.at(args[i]);
  }
  return static_cast<PropId>(pred_base_[pred] + idx);
}

PredId Problem::prop_pred(PropId p) const {
  auto it = std::upper_bound(pred_base_.begin(), pred_base_.end(), static_cast<int64_t>(p));
  return static_cast<PredId>(std::distance(pred_base_.begin(), it) - 1);
}

std::vector<ConstId> Problem::prop_args(PropId p) const {
  PredId pred = prop_pred(p);
  int64_t idx = p - pred_base_[pred];
  const auto& types = domain_.predicates[pred].param_types;
  std::vector<ConstId> args(types.size());
  for (size_t i = types.size(); i-- > 0;) {
    int64_t pool = static_cast<int64_t>(by_type_[types[i]].size());
    args[i] = by_type_[types[i]][idx % pool];
    idx /= pool;
  }
  return args;
}

std::string Problem::prop_name(PropId p) const {
  PredId pred = prop_pred(p);
  std::ostringstream os;
  os << "(" << domain_.predicates[pred].name;
  for (ConstId c : prop_args(p)) os << " " << universe_[c].name;
  os << ")";
  return os.str();
}

std::string Problem::state_to_string(const State& s) const {
  std::ostringstream os;
  os << "{";
  for (size_t i = 0; i < s.props.size(); ++i) {
    if (i) os << " ";
    os << prop_name(s.props[i]);
  }
  os << "}";
  return os.str();
}

GroundAction ground(const Domain& domain, const Problem& problem,
                    SchemaId schema,
                    const std::unordered_map<std::string, std::string>& binding) {
  const ActionSchema& s = domain.schemas.at(schema);
  for (const auto& [param, _] : binding) {
    bool known = false;
    for (int32_t i = 0; i < s.param_count; ++i)
      if (s.variables[i].name == param) known = true;
    if (!known)
      throw ModelError(ModelError::Kind::UnknownParameter,
                       s.name + ": unknown parameter '" + param + "'");
  }
  GroundAction ga;
  ga.schema = schema;
  ga.binding.resize(s.param_count, kNoConst);
  for (int32_t i = 0; i < s.param_count; ++i) {
    const auto& param = s.variables[i];
    auto it = binding.find(param.name);
    if (it == binding.end())
      throw ModelError(ModelError::Kind::MissingBinding,
                       s.name + ": parameter '" + param.name + "' not bound");
    auto cid = problem.const_id(it->second);
    if (!cid)
      throw ModelError(ModelError::Kind::MissingBinding,
                       s.name + ": unknown constant '" + it->second + "'");
    if (problem.constant(*cid).type != param.type)
      throw ModelError(ModelError::Kind::TypeMismatch,
                       s.name + ": constant '" + it->second + "' does not fit parameter '" +
                           param.name + "'");
    ga.binding[i] = *cid;
  }
  return ga;
}

GroundAction ground(const Domain& domain, const Problem& problem,
                    const std::string& schema_name,
                    const std::unordered_map<std::string, std::string>& binding) {
  auto sid = domain.schema_id(schema_name);
  if (!sid)
    throw ModelError(ModelError::Kind::UnknownParameter,
                     "unknown action schema '" + schema_name + "'");
  return ground(domain, problem, *sid, binding);
}

namespace {

ConstId resolve(const Term& t, const Binding& env) {
  if (t.kind == Term::Kind::Constant) return t.constant;
  ConstId c = env.at(t.variable);
  if (c == kNoConst)
    throw ModelError(ModelError::Kind::UnboundVariable,
                     "unbound variable in condition evaluation");
  return c;
}

}  // namespace

bool eval_condition(const State& state, const Condition& cond,
                    const std::vector<Variable>& vars, Binding& env,
                    const Problem& problem) {
  switch (cond.kind) {
    case Condition::Kind::Literal: {
      std::vector<ConstId> args;
      args.reserve(cond.lit.args.size());
      for (const auto& t : cond.lit.args) args.push_back(resolve(t, env));
      bool holds = state.contains(problem.prop_id(cond.lit.pred, args));
      return cond.lit.negated ? !holds : holds;
    }
    case Condition::Kind::Equals: {
      bool eq = resolve(cond.lhs, env) == resolve(cond.rhs, env);
      return cond.negated_eq ? !eq : eq;
    }
    case Condition::Kind::And:
      for (const auto& c : cond.children)
        if (!eval_condition(state, c, vars, env, problem)) return false;
      return true;
    case Condition::Kind::Or:
      for (const auto& c : cond.children)
        if (eval_condition(state, c, vars, env, problem)) return true;
      return false;
    case Condition::Kind::Exists: {
      TypeId t = vars.at(cond.var).type;
      for (ConstId c : problem.constants_of_type(t)) {
        env[cond.var] = c;
        bool ok = eval_condition(state, cond.children[0], vars, env, problem);
        env[cond.var] = kNoConst;
        if (ok) return true;
      }
      return false;
    }
    case Condition::Kind::Forall: {
      TypeId t = vars.at(cond.var).type;
      for (ConstId c : problem.constants_of_type(t)) {
        env[cond.var] = c;
        bool ok = eval_condition(state, cond.children[0], vars, env, problem);
        env[cond.var] = kNoConst;
        if (!ok) return false;
      }
      return true;
    }
  }
  return false;
}

bool eval_goal(const State& state, const NamedGoal& goal, const Problem& problem) {
  Binding env(goal.goal_vars.size(), kNoConst);
  return eval_condition(state, goal.condition, goal.goal_vars, env, problem);
}

// ---------------------------------------------------------------------------
// Well-definedness
// ---------------------------------------------------------------------------

namespace {

// A ground effect instance: fully resolved condition + signed literal set.
struct EffectInstance {
  int effect_index;
  const Condition* condition;
  Binding env;  // schema env with params and (for forall effects) the quantifier var bound
  std::vector<std::pair<PropId, bool>> literals;  // (prop, positive)
};

// Backtracking satisfiability over ground condition trees. Propositions are
// independent under the closed world, so a consistent partial assignment of
// the mentioned propositions is a witness.
class SatSolver {
 public:
  SatSolver(const Problem& problem, const std::vector<Variable>& vars)
      : problem_(problem), vars_(vars) {}

  // conds are evaluated under their paired environments.
  bool satisfiable(std::vector<std::pair<const Condition*, Binding>> conds,
                   std::unordered_map<PropId, bool>* witness) {
    assign_.clear();
    goals_ = std::move(conds);
    bool ok = solve(0);
    if (ok && witness) *witness = assign_;
    return ok;
  }

 private:
  bool solve(size_t i) {
    if (i == goals_.size()) return true;
    const Condition& c = *goals_[i].first;  // schema-owned, stable across goals_ edits
    Binding env = goals_[i].second;
    switch (c.kind) {
      case Condition::Kind::Literal: {
        std::vector<ConstId> args;
        for (const auto& t : c.lit.args) args.push_back(resolve(t, env));
        PropId p = problem_.prop_id(c.lit.pred, args);
        bool want = !c.lit.negated;
        auto it = assign_.find(p);
        if (it != assign_.end()) return it->second == want && solve(i + 1);
        assign_[p] = want;
        if (solve(i + 1)) return true;
        assign_.erase(p);
        return false;
      }
      case Condition::Kind::Equals: {
        bool eq = resolve(c.lhs, env) == resolve(c.rhs, env);
        return (c.negated_eq ? !eq : eq) && solve(i + 1);
      }
      case Condition::Kind::And: {
        auto saved = goals_;
        goals_.erase(goals_.begin() + i);
        for (size_t k = 0; k < c.children.size(); ++k)
          goals_.insert(goals_.begin() + i + k, {&c.children[k], saved[i].second});
        if (solve(i)) return true;
        goals_ = std::move(saved);
        return false;
      }
      case Condition::Kind::Or: {
        for (const auto& child : c.children) {
          auto saved = goals_;
          goals_[i] = {&child, saved[i].second};
          if (solve(i)) return true;
          goals_ = std::move(saved);
        }
        return false;
      }
      case Condition::Kind::Exists: {
        TypeId t = vars_.at(c.var).type;
        Binding env_copy = env;  // goals_ may reallocate below
        for (ConstId cc : problem_.constants_of_type(t)) {
          auto saved = goals_;
          Binding env2 = env_copy;
          env2[c.var] = cc;
          goals_[i] = {&c.children[0], std::move(env2)};
          if (solve(i)) return true;
          goals_ = std::move(saved);
        }
        return false;
      }
      case Condition::Kind::Forall: {
        TypeId t = vars_.at(c.var).type;
        auto saved = goals_;
        goals_.erase(goals_.begin() + i);
        size_t k = 0;
        for (ConstId cc : problem_.constants_of_type(t)) {
          Binding env2 = saved[i].second;
          env2[c.var] = cc;
          goals_.insert(goals_.begin() + i + k, {&saved[i].first->children[0], std::move(env2)});
          ++k;
        }
        if (solve(i)) return true;
        goals_ = std::move(saved);
        return false;
      }
    }
    return false;
  }

  const Problem& problem_;
  const std::vector<Variable>& vars_;
  std::vector<std::pair<const Condition*, Binding>> goals_;
  std::unordered_map<PropId, bool> assign_;
};

void expand_effect(const Problem& problem, const ActionSchema& schema,
                   const ConditionalEffect& eff, int index, const Binding& base_env,
                   std::vector<EffectInstance>& out) {
  auto emit = [&](Binding env) {
    EffectInstance inst;
    inst.effect_index = index;
    inst.condition = &eff.condition;
    inst.env = std::move(env);
    for (const auto& l : eff.literals) {
      std::vector<ConstId> args;
      for (const auto& t : l.args) args.push_back(resolve(t, inst.env));
      inst.literals.emplace_back(problem.prop_id(l.pred, args), !l.negated);
    }
    std::sort(inst.literals.begin(), inst.literals.end());
    out.push_back(std::move(inst));
  };
  if (!eff.forall_var) {
    emit(base_env);
    return;
  }
  TypeId t = schema.variables.at(*eff.forall_var).type;
  for (ConstId c : problem.constants_of_type(t)) {
    Binding env = base_env;
    env[*eff.forall_var] = c;
    emit(env);
  }
}

bool literals_conflict(const EffectInstance& a, const EffectInstance& b) {
  // Both sorted by prop id.
  size_t i = 0, j = 0;
  while (i < a.literals.size() && j < b.literals.size()) {
    if (a.literals[i].first < b.literals[j].first) {
      ++i;
    } else if (b.literals[j].first < a.literals[i].first) {
      ++j;
    } else {
      if (a.literals[i].second != b.literals[j].second) return true;
      ++i;
      ++j;
    }
  }
  return false;
}

}  // namespace

WellDefinednessReport check_well_defined(const Problem& problem) {
  const Domain& domain = problem.domain();
  WellDefinednessReport report;
  for (size_t si = 0; si < domain.schemas.size(); ++si) {
    const ActionSchema& schema = domain.schemas[si];
    SatSolver solver(problem, schema.variables);

    // (i) is aggregated across bindings: a parameter-aliased instance can
    // legitimately disable an effect (its condition goes unsatisfiable), so
    // an effect is flagged only when no ground instance at all can fire it.
    std::vector<bool> effect_can_fire(schema.effects.size(), false);

    // Enumerate all parameter bindings (cartesian product over type pools).
    std::vector<int32_t> cursor(schema.param_count, 0);
    bool more = true;
    bool any_empty = false;
    for (int32_t p = 0; p < schema.param_count; ++p)
      if (problem.constants_of_type(schema.variables[p].type).empty()) any_empty = true;
    if (any_empty) continue;
    Condition pre_cond;
    pre_cond.kind = Condition::Kind::And;
    for (const auto& l : schema.precondition) pre_cond.children.push_back(Condition::literal(l));
    while (more) {
      Binding env(schema.variables.size(), kNoConst);
      std::vector<std::string> binding_names;
      for (int32_t p = 0; p < schema.param_count; ++p) {
        ConstId c = problem.constants_of_type(schema.variables[p].type)[cursor[p]];
        env[p] = c;
        binding_names.push_back(problem.constant(c).name);
      }
      ++report.instances_checked;

      std::vector<EffectInstance> instances;
      for (size_t e = 0; e < schema.effects.size(); ++e)
        expand_effect(problem, schema, schema.effects[e], static_cast<int>(e), env, instances);

      for (const auto& inst : instances) {
        if (effect_can_fire[inst.effect_index]) continue;
        if (solver.satisfiable({{&pre_cond, env}, {inst.condition, inst.env}}, nullptr))
          effect_can_fire[inst.effect_index] = true;
      }

      // (ii) co-satisfiable effect pairs must not contradict each other
      for (size_t a = 0; a < instances.size(); ++a) {
        for (size_t b = a + 1; b < instances.size(); ++b) {
          if (!literals_conflict(instances[a], instances[b])) continue;
          std::unordered_map<PropId, bool> witness;
          if (!solver.satisfiable({{&pre_cond, env},
                                   {instances[a].condition, instances[a].env},
                                   {instances[b].condition, instances[b].env}},
                                  &witness))
            continue;
          WellDefinednessViolation v;
          v.kind = WellDefinednessViolation::Kind::ConflictingPair;
          v.schema = schema.name;
          v.binding = binding_names;
          v.effect_a = instances[a].effect_index;
          v.effect_b = instances[b].effect_index;
          v.message = "conditional effects can trigger together with contradictory literals";
          for (const auto& [prop, val] : witness)
            if (val) v.witness.push_back(problem.prop_name(prop));
          std::sort(v.witness.begin(), v.witness.end());
          report.violations.push_back(std::move(v));
        }
      }

      // advance cursor
      int32_t p = schema.param_count - 1;
      for (; p >= 0; --p) {
        const auto& pool = problem.constants_of_type(schema.variables[p].type);
        if (++cursor[p] < static_cast<int32_t>(pool.size())) break;
        cursor[p] = 0;
      }
      if (p < 0) more = false;
    }

    for (size_t e = 0; e < schema.effects.size(); ++e) {
      if (effect_can_fire[e]) continue;
      WellDefinednessViolation v;
      v.kind = WellDefinednessViolation::Kind::PreconditionIncompatible;
      v.schema = schema.name;
      v.effect_a = static_cast<int>(e);
      v.message = "effect condition can never hold together with the precondition";
      report.violations.push_back(std::move(v));
    }
  }
  return report;
}

WellDefinednessReport check_well_defined(const Domain& domain,
                                         const std::vector<ObjectConstant>& objects) {
  Problem scratch(domain, "well-definedness-check", objects, {}, {});
  return check_well_defined(scratch);
}

}  // namespace bdl
