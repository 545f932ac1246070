#include "bdl/simulate.hpp"

#include <algorithm>
#include <sstream>

namespace bdl {

namespace {

Binding make_env(const ActionSchema& schema, const GroundAction& action) {
  Binding env(schema.variables.size(), kNoConst);
  for (int32_t i = 0; i < schema.param_count; ++i) env[i] = action.binding.at(i);
  return env;
}

ConstId resolve(const Term& t, const Binding& env) {
  if (t.kind == Term::Kind::Constant) return t.constant;
  ConstId c = env.at(t.variable);
  if (c == kNoConst)
    throw ModelError(ModelError::Kind::UnboundVariable, "unbound variable in effect literal");
  return c;
}

}  // namespace

bool applicable(const State& state, const GroundAction& action, const Problem& problem) {
  const ActionSchema& schema = problem.domain().schemas.at(action.schema);
  Binding env = make_env(schema, action);
  for (const auto& lit : schema.precondition) {
    std::vector<ConstId> args;
    args.reserve(lit.args.size());
    for (const auto& t : lit.args) args.push_back(resolve(t, env));
    bool holds = state.contains(problem.prop_id(lit.pred, args));
    if (holds == lit.negated) return false;
  }
  return true;
}

State apply(const State& state, const GroundAction& action, const Problem& problem) {
  if (!applicable(state, action, problem))
    throw SimulationError(0, "action " + action_to_string(action, problem) +
                                 " is not applicable");
  const ActionSchema& schema = problem.domain().schemas.at(action.schema);
  Binding env = make_env(schema, action);

  std::vector<PropId> adds, dels;
  auto collect = [&](const ConditionalEffect& eff, Binding& local_env) {
    if (!eval_condition(state, eff.condition, schema.variables, local_env, problem)) return;
    for (const auto& lit : eff.literals) {
      std::vector<ConstId> args;
      args.reserve(lit.args.size());
      for (const auto& t : lit.args) args.push_back(resolve(t, local_env));
      PropId p = problem.prop_id(lit.pred, args);
      (lit.negated ? dels : adds).push_back(p);
    }
  };

  for (const auto& eff : schema.effects) {
    if (!eff.forall_var) {
      collect(eff, env);
      continue;
    }
    TypeId t = schema.variables[*eff.forall_var].type;
    for (ConstId c : problem.constants_of_type(t)) {
      env[*eff.forall_var] = c;
      collect(eff, env);
    }
    env[*eff.forall_var] = kNoConst;
  }

  std::sort(adds.begin(), adds.end());
  adds.erase(std::unique(adds.begin(), adds.end()), adds.end());
  std::sort(dels.begin(), dels.end());
  dels.erase(std::unique(dels.begin(), dels.end()), dels.end());
  std::vector<PropId> clash;
  std::set_intersection(adds.begin(), adds.end(), dels.begin(), dels.end(),
                        std::back_inserter(clash));
  if (!clash.empty())
    throw ModelError(ModelError::Kind::ConflictingEffects,
                     "action " + action_to_string(action, problem) +
                         " asserts and retracts " + problem.prop_name(clash.front()));

  State next = state;
  for (PropId p : dels) next.remove(p);
  for (PropId p : adds) next.add(p);
  return next;
}

Trajectory simulate(const Problem& problem, const std::vector<GroundAction>& plan,
                    SimOptions options) {
  Trajectory traj;
  State current = problem.initial();
  if (options.keep_states) traj.states.push_back(current);
  for (size_t i = 0; i < plan.size(); ++i) {
    if (!applicable(current, plan[i], problem)) {
      if (options.policy == FailurePolicy::Strict)
        throw SimulationError(static_cast<int>(i + 1),
                              "plan invalid at step " + std::to_string(i + 1) + ": " +
                                  action_to_string(plan[i], problem) + " is not applicable");
      traj.outcomes.push_back(StepOutcome::SkippedInapplicable);
    } else {
      State next = apply(current, plan[i], problem);
      traj.outcomes.push_back(next == current ? StepOutcome::NoOp : StepOutcome::Applied);
      current = std::move(next);
    }
    if (options.keep_states) traj.states.push_back(current);
  }
  traj.final_state = std::move(current);
  return traj;
}

Trajectory simulate(const Problem& problem, const std::vector<GroundAction>& plan,
                    FailurePolicy policy) {
  return simulate(problem, plan, SimOptions{policy, true});
}

ValidationReport validate(const Problem& problem, const std::vector<GroundAction>& plan,
                          const std::string& goal_label) {
  const NamedGoal* goal = problem.goal(goal_label);
  if (!goal)
    throw ModelError(ModelError::Kind::UnknownGoalLabel,
                     "unknown goal label '" + goal_label + "'");
  ValidationReport report;
  try {
    Trajectory traj = simulate(problem, plan, SimOptions{FailurePolicy::Strict, false});
    report.final_state = traj.final_state;
  } catch (const SimulationError& e) {
    report.valid = false;
    report.fail_step = e.step();
    report.reason = e.what();
    return report;
  }
  if (eval_goal(report.final_state, *goal, problem)) {
    report.valid = true;
    report.reason = "plan applies from the initial state and satisfies goal '" +
                    goal_label + "'";
  } else {
    report.valid = false;
    report.reason = "plan applies but the final state does not satisfy goal '" +
                    goal_label + "'";
  }
  return report;
}

std::vector<std::string> evaluate_goals(const State& state, const Problem& problem) {
  std::vector<std::string> labels;
  for (const auto& g : problem.goals())
    if (eval_goal(state, g, problem)) labels.push_back(g.label);
  return labels;
}

std::string action_to_string(const GroundAction& action, const Problem& problem) {
  const ActionSchema& schema = problem.domain().schemas.at(action.schema);
  std::ostringstream os;
  os << "(" << schema.name;
  for (ConstId c : action.binding) os << " " << problem.constant(c).name;
  os << ")";
  return os.str();
}

}  // namespace bdl
