#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bdl/model.hpp"

// State-transition semantics: applicability, simultaneous conditional-effect
// application (conditions always read the pre-state), plan simulation under a
// failure policy, plan validation, and goal evaluation.

namespace bdl {

enum class FailurePolicy {
  Strict,  // inapplicable action invalidates the plan
  Skip,    // inapplicable action leaves the state unchanged
};

enum class StepOutcome {
  Applied,
  SkippedInapplicable,
  NoOp,  // applicable, but no conditional effect triggered
};

struct Trajectory {
  // states[0] is the initial state; filled only when keep_states is set.
  std::vector<State> states;
  std::vector<StepOutcome> outcomes;
  State final_state;
};

struct ValidationReport {
  bool valid = false;
  std::optional<int> fail_step;  // 1-based
  std::string reason;
  State final_state;
};

struct SimOptions {
  FailurePolicy policy = FailurePolicy::Skip;
  bool keep_states = true;
};

class SimulationError : public std::runtime_error {
 public:
  SimulationError(int step, const std::string& msg)
      : std::runtime_error(msg), step_(step) {}
  int step() const { return step_; }  // 1-based

 private:
  int step_;
};

bool applicable(const State& state, const GroundAction& action, const Problem& problem);

// Precondition must hold; throws SimulationError otherwise. All effect
// conditions are evaluated against `state`, then deletes and adds land
// simultaneously. Contradictory triggered literals raise ModelError
// (ConflictingEffects) — check_well_defined rules this out for shipped domains.
State apply(const State& state, const GroundAction& action, const Problem& problem);

// Folds apply over the plan. Under Strict an inapplicable step throws
// SimulationError; under Skip it copies the state.
Trajectory simulate(const Problem& problem, const std::vector<GroundAction>& plan,
                    SimOptions options = {});
Trajectory simulate(const Problem& problem, const std::vector<GroundAction>& plan,
                    FailurePolicy policy);

// Strict simulation + named goal satisfaction.
ValidationReport validate(const Problem& problem, const std::vector<GroundAction>& plan,
                          const std::string& goal_label);

// Labels of every goal satisfied in `state`, in problem declaration order.
std::vector<std::string> evaluate_goals(const State& state, const Problem& problem);

std::string action_to_string(const GroundAction& action, const Problem& problem);

}  // namespace bdl
