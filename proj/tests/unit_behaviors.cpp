#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <fstream>
#include <set>

#include "bdl/behaviors.hpp"
#include "bdl/experiment.hpp"
#include "bdl/rng.hpp"
#include "bdl/ingest.hpp"
#include "bdl/simulate.hpp"
#include "support/oracle.hpp"

using namespace bdl;

namespace {

std::vector<GroundAction> ingest_fixture(const std::string& name, const BehaviorProblem& bp) {
  std::ifstream in(std::string(BDL_FIXTURES_DIR) + "/plans/" + name, std::ios::binary);
  REQUIRE(in.good());
  return ingest(in, TraceFormat::Canonical, bp.mapping, bp.problem).plan;
}

std::string classify(const std::vector<TraceEvent>& events, const BehaviorProblem& bp) {
  return classify_planning(events, bp);
}

}  // namespace

TEST_CASE("reverse-shell model matches the published operator structure") {
  const auto& rs = reverse_shell_problem();
  const Domain& d = rs.problem.domain();
  CHECK(d.predicates.size() == 7);

  // Conditional-effect counts per operator. dup and fcntl carry one extra
  // effect each (close-on-exec follows duplication) so that a descriptor
  // opened close-on-exec can never smuggle a shell past execve.
  struct Row {
    const char* name;
    size_t effects;
    size_t quantified;
    size_t params;
  };
  for (const Row& row : std::initializer_list<Row>{{"socket", 2, 0, 2},
                                                   {"connect", 2, 1, 1},
                                                   {"dup", 5, 1, 2},
                                                   {"fcntl", 7, 1, 4},
                                                   {"close", 2, 1, 1},
                                                   {"execve", 1, 0, 1}}) {
    auto sid = d.schema_id(row.name);
    REQUIRE(sid.has_value());
    const ActionSchema& s = d.schemas[*sid];
    CHECK(s.effects.size() == row.effects);
    CHECK(static_cast<size_t>(s.param_count) == row.params);
    size_t quantified = 0;
    for (const auto& e : s.effects) quantified += e.forall_var.has_value() ? 1 : 0;
    CHECK(quantified == row.quantified);
    CHECK(s.precondition.empty());  // syscalls never fail the plan
  }

  // execve's trigger is an existential over descriptors.
  const ActionSchema& execve = d.schemas[*d.schema_id("execve")];
  const Condition& c = execve.effects[0].condition;
  REQUIRE(c.kind == Condition::Kind::And);
  bool has_exists = false;
  for (const auto& child : c.children)
    if (child.kind == Condition::Kind::Exists) has_exists = true;
  CHECK(has_exists);
}

TEST_CASE("all five published reverse-shell variants validate") {
  const auto& rs = reverse_shell_problem();
  for (const char* name :
       {"plan1.trace", "plan2.trace", "plan3.trace", "plan4.trace", "plan5.trace"}) {
    auto plan = ingest_fixture(name, rs);
    ValidationReport report = validate(rs.problem, plan, "remote-shell");
    CHECK_MESSAGE(report.valid, name << ": " << report.reason);
  }
}

TEST_CASE("the flag-clearing variant exercises set-then-cleared close-on-exec") {
  const auto& rs = reverse_shell_problem();
  auto plan = ingest_fixture("plan5.trace", rs);
  REQUIRE(plan.size() == 7);
  // Step 2 opens the socket close-on-exec; the fcntl at step 6 clears it.
  auto cloexec = *rs.problem.domain().pred_id("close-on-exec");
  ConstId fd0 = *rs.problem.const_id("fd0");
  Trajectory traj = simulate(rs.problem, plan, FailurePolicy::Skip);
  REQUIRE(traj.states.size() == 8);
  CHECK(traj.states[2].contains(rs.problem.prop_id(cloexec, {fd0})));
  CHECK(traj.states[5].contains(rs.problem.prop_id(cloexec, {fd0})));
  CHECK(!traj.states[6].contains(rs.problem.prop_id(cloexec, {fd0})));
  CHECK(validate(rs.problem, plan, "remote-shell").valid);
}

TEST_CASE("a socket left close-on-exec never starts a remote shell") {
  // socket(fd3,true), connect, close(0), dup(3,0), close(1), dup(3,1),
  // execve(sh): every descriptor that aliases stdin/stdout inherited the
  // close-on-exec flag, so the goal must not fire.
  const auto& rs = reverse_shell_problem();
  std::vector<GroundAction> plan = {
      ground(rs.problem.domain(), rs.problem, "socket",
             {{"returned-sd", "fd3"}, {"cloexec", "true"}}),
      ground(rs.problem.domain(), rs.problem, "connect", {{"sd", "fd3"}}),
      ground(rs.problem.domain(), rs.problem, "close", {{"sd", "fd0"}}),
      ground(rs.problem.domain(), rs.problem, "dup", {{"sd", "fd3"}, {"returned-sd", "fd0"}}),
      ground(rs.problem.domain(), rs.problem, "close", {{"sd", "fd1"}}),
      ground(rs.problem.domain(), rs.problem, "dup", {{"sd", "fd3"}, {"returned-sd", "fd1"}}),
      ground(rs.problem.domain(), rs.problem, "execve", {{"path", "sh"}}),
  };
  ValidationReport report = validate(rs.problem, plan, "remote-shell");
  CHECK(!report.valid);
  CHECK(!report.fail_step.has_value());

  oracle::Interpreter interp(rs.problem);
  CHECK(interp.simulate_skip(plan).count("(remote-shell-started)") == 0);
}

TEST_CASE("mail goals discriminate the generated behaviors") {
  const auto& mail = mail_problem();
  oracle::Interpreter interp(mail.problem);

  // smtp-receive: exactly its own goal, confirmed by the reference
  // interpreter on the ingested plan.
  LabeledTrace smtp = generate_trace(BehaviorLabel::SmtpReceive, 424242);
  auto smtp_plan = ingest_events(smtp.events, mail.mapping, mail.problem).plan;
  auto smtp_state = interp.simulate_skip(smtp_plan);
  int satisfied = 0;
  for (const auto& goal : mail.problem.goals())
    if (interp.eval(goal.condition, goal.goal_vars, {}, smtp_state)) ++satisfied;
  CHECK(satisfied == 1);
  CHECK(classify(smtp.events, mail) == "smtp-receive");

  // forward satisfies forward and nothing else.
  LabeledTrace fwd = generate_trace(BehaviorLabel::Forward, 31337);
  auto fwd_plan = ingest_events(fwd.events, mail.mapping, mail.problem).plan;
  auto fwd_state = interp.simulate_skip(fwd_plan);
  for (const auto& goal : mail.problem.goals()) {
    bool holds = interp.eval(goal.condition, goal.goal_vars, {}, fwd_state);
    CHECK(holds == (goal.label == "forward"));
  }

  // pure local file activity satisfies nothing.
  LabeledTrace other = generate_trace(BehaviorLabel::Other, 7);
  auto other_plan = ingest_events(other.events, mail.mapping, mail.problem).plan;
  auto other_state = interp.simulate_skip(other_plan);
  for (const auto& goal : mail.problem.goals())
    CHECK(!interp.eval(goal.condition, goal.goal_vars, {}, other_state));
  CHECK(classify(other.events, mail) == "other");
}

TEST_CASE("trace generation is deterministic per seed") {
  for (BehaviorLabel label : all_labels()) {
    LabeledTrace a = generate_trace(label, 7);
    LabeledTrace b = generate_trace(label, 7);
    CHECK(a.events == b.events);
    CHECK(a.skeleton_indices == b.skeleton_indices);
    LabeledTrace c = generate_trace(label, 8);
    CHECK(!(a.events == c.events));
  }
}

TEST_CASE("generated traces stay inside the documented length band") {
  SplitMix64 rng(0x11);
  for (int i = 0; i < 200; ++i) {
    BehaviorLabel label = all_labels()[i % kBehaviorLabelCount];
    LabeledTrace t = generate_trace(label, rng.next());
    CHECK(t.events.size() >= 50);
    CHECK(t.events.size() <= 300);
    for (size_t k = 0; k < t.events.size(); ++k)
      CHECK(t.events[k].seq == static_cast<int64_t>(k + 1));
  }
}

TEST_CASE("generator label soundness: classification equals the label") {
  const auto& mail = mail_problem();
  for (BehaviorLabel label : all_labels()) {
    for (uint64_t seed = 0; seed < 100; ++seed) {
      LabeledTrace t = generate_trace(label, seed);
      std::string got = classify(t.events, mail);
      CHECK_MESSAGE(got == label_name(label),
                    label_name(label) << " seed " << seed << " classified as " << got);
      if (got != label_name(label)) return;
    }
  }
}

TEST_CASE("deleting every non-skeleton event preserves the classification") {
  const auto& mail = mail_problem();
  SplitMix64 rng(0x22);
  for (int i = 0; i < 60; ++i) {
    BehaviorLabel label = all_labels()[i % kBehaviorLabelCount];
    LabeledTrace t = generate_trace(label, 5000 + rng.below(100000));
    std::set<size_t> keep(t.skeleton_indices.begin(), t.skeleton_indices.end());
    std::vector<TraceEvent> skeleton_only;
    for (size_t k = 0; k < t.events.size(); ++k)
      if (keep.count(k)) skeleton_only.push_back(t.events[k]);
    CHECK(classify(skeleton_only, mail) == label_name(label));
  }
}

TEST_CASE("the benign noise vocabulary is fixed and write-free") {
  const auto& names = noise_syscalls();
  CHECK(names.size() == 12);
  CHECK(std::find(names.begin(), names.end(), "sleep") == names.end());
  CHECK(std::find(names.begin(), names.end(), "write") == names.end());
  CHECK(std::find(names.begin(), names.end(), "execve") == names.end());

  // Generated noise stays within the vocabulary plus the skeleton syscalls.
  std::set<std::string> allowed(names.begin(), names.end());
  for (const char* s : {"socket", "bind", "listen", "accept", "connect", "read", "write",
                        "open", "close", "dup", "dup2", "fcntl", "execve"})
    allowed.insert(s);
  for (BehaviorLabel label : all_labels()) {
    LabeledTrace t = generate_trace(label, 99);
    for (const auto& ev : t.events) CHECK(allowed.count(ev.syscall) == 1);
  }
}

TEST_CASE("generated descriptor numbers are consistent with allocation") {
  // Replaying any generated trace through the mail model must never hit an
  // already-open descriptor on open/socket/accept (the generator allocates
  // lowest-free like the kernel).
  const auto& mail = mail_problem();
  auto opened = *mail.problem.domain().pred_id("opened");
  SplitMix64 rng(0x33);
  for (int i = 0; i < 30; ++i) {
    BehaviorLabel label = all_labels()[i % kBehaviorLabelCount];
    LabeledTrace t = generate_trace(label, rng.next());
    auto plan = ingest_events(t.events, mail.mapping, mail.problem).plan;
    State s = mail.problem.initial();
    for (const auto& a : plan) {
      const auto& schema = mail.problem.domain().schemas[a.schema];
      if (schema.name == "socket" || schema.name == "open") {
        CHECK(!s.contains(mail.problem.prop_id(opened, {a.binding[0]})));
      }
      if (schema.name == "accept") {
        CHECK(!s.contains(mail.problem.prop_id(opened, {a.binding[1]})));
      }
      s = apply(s, a, mail.problem);
    }
  }
}
