// Acceptance suite: runs every shipped claim end to end and prints one
// PASS/FAIL line per criterion. Exit code is the number of failures.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bdl/behaviors.hpp"
#include "bdl/experiment.hpp"
#include "bdl/forest.hpp"
#include "bdl/ingest.hpp"
#include "bdl/language.hpp"
#include "bdl/simulate.hpp"
#include "support/properties.hpp"

using namespace bdl;

namespace {

struct Criterion {
  std::string name;
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<TraceEvent> load_fixture(const std::string& name) {
  IngestReport report;
  auto events =
      parse_canonical_file(std::string(BDL_FIXTURES_DIR) + "/plans/" + name, report);
  if (report.malformed_lines != 0)
    throw IngestError(name + ": fixture has malformed lines");
  return events;
}

// 1. The five published reverse-shell variants classify as remote-shell.
Criterion criterion_golden_plans() {
  Criterion c{"golden reverse-shell plans classify as remote-shell (5/5, <1s)"};
  auto start = std::chrono::steady_clock::now();
  const auto& rs = reverse_shell_problem();
  int good = 0;
  std::ostringstream detail;
  for (const char* name :
       {"plan1.trace", "plan2.trace", "plan3.trace", "plan4.trace", "plan5.trace"}) {
    auto events = load_fixture(name);
    std::string got = classify_planning(events, rs);
    if (got == "remote-shell") {
      ++good;
    } else {
      detail << name << " -> " << got << "; ";
    }
  }
  double elapsed = seconds_since(start);
  c.pass = good == 5 && elapsed < 1.0;
  std::ostringstream os;
  os << good << "/5 correct in " << elapsed << "s. " << detail.str();
  c.detail = os.str();
  return c;
}

// 2. The background worked example: the valid sequence reaches
// (connected fd2); dropping listen fails strict validation at step 2.
Criterion criterion_background() {
  Criterion c{"inbound-connection worked example (reach + strict failure at step 2)"};
  const auto& bg = background_problem();
  auto valid_events = load_fixture("listen-accept.trace");
  auto valid_plan = ingest_events(valid_events, bg.mapping, bg.problem).plan;
  Trajectory traj = simulate(bg.problem, valid_plan, FailurePolicy::Strict);
  auto connected = *bg.problem.domain().pred_id("connected");
  bool reached =
      traj.final_state.contains(bg.problem.prop_id(connected, {*bg.problem.const_id("fd2")}));

  auto invalid_events = load_fixture("invalid-accept.trace");
  auto invalid_plan = ingest_events(invalid_events, bg.mapping, bg.problem).plan;
  ValidationReport report = validate(bg.problem, invalid_plan, "inbound-connection");
  bool failed_right = !report.valid && report.fail_step && *report.fail_step == 2;

  c.pass = reached && failed_right;
  std::ostringstream os;
  os << "(connected fd2) reached: " << (reached ? "yes" : "NO") << "; invalid plan fail step: "
     << (report.fail_step ? std::to_string(*report.fail_step) : "none");
  c.detail = os.str();
  return c;
}

// 3. Negative controls classify as other.
Criterion criterion_negative_controls() {
  Criterion c{"negative controls (no execve; close-on-exec never cleared) are 'other'"};
  const auto& rs = reverse_shell_problem();
  auto plan1 = load_fixture("plan1.trace");

  std::vector<TraceEvent> no_execve(plan1.begin(), plan1.end() - 1);
  std::string got1 = classify_planning(no_execve, rs);

  auto cloexec = plan1;
  cloexec[0].args["flags"] = "SOCK_CLOEXEC";
  std::string got2 = classify_planning(cloexec, rs);

  c.pass = got1 == "other" && got2 == "other";
  c.detail = "execve dropped -> " + got1 + "; close-on-exec socket -> " + got2;
  return c;
}

// 4. The worked bi-gram example vectorizes to the prefix 1,2,1,1.
Criterion criterion_bigram_example() {
  Criterion c{"bi-gram worked example vectorizes to 1,2,1,1"};
  Vocabulary v = Vocabulary::from_bigrams({{"open", "read"},
                                           {"read", "write"},
                                           {"write", "read"},
                                           {"write", "close"}});
  FeatureVector x = vectorize({"open", "read", "write", "read", "write", "close"}, v);
  c.pass = x == FeatureVector{1, 2, 1, 1};
  std::ostringstream os;
  os << "got ";
  for (size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
  c.detail = os.str();
  return c;
}

// 5. The desk-scale three-row experiment reproduces the accuracy pattern.
Criterion criterion_experiment() {
  Criterion c{"desk-scale experiment (60/label, <2min): accuracy pattern holds"};
  auto start = std::chrono::steady_clock::now();
  ExperimentConfig config;  // fixed default seeds
  config.samples_per_label = 60;
  config.jobs = 4;
  ExperimentReport report = run_experiment(config);
  double elapsed = seconds_since(start);

  double b_orig = report.rows[0].baseline_accuracy;
  double b_obf = report.rows[1].baseline_accuracy;
  double b_retr = report.rows[2].baseline_accuracy;
  double p_orig = report.rows[0].planning_accuracy;

  bool a_ok = p_orig >= 0.98 &&
              report.rows[0].planning_confusion == report.rows[1].planning_confusion;
  bool b_ok = b_orig >= 0.90;
  bool c_ok = b_obf <= b_orig - 0.50;
  bool d_ok = b_retr >= b_obf + 0.20 && b_retr <= b_orig;
  bool t_ok = elapsed < 120.0;
  c.pass = a_ok && b_ok && c_ok && d_ok && t_ok;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "baseline %.3f/%.3f/%.3f planning %.3f (obf confusion %s) in %.1fs"
                " [a:%d b:%d c:%d d:%d]",
                b_orig, b_obf, b_retr, p_orig, a_ok ? "identical" : "DIFFERS", elapsed,
                a_ok, b_ok, c_ok, d_ok);
  c.detail = buf;
  return c;
}

// 6. The randomized property suites, 1000 cases each.
Criterion criterion_properties() {
  Criterion c{"property suites (8 suites x 1000 randomized cases)"};
  auto results = props::run_all_suites(1000);
  std::ostringstream os;
  c.pass = true;
  for (const auto& r : results) {
    if (!r.ok() || r.cases < 1000) {
      c.pass = false;
      os << r.name << ": " << r.cases << " cases, " << r.failures.size() << " failures";
      if (!r.failures.empty()) os << " (" << r.failures[0] << ")";
      os << "; ";
    }
  }
  if (c.pass) {
    int64_t total = 0;
    for (const auto& r : results) total += r.cases;
    os << results.size() << " suites, " << total << " cases, no failures";
  }
  c.detail = os.str();
  return c;
}

// 7. Well-definedness: shipped domains pass, synthetic counterexamples fail.
Criterion criterion_well_definedness() {
  Criterion c{"well-definedness accepts shipped domains, flags both counterexamples"};
  bool rs_ok = check_well_defined(reverse_shell_problem().problem).ok();
  bool mail_ok = check_well_defined(mail_problem().problem).ok();

  Domain bad1;
  bad1.name = "bad1";
  bad1.types.push_back({"t"});
  bad1.predicates.push_back({"p", {}});
  ActionSchema s1;
  s1.name = "clash";
  ConditionalEffect e1, e2;
  e1.literals.push_back({0, {}, false});
  e2.literals.push_back({0, {}, true});
  s1.effects = {e1, e2};
  bad1.schemas.push_back(s1);
  auto r1 = check_well_defined(bad1, {});
  bool flag1 = r1.violations.size() == 1 &&
               r1.violations[0].kind == WellDefinednessViolation::Kind::ConflictingPair;

  Domain bad2;
  bad2.name = "bad2";
  bad2.types.push_back({"t"});
  bad2.predicates.push_back({"p", {}});
  bad2.predicates.push_back({"q", {}});
  ActionSchema s2;
  s2.name = "dead";
  s2.precondition.push_back({0, {}, false});
  ConditionalEffect e3;
  e3.condition = Condition::literal({0, {}, true});
  e3.literals.push_back({1, {}, false});
  s2.effects = {e3};
  bad2.schemas.push_back(s2);
  auto r2 = check_well_defined(bad2, {});
  bool flag2 = r2.violations.size() == 1 &&
               r2.violations[0].kind ==
                   WellDefinednessViolation::Kind::PreconditionIncompatible;

  c.pass = rs_ok && mail_ok && flag1 && flag2;
  std::ostringstream os;
  os << "reverse-shell " << (rs_ok ? "ok" : "FLAGGED") << ", mail "
     << (mail_ok ? "ok" : "FLAGGED") << ", counterexamples " << (flag1 ? "flagged" : "MISSED")
     << "/" << (flag2 ? "flagged" : "MISSED");
  c.detail = os.str();
  return c;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria;
  criteria.push_back(criterion_golden_plans());
  criteria.push_back(criterion_background());
  criteria.push_back(criterion_negative_controls());
  criteria.push_back(criterion_bigram_example());
  criteria.push_back(criterion_experiment());
  criteria.push_back(criterion_properties());
  criteria.push_back(criterion_well_definedness());

  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    if (!c.pass) ++failures;
    std::printf("%s  %zu. %s — %s\n", c.pass ? "PASS" : "FAIL", i + 1, c.name.c_str(),
                c.detail.c_str());
  }
  std::printf("%zu/%zu acceptance criteria passed\n", criteria.size() - failures,
              criteria.size());
  return failures;
}
