#pragma once

// The randomized property suites, shared between the unit tests and the
// acceptance runner. Each suite runs a fixed number of seeded cases and
// reports failures as strings; an empty failure list means the property
// held everywhere.

#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bdl/behaviors.hpp"
#include "bdl/experiment.hpp"
#include "bdl/forest.hpp"
#include "bdl/language.hpp"
#include "bdl/simulate.hpp"
#include "support/generators.hpp"
#include "support/oracle.hpp"

namespace props {

struct SuiteResult {
  std::string name;
  int64_t cases = 0;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
  void fail(const std::string& msg) {
    if (failures.size() < 5) failures.push_back(msg);
  }
};

// Conditions must be evaluated against the pre-state even when other
// effects of the same action toggle the mentioned propositions.
inline SuiteResult prestate_effect_evaluation(int64_t cases = 1000) {
  SuiteResult r;
  r.name = "pre-state effect evaluation";
  bdl::SplitMix64 rng(0xabc1);
  gen::DomainOptions opt;
  opt.max_arity = 0;  // few propositions, maximal effect overlap
  opt.max_predicates = 4;
  opt.max_condition_depth = 1;
  for (int64_t attempts = 0; r.cases < cases && attempts < cases * 20; ++attempts) {
    gen::DomainGen g(rng, opt);
    bdl::Domain d = g.domain();
    bdl::Problem p = g.problem(d, 1, 0, 1);
    oracle::Interpreter interp(p);
    bdl::State s = g.random_state(p, 50);
    bdl::GroundAction a = g.random_action(p);
    if (!bdl::applicable(s, a, p)) continue;
    ++r.cases;
    std::optional<oracle::OracleState> expect = interp.apply(interp.from_state(s), a);
    try {
      bdl::State got = bdl::apply(s, a, p);
      if (!expect) {
        r.fail("case " + std::to_string(r.cases) + ": oracle found an effect conflict");
      } else if (interp.from_state(got) != *expect) {
        r.fail("case " + std::to_string(r.cases) + ": post-state mismatch");
      }
    } catch (const bdl::ModelError&) {
      if (expect) r.fail("case " + std::to_string(r.cases) + ": spurious effect conflict");
    }
  }
  return r;
}

// Propositions not mentioned by any triggered effect stay untouched;
// checked against the brute-force interpreter on universes with <= 16
// ground propositions.
inline SuiteResult frame_property(int64_t cases = 1000) {
  SuiteResult r;
  r.name = "frame property vs brute-force interpreter";
  bdl::SplitMix64 rng(0xabc2);
  gen::DomainOptions opt;
  opt.max_arity = 1;
  opt.max_predicates = 4;
  opt.max_types = 2;
  for (int64_t attempts = 0; r.cases < cases && attempts < cases * 20; ++attempts) {
    gen::DomainGen g(rng, opt);
    bdl::Domain d = g.domain();
    bdl::Problem p = g.problem(d, 2, 0, 1);
    if (p.prop_count() > 16) continue;
    oracle::Interpreter interp(p);
    bdl::State s = g.random_state(p, 40);
    bdl::GroundAction a = g.random_action(p);
    if (!bdl::applicable(s, a, p)) continue;
    ++r.cases;
    std::optional<oracle::OracleState> expect = interp.apply(interp.from_state(s), a);
    try {
      bdl::State got = bdl::apply(s, a, p);
      if (!expect || interp.from_state(got) != *expect) {
        r.fail("case " + std::to_string(r.cases) + ": disagreement with interpreter");
      }
    } catch (const bdl::ModelError&) {
      if (expect) r.fail("case " + std::to_string(r.cases) + ": spurious effect conflict");
    }
  }
  return r;
}

// After close(x), no proposition mentioning descriptor x survives.
inline SuiteResult close_resets_facts(int64_t cases = 1000) {
  SuiteResult r;
  r.name = "close removes every fact about the descriptor";
  const auto& bp = bdl::reverse_shell_problem();
  const bdl::Problem& p = bp.problem;
  bdl::SplitMix64 rng(0xabc3);
  gen::DomainGen g(rng);  // only used for its rng-driven helpers
  auto fd_type = *p.domain().type_id("fd");
  const auto& fds = p.constants_of_type(fd_type);
  auto close_id = *p.domain().schema_id("close");
  for (r.cases = 0; r.cases < cases; ++r.cases) {
    bdl::State s = p.initial();
    int steps = static_cast<int>(rng.below(15));
    for (int i = 0; i < steps; ++i) {
      bdl::GroundAction a = g.random_action(p);
      if (bdl::applicable(s, a, p)) s = bdl::apply(s, a, p);
    }
    bdl::ConstId x = fds[rng.below(fds.size())];
    bdl::GroundAction close{close_id, {x}};
    bdl::State after = bdl::apply(s, close, p);
    for (bdl::PropId prop : after.props) {
      for (bdl::ConstId c : p.prop_args(prop)) {
        if (c == x)
          r.fail("case " + std::to_string(r.cases) + ": " + p.prop_name(prop) +
                 " survived close(" + p.constant(x).name + ")");
      }
    }
  }
  return r;
}

// equal-fds stays symmetric along every Skip-mode trajectory.
inline SuiteResult equal_fds_symmetry(int64_t cases = 1000) {
  SuiteResult r;
  r.name = "equal-fds symmetry under Skip simulation";
  const auto& bp = bdl::reverse_shell_problem();
  const bdl::Problem& p = bp.problem;
  bdl::SplitMix64 rng(0xabc4);
  gen::DomainGen g(rng);
  auto eq_id = *p.domain().pred_id("equal-fds");
  for (r.cases = 0; r.cases < cases; ++r.cases) {
    bdl::State s = p.initial();
    int steps = static_cast<int>(rng.below(12));
    for (int i = 0; i < steps; ++i) {
      bdl::GroundAction a = g.random_action(p);
      if (bdl::applicable(s, a, p)) s = bdl::apply(s, a, p);
      for (bdl::PropId prop : s.props) {
        if (p.prop_pred(prop) != eq_id) continue;
        auto args = p.prop_args(prop);
        if (!s.contains(p.prop_id(eq_id, {args[1], args[0]})))
          r.fail("case " + std::to_string(r.cases) + ": " + p.prop_name(prop) +
                 " present without its mirror");
      }
    }
  }
  return r;
}

// Obfuscation with an unmapped no-op never changes the ingested plan.
inline SuiteResult obfuscation_transparency(int64_t cases = 1000) {
  SuiteResult r;
  r.name = "ingest obfuscation transparency";
  const auto& bp = bdl::mail_problem();
  for (r.cases = 0; r.cases < cases; ++r.cases) {
    bdl::BehaviorLabel label = bdl::all_labels()[r.cases % bdl::kBehaviorLabelCount];
    bdl::LabeledTrace t = bdl::generate_trace(label, 0x9000 + static_cast<uint64_t>(r.cases));
    auto plain = bdl::ingest_events(t.events, bp.mapping, bp.problem);
    auto obf = bdl::ingest_events(bdl::obfuscate(t.events), bp.mapping, bp.problem);
    if (!(plain.plan == obf.plan))
      r.fail("case " + std::to_string(r.cases) + ": plans differ after obfuscation");
    if (obf.report.events != 2 * plain.report.events - 1)
      r.fail("case " + std::to_string(r.cases) + ": unexpected obfuscated event count");
  }
  return r;
}

// parse(serialize(x)) is the identity on random domains and problems.
inline SuiteResult roundtrip_language(int64_t cases = 1000) {
  SuiteResult r;
  r.name = "parse/serialize round-trip";
  bdl::SplitMix64 rng(0xabc6);
  for (r.cases = 0; r.cases < cases; ++r.cases) {
    gen::DomainGen g(rng);
    bdl::Domain d = g.domain();
    bdl::Problem p = g.problem(d);
    std::string dtext = bdl::serialize(d);
    auto dres = bdl::parse_domain(dtext, "roundtrip");
    if (!dres.ok()) {
      r.fail("case " + std::to_string(r.cases) + ": domain did not reparse: " +
             (dres.errors.empty() ? "?" : bdl::to_string(dres.errors[0])));
      continue;
    }
    if (!(*dres.value == d)) {
      r.fail("case " + std::to_string(r.cases) + ": domain reparse not structurally equal");
      continue;
    }
    std::string ptext = bdl::serialize(p);
    auto pres = bdl::parse_problem(ptext, *dres.value, "roundtrip");
    if (!pres.ok()) {
      r.fail("case " + std::to_string(r.cases) + ": problem did not reparse: " +
             (pres.errors.empty() ? "?" : bdl::to_string(pres.errors[0])));
      continue;
    }
    if (!(pres.value->problem == p))
      r.fail("case " + std::to_string(r.cases) + ": problem reparse not structurally equal");
  }
  return r;
}

// sum(vector) + out-of-vocabulary bigrams == len - 1 for nonempty traces.
inline SuiteResult count_conservation(int64_t cases = 1000) {
  SuiteResult r;
  r.name = "bigram count conservation";
  bdl::SplitMix64 rng(0xabc7);
  std::vector<std::string> alphabet = {"open", "read", "write", "close", "stat",
                                       "mmap", "brk",  "dup",   "socket"};
  for (r.cases = 0; r.cases < cases; ++r.cases) {
    bdl::NameList names;
    int len = 1 + static_cast<int>(rng.below(40));
    for (int i = 0; i < len; ++i) names.push_back(alphabet[rng.below(alphabet.size())]);
    // Random vocabulary over the same alphabet.
    std::vector<bdl::Bigram> vocab_list;
    std::set<bdl::Bigram> seen;
    int vsize = static_cast<int>(rng.below(12));
    for (int i = 0; i < vsize; ++i) {
      bdl::Bigram bg{alphabet[rng.below(alphabet.size())], alphabet[rng.below(alphabet.size())]};
      if (seen.insert(bg).second) vocab_list.push_back(bg);
    }
    bdl::Vocabulary vocab = bdl::Vocabulary::from_bigrams(vocab_list);
    bdl::FeatureVector v = bdl::vectorize(names, vocab);
    int64_t in_vocab = 0;
    for (int32_t c : v) in_vocab += c;
    int64_t oov = 0;
    for (const auto& [bg, n] : bdl::bigrams(names))
      if (!vocab.index.count(bg)) oov += n;
    if (in_vocab + oov != static_cast<int64_t>(names.size()) - 1)
      r.fail("case " + std::to_string(r.cases) + ": counts do not add up");
  }
  return r;
}

// Identical (data, hyperparameters, seed) always gives a byte-identical
// serialized model, sequentially and in parallel.
inline SuiteResult training_determinism(int64_t cases = 1000) {
  SuiteResult r;
  r.name = "forest training determinism";
  bdl::SplitMix64 rng(0xabc8);
  for (r.cases = 0; r.cases < cases; ++r.cases) {
    int samples = 4 + static_cast<int>(rng.below(10));
    int width = 2 + static_cast<int>(rng.below(4));
    std::vector<bdl::FeatureVector> x;
    std::vector<std::string> y;
    for (int i = 0; i < samples; ++i) {
      bdl::FeatureVector row;
      for (int f = 0; f < width; ++f) row.push_back(static_cast<int32_t>(rng.below(6)));
      x.push_back(std::move(row));
      y.push_back(rng.chance(50) ? "a" : "b");
    }
    bdl::ForestHyperparams hp;
    hp.tree_count = 3;
    uint64_t seed = rng.next();
    std::string m1 = bdl::serialize_model(bdl::train_forest(x, y, hp, seed, 1));
    std::string m2 = bdl::serialize_model(bdl::train_forest(x, y, hp, seed, 1));
    std::string m3 = bdl::serialize_model(bdl::train_forest(x, y, hp, seed, 2));
    if (m1 != m2) r.fail("case " + std::to_string(r.cases) + ": sequential runs differ");
    if (m1 != m3) r.fail("case " + std::to_string(r.cases) + ": parallel run differs");
  }
  return r;
}

inline std::vector<SuiteResult> run_all_suites(int64_t cases = 1000) {
  return {
      prestate_effect_evaluation(cases), frame_property(cases),
      close_resets_facts(cases),         equal_fds_symmetry(cases),
      obfuscation_transparency(cases),   roundtrip_language(cases),
      count_conservation(cases),         training_determinism(cases),
  };
}

}  // namespace props
