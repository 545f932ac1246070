// bdl — behavior recognition for syscall traces.
//
// Results go to stdout, diagnostics to stderr. Exit codes: 0 success,
// 1 operational error (bad input, invalid plan, unsatisfied goal),
// 2 usage error.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "bdl/behaviors.hpp"
#include "bdl/experiment.hpp"
#include "bdl/language.hpp"
#include "bdl/rng.hpp"
#include "bdl/simulate.hpp"

namespace {

constexpr const char* kVersion = "bdl 0.1.0";

struct LoadedProblem {
  bdl::Problem problem;
  std::vector<bdl::MappingRule> mapping;
};

LoadedProblem load_problem(const std::string& domain_path, const std::string& problem_path) {
  auto domain_result = bdl::parse_domain(bdl::read_file(domain_path), domain_path);
  if (!domain_result.ok()) {
    std::ostringstream os;
    for (const auto& e : domain_result.errors) os << bdl::to_string(e) << "\n";
    throw bdl::IngestError(os.str());
  }
  auto problem_result =
      bdl::parse_problem(bdl::read_file(problem_path), *domain_result.value, problem_path);
  if (!problem_result.ok()) {
    std::ostringstream os;
    for (const auto& e : problem_result.errors) os << bdl::to_string(e) << "\n";
    throw bdl::IngestError(os.str());
  }
  return {std::move(problem_result.value->problem), std::move(problem_result.value->mapping)};
}

bdl::IngestResult ingest_file(const std::string& path, const std::string& format,
                              const LoadedProblem& lp) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw bdl::IngestError("cannot open trace file: " + path);
  auto fmt = format == "sysdig" ? bdl::TraceFormat::Sysdig : bdl::TraceFormat::Canonical;
  return bdl::ingest(in, fmt, lp.mapping, lp.problem);
}

void report_ingest(const bdl::IngestReport& report) {
  std::cerr << "ingest: " << report.events << " events, " << report.mapped << " mapped, "
            << report.noops << " no-ops, " << report.warning_count() << " warnings\n";
  for (const auto& w : report.warnings) std::cerr << "  warning: " << w << "\n";
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw bdl::IngestError("cannot write file: " + path);
  out << content;
}

int cmd_validate(const std::string& domain, const std::string& problem,
                 const std::string& plan_path, const std::string& goal,
                 const std::string& format) {
  LoadedProblem lp = load_problem(domain, problem);
  auto ingested = ingest_file(plan_path, format, lp);
  report_ingest(ingested.report);
  bdl::ValidationReport report = bdl::validate(lp.problem, ingested.plan, goal);
  std::cout << (report.valid ? "valid" : "invalid") << "\n";
  if (!report.valid) {
    std::cerr << report.reason << "\n";
    if (report.fail_step) std::cerr << "failed at plan step " << *report.fail_step << "\n";
    return 1;
  }
  std::cerr << report.reason << "\n";
  return 0;
}

int cmd_classify(const std::string& domain, const std::string& problem,
                 const std::string& trace, const std::string& format, bool every_step) {
  LoadedProblem lp = load_problem(domain, problem);
  auto ingested = ingest_file(trace, format, lp);
  report_ingest(ingested.report);
  bdl::Trajectory traj = bdl::simulate(
      lp.problem, ingested.plan, bdl::SimOptions{bdl::FailurePolicy::Skip, every_step});
  if (every_step) {
    for (size_t i = 0; i < traj.states.size(); ++i) {
      auto labels = bdl::evaluate_goals(traj.states[i], lp.problem);
      std::cout << "step " << i << ":";
      if (labels.empty()) std::cout << " other";
      for (const auto& l : labels) std::cout << " " << l;
      std::cout << "\n";
    }
    return 0;
  }
  auto labels = bdl::evaluate_goals(traj.final_state, lp.problem);
  if (labels.empty()) {
    std::cout << "other\n";
  } else {
    for (const auto& l : labels) std::cout << l << "\n";
  }
  return 0;
}

int cmd_check(const std::string& domain, const std::string& problem) {
  LoadedProblem lp = load_problem(domain, problem);
  bdl::WellDefinednessReport report = bdl::check_well_defined(lp.problem);
  std::cout << (report.ok() ? "well-defined" : "ill-defined") << "\n";
  std::cerr << report.instances_checked << " ground instances checked\n";
  for (const auto& v : report.violations) {
    std::cerr << v.schema;
    if (!v.binding.empty()) {
      std::cerr << "(";
      for (size_t i = 0; i < v.binding.size(); ++i)
        std::cerr << (i ? " " : "") << v.binding[i];
      std::cerr << ")";
    }
    std::cerr << " effect " << v.effect_a;
    if (v.effect_b >= 0) std::cerr << " vs " << v.effect_b;
    std::cerr << ": " << v.message << "\n";
    if (!v.witness.empty()) {
      std::cerr << "  witness state:";
      for (const auto& p : v.witness) std::cerr << " " << p;
      std::cerr << "\n";
    }
  }
  return report.ok() ? 0 : 1;
}

int cmd_gen(const std::string& label_name, uint64_t seed, const std::string& out) {
  auto label = bdl::label_from_name(label_name);
  if (!label) throw bdl::IngestError("unknown label '" + label_name + "'");
  bdl::LabeledTrace trace = bdl::generate_trace(*label, seed);
  std::ostringstream os;
  bdl::write_canonical(os, trace.events);
  write_file(out, os.str());
  std::cerr << "wrote " << trace.events.size() << " events to " << out << "\n";
  return 0;
}

int cmd_gen_dataset(int samples_per_label, uint64_t seed, const std::string& out) {
  bdl::Dataset dataset;
  for (bdl::BehaviorLabel label : bdl::all_labels())
    for (int i = 0; i < samples_per_label; ++i)
      dataset.samples.push_back(
          bdl::generate_trace(label, bdl::mix_seed(seed, static_cast<uint64_t>(i))));
  write_file(out, bdl::dataset_to_jsonl(dataset));
  std::cerr << "wrote " << dataset.samples.size() << " labeled traces to " << out << "\n";
  return 0;
}

int cmd_obfuscate(const std::string& in_path, const std::string& out_path,
                  const std::string& noop) {
  bdl::IngestReport report;
  auto events = bdl::parse_canonical_file(in_path, report);
  if (report.malformed_lines > 0)
    throw bdl::IngestError("input trace has " + std::to_string(report.malformed_lines) +
                           " malformed lines");
  auto obf = bdl::obfuscate(events, noop);
  std::ostringstream os;
  bdl::write_canonical(os, obf);
  write_file(out_path, os.str());
  std::cerr << events.size() << " events -> " << obf.size() << " events\n";
  return 0;
}

int cmd_baseline_train(const std::string& dataset_path, const std::string& out,
                       uint64_t seed, size_t vocab_k, int trees, int max_depth, int jobs) {
  bdl::Dataset dataset = bdl::dataset_from_jsonl(bdl::read_file(dataset_path));
  std::vector<bdl::NameList> corpus;
  std::vector<std::string> labels;
  for (const auto& s : dataset.samples) {
    bdl::NameList names;
    for (const auto& ev : s.events) names.push_back(ev.syscall);
    corpus.push_back(std::move(names));
    labels.push_back(bdl::label_name(s.label));
  }
  bdl::Vocabulary vocab = bdl::build_vocabulary(corpus, vocab_k);
  std::vector<bdl::FeatureVector> x;
  for (const auto& names : corpus) x.push_back(bdl::vectorize(names, vocab));
  bdl::ForestHyperparams hp;
  hp.tree_count = trees;
  hp.max_depth = max_depth;
  bdl::ForestModel model = bdl::train_forest(x, labels, hp, seed, jobs);
  model.vocabulary = std::move(vocab);
  write_file(out, bdl::serialize_model(model));
  std::cerr << "trained " << trees << " trees on " << x.size() << " samples ("
            << model.labels.size() << " labels), wrote " << out << "\n";
  return 0;
}

int cmd_baseline_eval(const std::string& model_path, const std::string& dataset_path) {
  bdl::ForestModel model = bdl::parse_model(bdl::read_file(model_path));
  bdl::Dataset dataset = bdl::dataset_from_jsonl(bdl::read_file(dataset_path));
  std::vector<std::string> predictions, gold;
  for (const auto& s : dataset.samples) {
    bdl::NameList names;
    for (const auto& ev : s.events) names.push_back(ev.syscall);
    predictions.push_back(bdl::predict(model, bdl::vectorize(names, model.vocabulary)));
    gold.push_back(bdl::label_name(s.label));
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.4f", bdl::accuracy(predictions, gold));
  std::cout << buf << "\n";
  return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& out, int jobs) {
  bdl::ExperimentConfig config = bdl::config_from_jsonl(bdl::read_file(config_path));
  if (jobs > 0) config.jobs = jobs;
  bdl::ExperimentReport report = bdl::run_experiment(config);
  if (!out.empty()) write_file(out, bdl::report_to_jsonl(report));
  std::cout << bdl::report_to_text(report);
  std::cerr << "baseline training " << report.baseline_train_seconds << "s, planning "
            << report.planning_classify_seconds << "s, total " << report.total_seconds
            << "s\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"behavior recognition for syscall traces"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string domain, problem, trace, goal, format = "canonical";
  std::string in_path, out_path, noop = "sleep", label, model_path, dataset_path, config_path;
  bool every_step = false;
  uint64_t seed = 0;
  int samples_per_label = 60, trees = 100, max_depth = 0, jobs = 0;
  size_t vocab_k = 100;

  auto* validate = app.add_subcommand("validate", "strict-validate a trace against a goal");
  validate->add_option("--domain", domain)->required();
  validate->add_option("--problem", problem)->required();
  validate->add_option("--plan", trace)->required();
  validate->add_option("--goal", goal)->required();
  validate->add_option("--format", format)->check(CLI::IsMember({"canonical", "sysdig"}));

  auto* classify = app.add_subcommand("classify", "report which behaviors a trace realizes");
  classify->add_option("--domain", domain)->required();
  classify->add_option("--problem", problem)->required();
  classify->add_option("--trace", trace)->required();
  classify->add_option("--format", format)->check(CLI::IsMember({"canonical", "sysdig"}));
  classify->add_flag("--every-step", every_step,
                     "re-evaluate the goals after every plan step");

  auto* check = app.add_subcommand("check", "check a domain's well-definedness");
  check->add_option("--domain", domain)->required();
  check->add_option("--problem", problem)->required();

  auto* gen = app.add_subcommand("gen", "generate one labeled trace");
  gen->add_option("--label", label)->required();
  gen->add_option("--seed", seed)->required();
  gen->add_option("--out", out_path)->required();

  auto* gen_dataset = app.add_subcommand("gen-dataset", "generate a labeled dataset");
  gen_dataset->add_option("--samples-per-label", samples_per_label)->required();
  gen_dataset->add_option("--seed", seed)->required();
  gen_dataset->add_option("--out", out_path)->required();

  auto* obfuscate = app.add_subcommand("obfuscate", "insert a no-op between every event pair");
  obfuscate->add_option("--in", in_path)->required();
  obfuscate->add_option("--out", out_path)->required();
  obfuscate->add_option("--noop", noop);

  auto* baseline = app.add_subcommand("baseline", "bi-gram random-forest baseline");
  baseline->require_subcommand(1);
  auto* btrain = baseline->add_subcommand("train", "train on a labeled dataset");
  btrain->add_option("--dataset", dataset_path)->required();
  btrain->add_option("--out", out_path)->required();
  btrain->add_option("--seed", seed)->required();
  btrain->add_option("--vocab-k", vocab_k);
  btrain->add_option("--trees", trees);
  btrain->add_option("--max-depth", max_depth);
  btrain->add_option("--jobs", jobs);
  auto* beval = baseline->add_subcommand("eval", "print accuracy on a labeled dataset");
  beval->add_option("--model", model_path)->required();
  beval->add_option("--dataset", dataset_path)->required();

  auto* experiment = app.add_subcommand("experiment", "run the full three-row experiment");
  experiment->add_option("--config", config_path)->required();
  experiment->add_option("--out", out_path);
  experiment->add_option("--jobs", jobs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    std::cerr << app.help() << "\n";
    return 2;
  }

  try {
    if (validate->parsed()) return cmd_validate(domain, problem, trace, goal, format);
    if (classify->parsed()) return cmd_classify(domain, problem, trace, format, every_step);
    if (check->parsed()) return cmd_check(domain, problem);
    if (gen->parsed()) return cmd_gen(label, seed, out_path);
    if (gen_dataset->parsed()) return cmd_gen_dataset(samples_per_label, seed, out_path);
    if (obfuscate->parsed()) return cmd_obfuscate(in_path, out_path, noop);
    if (baseline->parsed()) {
      if (btrain->parsed())
        return cmd_baseline_train(dataset_path, out_path, seed, vocab_k, trees, max_depth,
                                  jobs > 0 ? jobs : 1);
      if (beval->parsed()) return cmd_baseline_eval(model_path, dataset_path);
    }
    if (experiment->parsed()) return cmd_experiment(config_path, out_path, jobs);
  } catch (const std::exception& e) {
    std::string what = e.what();
    std::cerr << "error: " << what;
    if (what.empty() || what.back() != '\n') std::cerr << "\n";
    return 1;
  }
  std::cerr << app.help() << "\n";
  return 2;
}
