#include "bdl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <map>
#include <sstream>
#include <thread>

#include "bdl/rng.hpp"
#include "bdl/simulate.hpp"
#include "json.hpp"

namespace bdl {

std::vector<TraceEvent> obfuscate(const std::vector<TraceEvent>& trace,
                                  const std::string& noop_name) {
  std::vector<TraceEvent> out;
  if (trace.empty()) return out;
  out.reserve(trace.size() * 2 - 1);
  // Original events are kept verbatim (dropping the no-ops again must give
  // back the input exactly); the inserted no-ops take fresh numbers above
  // every existing one.
  int64_t fresh = 0;
  for (const auto& ev : trace) fresh = std::max(fresh, ev.seq);
  for (size_t i = 0; i < trace.size(); ++i) {
    if (i > 0) {
      TraceEvent noop;
      noop.syscall = noop_name;
      noop.args = {{"seconds", "0"}};
      noop.ret = 0;
      noop.seq = ++fresh;
      out.push_back(std::move(noop));
    }
    out.push_back(trace[i]);
  }
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw StatError("train fraction must be inside (0, 1)");
  std::map<BehaviorLabel, std::vector<size_t>> by_label;
  for (size_t i = 0; i < dataset.samples.size(); ++i)
    by_label[dataset.samples[i].label].push_back(i);

  Dataset train, test;
  train.split_seed = test.split_seed = seed;
  for (BehaviorLabel label : all_labels()) {
    auto it = by_label.find(label);
    if (it == by_label.end()) continue;
    auto idx = it->second;
    SplitMix64 rng(mix_seed(seed, static_cast<uint64_t>(label)));
    rng.shuffle(idx);
    size_t take = static_cast<size_t>(train_fraction * static_cast<double>(idx.size()));
    for (size_t i = 0; i < idx.size(); ++i)
      (i < take ? train : test).samples.push_back(dataset.samples[idx[i]]);
  }
  return {std::move(train), std::move(test)};
}

double accuracy(const std::vector<std::string>& predictions,
                const std::vector<std::string>& gold) {
  if (predictions.size() != gold.size())
    throw StatError("prediction/gold length mismatch");
  if (predictions.empty()) throw StatError("empty evaluation set");
  int64_t hits = 0;
  for (size_t i = 0; i < predictions.size(); ++i)
    if (predictions[i] == gold[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

std::string classify_planning(const std::vector<TraceEvent>& events,
                              const BehaviorProblem& bp) {
  IngestResult ingested = ingest_events(events, bp.mapping, bp.problem);
  Trajectory traj =
      simulate(bp.problem, ingested.plan, SimOptions{FailurePolicy::Skip, false});
  auto labels = evaluate_goals(traj.final_state, bp.problem);
  return labels.empty() ? std::string("other") : labels.front();
}

namespace {

NameList names_of(const std::vector<TraceEvent>& events) {
  NameList names;
  names.reserve(events.size());
  for (const auto& ev : events) names.push_back(ev.syscall);
  return names;
}

int32_t index_of_label(const std::string& name) {
  for (size_t i = 0; i < all_labels().size(); ++i)
    if (label_name(all_labels()[i]) == name) return static_cast<int32_t>(i);
  return -1;
}

Confusion make_confusion(const std::vector<std::string>& gold,
                         const std::vector<std::string>& predicted) {
  size_t n = all_labels().size();
  Confusion c(n, std::vector<int64_t>(n, 0));
  for (size_t i = 0; i < gold.size(); ++i) {
    int32_t g = index_of_label(gold[i]);
    int32_t p = index_of_label(predicted[i]);
    if (g >= 0 && p >= 0) ++c[g][p];
  }
  return c;
}

// Deterministic per-sample parallel map: output order is by index whatever
// the worker interleaving.
template <typename Fn>
std::vector<std::string> parallel_map(size_t count, int jobs, Fn fn) {
  std::vector<std::string> out(count);
  if (jobs <= 1) {
    for (size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> workers;
  for (int w = 0; w < jobs; ++w)
    workers.emplace_back([&] {
      while (true) {
        size_t i = next.fetch_add(1);
        if (i >= count) break;
        out[i] = fn(i);
      }
    });
  for (auto& w : workers) w.join();
  return out;
}

struct BaselineModelRun {
  ForestModel model;
  std::vector<std::string> eval(const std::vector<std::vector<TraceEvent>>& traces,
                                int jobs) const {
    return parallel_map(traces.size(), jobs, [&](size_t i) {
      return predict(model, vectorize(names_of(traces[i]), model.vocabulary));
    });
  }
};

BaselineModelRun train_baseline(const std::vector<std::vector<TraceEvent>>& traces,
                                const std::vector<std::string>& labels,
                                const ExperimentConfig& config) {
  std::vector<NameList> corpus;
  corpus.reserve(traces.size());
  for (const auto& t : traces) corpus.push_back(names_of(t));
  Vocabulary vocab = build_vocabulary(corpus, config.vocab_k);
  std::vector<FeatureVector> x;
  x.reserve(corpus.size());
  for (const auto& names : corpus) x.push_back(vectorize(names, vocab));
  BaselineModelRun run;
  run.model = train_forest(x, labels, config.forest, config.forest_seed, config.jobs);
  run.model.vocabulary = std::move(vocab);
  return run;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  auto seconds_since = [](clock::time_point a) {
    return std::chrono::duration<double>(clock::now() - a).count();
  };

  ExperimentReport report;
  report.config = config;

  Dataset dataset;
  for (BehaviorLabel label : all_labels())
    for (int i = 0; i < config.samples_per_label; ++i)
      dataset.samples.push_back(
          generate_trace(label, mix_seed(config.data_seed, static_cast<uint64_t>(i))));

  auto [train, test] = split(dataset, config.train_fraction, config.split_seed);

  auto traces_of = [](const Dataset& d) {
    std::vector<std::vector<TraceEvent>> t;
    t.reserve(d.samples.size());
    for (const auto& s : d.samples) t.push_back(s.events);
    return t;
  };
  auto labels_of = [](const Dataset& d) {
    std::vector<std::string> l;
    l.reserve(d.samples.size());
    for (const auto& s : d.samples) l.push_back(label_name(s.label));
    return l;
  };

  std::vector<std::vector<TraceEvent>> train_traces = traces_of(train);
  std::vector<std::vector<TraceEvent>> test_traces = traces_of(test);
  std::vector<std::string> train_labels = labels_of(train);
  std::vector<std::string> test_labels = labels_of(test);

  std::vector<std::vector<TraceEvent>> test_obf, train_obf;
  for (const auto& t : test_traces) test_obf.push_back(obfuscate(t, config.noop_name));
  for (const auto& t : train_traces) train_obf.push_back(obfuscate(t, config.noop_name));

  // Baseline rows.
  auto tb = clock::now();
  BaselineModelRun base = train_baseline(train_traces, train_labels, config);

  std::vector<std::vector<TraceEvent>> retrain_traces = train_traces;
  retrain_traces.insert(retrain_traces.end(), train_obf.begin(), train_obf.end());
  std::vector<std::string> retrain_labels = train_labels;
  retrain_labels.insert(retrain_labels.end(), train_labels.begin(), train_labels.end());
  BaselineModelRun retrained = train_baseline(retrain_traces, retrain_labels, config);
  report.baseline_train_seconds = seconds_since(tb);

  auto base_orig = base.eval(test_traces, config.jobs);
  auto base_obf = base.eval(test_obf, config.jobs);
  auto base_retr = retrained.eval(test_obf, config.jobs);

  // Planning rows: one problem for every row.
  auto tp = clock::now();
  const BehaviorProblem& bp = mail_problem();
  auto plan_orig = parallel_map(test_traces.size(), config.jobs, [&](size_t i) {
    return classify_planning(test_traces[i], bp);
  });
  auto plan_obf = parallel_map(test_obf.size(), config.jobs, [&](size_t i) {
    return classify_planning(test_obf[i], bp);
  });
  report.planning_classify_seconds = seconds_since(tp);

  report.rows[0] = {"original", accuracy(base_orig, test_labels),
                    accuracy(plan_orig, test_labels), make_confusion(test_labels, base_orig),
                    make_confusion(test_labels, plan_orig)};
  report.rows[1] = {"obfuscated", accuracy(base_obf, test_labels),
                    accuracy(plan_obf, test_labels), make_confusion(test_labels, base_obf),
                    make_confusion(test_labels, plan_obf)};
  report.rows[2] = {"re-trained", accuracy(base_retr, test_labels),
                    accuracy(plan_obf, test_labels), make_confusion(test_labels, base_retr),
                    make_confusion(test_labels, plan_obf)};
  report.total_seconds = seconds_since(t0);
  return report;
}

namespace {

std::string format_fraction(double v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

void write_confusion(std::ostringstream& os, const Confusion& c) {
  os << "            ";
  for (BehaviorLabel l : all_labels()) os << " " << label_name(l).substr(0, 8);
  os << "\n";
  for (size_t g = 0; g < c.size(); ++g) {
    std::string name = label_name(all_labels()[g]);
    os << "  " << name << std::string(name.size() < 12 ? 12 - name.size() : 0, ' ');
    for (size_t p = 0; p < c[g].size(); ++p) {
      std::string cell = std::to_string(c[g][p]);
      os << " " << std::string(cell.size() < 8 ? 8 - cell.size() : 0, ' ') << cell;
    }
    os << "\n";
  }
}

}  // namespace

std::string report_to_text(const ExperimentReport& report) {
  std::ostringstream os;
  os << "row         baseline  planning\n";
  for (const auto& row : report.rows) {
    os << row.name << std::string(row.name.size() < 12 ? 12 - row.name.size() : 0, ' ')
       << format_fraction(row.baseline_accuracy) << "     "
       << format_fraction(row.planning_accuracy) << "\n";
  }
  for (const auto& row : report.rows) {
    os << "\nconfusion (" << row.name << ", baseline):\n";
    write_confusion(os, row.baseline_confusion);
    os << "confusion (" << row.name << ", planning):\n";
    write_confusion(os, row.planning_confusion);
  }
  return os.str();
}

std::string report_to_jsonl(const ExperimentReport& report) {
  std::ostringstream os;
  nlohmann::json meta;
  meta["kind"] = "experiment-meta";
  meta["samples_per_label"] = report.config.samples_per_label;
  meta["data_seed"] = report.config.data_seed;
  meta["split_seed"] = report.config.split_seed;
  meta["forest_seed"] = report.config.forest_seed;
  meta["train_fraction"] = report.config.train_fraction;
  meta["vocab_k"] = report.config.vocab_k;
  meta["trees"] = report.config.forest.tree_count;
  meta["max_depth"] = report.config.forest.max_depth;
  meta["noop"] = report.config.noop_name;
  nlohmann::json label_list = nlohmann::json::array();
  for (BehaviorLabel l : all_labels()) label_list.push_back(label_name(l));
  meta["labels"] = label_list;
  os << meta.dump() << "\n";
  for (const auto& row : report.rows) {
    nlohmann::json j;
    j["kind"] = "experiment-row";
    j["row"] = row.name;
    j["baseline_accuracy"] = row.baseline_accuracy;
    j["planning_accuracy"] = row.planning_accuracy;
    j["baseline_confusion"] = row.baseline_confusion;
    j["planning_confusion"] = row.planning_confusion;
    os << j.dump() << "\n";
  }
  return os.str();
}

std::string dataset_to_jsonl(const Dataset& dataset) {
  std::ostringstream os;
  for (const auto& s : dataset.samples) {
    nlohmann::json j;
    j["label"] = label_name(s.label);
    j["seed"] = s.seed;
    nlohmann::json events = nlohmann::json::array();
    for (const auto& ev : s.events) {
      nlohmann::json e;
      e["seq"] = ev.seq;
      e["name"] = ev.syscall;
      e["args"] = nlohmann::json::object();
      for (const auto& [k, v] : ev.args) e["args"][k] = v;
      e["ret"] = ev.ret;
      events.push_back(std::move(e));
    }
    j["events"] = std::move(events);
    os << j.dump() << "\n";
  }
  return os.str();
}

Dataset dataset_from_jsonl(const std::string& text) {
  Dataset out;
  std::istringstream in(text);
  std::string line;
  int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("label") || !j.contains("events"))
      throw IngestError("dataset line " + std::to_string(lineno) +
                        ": expected {label, seed, events}");
    LabeledTrace sample;
    auto label = label_from_name(j["label"].get<std::string>());
    if (!label)
      throw IngestError("dataset line " + std::to_string(lineno) + ": unknown label '" +
                        j["label"].get<std::string>() + "'");
    sample.label = *label;
    if (j.contains("seed")) sample.seed = j["seed"].get<uint64_t>();
    for (const auto& e : j["events"]) {
      TraceEvent ev;
      ev.seq = e.at("seq").get<int64_t>();
      ev.syscall = e.at("name").get<std::string>();
      ev.ret = e.at("ret").get<int64_t>();
      if (e.contains("args"))
        for (auto& [k, v] : e.at("args").items()) ev.args[k] = v.get<std::string>();
      sample.events.push_back(std::move(ev));
    }
    out.samples.push_back(std::move(sample));
  }
  return out;
}

ExperimentConfig config_from_jsonl(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw IngestError("experiment config must be a JSON object per line");
    if (j.contains("samples_per_label")) config.samples_per_label = j["samples_per_label"];
    if (j.contains("data_seed")) config.data_seed = j["data_seed"];
    if (j.contains("split_seed")) config.split_seed = j["split_seed"];
    if (j.contains("forest_seed")) config.forest_seed = j["forest_seed"];
    if (j.contains("train_fraction")) config.train_fraction = j["train_fraction"];
    if (j.contains("vocab_k")) config.vocab_k = j["vocab_k"];
    if (j.contains("trees")) config.forest.tree_count = j["trees"];
    if (j.contains("max_depth")) config.forest.max_depth = j["max_depth"];
    if (j.contains("features_per_split")) config.forest.features_per_split = j["features_per_split"];
    if (j.contains("noop")) config.noop_name = j["noop"];
    if (j.contains("jobs")) config.jobs = j["jobs"];
  }
  return config;
}

}  // namespace bdl
