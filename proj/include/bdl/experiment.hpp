#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "bdl/behaviors.hpp"
#include "bdl/forest.hpp"
#include "bdl/ingest.hpp"

// Obfuscation, dataset splitting, and the three-row accuracy experiment
// comparing the bi-gram forest baseline against the planning classifier.

namespace bdl {

struct Dataset {
  std::vector<LabeledTrace> samples;
  uint64_t split_seed = 0;
};

// Inserts one no-op event between every adjacent pair; fresh seq numbers,
// return value 0, original order preserved. len -> 2*len - 1 for len >= 1.
std::vector<TraceEvent> obfuscate(const std::vector<TraceEvent>& trace,
                                  const std::string& noop_name = "sleep");

// Stratified per label, seeded shuffle; train gets floor(fraction * n) of
// each label, the remainder tests.
std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  uint64_t seed);

double accuracy(const std::vector<std::string>& predictions,
                const std::vector<std::string>& gold);

struct ExperimentConfig {
  int samples_per_label = 60;
  uint64_t data_seed = 11;
  uint64_t split_seed = 22;
  uint64_t forest_seed = 33;
  double train_fraction = 0.66;
  size_t vocab_k = 100;
  ForestHyperparams forest;
  std::string noop_name = "sleep";
  int jobs = 1;
};

using Confusion = std::vector<std::vector<int64_t>>;  // [gold][predicted], label order

struct ExperimentRow {
  std::string name;  // original / obfuscated / retrained
  double baseline_accuracy = 0.0;
  double planning_accuracy = 0.0;
  Confusion baseline_confusion;
  Confusion planning_confusion;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::array<ExperimentRow, 3> rows;
  // Diagnostics only; excluded from the canonical serializations so that
  // fixed seeds give byte-identical report files.
  double baseline_train_seconds = 0.0;
  double planning_classify_seconds = 0.0;
  double total_seconds = 0.0;
};

ExperimentReport run_experiment(const ExperimentConfig& config);

// Table-1-shaped text table plus per-row confusion matrices.
std::string report_to_text(const ExperimentReport& report);
// One JSON object per line: a meta line, then one line per row.
std::string report_to_jsonl(const ExperimentReport& report);

// The planning classifier: ingest -> Skip simulation -> first satisfied goal
// in declaration order, "other" when none holds.
std::string classify_planning(const std::vector<TraceEvent>& events,
                              const BehaviorProblem& bp);

// Labeled dataset files: one JSON object per line,
//   {"label": str, "seed": int, "events": [canonical event, ...]}
std::string dataset_to_jsonl(const Dataset& dataset);
Dataset dataset_from_jsonl(const std::string& text);

ExperimentConfig config_from_jsonl(const std::string& text);

}  // namespace bdl
