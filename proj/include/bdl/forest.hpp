#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

// Bi-gram count vectorization over syscall names and a from-scratch random
// forest. Everything is deterministic for a fixed seed, including per-tree
// parallel training, and the model serializes byte-identically.

namespace bdl {

using NameList = std::vector<std::string>;
using Bigram = std::pair<std::string, std::string>;

struct Vocabulary {
  std::vector<Bigram> bigrams;  // descending corpus frequency, ties lexicographic
  std::map<Bigram, int32_t> index;

  static Vocabulary from_bigrams(std::vector<Bigram> list);
  size_t size() const { return bigrams.size(); }
  bool operator==(const Vocabulary& o) const { return bigrams == o.bigrams; }
};

using FeatureVector = std::vector<int32_t>;

std::map<Bigram, int64_t> bigrams(const NameList& names);

class StatError : public std::runtime_error {
 public:
  explicit StatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Top-k bigrams of the corpus by total count. Throws StatError on an empty
// corpus (no name lists at all).
Vocabulary build_vocabulary(const std::vector<NameList>& corpus, size_t k = 100);

FeatureVector vectorize(const NameList& names, const Vocabulary& vocab);

struct ForestHyperparams {
  int32_t tree_count = 100;
  int32_t max_depth = 0;  // 0 = unlimited
  int32_t features_per_split = 0;  // 0 = ceil(sqrt(width))
};

struct TreeNode {
  bool leaf = false;
  int32_t feature = -1;
  int32_t threshold = 0;  // goes left when value <= threshold
  int32_t left = -1;
  int32_t right = -1;
  std::vector<int64_t> class_counts;  // leaf label distribution
  bool operator==(const TreeNode&) const = default;
};

struct ForestModel {
  std::vector<std::string> labels;  // sorted, unique
  Vocabulary vocabulary;
  ForestHyperparams hp;
  uint64_t seed = 0;
  int32_t width = 0;  // training feature-vector width
  std::vector<std::vector<TreeNode>> trees;  // preorder node storage

  bool operator==(const ForestModel& o) const {
    return labels == o.labels && vocabulary == o.vocabulary && width == o.width &&
           trees == o.trees;
  }
};

// Bootstrap per tree, Gini splits over midpoints of sorted distinct values
// on a per-node feature sample of ceil(sqrt(width)) features. `jobs` > 1
// trains trees in parallel with per-tree derived seeds; the result is
// identical to sequential training.
ForestModel train_forest(const std::vector<FeatureVector>& x,
                         const std::vector<std::string>& y, ForestHyperparams hp,
                         uint64_t seed, int jobs = 1);

// Majority vote over trees; ties go to the lexicographically smallest label.
std::string predict(const ForestModel& model, const FeatureVector& v);

std::string serialize_model(const ForestModel& model);
ForestModel parse_model(const std::string& text);

}  // namespace bdl
