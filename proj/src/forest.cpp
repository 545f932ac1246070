#include "bdl/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "bdl/rng.hpp"

namespace bdl {

std::map<Bigram, int64_t> bigrams(const NameList& names) {
  std::map<Bigram, int64_t> counts;
  for (size_t i = 0; i + 1 < names.size(); ++i) ++counts[{names[i], names[i + 1]}];
  return counts;
}

Vocabulary Vocabulary::from_bigrams(std::vector<Bigram> list) {
  Vocabulary v;
  v.bigrams = std::move(list);
  for (size_t i = 0; i < v.bigrams.size(); ++i)
    v.index[v.bigrams[i]] = static_cast<int32_t>(i);
  return v;
}

Vocabulary build_vocabulary(const std::vector<NameList>& corpus, size_t k) {
  if (corpus.empty()) throw StatError("cannot build a vocabulary from an empty corpus");
  std::map<Bigram, int64_t> totals;
  for (const auto& names : corpus)
    for (const auto& [bg, n] : bigrams(names)) totals[bg] += n;
  std::vector<std::pair<Bigram, int64_t>> ranked(totals.begin(), totals.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > k) ranked.resize(k);
  std::vector<Bigram> list;
  list.reserve(ranked.size());
  for (auto& [bg, _] : ranked) list.push_back(bg);
  return Vocabulary::from_bigrams(std::move(list));
}

FeatureVector vectorize(const NameList& names, const Vocabulary& vocab) {
  FeatureVector v(vocab.size(), 0);
  for (size_t i = 0; i + 1 < names.size(); ++i) {
    auto it = vocab.index.find({names[i], names[i + 1]});
    if (it != vocab.index.end()) ++v[it->second];
  }
  return v;
}

// ---------------------------------------------------------------------------
// Random forest
// ---------------------------------------------------------------------------

namespace {

struct TreeTrainer {
  const std::vector<FeatureVector>& x;
  const std::vector<int32_t>& y;  // label indices
  int32_t label_count;
  int32_t width;
  ForestHyperparams hp;
  SplitMix64 rng;
  std::vector<TreeNode> nodes;

  double gini(const std::vector<int64_t>& counts, int64_t total) const {
    if (total == 0) return 0.0;
    double g = 1.0;
    for (int64_t c : counts) {
      double p = static_cast<double>(c) / static_cast<double>(total);
      g -= p * p;
    }
    return g;
  }

  std::vector<int64_t> count_labels(const std::vector<int32_t>& idx) const {
    std::vector<int64_t> counts(label_count, 0);
    for (int32_t i : idx) ++counts[y[i]];
    return counts;
  }

  int32_t make_leaf(const std::vector<int32_t>& idx) {
    TreeNode node;
    node.leaf = true;
    node.class_counts = count_labels(idx);
    nodes.push_back(std::move(node));
    return static_cast<int32_t>(nodes.size() - 1);
  }

  // Candidate features are a seeded sample without replacement.
  std::vector<int32_t> sample_features() {
    int32_t want = hp.features_per_split > 0
                       ? std::min(hp.features_per_split, width)
                       : static_cast<int32_t>(
                             std::ceil(std::sqrt(static_cast<double>(width))));
    std::vector<int32_t> all(width);
    for (int32_t i = 0; i < width; ++i) all[i] = i;
    for (int32_t i = 0; i < want; ++i) {
      int32_t j = i + static_cast<int32_t>(rng.below(static_cast<uint64_t>(width - i)));
      std::swap(all[i], all[j]);
    }
    all.resize(want);
    return all;
  }

  int32_t build(std::vector<int32_t>& idx, int32_t depth) {
    auto counts = count_labels(idx);
    int32_t distinct = 0;
    for (int64_t c : counts)
      if (c > 0) ++distinct;
    bool depth_capped = hp.max_depth > 0 && depth >= hp.max_depth;
    if (distinct <= 1 || idx.size() < 2 || depth_capped) return make_leaf(idx);

    double best_gini = 2.0;
    int32_t best_feature = -1;
    int32_t best_threshold = 0;
    int64_t total = static_cast<int64_t>(idx.size());
    for (int32_t f : sample_features()) {
      std::vector<int32_t> values;
      values.reserve(idx.size());
      for (int32_t i : idx) values.push_back(x[i][f]);
      std::sort(values.begin(), values.end());
      values.erase(std::unique(values.begin(), values.end()), values.end());
      if (values.size() < 2) continue;
      for (size_t k = 0; k + 1 < values.size(); ++k) {
        // midpoint, floored: a <= t < b keeps the split stable on integers
        int32_t t = values[k] + (values[k + 1] - values[k]) / 2;
        std::vector<int64_t> left_counts(label_count, 0);
        int64_t left_total = 0;
        for (int32_t i : idx)
          if (x[i][f] <= t) {
            ++left_counts[y[i]];
            ++left_total;
          }
        std::vector<int64_t> right_counts(label_count);
        for (int32_t c = 0; c < label_count; ++c)
          right_counts[c] = counts[c] - left_counts[c];
        int64_t right_total = total - left_total;
        double g = (static_cast<double>(left_total) * gini(left_counts, left_total) +
                    static_cast<double>(right_total) * gini(right_counts, right_total)) /
                   static_cast<double>(total);
        if (g < best_gini) {
          best_gini = g;
          best_feature = f;
          best_threshold = t;
        }
      }
    }
    if (best_feature < 0) return make_leaf(idx);  // all sampled features constant

    std::vector<int32_t> left, right;
    for (int32_t i : idx)
      (x[i][best_feature] <= best_threshold ? left : right).push_back(i);
    if (left.empty() || right.empty()) return make_leaf(idx);

    TreeNode node;
    node.feature = best_feature;
    node.threshold = best_threshold;
    nodes.push_back(node);
    int32_t self = static_cast<int32_t>(nodes.size() - 1);
    idx.clear();
    idx.shrink_to_fit();
    nodes[self].left = build(left, depth + 1);
    nodes[self].right = build(right, depth + 1);
    return self;
  }

  std::vector<TreeNode> train(size_t sample_count) {
    std::vector<int32_t> bootstrap(sample_count);
    for (size_t i = 0; i < sample_count; ++i)
      bootstrap[i] = static_cast<int32_t>(rng.below(sample_count));
    std::sort(bootstrap.begin(), bootstrap.end());
    build(bootstrap, 0);
    return std::move(nodes);
  }
};

const std::vector<int64_t>& leaf_for(const std::vector<TreeNode>& tree,
                                     const FeatureVector& v) {
  int32_t at = 0;
  while (!tree[at].leaf)
    at = v[tree[at].feature] <= tree[at].threshold ? tree[at].left : tree[at].right;
  return tree[at].class_counts;
}

}  // namespace

ForestModel train_forest(const std::vector<FeatureVector>& x,
                         const std::vector<std::string>& y, ForestHyperparams hp,
                         uint64_t seed, int jobs) {
  if (x.empty()) throw StatError("empty training set");
  if (x.size() != y.size()) throw StatError("feature/label count mismatch");
  const size_t width = x[0].size();
  for (const auto& row : x)
    if (row.size() != width) throw StatError("ragged feature matrix");

  ForestModel model;
  model.hp = hp;
  model.seed = seed;
  model.width = static_cast<int32_t>(width);
  model.labels = y;
  std::sort(model.labels.begin(), model.labels.end());
  model.labels.erase(std::unique(model.labels.begin(), model.labels.end()),
                     model.labels.end());

  std::vector<int32_t> yi(y.size());
  for (size_t i = 0; i < y.size(); ++i) {
    auto it = std::lower_bound(model.labels.begin(), model.labels.end(), y[i]);
    yi[i] = static_cast<int32_t>(std::distance(model.labels.begin(), it));
  }

  model.trees.resize(hp.tree_count);
  auto train_one = [&](int32_t t) {
    TreeTrainer trainer{x,
                        yi,
                        static_cast<int32_t>(model.labels.size()),
                        static_cast<int32_t>(width),
                        hp,
                        SplitMix64(mix_seed(seed, static_cast<uint64_t>(t))),
                        {}};
    model.trees[t] = trainer.train(x.size());
  };

  if (jobs <= 1) {
    for (int32_t t = 0; t < hp.tree_count; ++t) train_one(t);
  } else {
    std::vector<std::thread> workers;
    std::atomic<int32_t> next{0};
    for (int w = 0; w < jobs; ++w)
      workers.emplace_back([&] {
        while (true) {
          int32_t t = next.fetch_add(1);
          if (t >= hp.tree_count) break;
          train_one(t);
        }
      });
    for (auto& w : workers) w.join();
  }
  return model;
}

std::string predict(const ForestModel& model, const FeatureVector& v) {
  if (static_cast<int32_t>(v.size()) != model.width)
    throw StatError("feature vector width " + std::to_string(v.size()) +
                    " does not match the trained width " + std::to_string(model.width));
  std::vector<int64_t> votes(model.labels.size(), 0);
  for (const auto& tree : model.trees) {
    const auto& counts = leaf_for(tree, v);
    int32_t best = 0;
    for (size_t c = 1; c < counts.size(); ++c)
      if (counts[c] > counts[best]) best = static_cast<int32_t>(c);
    ++votes[best];
  }
  int32_t best = 0;
  for (size_t c = 1; c < votes.size(); ++c)
    if (votes[c] > votes[best]) best = static_cast<int32_t>(c);
  return model.labels.at(best);
}

std::string serialize_model(const ForestModel& model) {
  std::ostringstream os;
  os << "bdl-forest v1\n";
  os << "labels " << model.labels.size();
  for (const auto& l : model.labels) os << " " << l;
  os << "\n";
  os << "vocab " << model.vocabulary.size() << "\n";
  for (const auto& [a, b] : model.vocabulary.bigrams) os << a << " " << b << "\n";
  os << "trees " << model.trees.size() << " seed " << model.seed << " maxdepth "
     << model.hp.max_depth << " featurespersplit " << model.hp.features_per_split
     << " width " << model.width << "\n";
  for (size_t t = 0; t < model.trees.size(); ++t) {
    os << "tree " << t << " nodes " << model.trees[t].size() << "\n";
    for (const auto& n : model.trees[t]) {
      if (n.leaf) {
        os << "leaf";
        for (int64_t c : n.class_counts) os << " " << c;
        os << "\n";
      } else {
        os << "split " << n.feature << " " << n.threshold << " " << n.left << " "
           << n.right << "\n";
      }
    }
  }
  return os.str();
}

ForestModel parse_model(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto fail = [](const std::string& why) -> ForestModel {
    throw StatError("bad model file: " + why);
  };
  if (!std::getline(in, line) || line != "bdl-forest v1") return fail("missing header");

  ForestModel model;
  std::string word;
  size_t n = 0;
  in >> word >> n;
  if (word != "labels") return fail("missing labels");
  model.labels.resize(n);
  for (auto& l : model.labels) in >> l;
  in >> word >> n;
  if (word != "vocab") return fail("missing vocab");
  std::vector<Bigram> bg(n);
  for (auto& [a, b] : bg) in >> a >> b;
  model.vocabulary = Vocabulary::from_bigrams(std::move(bg));
  size_t tree_count = 0;
  in >> word >> tree_count;
  if (word != "trees") return fail("missing trees");
  in >> word >> model.seed >> word >> model.hp.max_depth >> word >>
      model.hp.features_per_split >> word >> model.width;
  model.hp.tree_count = static_cast<int32_t>(tree_count);
  model.trees.resize(tree_count);
  for (size_t t = 0; t < tree_count; ++t) {
    size_t idx = 0, nodes = 0;
    in >> word >> idx >> word >> nodes;
    if (!in || idx != t) return fail("tree block out of order");
    model.trees[t].resize(nodes);
    for (auto& node : model.trees[t]) {
      in >> word;
      if (word == "leaf") {
        node.leaf = true;
        node.class_counts.resize(model.labels.size());
        for (auto& c : node.class_counts) in >> c;
      } else if (word == "split") {
        in >> node.feature >> node.threshold >> node.left >> node.right;
      } else {
        return fail("unknown node kind '" + word + "'");
      }
    }
  }
  if (!in) return fail("truncated");
  return model;
}

}  // namespace bdl
