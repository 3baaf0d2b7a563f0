#pragma once

// Histogram-based depth-first CART growth, parameterized by a split policy.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "revdetect/error.hpp"
#include "revdetect/model.hpp"

namespace revdetect {

inline constexpr std::size_t kMaxBins = 256;

// Candidate thresholds per feature and each row's bin. A row falls in bin b
// when exactly b thresholds lie strictly below its value, so "bin <= k" is
// the same as "x <= thresholds[k]".
struct FeatureBins {
  std::array<std::vector<double>, kNumMarkers> thresholds;
  std::vector<std::array<std::uint16_t, kNumMarkers>> bins;

  std::size_t bin_count(std::size_t feature) const { return thresholds[feature].size() + 1; }
};

inline FeatureBins make_bins(std::span<const FeatureRow> X, std::size_t max_bins = kMaxBins) {
  FeatureBins fb;
  fb.bins.resize(X.size());
  for (std::size_t j = 0; j < kNumMarkers; ++j) {
    std::vector<double> values(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) values[i] = X[i][j];
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    auto& thr = fb.thresholds[j];
    if (values.size() <= max_bins) {
      for (std::size_t k = 1; k < values.size(); ++k) thr.push_back(0.5 * (values[k - 1] + values[k]));
    } else {
      for (std::size_t b = 1; b < max_bins; ++b) {
        const std::size_t idx = b * values.size() / max_bins;
        const double t = 0.5 * (values[idx - 1] + values[idx]);
        if (thr.empty() || t > thr.back()) thr.push_back(t);
      }
    }
    for (std::size_t i = 0; i < X.size(); ++i)
      fb.bins[i][j] = static_cast<std::uint16_t>(std::lower_bound(thr.begin(), thr.end(), X[i][j]) - thr.begin());
  }
  return fb;
}

struct GrowOptions {
  std::optional<std::size_t> max_depth;
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  std::size_t max_features = kNumMarkers;
};

// Policy requirements:
//   using Stats = ...;                 // additive per-row statistics
//   Stats row_stats(std::size_t row);
//   double score(const Stats&);        // gain = score(L) + score(R) - score(P)
//   double leaf_value(const Stats&);
//   double weight(const Stats&);       // training weight, stored as cover
//   bool child_ok(const Stats&);
template <class Policy>
class TreeGrower {
 public:
  using Stats = typename Policy::Stats;

  TreeGrower(const FeatureBins& bins, const Policy& policy, GrowOptions options, std::mt19937_64* rng = nullptr)
      : bins_(bins), policy_(policy), options_(options), rng_(rng) {}

  DecisionTree grow(std::vector<std::size_t> rows) {
    DecisionTree tree;
    if (rows.empty()) throw DataError("cannot grow a tree on zero rows");
    grow_node(tree, rows, 0);
    return tree;
  }

 private:
  struct Candidate {
    double gain = 0.0;
    int feature = -1;
    std::size_t bin = 0;
  };

  int grow_node(DecisionTree& tree, std::vector<std::size_t>& rows, std::size_t depth) {
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    Stats total{};
    for (auto r : rows) total += policy_.row_stats(r);

    Candidate best;
    const bool depth_ok = !options_.max_depth || depth < *options_.max_depth;
    if (depth_ok && rows.size() >= options_.min_samples_split && rows.size() >= 2 * options_.min_samples_leaf)
      best = find_split(rows, total);

    if (best.feature < 0) {
      TreeNode leaf;
      leaf.value = policy_.leaf_value(total);
      leaf.cover = policy_.weight(total);
      tree.nodes[static_cast<std::size_t>(index)] = leaf;
      return index;
    }

    const auto f = static_cast<std::size_t>(best.feature);
    std::vector<std::size_t> left_rows, right_rows;
    for (auto r : rows) (bins_.bins[r][f] <= best.bin ? left_rows : right_rows).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    TreeNode split;
    split.feature = best.feature;
    split.threshold = bins_.thresholds[f][best.bin];
    split.gain = best.gain;
    split.left = grow_node(tree, left_rows, depth + 1);
    split.right = grow_node(tree, right_rows, depth + 1);
    split.cover = tree.nodes[static_cast<std::size_t>(split.left)].cover +
                  tree.nodes[static_cast<std::size_t>(split.right)].cover;
    tree.nodes[static_cast<std::size_t>(index)] = split;
    return index;
  }

  std::vector<std::size_t> candidate_features() {
    std::vector<std::size_t> features(kNumMarkers);
    std::iota(features.begin(), features.end(), 0);
    const std::size_t k = std::min(options_.max_features, kNumMarkers);
    if (k < kNumMarkers && rng_) {
      for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, kNumMarkers - 1);
        std::swap(features[i], features[pick(*rng_)]);
      }
      features.resize(k);
      std::sort(features.begin(), features.end());
    }
    return features;
  }

  Candidate find_split(const std::vector<std::size_t>& rows, const Stats& total) {
    Candidate best;
    const double parent_score = policy_.score(total);
    for (auto f : candidate_features()) {
      const std::size_t nb = bins_.bin_count(f);
      if (nb < 2) continue;
      std::vector<Stats> hist(nb);
      std::vector<std::size_t> counts(nb, 0);
      for (auto r : rows) {
        const auto b = bins_.bins[r][f];
        hist[b] += policy_.row_stats(r);
        ++counts[b];
      }
      Stats left{};
      std::size_t left_count = 0;
      for (std::size_t b = 0; b + 1 < nb; ++b) {
        left += hist[b];
        left_count += counts[b];
        if (counts[b] == 0) continue;  // same partition as the previous bin
        const std::size_t right_count = rows.size() - left_count;
        if (left_count < options_.min_samples_leaf || right_count < options_.min_samples_leaf) continue;
        if (right_count == 0) break;
        const Stats right = total - left;
        if (!policy_.child_ok(left) || !policy_.child_ok(right)) continue;
        const double gain = policy_.score(left) + policy_.score(right) - parent_score;
        if (gain > best.gain + 1e-12) best = {gain, static_cast<int>(f), b};
      }
    }
    return best;
  }

  const FeatureBins& bins_;
  const Policy& policy_;
  GrowOptions options_;
  std::mt19937_64* rng_;
};

inline void check_training_inputs(std::span<const FeatureRow> X, std::span<const int> y) {
  if (X.size() != y.size()) throw DataError("feature and label counts differ");
  if (X.empty()) throw DataError("empty training set");
  bool has0 = false, has1 = false;
  for (int v : y) {
    if (v != 0 && v != 1) throw DataError("labels must be 0 or 1");
    (v ? has1 : has0) = true;
  }
  if (!has0 || !has1) throw DataError("training labels contain a single class");
  for (const auto& row : X)
    for (double v : row)
      if (!(v >= 0.0 && v <= 1.0)) throw DataError("marker features must lie in [0, 1]");
}

// w+ = n0 / n1.
inline double compute_class_weight(std::span<const int> y) {
  std::size_t n0 = 0, n1 = 0;
  for (int v : y) (v ? n1 : n0) += 1;
  if (n1 == 0) throw DataError("no AI-generated instances: class weight undefined");
  return static_cast<double>(n0) / static_cast<double>(n1);
}

inline std::vector<double> instance_weights(std::span<const int> y, double positive_weight) {
  std::vector<double> w(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) w[i] = y[i] ? positive_weight : 1.0;
  return w;
}

// Independent per-tree seeds derived from a model seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace revdetect
