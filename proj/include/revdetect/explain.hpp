#pragma once

// Exact Shapley attributions: path-dependent TreeSHAP for tree ensembles, the
// closed form for the linear model, a 2^8-subset reference evaluator, and
// global/gain importance.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "revdetect/error.hpp"
#include "revdetect/markers.hpp"
#include "revdetect/model.hpp"

namespace revdetect {

using ShapValues = std::array<double, kNumMarkers>;

enum class Direction { TowardAi, TowardHuman };

inline std::string_view to_string(Direction d) { return d == Direction::TowardAi ? "toward AI" : "toward Human"; }

struct Contribution {
  std::size_t marker = 0;
  double value = 0.0;
  Direction direction = Direction::TowardHuman;

  std::string_view name() const { return kMarkerNames[marker]; }
  friend bool operator==(const Contribution&, const Contribution&) = default;
};

// Descending |psi|; equal magnitudes keep ascending marker index. k is clamped to 8.
inline std::vector<Contribution> top_contributors(const ShapValues& psi, std::size_t k = 5) {
  std::array<std::size_t, kNumMarkers> order;
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(psi[a]) > std::abs(psi[b]); });
  std::vector<Contribution> out;
  for (std::size_t i = 0; i < std::min(k, kNumMarkers); ++i) {
    const auto j = order[i];
    out.push_back({j, psi[j], psi[j] > 0.0 ? Direction::TowardAi : Direction::TowardHuman});
  }
  return out;
}

// "margin" (log-odds) for boosted and linear models, "probability" for forests.
inline std::string_view explanation_scale(const TrainedModel& m) {
  return m.kind == ModelKind::RandomForest ? "probability" : "margin";
}

struct ShapExplanation {
  double base_value = 0.0;
  ShapValues values{};
  std::string scale;

  std::vector<Contribution> top(std::size_t k = 5) const { return top_contributors(values, k); }
  double total() const { return std::accumulate(values.begin(), values.end(), base_value); }
};

namespace detail {

struct PathElement {
  int feature = -1;
  double zero_fraction = 0.0;
  double one_fraction = 0.0;
  double weight = 0.0;
};

inline void extend_path(std::vector<PathElement>& path, std::size_t depth, double zero_fraction,
                        double one_fraction, int feature) {
  path[depth] = {feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
  const double d1 = static_cast<double>(depth + 1);
  for (std::size_t i = depth; i-- > 0;) {
    path[i + 1].weight += one_fraction * path[i].weight * static_cast<double>(i + 1) / d1;
    path[i].weight = zero_fraction * path[i].weight * static_cast<double>(depth - i) / d1;
  }
}

inline void unwind_path(std::vector<PathElement>& path, std::size_t depth, std::size_t index) {
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  const double d1 = static_cast<double>(depth + 1);
  double next_one = path[depth].weight;
  for (std::size_t i = depth; i-- > 0;) {
    if (one != 0.0) {
      const double tmp = path[i].weight;
      path[i].weight = next_one * d1 / (static_cast<double>(i + 1) * one);
      next_one = tmp - path[i].weight * zero * static_cast<double>(depth - i) / d1;
    } else {
      path[i].weight = path[i].weight * d1 / (zero * static_cast<double>(depth - i));
    }
  }
  for (std::size_t i = index; i < depth; ++i) {
    path[i].feature = path[i + 1].feature;
    path[i].zero_fraction = path[i + 1].zero_fraction;
    path[i].one_fraction = path[i + 1].one_fraction;
  }
}

// Total permutation weight of the path with element `index` removed.
inline double unwound_path_sum(const std::vector<PathElement>& path, std::size_t depth, std::size_t index) {
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  const double d1 = static_cast<double>(depth + 1);
  double next_one = path[depth].weight;
  double total = 0.0;
  for (std::size_t i = depth; i-- > 0;) {
    if (one != 0.0) {
      const double tmp = next_one * d1 / (static_cast<double>(i + 1) * one);
      total += tmp;
      next_one = path[i].weight - tmp * zero * static_cast<double>(depth - i) / d1;
    } else if (zero != 0.0) {
      total += path[i].weight * d1 / (zero * static_cast<double>(depth - i));
    }
  }
  return total;
}

inline void tree_shap_recurse(const DecisionTree& tree, std::size_t node, const FeatureRow& x, double scale,
                              ShapValues& phi, const std::vector<PathElement>& parent_path, std::size_t depth,
                              double parent_zero, double parent_one, int parent_feature) {
  std::vector<PathElement> path(parent_path.begin(), parent_path.begin() + static_cast<std::ptrdiff_t>(depth));
  path.resize(depth + 1);
  extend_path(path, depth, parent_zero, parent_one, parent_feature);
  const auto& n = tree.nodes[node];

  if (n.is_leaf()) {
    for (std::size_t i = 1; i <= depth; ++i) {
      const double w = unwound_path_sum(path, depth, i);
      const auto& el = path[i];
      phi[static_cast<std::size_t>(el.feature)] += w * (el.one_fraction - el.zero_fraction) * n.value * scale;
    }
    return;
  }

  const auto f = static_cast<std::size_t>(n.feature);
  const auto hot = static_cast<std::size_t>(x[f] <= n.threshold ? n.left : n.right);
  const auto cold = static_cast<std::size_t>(x[f] <= n.threshold ? n.right : n.left);

  double incoming_zero = 1.0, incoming_one = 1.0;
  std::size_t k = 0;
  while (k <= depth && path[k].feature != n.feature) ++k;
  if (k != depth + 1) {
    incoming_zero = path[k].zero_fraction;
    incoming_one = path[k].one_fraction;
    unwind_path(path, depth, k);
    --depth;
  }

  const double hot_zero = tree.nodes[hot].cover / n.cover;
  const double cold_zero = tree.nodes[cold].cover / n.cover;
  tree_shap_recurse(tree, hot, x, scale, phi, path, depth + 1, hot_zero * incoming_zero, incoming_one, n.feature);
  tree_shap_recurse(tree, cold, x, scale, phi, path, depth + 1, cold_zero * incoming_zero, 0.0, n.feature);
}

}  // namespace detail

// Path-dependent Shapley values of one tree's output, scaled by `scale`.
inline ShapValues tree_shap(const DecisionTree& tree, const FeatureRow& x, double scale = 1.0) {
  ShapValues phi{};
  detail::tree_shap_recurse(tree, 0, x, scale, phi, {}, 0, 1.0, 1.0, -1);
  return phi;
}

// Cover-weighted expected model output (base value of the explanation).
inline double expected_margin(const TrainedModel& model) {
  if (model.kind == ModelKind::Linear) return model.linear.intercept;
  double base = model.kind == ModelKind::GradientBoosted ? model.base_score : 0.0;
  for (const auto& t : model.trees) base += t.expected_value() * model.tree_scale();
  return base;
}

inline ShapExplanation tree_shap(const TrainedModel& model, const FeatureRow& x) {
  if (!model.is_tree_kind()) throw DataError("tree_shap needs a tree ensemble; use linear_shap");
  ShapExplanation e;
  e.scale = explanation_scale(model);
  e.base_value = expected_margin(model);
  for (const auto& t : model.trees) {
    const auto phi = tree_shap(t, x, model.tree_scale());
    for (std::size_t j = 0; j < kNumMarkers; ++j) e.values[j] += phi[j];
  }
  return e;
}

inline ShapExplanation tree_shap(const TrainedModel& model, const MarkerVector& x) {
  return tree_shap(model, x.values());
}

// Expected tree output when only the features in `known` (bitmask) are fixed to
// x: unknown splits average their children by cover.
inline double conditional_expectation(const DecisionTree& tree, std::size_t node, const FeatureRow& x,
                                      unsigned known) {
  const auto& n = tree.nodes[node];
  if (n.is_leaf()) return n.value;
  const auto l = static_cast<std::size_t>(n.left), r = static_cast<std::size_t>(n.right);
  if (known & (1u << n.feature))
    return conditional_expectation(tree, x[static_cast<std::size_t>(n.feature)] <= n.threshold ? l : r, x, known);
  return (tree.nodes[l].cover * conditional_expectation(tree, l, x, known) +
          tree.nodes[r].cover * conditional_expectation(tree, r, x, known)) /
         n.cover;
}

// Direct evaluation of the Shapley formula over all 2^8 coalitions.
inline ShapValues shapley_bruteforce(const TrainedModel& model, const FeatureRow& x) {
  if (!model.is_tree_kind()) throw DataError("shapley_bruteforce needs a tree ensemble");
  constexpr unsigned kSubsets = 1u << kNumMarkers;
  std::array<double, kSubsets> value{};
  for (unsigned s = 0; s < kSubsets; ++s) {
    double v = 0.0;
    for (const auto& t : model.trees) v += conditional_expectation(t, 0, x, s) * model.tree_scale();
    value[s] = v;
  }
  std::array<double, kNumMarkers + 1> factorial{1.0};
  for (std::size_t i = 1; i <= kNumMarkers; ++i) factorial[i] = factorial[i - 1] * static_cast<double>(i);
  ShapValues psi{};
  for (std::size_t j = 0; j < kNumMarkers; ++j) {
    const unsigned bit = 1u << j;
    for (unsigned s = 0; s < kSubsets; ++s) {
      if (s & bit) continue;
      const auto size = static_cast<std::size_t>(std::popcount(s));
      const double weight = factorial[size] * factorial[kNumMarkers - size - 1] / factorial[kNumMarkers];
      psi[j] += weight * (value[s | bit] - value[s]);
    }
  }
  return psi;
}

// psi_j = coef_j * z_j on standardized inputs; base value = intercept (the
// standardized training mean is zero).
inline ShapExplanation linear_shap(const TrainedModel& model, const FeatureRow& x) {
  if (model.kind != ModelKind::Linear) throw DataError("linear_shap needs a linear model");
  ShapExplanation e;
  e.scale = explanation_scale(model);
  e.base_value = model.linear.intercept;
  const auto z = model.linear.standardize(x);
  for (std::size_t j = 0; j < kNumMarkers; ++j) e.values[j] = model.linear.coef[j] * z[j];
  return e;
}

inline ShapExplanation explain(const TrainedModel& model, const FeatureRow& x) {
  return model.is_tree_kind() ? tree_shap(model, x) : linear_shap(model, x);
}
inline ShapExplanation explain(const TrainedModel& model, const MarkerVector& x) { return explain(model, x.values()); }

struct GlobalImportance {
  std::array<double, kNumMarkers> mean_abs_shap{};
  std::optional<std::array<double, kNumMarkers>> gain_share;  // tree kinds only
};

// Per-feature summed split gain, normalized to sum to 1 (all zeros when the
// ensemble has no splits).
inline std::array<double, kNumMarkers> gain_importance(const TrainedModel& model) {
  std::array<double, kNumMarkers> gain{};
  for (const auto& t : model.trees)
    for (const auto& n : t.nodes)
      if (!n.is_leaf()) gain[static_cast<std::size_t>(n.feature)] += n.gain;
  const double total = std::accumulate(gain.begin(), gain.end(), 0.0);
  if (total > 0.0)
    for (auto& g : gain) g /= total;
  return gain;
}

inline GlobalImportance global_importance(const TrainedModel& model, std::span<const FeatureRow> X) {
  GlobalImportance gi;
  for (const auto& x : X) {
    const auto e = explain(model, x);
    for (std::size_t j = 0; j < kNumMarkers; ++j) gi.mean_abs_shap[j] += std::abs(e.values[j]);
  }
  if (!X.empty())
    for (auto& g : gi.mean_abs_shap) g /= static_cast<double>(X.size());
  if (model.is_tree_kind()) gi.gain_share = gain_importance(model);
  return gi;
}

inline nlohmann::json explanation_record(const ShapExplanation& e, std::string_view model_version) {
  nlohmann::json values = nlohmann::json::object();
  for (std::size_t j = 0; j < kNumMarkers; ++j) values[std::string(kMarkerNames[j])] = e.values[j];
  return {{"base_value", e.base_value}, {"values", values}, {"scale", e.scale},
          {"model_version", std::string(model_version)}};
}

}  // namespace revdetect
