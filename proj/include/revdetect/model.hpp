#pragma once

// Trained classifiers over marker vectors and their portable JSON persistence.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "revdetect/error.hpp"
#include "revdetect/markers.hpp"
#include "revdetect/text.hpp"

namespace revdetect {

using FeatureRow = std::array<double, kNumMarkers>;

inline double sigmoid(double m) {
  if (m >= 0) return 1.0 / (1.0 + std::exp(-m));
  const double e = std::exp(m);
  return e / (1.0 + e);
}

// Split nodes send x to `left` iff x[feature] <= threshold. Cover is the total
// training weight reaching the node; gain is the loss reduction of the split.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double cover = 0.0;
  double gain = 0.0;
  double value = 0.0;  // leaf output

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

// Nodes in pre-order; index 0 is the root.
struct DecisionTree {
  std::vector<TreeNode> nodes;

  const TreeNode& root() const { return nodes.front(); }

  const TreeNode& leaf_for(const FeatureRow& x) const {
    const TreeNode* n = &nodes.front();
    while (!n->is_leaf())
      n = &nodes[static_cast<std::size_t>(x[static_cast<std::size_t>(n->feature)] <= n->threshold ? n->left : n->right)];
    return *n;
  }

  double predict(const FeatureRow& x) const { return leaf_for(x).value; }

  // Cover-weighted mean of leaf values.
  double expected_value() const {
    double sum = 0.0;
    for (const auto& n : nodes)
      if (n.is_leaf()) sum += n.value * n.cover;
    return sum / root().cover;
  }

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

enum class ModelKind { GradientBoosted, RandomForest, Linear };

inline std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::GradientBoosted: return "GradientBoosted";
    case ModelKind::RandomForest: return "RandomForest";
    case ModelKind::Linear: return "Linear";
  }
  return "";
}

inline ModelKind parse_model_kind(std::string_view s) {
  if (s == "GradientBoosted" || s == "boosted") return ModelKind::GradientBoosted;
  if (s == "RandomForest" || s == "forest") return ModelKind::RandomForest;
  if (s == "Linear" || s == "linear") return ModelKind::Linear;
  throw SchemaError("unknown model kind '" + std::string(s) + "'");
}

struct BoostingParams {
  std::size_t n_estimators = 100;
  std::size_t max_depth = 3;
  double learning_rate = 0.1;
  double subsample = 1.0;
  double lambda = 1.0;            // L2 smoothing of Newton leaf values
  double min_child_weight = 1.0;  // minimum hessian sum per child

  friend bool operator==(const BoostingParams&, const BoostingParams&) = default;
};

struct ForestParams {
  std::size_t n_estimators = 100;
  std::optional<std::size_t> max_depth;  // unlimited when empty
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  std::size_t max_features = 2;  // floor(sqrt(8))
  bool bootstrap = true;

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

struct LinearParams {
  double C = 1.0;
  double l1_ratio = 0.5;
  std::size_t max_iter = 5000;
  double tol = 1e-6;

  friend bool operator==(const LinearParams&, const LinearParams&) = default;
};

inline void to_json(nlohmann::json& j, const BoostingParams& p) {
  j = {{"n_estimators", p.n_estimators}, {"max_depth", p.max_depth},
       {"learning_rate", p.learning_rate}, {"subsample", p.subsample},
       {"lambda", p.lambda}, {"min_child_weight", p.min_child_weight}};
}
inline void from_json(const nlohmann::json& j, BoostingParams& p) {
  p.n_estimators = j.at("n_estimators").get<std::size_t>();
  p.max_depth = j.at("max_depth").get<std::size_t>();
  p.learning_rate = j.at("learning_rate").get<double>();
  p.subsample = j.at("subsample").get<double>();
  p.lambda = j.value("lambda", 1.0);
  p.min_child_weight = j.value("min_child_weight", 1.0);
}
inline void to_json(nlohmann::json& j, const ForestParams& p) {
  j = {{"n_estimators", p.n_estimators},
       {"max_depth", p.max_depth ? nlohmann::json(*p.max_depth) : nlohmann::json(nullptr)},
       {"min_samples_split", p.min_samples_split}, {"min_samples_leaf", p.min_samples_leaf},
       {"max_features", p.max_features}, {"bootstrap", p.bootstrap}};
}
inline void from_json(const nlohmann::json& j, ForestParams& p) {
  p.n_estimators = j.at("n_estimators").get<std::size_t>();
  const auto& d = j.at("max_depth");
  p.max_depth = d.is_null() ? std::nullopt : std::optional<std::size_t>(d.get<std::size_t>());
  p.min_samples_split = j.at("min_samples_split").get<std::size_t>();
  p.min_samples_leaf = j.value("min_samples_leaf", std::size_t{1});
  p.max_features = j.value("max_features", std::size_t{2});
  p.bootstrap = j.value("bootstrap", true);
}
inline void to_json(nlohmann::json& j, const LinearParams& p) {
  j = {{"C", p.C}, {"l1_ratio", p.l1_ratio}, {"max_iter", p.max_iter}, {"tol", p.tol}};
}
inline void from_json(const nlohmann::json& j, LinearParams& p) {
  p.C = j.at("C").get<double>();
  p.l1_ratio = j.at("l1_ratio").get<double>();
  p.max_iter = j.value("max_iter", std::size_t{5000});
  p.tol = j.value("tol", 1e-6);
}

// Standardized logistic model: margin = intercept + sum_j coef_j * (x_j - mean_j) / sd_j.
struct LinearBlock {
  FeatureRow means{};
  FeatureRow sds{};
  FeatureRow coef{};
  double intercept = 0.0;
  bool converged = false;
  std::size_t iterations = 0;

  FeatureRow standardize(const FeatureRow& x) const {
    FeatureRow z{};
    for (std::size_t j = 0; j < kNumMarkers; ++j) z[j] = (x[j] - means[j]) / sds[j];
    return z;
  }

  double margin(const FeatureRow& x) const {
    const auto z = standardize(x);
    double m = intercept;
    for (std::size_t j = 0; j < kNumMarkers; ++j) m += coef[j] * z[j];
    return m;
  }

  friend bool operator==(const LinearBlock&, const LinearBlock&) = default;
};

struct Probabilities {
  double human = 0.5;
  double ai = 0.5;
};

inline constexpr int kModelFormatVersion = 1;

struct TrainedModel {
  ModelKind kind = ModelKind::GradientBoosted;
  std::vector<DecisionTree> trees;
  double base_score = 0.0;  // boosted margin offset
  LinearBlock linear;
  nlohmann::json hyperparameters = nlohmann::json::object();
  double class_weight = 1.0;
  std::uint64_t seed = 0;
  nlohmann::json training = nlohmann::json::object();  // grid, CV score, ...

  bool is_tree_kind() const { return kind != ModelKind::Linear; }

  // Multiplier applied to every tree's output: forests average, boosting sums.
  double tree_scale() const {
    return kind == ModelKind::RandomForest && !trees.empty() ? 1.0 / static_cast<double>(trees.size()) : 1.0;
  }

  // Log-odds for boosted/linear models; AI probability for forests.
  double margin(const FeatureRow& x) const {
    if (kind == ModelKind::Linear) return linear.margin(x);
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict(x);
    if (kind == ModelKind::RandomForest) return trees.empty() ? 0.5 : sum * tree_scale();
    return base_score + sum;
  }
  double margin(const MarkerVector& x) const { return margin(x.values()); }

  Probabilities predict_proba(const FeatureRow& x) const {
    const double m = margin(x);
    const double p1 = kind == ModelKind::RandomForest ? clip_unit(m) : sigmoid(m);
    return {1.0 - p1, p1};
  }
  Probabilities predict_proba(const MarkerVector& x) const { return predict_proba(x.values()); }

  int predict(const FeatureRow& x) const { return predict_proba(x).ai >= 0.5 ? 1 : 0; }
  int predict(const MarkerVector& x) const { return predict(x.values()); }
};

namespace detail {

inline nlohmann::json tree_to_json(const DecisionTree& tree, std::size_t index) {
  const auto& n = tree.nodes[index];
  if (n.is_leaf()) return {{"leaf", n.value}, {"cover", n.cover}};
  return {{"feature", n.feature},
          {"threshold", n.threshold},
          {"cover", n.cover},
          {"gain", n.gain},
          {"children",
           {tree_to_json(tree, static_cast<std::size_t>(n.left)),
            tree_to_json(tree, static_cast<std::size_t>(n.right))}}};
}

inline int tree_from_json(const nlohmann::json& j, DecisionTree& tree) {
  const int index = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  TreeNode node;
  node.cover = j.at("cover").get<double>();
  if (j.contains("leaf")) {
    node.value = j.at("leaf").get<double>();
  } else {
    node.feature = j.at("feature").get<int>();
    if (node.feature < 0 || node.feature >= static_cast<int>(kNumMarkers))
      throw SchemaError("tree split feature out of range");
    node.threshold = j.at("threshold").get<double>();
    node.gain = j.at("gain").get<double>();
    const auto& children = j.at("children");
    if (!children.is_array() || children.size() != 2) throw SchemaError("split node needs two children");
    node.left = tree_from_json(children[0], tree);
    node.right = tree_from_json(children[1], tree);
  }
  tree.nodes[static_cast<std::size_t>(index)] = node;
  return index;
}

}  // namespace detail

inline nlohmann::json model_to_json(const TrainedModel& m) {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["kind"] = std::string(to_string(m.kind));
  j["hyperparameters"] = m.hyperparameters;
  j["class_weight"] = m.class_weight;
  j["seed"] = m.seed;
  j["feature_names"] = kMarkerNames;
  j["training"] = m.training;
  if (m.is_tree_kind()) {
    j["base_score"] = m.base_score;
    auto& trees = j["trees"] = nlohmann::json::array();
    for (const auto& t : m.trees) trees.push_back(detail::tree_to_json(t, 0));
  } else {
    const auto& l = m.linear;
    j["linear"] = {{"means", l.means},         {"sds", l.sds},
                   {"coef", l.coef},           {"intercept", l.intercept},
                   {"converged", l.converged}, {"iterations", l.iterations}};
  }
  return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != kModelFormatVersion)
      throw SchemaError("unsupported model format_version");
    if (j.at("feature_names").get<std::vector<std::string>>() !=
        std::vector<std::string>(kMarkerNames.begin(), kMarkerNames.end()))
      throw SchemaError("model feature_names do not match the marker taxonomy");
    TrainedModel m;
    m.kind = parse_model_kind(j.at("kind").get<std::string>());
    m.hyperparameters = j.at("hyperparameters");
    m.class_weight = j.at("class_weight").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.training = j.value("training", nlohmann::json::object());
    if (m.is_tree_kind()) {
      m.base_score = j.at("base_score").get<double>();
      for (const auto& tj : j.at("trees")) {
        DecisionTree t;
        detail::tree_from_json(tj, t);
        m.trees.push_back(std::move(t));
      }
    } else {
      const auto& l = j.at("linear");
      m.linear.means = l.at("means").get<FeatureRow>();
      m.linear.sds = l.at("sds").get<FeatureRow>();
      m.linear.coef = l.at("coef").get<FeatureRow>();
      m.linear.intercept = l.at("intercept").get<double>();
      m.linear.converged = l.at("converged").get<bool>();
      m.linear.iterations = l.at("iterations").get<std::size_t>();
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("invalid model document: ") + e.what());
  }
}

inline std::string serialize_model(const TrainedModel& m) { return model_to_json(m).dump(1) + "\n"; }

inline TrainedModel parse_model(std::string_view doc) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(doc);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed model file: ") + e.what(), e.byte);
  }
  return model_from_json(j);
}

inline void save_model(const TrainedModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << serialize_model(m);
}

inline TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

// Content hash of the serialized model.
inline std::string model_version(const TrainedModel& m) {
  return std::string(to_string(m.kind)) + "-" + text::hex64(text::fnv1a(serialize_model(m)));
}

}  // namespace revdetect
