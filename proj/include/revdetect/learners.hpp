#pragma once

// Cost-sensitive learners over marker vectors: gradient boosting, random
// forest, and an elastic-net logistic baseline.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "revdetect/error.hpp"
#include "revdetect/model.hpp"
#include "revdetect/tree_builder.hpp"

namespace revdetect {

namespace detail {

struct NewtonStats {
  double grad = 0.0;
  double hess = 0.0;
  double weight = 0.0;
  NewtonStats& operator+=(const NewtonStats& o) {
    grad += o.grad;
    hess += o.hess;
    weight += o.weight;
    return *this;
  }
  friend NewtonStats operator-(NewtonStats a, const NewtonStats& b) {
    a.grad -= b.grad;
    a.hess -= b.hess;
    a.weight -= b.weight;
    return a;
  }
};

struct NewtonPolicy {
  using Stats = NewtonStats;
  const std::vector<NewtonStats>* rows;
  double lambda;
  double learning_rate;
  double min_child_weight;

  Stats row_stats(std::size_t r) const { return (*rows)[r]; }
  double score(const Stats& s) const { return 0.5 * s.grad * s.grad / (s.hess + lambda); }
  double leaf_value(const Stats& s) const { return -learning_rate * s.grad / (s.hess + lambda); }
  double weight(const Stats& s) const { return s.weight; }
  bool child_ok(const Stats& s) const { return s.hess >= min_child_weight && s.weight > 0.0; }
};

struct ClassStats {
  double w0 = 0.0;
  double w1 = 0.0;
  ClassStats& operator+=(const ClassStats& o) {
    w0 += o.w0;
    w1 += o.w1;
    return *this;
  }
  friend ClassStats operator-(ClassStats a, const ClassStats& b) {
    a.w0 -= b.w0;
    a.w1 -= b.w1;
    return a;
  }
};

// Weighted Gini: score(S) = -W * gini(S) = (w0^2 + w1^2) / W - W.
struct GiniPolicy {
  using Stats = ClassStats;
  const std::vector<ClassStats>* rows;

  Stats row_stats(std::size_t r) const { return (*rows)[r]; }
  double score(const Stats& s) const {
    const double w = s.w0 + s.w1;
    return w > 0.0 ? (s.w0 * s.w0 + s.w1 * s.w1) / w - w : 0.0;
  }
  double leaf_value(const Stats& s) const {
    const double w = s.w0 + s.w1;
    return w > 0.0 ? s.w1 / w : 0.0;
  }
  double weight(const Stats& s) const { return s.w0 + s.w1; }
  bool child_ok(const Stats& s) const { return s.w0 + s.w1 > 0.0; }
};

inline std::vector<FeatureRow> to_rows(std::span<const MarkerVector> X) {
  std::vector<FeatureRow> rows(X.size());
  for (std::size_t i = 0; i < X.size(); ++i) rows[i] = X[i].values();
  return rows;
}

}  // namespace detail

// Stagewise additive trees minimizing w-weighted logistic loss with Newton
// leaves, shrinkage and per-stage row subsampling. AI rows carry weight w+.
inline TrainedModel fit_gradient_boosting(std::span<const FeatureRow> X, std::span<const int> y,
                                          const BoostingParams& params, double positive_weight,
                                          std::uint64_t seed = 0) {
  check_training_inputs(X, y);
  if (!(params.subsample > 0.0 && params.subsample <= 1.0)) throw DataError("subsample must lie in (0, 1]");
  const auto bins = make_bins(X);
  const auto w = instance_weights(y, positive_weight);

  double wpos = 0.0, wneg = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) (y[i] ? wpos : wneg) += w[i];

  TrainedModel model;
  model.kind = ModelKind::GradientBoosted;
  model.base_score = std::log(wpos / wneg);
  model.hyperparameters = params;
  model.class_weight = positive_weight;
  model.seed = seed;

  std::vector<double> margin(X.size(), model.base_score);
  std::vector<detail::NewtonStats> stats(X.size());
  detail::NewtonPolicy policy{&stats, params.lambda, params.learning_rate, params.min_child_weight};
  GrowOptions options;
  options.max_depth = params.max_depth;
  options.min_samples_split = 2;
  options.min_samples_leaf = 1;

  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(params.subsample);
  for (std::size_t stage = 0; stage < params.n_estimators; ++stage) {
    for (std::size_t i = 0; i < X.size(); ++i) {
      const double p = sigmoid(margin[i]);
      stats[i] = {w[i] * (p - y[i]), w[i] * p * (1.0 - p), w[i]};
    }
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < X.size(); ++i)
      if (params.subsample >= 1.0 || keep(rng)) rows.push_back(i);
    if (rows.empty()) rows.push_back(std::uniform_int_distribution<std::size_t>(0, X.size() - 1)(rng));

    TreeGrower<detail::NewtonPolicy> grower(bins, policy, options);
    auto tree = grower.grow(std::move(rows));
    for (std::size_t i = 0; i < X.size(); ++i) margin[i] += tree.predict(X[i]);
    model.trees.push_back(std::move(tree));
  }
  return model;
}

inline TrainedModel fit_gradient_boosting(std::span<const MarkerVector> X, std::span<const int> y,
                                          const BoostingParams& params, double positive_weight,
                                          std::uint64_t seed = 0) {
  const auto rows = detail::to_rows(X);
  return fit_gradient_boosting(rows, y, params, positive_weight, seed);
}

namespace detail {

inline DecisionTree grow_class_tree(const FeatureBins& bins, std::span<const int> y, std::span<const double> w,
                                    const std::vector<std::size_t>& multiplicity, const ForestParams& params,
                                    std::mt19937_64& rng) {
  std::vector<ClassStats> stats(y.size());
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (multiplicity[i] == 0) continue;
    const double m = static_cast<double>(multiplicity[i]) * w[i];
    stats[i] = y[i] ? ClassStats{0.0, m} : ClassStats{m, 0.0};
    rows.push_back(i);
  }
  GiniPolicy policy{&stats};
  GrowOptions options;
  options.max_depth = params.max_depth;
  options.min_samples_split = std::max<std::size_t>(params.min_samples_split, 2);
  options.min_samples_leaf = std::max<std::size_t>(params.min_samples_leaf, 1);
  options.max_features = params.max_features;
  TreeGrower<GiniPolicy> grower(bins, policy, options, &rng);
  return grower.grow(std::move(rows));
}

}  // namespace detail

// Bootstrap-sampled, feature-subsampled Gini trees; P(AI) is the mean of the
// per-tree class-weighted leaf frequencies.
inline TrainedModel fit_random_forest(std::span<const FeatureRow> X, std::span<const int> y,
                                      const ForestParams& params, double positive_weight, std::uint64_t seed = 0) {
  check_training_inputs(X, y);
  if (params.n_estimators == 0) throw DataError("forest needs at least one tree");
  const auto bins = make_bins(X);
  const auto w = instance_weights(y, positive_weight);

  TrainedModel model;
  model.kind = ModelKind::RandomForest;
  model.hyperparameters = params;
  model.class_weight = positive_weight;
  model.seed = seed;

  for (std::size_t t = 0; t < params.n_estimators; ++t) {
    std::mt19937_64 rng(derive_seed(seed, t));
    std::vector<std::size_t> multiplicity(X.size(), params.bootstrap ? 0 : 1);
    if (params.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, X.size() - 1);
      for (std::size_t k = 0; k < X.size(); ++k) ++multiplicity[pick(rng)];
    }
    model.trees.push_back(detail::grow_class_tree(bins, y, w, multiplicity, params, rng));
  }
  return model;
}

inline TrainedModel fit_random_forest(std::span<const MarkerVector> X, std::span<const int> y,
                                      const ForestParams& params, double positive_weight, std::uint64_t seed = 0) {
  const auto rows = detail::to_rows(X);
  return fit_random_forest(rows, y, params, positive_weight, seed);
}

// Single class-weighted CART tree on all rows and all features.
inline DecisionTree fit_decision_tree(std::span<const FeatureRow> X, std::span<const int> y,
                                      const ForestParams& params, double positive_weight, std::uint64_t seed = 0) {
  check_training_inputs(X, y);
  const auto bins = make_bins(X);
  const auto w = instance_weights(y, positive_weight);
  std::mt19937_64 rng(derive_seed(seed, 0));
  return detail::grow_class_tree(bins, y, w, std::vector<std::size_t>(X.size(), 1), params, rng);
}

// SD floor for zero-variance columns.
inline constexpr double kSdFloor = 1e-12;

namespace detail {

// Largest eigenvalue of a small symmetric PSD matrix by power iteration.
template <std::size_t N>
double max_eigenvalue(const std::array<std::array<double, N>, N>& a) {
  std::array<double, N> v;
  v.fill(1.0 / std::sqrt(static_cast<double>(N)));
  double lambda = 0.0;
  for (int it = 0; it < 1000; ++it) {
    std::array<double, N> next{};
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) next[i] += a[i][j] * v[j];
    double norm = 0.0;
    for (double x : next) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    for (std::size_t i = 0; i < N; ++i) next[i] /= norm;
    const bool settled = std::abs(norm - lambda) <= 1e-12 * norm;
    lambda = norm;
    v = next;
    if (settled) break;
  }
  return lambda;
}

inline double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

}  // namespace detail

// Minimizes sum_i w_i logloss_i + (1/C) [l1_ratio |b|_1 + (1 - l1_ratio)/2 |b|_2^2]
// on z-scored features with accelerated proximal gradient (FISTA). The
// intercept is unpenalized. Stops when no parameter moves by more than `tol`
// or after `max_iter` iterations.
inline TrainedModel fit_logistic_regression(std::span<const FeatureRow> X, std::span<const int> y,
                                            const LinearParams& params, double positive_weight,
                                            std::uint64_t seed = 0) {
  check_training_inputs(X, y);
  if (!(params.C > 0.0)) throw DataError("C must be positive");
  if (!(params.l1_ratio >= 0.0 && params.l1_ratio <= 1.0)) throw DataError("l1_ratio must lie in [0, 1]");
  constexpr std::size_t D = kNumMarkers + 1;  // coefficients then intercept
  const std::size_t n = X.size();
  const auto w = instance_weights(y, positive_weight);

  LinearBlock lin;
  for (std::size_t j = 0; j < kNumMarkers; ++j) {
    double mean = 0.0;
    for (const auto& row : X) mean += row[j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (const auto& row : X) var += (row[j] - mean) * (row[j] - mean);
    lin.means[j] = mean;
    lin.sds[j] = std::max(std::sqrt(var / static_cast<double>(n)), kSdFloor);
  }
  std::vector<std::array<double, D>> Z(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto z = lin.standardize(X[i]);
    for (std::size_t j = 0; j < kNumMarkers; ++j) Z[i][j] = z[j];
    Z[i][kNumMarkers] = 1.0;
  }

  // Lipschitz constant of the smooth part: 0.25 * lambda_max(Z^T W Z).
  std::array<std::array<double, D>, D> gram{};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < D; ++a)
      for (std::size_t b = 0; b < D; ++b) gram[a][b] += w[i] * Z[i][a] * Z[i][b];
  const double lipschitz = 0.25 * detail::max_eigenvalue(gram) * 1.0001 + 1e-12;
  const double step = 1.0 / lipschitz;
  const double l1 = params.l1_ratio / params.C;
  const double l2 = (1.0 - params.l1_ratio) / params.C;

  double wpos = 0.0, wneg = 0.0;
  for (std::size_t i = 0; i < n; ++i) (y[i] ? wpos : wneg) += w[i];

  std::array<double, D> theta{}, momentum{};
  theta[kNumMarkers] = std::log(wpos / wneg);
  momentum = theta;
  double t = 1.0;
  bool converged = false;
  std::size_t it = 0;
  while (it < params.max_iter) {
    ++it;
    std::array<double, D> grad{};
    for (std::size_t i = 0; i < n; ++i) {
      double m = 0.0;
      for (std::size_t a = 0; a < D; ++a) m += momentum[a] * Z[i][a];
      const double r = w[i] * (sigmoid(m) - y[i]);
      for (std::size_t a = 0; a < D; ++a) grad[a] += r * Z[i][a];
    }
    std::array<double, D> next{};
    for (std::size_t a = 0; a < kNumMarkers; ++a)
      next[a] = detail::soft_threshold(momentum[a] - step * grad[a], step * l1) / (1.0 + step * l2);
    next[kNumMarkers] = momentum[kNumMarkers] - step * grad[kNumMarkers];

    double change = 0.0;
    for (std::size_t a = 0; a < D; ++a) change = std::max(change, std::abs(next[a] - theta[a]));
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t a = 0; a < D; ++a) momentum[a] = next[a] + ((t - 1.0) / t_next) * (next[a] - theta[a]);
    theta = next;
    t = t_next;
    if (change <= params.tol) {
      converged = true;
      break;
    }
  }

  for (std::size_t j = 0; j < kNumMarkers; ++j) lin.coef[j] = theta[j];
  lin.intercept = theta[kNumMarkers];
  lin.converged = converged;
  lin.iterations = it;

  TrainedModel model;
  model.kind = ModelKind::Linear;
  model.linear = lin;
  model.hyperparameters = params;
  model.class_weight = positive_weight;
  model.seed = seed;
  return model;
}

inline TrainedModel fit_logistic_regression(std::span<const MarkerVector> X, std::span<const int> y,
                                            const LinearParams& params, double positive_weight,
                                            std::uint64_t seed = 0) {
  const auto rows = detail::to_rows(X);
  return fit_logistic_regression(rows, y, params, positive_weight, seed);
}

}  // namespace revdetect
