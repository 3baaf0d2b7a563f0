#pragma once

// Stratified k-fold cross-validation and exhaustive AUC grid search.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "revdetect/error.hpp"
#include "revdetect/learners.hpp"
#include "revdetect/metrics.hpp"
#include "revdetect/model.hpp"

namespace revdetect {

// Validation indices of each fold. Each class is shuffled and dealt
// round-robin, so per-class fold sizes differ by at most one.
inline std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> y, std::size_t k,
                                                              std::uint64_t seed) {
  if (k < 2) throw DataError("k-fold needs k >= 2");
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i] ? 1 : 0].push_back(i);
  for (const auto& members : by_class)
    if (members.size() < k) throw DataError("each class needs at least k members for stratified k-fold");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t offset = 0;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t i = 0; i < members.size(); ++i) folds[(offset + i) % k].push_back(members[i]);
    offset += members.size();
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

struct Holdout {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Row-index form of the corpus stratified split: per class (Human first),
// shuffle and send round-half-up(fraction * class size) rows to test.
inline Holdout stratified_holdout(std::span<const int> y, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw DataError("test_fraction must lie in (0, 1)");
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i] ? 1 : 0].push_back(i);
  for (const auto& members : by_class)
    if (members.size() < 2) throw DataError("each class needs at least 2 rows to split");
  std::mt19937_64 rng(seed);
  std::vector<char> in_test(y.size(), 0);
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    const auto n_test = std::min(static_cast<std::size_t>(std::floor(test_fraction * members.size() + 0.5)),
                                 members.size());
    for (std::size_t k = 0; k < n_test; ++k) in_test[members[k]] = 1;
  }
  Holdout h;
  for (std::size_t i = 0; i < y.size(); ++i) (in_test[i] ? h.test : h.train).push_back(i);
  return h;
}

enum class Family { GradientBoosted, RandomForest, Linear };

inline Family parse_family(std::string_view s) {
  if (s == "boosted" || s == "gbm" || s == "GradientBoosted") return Family::GradientBoosted;
  if (s == "forest" || s == "rf" || s == "RandomForest") return Family::RandomForest;
  if (s == "linear" || s == "lr" || s == "Linear") return Family::Linear;
  throw DataError("unknown model family '" + std::string(s) + "'");
}

// Search spaces, enumerated with the first hyperparameter outermost.
inline std::vector<BoostingParams> boosting_grid() {
  std::vector<BoostingParams> grid;
  for (std::size_t n : {100, 200})
    for (std::size_t d : {3, 5, 7})
      for (double lr : {0.05, 0.1})
        for (double ss : {0.8, 1.0}) {
          BoostingParams p;
          p.n_estimators = n;
          p.max_depth = d;
          p.learning_rate = lr;
          p.subsample = ss;
          grid.push_back(p);
        }
  return grid;
}

inline std::vector<ForestParams> forest_grid() {
  std::vector<ForestParams> grid;
  const std::array<std::optional<std::size_t>, 4> depths{3, 5, 7, std::nullopt};
  for (std::size_t n : {100, 200, 300})
    for (auto d : depths)
      for (std::size_t split : {2, 5})
        for (std::size_t leaf : {1, 2}) {
          ForestParams p;
          p.n_estimators = n;
          p.max_depth = d;
          p.min_samples_split = split;
          p.min_samples_leaf = leaf;
          grid.push_back(p);
        }
  return grid;
}

inline std::vector<LinearParams> linear_grid() {
  std::vector<LinearParams> grid;
  for (double c : {0.01, 0.1, 1.0, 10.0, 100.0})
    for (double l1 : {0.0, 0.5, 1.0}) {
      LinearParams p;
      p.C = c;
      p.l1_ratio = l1;
      grid.push_back(p);
    }
  return grid;
}

inline TrainedModel fit_family(std::span<const FeatureRow> X, std::span<const int> y, const nlohmann::json& params,
                               Family family, double positive_weight, std::uint64_t seed) {
  switch (family) {
    case Family::GradientBoosted:
      return fit_gradient_boosting(X, y, params.get<BoostingParams>(), positive_weight, seed);
    case Family::RandomForest:
      return fit_random_forest(X, y, params.get<ForestParams>(), positive_weight, seed);
    case Family::Linear:
      return fit_logistic_regression(X, y, params.get<LinearParams>(), positive_weight, seed);
  }
  throw DataError("unknown family");
}

struct GridCell {
  nlohmann::json params;
  std::vector<double> fold_auc;
  double mean_auc = 0.0;
};

struct GridSearchResult {
  std::vector<GridCell> cells;
  std::size_t best = 0;
  const nlohmann::json& best_params() const { return cells[best].params; }
  double best_auc() const { return cells[best].mean_auc; }
};

// Each cell's score is the mean validation AUC over the folds; w+ is
// recomputed on each fold's training part. Ties keep the earliest cell.
inline GridSearchResult grid_search(Family family, const std::vector<nlohmann::json>& grid,
                                    std::span<const FeatureRow> X, std::span<const int> y, std::size_t k,
                                    std::uint64_t seed, std::size_t threads = 1) {
  if (grid.empty()) throw DataError("empty hyperparameter grid");
  check_training_inputs(X, y);
  const auto folds = stratified_kfold(y, k, seed);

  struct FoldData {
    std::vector<FeatureRow> X_train, X_val;
    std::vector<int> y_train, y_val;
    double w_pos = 1.0;
  };
  std::vector<FoldData> fold_data(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<char> in_val(X.size(), 0);
    for (auto i : folds[f]) in_val[i] = 1;
    auto& fd = fold_data[f];
    for (std::size_t i = 0; i < X.size(); ++i) {
      if (in_val[i]) {
        fd.X_val.push_back(X[i]);
        fd.y_val.push_back(y[i]);
      } else {
        fd.X_train.push_back(X[i]);
        fd.y_train.push_back(y[i]);
      }
    }
    fd.w_pos = compute_class_weight(fd.y_train);
  }

  GridSearchResult result;
  result.cells.resize(grid.size());
  auto run_cell = [&](std::size_t c) {
    GridCell cell;
    cell.params = grid[c];
    for (std::size_t f = 0; f < k; ++f) {
      const auto& fd = fold_data[f];
      const auto model = fit_family(fd.X_train, fd.y_train, grid[c], family, fd.w_pos, seed);
      std::vector<double> scores(fd.X_val.size());
      for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = model.margin(fd.X_val[i]);
      cell.fold_auc.push_back(auc_roc(fd.y_val, scores));
    }
    double sum = 0.0;
    for (double a : cell.fold_auc) sum += a;
    cell.mean_auc = sum / static_cast<double>(k);
    result.cells[c] = std::move(cell);
  };

  threads = std::max<std::size_t>(1, std::min(threads, grid.size()));
  if (threads == 1) {
    for (std::size_t c = 0; c < grid.size(); ++c) run_cell(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < grid.size(); c = next++) run_cell(c);
      });
  }

  for (std::size_t c = 1; c < result.cells.size(); ++c)
    if (result.cells[c].mean_auc > result.cells[result.best].mean_auc) result.best = c;
  return result;
}

template <class Params>
std::vector<nlohmann::json> to_json_grid(const std::vector<Params>& grid) {
  std::vector<nlohmann::json> out;
  for (const auto& p : grid) out.emplace_back(p);
  return out;
}

inline std::vector<nlohmann::json> default_grid(Family family) {
  switch (family) {
    case Family::GradientBoosted: return to_json_grid(boosting_grid());
    case Family::RandomForest: return to_json_grid(forest_grid());
    case Family::Linear: return to_json_grid(linear_grid());
  }
  return {};
}

}  // namespace revdetect
