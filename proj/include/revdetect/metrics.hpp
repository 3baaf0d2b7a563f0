#pragma once

// Binary classification metrics with AI-generated as the positive class.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include <json.hpp>

#include "revdetect/error.hpp"

namespace revdetect {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

inline Confusion confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.empty()) throw DataError("confusion matrix of an empty set");
  if (y_true.size() != y_pred.size()) throw DataError("label and prediction counts differ");
  Confusion c;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool t = y_true[i] != 0, p = y_pred[i] != 0;
    if (t && p) ++c.tp;
    else if (!t && p) ++c.fp;
    else if (t && !p) ++c.fn;
    else ++c.tn;
  }
  return c;
}

// A ratio whose denominator was zero evaluates to 0 and sets `degenerate`.
struct Ratio {
  double value = 0.0;
  bool degenerate = false;
  operator double() const { return value; }
};

inline Ratio safe_ratio(double num, double den) {
  if (den == 0.0) return {0.0, true};
  return {num / den, false};
}

inline Ratio accuracy(const Confusion& c) {
  return safe_ratio(static_cast<double>(c.tp + c.tn), static_cast<double>(c.total()));
}
inline Ratio precision(const Confusion& c) {
  return safe_ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
}
inline Ratio recall(const Confusion& c) {
  return safe_ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
}
inline Ratio f1(const Confusion& c) {
  const Ratio p = precision(c), r = recall(c);
  Ratio out = safe_ratio(2.0 * p.value * r.value, p.value + r.value);
  out.degenerate = out.degenerate || p.degenerate || r.degenerate;
  return out;
}

struct ErrorRates {
  Ratio fpr;
  Ratio fnr;
};

inline ErrorRates fpr_fnr(const Confusion& c) {
  return {safe_ratio(static_cast<double>(c.fp), static_cast<double>(c.fp + c.tn)),
          safe_ratio(static_cast<double>(c.fn), static_cast<double>(c.fn + c.tp))};
}

// Mann-Whitney AUC; tied scores share their mid-rank.
inline double auc_roc(std::span<const int> y_true, std::span<const double> scores) {
  if (y_true.size() != scores.size()) throw DataError("label and score counts differ");
  if (y_true.empty()) throw DataError("AUC of an empty set");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k)
      if (y_true[order[k]]) {
        rank_sum_pos += mid_rank;
        ++n_pos;
      }
    i = j;
  }
  const std::size_t n_neg = y_true.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DataError("AUC needs both classes");
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

struct EvalReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc_roc = 0.0;
  Confusion confusion;
  double fpr = 0.0;
  double fnr = 0.0;
  bool degenerate = false;
};

inline EvalReport evaluate_confusion(const Confusion& c) {
  EvalReport r;
  r.confusion = c;
  const auto acc = accuracy(c), p = precision(c), rc = recall(c), f = f1(c);
  const auto rates = fpr_fnr(c);
  r.accuracy = acc;
  r.precision = p;
  r.recall = rc;
  r.f1 = f;
  r.fpr = rates.fpr;
  r.fnr = rates.fnr;
  r.degenerate = acc.degenerate || p.degenerate || rc.degenerate || f.degenerate || rates.fpr.degenerate ||
                 rates.fnr.degenerate;
  return r;
}

// Hard labels use P(AI) >= 0.5.
inline EvalReport evaluate_scores(std::span<const int> y_true, std::span<const double> p_ai) {
  std::vector<int> pred(p_ai.size());
  for (std::size_t i = 0; i < p_ai.size(); ++i) pred[i] = p_ai[i] >= 0.5 ? 1 : 0;
  auto r = evaluate_confusion(confusion_matrix(y_true, pred));
  bool both = std::any_of(y_true.begin(), y_true.end(), [](int v) { return v != 0; }) &&
              std::any_of(y_true.begin(), y_true.end(), [](int v) { return v == 0; });
  if (both) r.auc_roc = auc_roc(y_true, p_ai);
  else r.degenerate = true;
  return r;
}

inline nlohmann::json to_json(const EvalReport& r) {
  return {{"accuracy", r.accuracy},
          {"precision", r.precision},
          {"recall", r.recall},
          {"f1", r.f1},
          {"auc_roc", r.auc_roc},
          {"confusion", {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"fn", r.confusion.fn}, {"tn", r.confusion.tn}}},
          {"fpr", r.fpr},
          {"fnr", r.fnr},
          {"degenerate", r.degenerate}};
}

}  // namespace revdetect
