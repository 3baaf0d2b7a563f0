// Acceptance suite: one PASS/FAIL/SKIP line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "revdetect/features.hpp"
#include "revdetect/revdetect.hpp"

namespace fs = std::filesystem;
using namespace revdetect;

namespace {

struct Skip {
  std::string why;
};

// Collects failed checks; a criterion passes when none failed.
struct Check {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
    if (!ok) ++failed;
  }
  std::size_t failed = 0;
};

std::string num(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

double round4(double v) { return std::round(v * 1e4) / 1e4; }

fs::path temp_dir() {
  auto dir = fs::temp_directory_path() / ("revdetect-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

// --- 1 ---------------------------------------------------------------------

void ac1(Check& c) {
  struct Row {
    Confusion cm;
    std::vector<std::pair<const char*, double>> expected;
  };
  const std::vector<Row> rows{
      {{595, 4, 5, 1728},
       {{"accuracy", 0.9961}, {"precision", 0.9933}, {"recall", 0.9917}, {"f1", 0.9925}, {"fpr", 0.0023},
        {"fnr", 0.0083}}},
      {{577, 211, 23, 1521}, {{"precision", 0.7322}, {"recall", 0.9617}, {"f1", 0.8314}, {"fpr", 0.1218}}},
  };
  for (const auto& row : rows) {
    const auto r = evaluate_confusion(row.cm);
    for (const auto& [name, want] : row.expected) {
      const std::string n = name;
      const double got = n == "accuracy" ? r.accuracy
                         : n == "precision" ? r.precision
                         : n == "recall"    ? r.recall
                         : n == "f1"        ? r.f1
                         : n == "fpr"       ? r.fpr
                                            : r.fnr;
      c.expect(std::abs(round4(got) - want) <= 5e-5, n + " = " + num(got) + ", want " + num(want));
    }
  }
}

// --- 2 ---------------------------------------------------------------------

synthetic::Sample random_problem(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  synthetic::Sample s;
  std::array<double, kNumMarkers> w;
  for (auto& v : w) v = u(rng) * 2.0 - 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    FeatureRow x;
    double z = 0.0;
    for (std::size_t j = 0; j < kNumMarkers; ++j) {
      x[j] = u(rng);
      z += w[j] * (x[j] - 0.5);
    }
    z += 0.3 * std::sin(6.0 * x[0] * x[1]);
    s.X.push_back(x);
    s.y.push_back(u(rng) < sigmoid(4.0 * z) ? 1 : 0);
  }
  s.y[0] = 0;
  s.y[1] = 1;
  return s;
}

void ac2(Check& c) {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_dev = 0.0, worst_local = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto data = random_problem(rng, 150);
    const double wp = compute_class_weight(data.y);
    const std::size_t trees = 1 + rng() % 20, depth = 1 + rng() % 5;
    TrainedModel m;
    if (trial % 2 == 0) {
      BoostingParams p;
      p.n_estimators = trees;
      p.max_depth = depth;
      p.learning_rate = 0.05 + 0.3 * u(rng);
      p.subsample = trial % 4 == 0 ? 0.8 : 1.0;
      m = fit_gradient_boosting(data.X, data.y, p, wp, trial);
    } else {
      ForestParams p;
      p.n_estimators = trees;
      p.max_depth = depth;
      m = fit_random_forest(data.X, data.y, p, wp, trial);
    }
    FeatureRow x;
    for (auto& v : x) v = u(rng);
    const auto fast = tree_shap(m, x);
    const auto slow = shapley_bruteforce(m, x);
    for (std::size_t j = 0; j < kNumMarkers; ++j) worst_dev = std::max(worst_dev, std::abs(fast.values[j] - slow[j]));
    worst_local = std::max(worst_local, std::abs(fast.total() - m.margin(x)));
  }
  c.expect(worst_dev <= 1e-9, "max |tree_shap - bruteforce| = " + num(worst_dev));
  c.expect(worst_local <= 1e-9, "max local accuracy error = " + num(worst_local));
}

// --- 3 ---------------------------------------------------------------------

void ac3(Check& c) {
  const auto& lex = default_lexicon();
  auto eq = [&](double got, double want, const std::string& what, double tol = 0.0) {
    c.expect(std::abs(got - want) <= tol, what + ": got " + num(got, 17) + ", want " + num(want, 17));
  };
  eq(score_structure("Summary: a.\nStrengths: b.\nWeaknesses: c.", lex), 0.6, "structure 3/5");
  eq(score_structure("No headings here at all.", lex), 0.0, "structure none");
  eq(score_structure("Summary: a\nStrengths: b\nWeaknesses: c\nQuestions: d\nLimitations: e\nClarity: f", lex), 1.0,
     "structure saturates");
  eq(score_criticism("An ablation study and a stronger baseline are needed.", lex), 0.5, "criticism 2/4");
  eq(score_criticism("Nothing formulaic.", lex), 0.0, "criticism none");
  eq(score_criticism("ablation study, stronger baseline, more experiments, theoretical analysis, computational cost",
                     lex),
     1.0, "criticism saturates");
  eq(score_balance("The method would benefit from tuning.", lex), 1.0 / 3.0, "balance 1/3", 1e-9);
  eq(score_balance("Plain.", lex), 0.0, "balance none");
  eq(score_balance("That being said, it is commendable and would benefit from more.", lex), 1.0, "balance saturates");
  eq(homogeneity_from_lengths({10, 10, 10}), 1.0, "homogeneity equal lengths");
  eq(homogeneity_from_lengths({5, 15}), 0.5, "homogeneity [5,15]", 1e-9);
  eq(score_homogeneity("Only one sentence here."), 1.0, "homogeneity single sentence");
  eq(score_homogeneity(""), 1.0, "homogeneity empty");
  eq(score_generic("A novel approach.", lex), 0.25, "generic 1/4");
  eq(score_generic("Plain.", lex), 0.0, "generic none");
  eq(score_generic("novel approach, promising results, extensive experiments, valuable insights", lex), 1.0,
     "generic saturates");
  eq(score_conceptual("The argument is unclear.", lex), 1.0, "zero references");
  eq(score_conceptual("see Figure 3 and Table 2", lex), 0.6, "two references");
  eq(score_conceptual("line 3, page 4, figure 5, table 6, equation 7", lex), 0.0, "references saturate");
  eq(score_personal_absence("Solid paper.", lex), 1.0, "personal none");
  eq(score_personal_absence("I think this works.", lex), 2.0 / 3.0, "personal 1/3", 1e-9);
  eq(score_personal_absence("I think it works, I believe it, and I feel sure.", lex), 0.0, "personal saturates");
  eq(score_repetition("alpha beta gamma delta epsilon"), 0.0, "repetition all unique");
  eq(repetition_from_counts(8, 10), 0.6, "repetition u = 0.8");
  eq(score_repetition("a b c a b c a b c a b c"), 1.0, "repetition saturates");

  const auto empty = extract_rule_based("", lex);
  const std::array<double, kNumMarkers> want_empty{0, 0, 0, 1, 0, 1, 1, 0};
  c.expect(empty.values() == want_empty, "empty text vector");

  const std::string repeated = "Summary: the paper would benefit from an ablation study.\n";
  std::string fixture = repeated;
  fixture +=
      "Strengths: that being said, a novel approach, promising results.\n"
      "Weaknesses: it is commendable but needs a stronger baseline.\n"
      "Questions: what about the extensive experiments with valuable insights.\n"
      "Limitations: it needs more experiments and theoretical analysis here.\n";
  for (int i = 0; i < 5; ++i) fixture += repeated;
  const auto full = extract_rule_based(fixture, lex);
  for (std::size_t j = 0; j < kNumMarkers; ++j)
    c.expect(full[j] == 1.0, std::string("all-ones fixture, ") + std::string(kMarkerNames[j]) + " = " + num(full[j]));

  std::mt19937_64 rng(7);
  const std::string alphabet = "abcdefghij .!?\n:*#-0123456789ABCDEF() \xc3\xa9";
  const std::vector<std::string> words{"summary:", "I think", "Figure 2", "ablation study", "novel approach",
                                       "that being said", "table 1", "the", "the", "the"};
  for (int i = 0; i < 10000; ++i) {
    std::string s;
    const std::size_t len = rng() % 200;
    for (std::size_t k = 0; k < len; ++k) {
      if (rng() % 6 == 0) s += words[rng() % words.size()] + " ";
      else s += alphabet[rng() % alphabet.size()];
    }
    const auto v = extract_rule_based(s, lex);
    for (double x : v.values()) c.expect(x >= 0.0 && x <= 1.0, "fuzz value out of range on: " + s);
  }
}

// --- 4 ---------------------------------------------------------------------

void ac4(Check& c) {
  const auto data = synthetic::generate(1485, 515, 4242);
  const auto h = stratified_holdout(data.y, 0.3, 4242);
  std::vector<FeatureRow> Xtr, Xte;
  std::vector<int> ytr, yte;
  for (auto i : h.train) Xtr.push_back(data.X[i]), ytr.push_back(data.y[i]);
  for (auto i : h.test) Xte.push_back(data.X[i]), yte.push_back(data.y[i]);
  const double wp = compute_class_weight(ytr);
  auto test_auc = [&](const TrainedModel& m) {
    std::vector<double> s;
    for (const auto& x : Xte) s.push_back(m.predict_proba(x).ai);
    return auc_roc(yte, s);
  };
  LinearParams lp;
  lp.l1_ratio = 0.0;
  const double gbm = test_auc(fit_gradient_boosting(Xtr, ytr, BoostingParams{}, wp, 1));
  const double rf = test_auc(fit_random_forest(Xtr, ytr, ForestParams{}, wp, 1));
  const double lin = test_auc(fit_logistic_regression(Xtr, ytr, lp, wp, 1));
  std::cout << "    test AUC: boosted " << num(gbm, 5) << ", forest " << num(rf, 5) << ", linear " << num(lin, 5)
            << "\n";
  c.expect(gbm >= 0.99, "boosted AUC " + num(gbm));
  c.expect(rf >= 0.99, "forest AUC " + num(rf));
  c.expect(lin < gbm && lin < rf, "linear AUC " + num(lin) + " not below both ensembles");
}

// --- 5 ---------------------------------------------------------------------

void ac5(Check& c) {
  std::mt19937_64 rng(55);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + rng() % 5000;
    std::vector<int> y(n);
    const double p = 0.05 + 0.9 * std::uniform_real_distribution<double>(0, 1)(rng);
    for (auto& v : y) v = std::uniform_real_distribution<double>(0, 1)(rng) < p;
    y[0] = 0;
    y[1] = 1;
    const auto w = instance_weights(y, compute_class_weight(y));
    double ai = 0.0, human = 0.0;
    for (std::size_t i = 0; i < n; ++i) (y[i] ? ai : human) += w[i];
    c.expect(std::abs(ai - human) <= 1e-12 * human, "split " + std::to_string(t) + ": AI " + num(ai, 17) +
                                                         " vs Human " + num(human, 17));
  }
  std::vector<int> corpus(5772, 0);
  corpus.insert(corpus.end(), 2000, 1);
  const double w = compute_class_weight(corpus);
  c.expect(std::abs(w - 2.886) <= 1e-9, "corpus w+ = " + num(w, 17));
}

// --- 6 ---------------------------------------------------------------------

std::vector<std::size_t> brute_force(const EvidenceIndex& idx, const EmbeddingVector& q, const std::string& text,
                                     std::size_t k) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t r = 0; r < idx.size(); ++r) {
    double s = 0.0;
    for (std::size_t d = 0; d < kEmbeddingDim; ++d) s += q[d] * idx.row(r)[d];
    all.emplace_back(s, r);
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < all.size() && i < k + 1 && out.size() < k; ++i)
    if (!same_text(idx.record(all[i].second).text, text)) out.push_back(all[i].second);
  return out;
}

void ac6(Check& c) {
  std::mt19937_64 rng(66);
  std::size_t self_checks = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng() % 512;
    EvidenceIndex idx("test");
    std::vector<EmbeddingVector> vecs;
    std::vector<std::string> texts;
    for (std::size_t r = 0; r < n; ++r) {
      EmbeddingVector v;
      if (r > 0 && rng() % 8 == 0) {
        v = vecs[rng() % r];  // duplicate vector: exercises the tie-break
      } else {
        for (auto& x : v) x = static_cast<double>(static_cast<int>(rng() % 5) - 2);
        v[rng() % kEmbeddingDim] += 3.0;
        v = normalize(v);
      }
      vecs.push_back(v);
      texts.push_back("doc " + std::to_string(rng() % (n + 3)));
      idx.add(v, {"r" + std::to_string(r), rng() % 2 ? Label::AiGenerated : Label::Human, Source::External,
                  std::nullopt, texts.back(), texts.back()});
    }
    const std::size_t k = 1 + rng() % 10;
    EmbeddingVector q;
    std::string qtext;
    if (rng() % 2) {
      const auto r = rng() % n;
      q = vecs[r];
      qtext = texts[r] + "  ";
    } else {
      for (auto& x : q) x = static_cast<double>(static_cast<int>(rng() % 5) - 2);
      q[0] += 1.0;
      q = normalize(q);
      qtext = "query " + std::to_string(t);
    }
    const auto got = search_vector(idx, q, qtext, k);
    std::vector<std::size_t> rows;
    for (const auto& nb : got.neighbors) rows.push_back(nb.row);
    c.expect(rows == brute_force(idx, q, qtext, k), "corpus " + std::to_string(t) + ": ranking differs");
    bool in_index = std::any_of(texts.begin(), texts.end(), [&](const auto& s) { return same_text(s, qtext); });
    if (in_index) {
      ++self_checks;
      for (const auto& nb : got.neighbors)
        c.expect(!same_text(idx.record(nb.row).text, qtext), "corpus " + std::to_string(t) + ": self match returned");
    }
  }
  c.expect(self_checks > 100, "too few self-match cases exercised: " + std::to_string(self_checks));
}

// --- 7 ---------------------------------------------------------------------

std::string cluster_text(std::mt19937_64& rng, const std::vector<std::string>& vocab) {
  std::string s;
  const std::size_t len = 30 + rng() % 30;
  for (std::size_t i = 0; i < len; ++i) s += vocab[rng() % vocab.size()] + (i + 1 < len ? " " : ".");
  return s;
}

void ac7(Check& c) {
  std::vector<std::string> human_vocab, ai_vocab;
  for (int i = 0; i < 12; ++i) {
    human_vocab.push_back("hum" + std::to_string(i) + "word");
    ai_vocab.push_back("gen" + std::to_string(i) + "term");
  }
  std::mt19937_64 rng(77);
  Dataset data;
  for (int i = 0; i < 60; ++i) {
    data.reviews.push_back({"h" + std::to_string(i), cluster_text(rng, human_vocab), Label::Human, Source::External, {}});
    data.reviews.push_back(
        {"a" + std::to_string(i), cluster_text(rng, ai_vocab), Label::AiGenerated, Source::External, {}});
  }
  HashedNgramEncoder enc;
  const auto idx = build_index(data, enc);
  const auto q = sample_queries(data, 20, 7);
  const auto ev = evaluate_retrieval(idx, enc, q.human, q.ai, 5);
  std::cout << "    " << to_json(ev).dump() << "\n";
  for (const auto* s : {&ev.human, &ev.ai}) {
    c.expect(s->top1_accuracy == 1.0, "top-1 accuracy " + num(s->top1_accuracy));
    c.expect(s->avg_same_class == 5.0, "avg same-class " + num(s->avg_same_class));
    c.expect(s->avg_cross_class == 0.0, "avg cross-class " + num(s->avg_cross_class));
    c.expect(s->mean_topk_similarity > 0.0 && s->mean_topk_similarity <= 1.0 + 1e-12, "mean top-k similarity");
    c.expect(s->mean_top1_similarity >= s->mean_topk_similarity, "top-1 similarity below top-k mean");
    c.expect(s->queries == 20, "query count");
  }
}

// --- 8 ---------------------------------------------------------------------

void ac8(Check& c) {
  for (double p1 : {0.0, 0.4, 0.41, 0.6, 0.61, 0.8, 0.81, 1.0}) {
    for (std::size_t n = 0; n <= 8; ++n) {
      Assessment want = Assessment::Human;
      if (p1 > 0.8 && n >= 3) want = Assessment::Strong;
      else if (p1 > 0.6 && n >= 2) want = Assessment::Moderate;
      else if (p1 > 0.4) want = Assessment::Weak;
      c.expect(assess(p1, n) == want, "assess(" + num(p1) + ", " + std::to_string(n) + ")");

      std::array<double, kNumMarkers> x{};
      for (std::size_t j = 0; j < kNumMarkers; ++j) x[j] = j < n ? 0.71 : 0.7;
      c.expect(high_marker_count(MarkerVector(x)) == n, "high marker count");
    }
    const double m = std::max(p1, 1.0 - p1);
    const Level want = m > 0.8 ? Level::High : m > 0.6 ? Level::Medium : Level::Low;
    c.expect(confidence_level(1.0 - p1, p1) == want, "confidence at P1 = " + num(p1));
  }
  c.expect(assess(0.8, 3) == Assessment::Moderate, "P1 = 0.8 with 3 high markers");
  c.expect(assess(0.85, 3) == Assessment::Strong, "(0.85, 3)");
  c.expect(assess(0.7, 2) == Assessment::Moderate, "(0.7, 2)");
  c.expect(assess(0.85, 1) == Assessment::Weak, "(0.85, 1)");
  c.expect(assess(0.3, 8) == Assessment::Human, "(0.3, 8)");
  c.expect(confidence_level(0.15, 0.85) == Level::High, "confidence 0.85");
  c.expect(confidence_level(0.35, 0.65) == Level::Medium, "confidence 0.65");
  c.expect(confidence_level(0.45, 0.55) == Level::Low, "confidence 0.55");
  c.expect(severity(0.75) == Level::High, "severity 0.75");
  c.expect(severity(0.5) == Level::Medium, "severity 0.5");
  c.expect(severity(0.4) == Level::Low, "severity 0.4");
  c.expect(severity(0.7) == Level::Medium, "severity 0.7");
}

// --- 9 ---------------------------------------------------------------------

void ac9(Check& c) {
  const auto dir = temp_dir();
  const auto data = synthetic::generate(300, 100, 99);
  const double wp = compute_class_weight(data.y);
  BoostingParams bp;
  bp.subsample = 0.8;
  ForestParams fp;
  fp.n_estimators = 30;
  LinearParams lp;
  const std::vector<TrainedModel> models{fit_gradient_boosting(data.X, data.y, bp, wp, 3),
                                         fit_random_forest(data.X, data.y, fp, wp, 3),
                                         fit_logistic_regression(data.X, data.y, lp, wp, 3)};
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& m : models) {
    const auto path = dir / ("model-" + std::string(to_string(m.kind)) + ".json");
    save_model(m, path);
    const auto back = load_model(path);
    c.expect(serialize_model(back) == serialize_model(m), "model file not stable on resave");
    for (int i = 0; i < 100; ++i) {
      FeatureRow x;
      for (auto& v : x) v = u(rng);
      c.expect(back.predict_proba(x).ai == m.predict_proba(x).ai, "prediction differs after reload");
      c.expect(explain(back, x).values == explain(m, x).values, "SHAP differs after reload");
    }
  }

  std::vector<std::string> vocab;
  for (int i = 0; i < 200; ++i) vocab.push_back("w" + std::to_string(i));
  Dataset corpus;
  for (int i = 0; i < 300; ++i)
    corpus.reviews.push_back({"d" + std::to_string(i), cluster_text(rng, vocab),
                              i % 3 ? Label::Human : Label::AiGenerated, Source::GenReviewNeutral,
                              i % 2 ? std::optional<std::string>("p" + std::to_string(i)) : std::nullopt});
  HashedNgramEncoder enc;
  const auto idx = build_index(corpus, enc);
  const auto ipath = dir / "index.bin";
  save_index(idx, ipath);
  const auto idx2 = load_index(ipath);
  c.expect(idx2 == idx, "index differs after reload");
  for (int i = 0; i < 100; ++i) {
    const auto q = i % 4 == 0 ? corpus.reviews[rng() % corpus.size()].text : cluster_text(rng, vocab);
    c.expect(search(idx2, q, 5, enc) == search(idx, q, 5, enc), "search differs after reload");
  }

  ReportContext ctx{&models[0], &default_lexicon(), &idx, &enc, "", ""};
  for (int i = 0; i < 20; ++i) {
    const auto report = generate_report(cluster_text(rng, vocab), ctx);
    const auto doc = render_json(report);
    const auto parsed = parse_report(doc);
    c.expect(parsed == report, "report render/parse is not the identity");
    c.expect(render_json(parsed) == doc, "report JSON not byte-stable");
    c.expect(rules_consistent(report), "report rules inconsistent");
  }
  fs::remove_all(dir);
}

// --- 10 --------------------------------------------------------------------

void ac10(Check& c) {
  const char* features = std::getenv("REVDETECT_CORPUS_FEATURES");
  if (!features || !fs::exists(features))
    throw Skip{"set REVDETECT_CORPUS_FEATURES to the extracted corpus feature CSV"};
  const auto t = to_training_set(load_features_csv(fs::path(features)));
  const auto h = stratified_holdout(t.y, 0.3, 42);
  std::vector<FeatureRow> Xtr, Xte;
  std::vector<int> ytr, yte;
  for (auto i : h.train) Xtr.push_back(t.X[i]), ytr.push_back(t.y[i]);
  for (auto i : h.test) Xte.push_back(t.X[i]), yte.push_back(t.y[i]);
  const auto search = grid_search(Family::GradientBoosted, default_grid(Family::GradientBoosted), Xtr, ytr, 5, 42);
  const auto model = fit_family(Xtr, ytr, search.best_params(), Family::GradientBoosted, compute_class_weight(ytr), 42);
  std::vector<double> p;
  for (const auto& x : Xte) p.push_back(model.predict_proba(x).ai);
  const auto r = evaluate_scores(yte, p);
  std::cout << "    corpus test accuracy " << num(r.accuracy, 5) << "\n";
  c.expect(std::abs(r.accuracy - 0.9961) <= 0.005, "accuracy " + num(r.accuracy) + " outside 0.9961 +/- 0.005");
  const auto gi = global_importance(model, Xte);
  std::array<std::size_t, kNumMarkers> order;
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return gi.mean_abs_shap[a] > gi.mean_abs_shap[b]; });
  c.expect(order[0] == 6 && order[1] == 7, "top-2 importance is not x7 then x8");
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<void(Check&)> run;
  };
  const std::vector<Criterion> criteria{
      {1, "metric identity vs published confusion matrices", 1, ac1},
      {2, "TreeSHAP equals brute-force Shapley values", 30, ac2},
      {3, "marker endpoint suite and fuzz", 30, ac3},
      {4, "desk-scale separability and ensemble-vs-linear ordering", 120, ac4},
      {5, "class-weight contract", 5, ac5},
      {6, "retrieval exactness and self-match exclusion", 60, ac6},
      {7, "retrieval evaluation harness", 30, ac7},
      {8, "report rule suite", 1, ac8},
      {9, "persistence round-trips", 60, ac9},
      {10, "full-corpus parity", 1800, ac10},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Check c;
    const auto start = std::chrono::steady_clock::now();
    std::string status, detail;
    try {
      cr.run(c);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (secs > cr.limit_s) c.expect(false, "runtime " + num(secs, 3) + " s over the " + num(cr.limit_s) + " s limit");
      status = c.failed ? "FAIL" : "PASS";
      for (const auto& f : c.failures) detail += "\n    " + f;
    } catch (const Skip& s) {
      status = "SKIP";
      detail = " (" + s.why + ")";
    } catch (const std::exception& e) {
      status = "FAIL";
      detail = std::string("\n    exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "AC" << cr.id << " " << status << " " << cr.name << " [" << num(secs, 3) << " s]" << detail << "\n"
              << std::flush;
    if (status == "FAIL") ++failed;
  }
  return failed ? 1 : 0;
}
