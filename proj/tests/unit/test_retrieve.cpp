#include <gtest/gtest.h>

#include <sstream>

#include "revdetect/retrieve.hpp"

using namespace revdetect;

namespace {

Review rev(std::string id, std::string text, Label l) {
  return {std::move(id), std::move(text), l, Source::External, std::nullopt};
}

Dataset two_rows() {
  Dataset d;
  d.reviews.push_back(rev("h", "the experiments are weak and the baselines missing", Label::Human));
  d.reviews.push_back(rev("a", "a comprehensive framework with novel approach overall", Label::AiGenerated));
  return d;
}

EmbeddingVector axis(std::size_t i, double v = 1.0) {
  EmbeddingVector e{};
  e[i] = v;
  return e;
}

}  // namespace

TEST(Normalize, Examples) {
  EmbeddingVector v{};
  v[0] = 3;
  v[1] = 4;
  const auto n = normalize(v);
  EXPECT_DOUBLE_EQ(n[0], 0.6);
  EXPECT_DOUBLE_EQ(n[1], 0.8);
  EXPECT_THROW(normalize(EmbeddingVector{}), DataError);
}

TEST(Encoder, ScaleInvariantAndDeterministic) {
  HashedNgramEncoder enc;
  const auto a = encode("alpha beta gamma", enc);
  EXPECT_EQ(a, encode("alpha beta gamma", enc));
  auto scaled = enc.embed("alpha beta gamma");
  for (auto& x : scaled) x *= 7.0;
  const auto b = normalize(scaled);
  for (std::size_t i = 0; i < kEmbeddingDim; ++i) EXPECT_NEAR(a[i], b[i], 1e-15);
  EXPECT_NEAR(similarity(a, a), 1.0, 1e-12);
  EXPECT_EQ(enc.tag(), "builtin-hashed-ngram-v1");
}

TEST(Encoder, CaseAndPunctuationInsensitive) {
  HashedNgramEncoder enc;
  EXPECT_EQ(encode("Alpha, BETA!", enc), encode("alpha beta", enc));
}

TEST(Similarity, OrthogonalAndOpposite) {
  EXPECT_EQ(similarity(axis(0), axis(1)), 0.0);
  EXPECT_EQ(similarity(axis(0), axis(0, -1.0)), -1.0);
}

TEST(Search, KLargerThanIndex) {
  HashedNgramEncoder enc;
  const auto idx = build_index(two_rows(), enc);
  const auto r = search(idx, "weak experiments", 5, enc);
  ASSERT_EQ(r.neighbors.size(), 2u);
  EXPECT_GE(r.neighbors[0].similarity, r.neighbors[1].similarity);
  EXPECT_EQ(r.neighbors[0].id, "h");
  EXPECT_EQ(r.summary.human_count + r.summary.ai_count, 2u);
  EXPECT_EQ(r.summary.top1_label, Label::Human);
}

TEST(Search, ExcludesExactSelfMatch) {
  HashedNgramEncoder enc;
  const auto d = two_rows();
  const auto idx = build_index(d, enc);
  const auto r = search(idx, d.reviews[0].text + "  \n", 5, enc);
  ASSERT_EQ(r.neighbors.size(), 1u);
  EXPECT_EQ(r.neighbors[0].id, "a");
}

TEST(Search, TiesBreakByRow) {
  EvidenceIndex idx("test");
  for (int i = 0; i < 4; ++i) idx.add(axis(0), {"r" + std::to_string(i), Label::Human, Source::External, std::nullopt, "t" + std::to_string(i), ""});
  const auto r = search_vector(idx, axis(0), "query", 3);
  ASSERT_EQ(r.neighbors.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(r.neighbors[i].row, i);
}

TEST(Search, Errors) {
  HashedNgramEncoder enc;
  EXPECT_THROW(search(EvidenceIndex{}, "x", 3, enc), DataError);
  const auto idx = build_index(two_rows(), enc);
  EXPECT_THROW(search(idx, "x", 0, enc), DataError);
  EXPECT_THROW(build_index(Dataset{}, enc), DataError);
}

TEST(Index, SaveLoadRoundTrip) {
  HashedNgramEncoder enc;
  auto d = two_rows();
  d.reviews[0].paper_id = "p7";
  d.reviews[1].text += "\nwith a second line, \"quotes\" and \xc3\xa9";
  const auto idx = build_index(d, enc);
  std::stringstream ss;
  save_index(idx, ss);
  const auto back = load_index(ss);
  EXPECT_EQ(back, idx);
  EXPECT_EQ(search(back, "novel framework", 2, enc), search(idx, "novel framework", 2, enc));
}

TEST(Index, CorruptFilesRejected) {
  std::stringstream empty;
  EXPECT_THROW(load_index(empty), ParseError);
  std::stringstream bad(R"({"format_version": 2, "dimension": 384, "N": 0, "encoder": "x"})" "\n");
  EXPECT_THROW(load_index(bad), SchemaError);
  HashedNgramEncoder enc;
  std::stringstream ss;
  save_index(build_index(two_rows(), enc), ss);
  const auto full = ss.str();
  std::stringstream truncated(full.substr(0, full.size() / 2));
  EXPECT_ANY_THROW(load_index(truncated));
}

TEST(Index, DisplayTextTruncated) {
  HashedNgramEncoder enc;
  Dataset d;
  d.reviews.push_back(rev("x", std::string(900, 'w'), Label::Human));
  const auto idx = build_index(d, enc);
  EXPECT_EQ(idx.record(0).display_text.size(), kDisplayChars);
  EXPECT_EQ(idx.record(0).text.size(), 900u);
}

TEST(Evaluation, ClusteredVocabularies) {
  HashedNgramEncoder enc;
  Dataset d;
  for (int i = 0; i < 10; ++i) {
    d.reviews.push_back(rev("h" + std::to_string(i), "weak baseline missing ablation unclear proof " + std::to_string(i), Label::Human));
    d.reviews.push_back(rev("a" + std::to_string(i), "comprehensive framework novel approach valuable insights " + std::to_string(i), Label::AiGenerated));
  }
  const auto idx = build_index(d, enc);
  const auto q = sample_queries(d, 4, 1);
  EXPECT_EQ(q.human.size(), 4u);
  const auto ev = evaluate_retrieval(idx, enc, q.human, q.ai, 3);
  EXPECT_EQ(ev.human.top1_accuracy, 1.0);
  EXPECT_EQ(ev.ai.avg_same_class, 3.0);
  EXPECT_EQ(ev.ai.avg_cross_class, 0.0);
  EXPECT_EQ(to_json(ev).at("k"), 3);
  EXPECT_THROW(evaluate_retrieval(idx, enc, {}, q.ai), DataError);
}
