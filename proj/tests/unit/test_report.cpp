#include <gtest/gtest.h>

#include "revdetect/report.hpp"

using namespace revdetect;

namespace {

TrainedModel constant_model(double base) {
  TrainedModel m;
  m.kind = ModelKind::GradientBoosted;
  m.base_score = base;
  return m;
}

Dataset corpus() {
  Dataset d;
  d.reviews.push_back({"h1", "The proof in Section 3 has a gap. I think Table 2 is wrong.", Label::Human, Source::PeerReadIclr, "p1"});
  d.reviews.push_back({"a1", "Summary. A comprehensive framework. Strengths. A novel approach.", Label::AiGenerated,
                       Source::GenReviewNeutral, std::nullopt});
  d.reviews.push_back({"a2", "Summary. Overall a valuable contribution. Weaknesses. Could be improved.", Label::AiGenerated,
                       Source::AdversarialA, std::nullopt});
  return d;
}

// Homogeneity, conceptual and personal absence all score 1 on this text.
const std::string kFlat = "Summary of the work. It is good. It is fine.";

class ThrowingClient : public CompletionClient {
 public:
  std::string complete(const std::string&) override { throw TransportError("refused"); }
};

}  // namespace

TEST(Rules, Confidence) {
  EXPECT_EQ(confidence_level(0.1, 0.9), Level::High);
  EXPECT_EQ(confidence_level(0.9, 0.1), Level::High);
  EXPECT_EQ(confidence_level(0.2, 0.8), Level::Medium);
  EXPECT_EQ(confidence_level(0.35, 0.65), Level::Medium);
  EXPECT_EQ(confidence_level(0.4, 0.6), Level::Low);
}

TEST(Rules, Severity) {
  EXPECT_EQ(severity(0.71), Level::High);
  EXPECT_EQ(severity(0.7), Level::Medium);
  EXPECT_EQ(severity(0.41), Level::Medium);
  EXPECT_EQ(severity(0.4), Level::Low);
}

TEST(Rules, Assessment) {
  EXPECT_EQ(assess(0.85, 3), Assessment::Strong);
  EXPECT_EQ(assess(0.85, 2), Assessment::Moderate);
  EXPECT_EQ(assess(0.8, 5), Assessment::Moderate);
  EXPECT_EQ(assess(0.65, 1), Assessment::Weak);
  EXPECT_EQ(assess(0.45, 0), Assessment::Weak);
  EXPECT_EQ(assess(0.4, 8), Assessment::Human);
  EXPECT_EQ(high_marker_count(MarkerVector({0.71, 0.7, 0.9, 1, 0, 0, 0, 0})), 3u);
  EXPECT_EQ(parse_assessment(to_string(Assessment::Moderate)), Assessment::Moderate);
  EXPECT_THROW(parse_assessment("MAYBE"), SchemaError);
}

TEST(Report, StrongFixture) {
  const auto model = constant_model(3.0);
  HashedNgramEncoder enc;
  const auto idx = build_index(corpus(), enc);
  const ReportContext ctx{&model, &default_lexicon(), &idx, &enc, "", ""};
  const auto r = generate_report(kFlat, ctx);
  EXPECT_EQ(r.predicted_label, Label::AiGenerated);
  EXPECT_EQ(r.confidence, Level::High);
  EXPECT_EQ(r.assessment, Assessment::Strong);
  EXPECT_TRUE(rules_consistent(r));
  EXPECT_TRUE(r.evidence.available);
  EXPECT_EQ(r.evidence.neighbors.size(), 3u);
  EXPECT_EQ(r.provenance.extractor, Provenance::Rule);
  EXPECT_EQ(r.provenance.encoder, enc.tag());
  EXPECT_EQ(r.provenance.review_id, default_review_id(kFlat));
  EXPECT_LE(r.shap.top5.size(), 5u);
}

TEST(Report, HumanFixture) {
  const auto model = constant_model(-3.0);
  const ReportContext ctx{&model, &default_lexicon(), nullptr, nullptr, "", ""};
  const auto r = generate_report(kFlat, ctx);
  EXPECT_EQ(r.assessment, Assessment::Human);
  EXPECT_FALSE(r.evidence.available);
  ASSERT_EQ(r.provenance.warnings.size(), 1u);
  EXPECT_EQ(r.provenance.warnings[0], "evidence index unavailable; evidence section absent");
  EXPECT_NE(render_text(r).find("Not available."), std::string::npos);
}

TEST(Report, DeterministicBytes) {
  const auto model = constant_model(0.4);
  HashedNgramEncoder enc;
  const auto idx = build_index(corpus(), enc);
  const ReportContext ctx{&model, &default_lexicon(), &idx, &enc, "", ""};
  EXPECT_EQ(render_json(generate_report(kFlat, ctx)), render_json(generate_report(kFlat, ctx)));
  EXPECT_EQ(render_text(generate_report(kFlat, ctx)), render_text(generate_report(kFlat, ctx)));
}

TEST(Report, TextHasAllSections) {
  const auto model = constant_model(0.4);
  HashedNgramEncoder enc;
  const auto idx = build_index(corpus(), enc);
  const auto text = render_text(generate_report(kFlat, {&model, &default_lexicon(), &idx, &enc, "", ""}));
  std::size_t last = 0;
  for (auto s : kTextSections) {
    const auto pos = text.find(s);
    ASSERT_NE(pos, std::string::npos) << s;
    EXPECT_GE(pos, last);
    last = pos;
  }
}

TEST(Report, JsonRoundTrip) {
  const auto model = constant_model(1.0);
  HashedNgramEncoder enc;
  const auto idx = build_index(corpus(), enc);
  ReportOptions opt;
  opt.review_id = "r-42";
  opt.k = 2;
  const auto r = generate_report(kFlat, {&model, &default_lexicon(), &idx, &enc, "", ""}, opt);
  EXPECT_EQ(r.evidence.neighbors.size(), 2u);
  const auto back = parse_report(render_json(r));
  EXPECT_EQ(back, r);
  EXPECT_EQ(render_json(back), render_json(r));
  EXPECT_THROW(parse_report("{"), ParseError);
}

TEST(Report, LlmOutageFallsBack) {
  const auto model = constant_model(0.0);
  ThrowingClient client;
  ReportOptions opt;
  opt.llm = &client;
  opt.skip_evidence = true;
  const auto r = generate_report(kFlat, {&model, &default_lexicon(), nullptr, nullptr, "", ""}, opt);
  EXPECT_EQ(r.provenance.extractor, Provenance::RuleFallback);
  EXPECT_EQ(r.marker_vector(), extract_rule_based(kFlat, default_lexicon()));
  EXPECT_EQ(r.provenance.warnings.size(), 2u);
}

TEST(Report, EmptyTextRejected) {
  const auto model = constant_model(0.0);
  EXPECT_THROW(generate_report("  \n", {&model, &default_lexicon(), nullptr, nullptr, "", ""}), DataError);
}
